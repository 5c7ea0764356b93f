#pragma once

#include <string>
#include <vector>

#include "cfisac/channel/sensing.hpp"

namespace cfisac::metrics {

enum class Regime { sc, cc, joint };

std::string to_string(Regime r);
/// Accepts "sc", "cc", "joint"; throws std::invalid_argument otherwise.
Regime parse_regime(const std::string& s);

struct RegimeSpec {
  Regime kind = Regime::joint;
  double eta = 0.5;
  bool beta_C = true;  // communication-rate constraints active
  bool beta_S = true;  // sensing-rate constraints active
  double vartheta_th = 0.0;
  double zeta_th = 0.0;
  double kappa = 1.0;

  static RegimeSpec sensing_centric(double vartheta_th, double kappa);
  static RegimeSpec communication_centric(double zeta_th, double kappa);
  static RegimeSpec joint(double eta, double kappa);
  /// Throws unless the (eta, beta_C, beta_S) triple matches the regime kind.
  void validate() const;
};

/// SINR of user k (0-based; served by column k + 1 of W, column 0 is the sensing stream).
double sinr_user(const std::vector<CVec>& f, const CMat& W, int k);
std::vector<double> sinr_all(const std::vector<CVec>& f, const CMat& W);

double comm_rate(double sinr, double kappa);

/// sum_k ||G_t w_k||^2 / (sum_c sum_k ||G_c w_k||^2 + M_R).
double scnr_rap(const CMat& G_t, const std::vector<CMat>& G_c, const CMat& W, int M_R);
std::vector<double> scnr_all(const channel::SensingResponse& s, const CMat& W);

double sensing_rate(double scnr, double kappa);

/// eta sum_k log2(1 + sinr_k) + (1 - eta) sum_j log2(1 + scnr_j).
double objective(const RegimeSpec& regime, const std::vector<double>& sinr, const std::vector<double>& scnr);

struct Rates {
  std::vector<double> sinr, scnr, R_C, R_S;
  double sum_R_C = 0.0;
  double sum_R_S = 0.0;
};

Rates evaluate(const std::vector<CVec>& f, const channel::SensingResponse& s, const CMat& W, double kappa);

struct ConstraintReport {
  bool feasible = true;
  std::vector<double> comm_violation;     // max(0, vartheta_th - R_C,k) when beta_C
  std::vector<double> sensing_violation;  // max(0, zeta_th - R_S,j) when beta_S
  double power_slack = 0.0;               // rho N_T - ||W||_F^2
  double max_violation = 0.0;             // largest rate violation, bps/Hz
  double mean_violation = 0.0;            // over the active rate constraints
};

/// A sample is feasible when no rate violation exceeds `tol` and power slack >= -1e-9.
ConstraintReport check_constraints(const RegimeSpec& regime, const Rates& rates, const CMat& W, double rho, int N_T,
                                   double tol = 0.0);

}  // namespace cfisac::metrics
