#pragma once

#include <vector>

#include "cfisac/channel/sensing.hpp"
#include "cfisac/metrics/metrics.hpp"

// Beamforming on the complex sphere. V stacks W / sqrt(P) over one auxiliary row z and
// lives on Tr(V V^H) = 1, so every point maps back to a power-feasible W.
//
// The sum-log objective is handled by the Lagrangian dual transform: for fixed auxiliary
// mu the rate terms become mu_hat * gamma / (1 + gamma). One routine covers all three
// regimes through the regime weights (eta) and constraint switches (beta_C, beta_S).
namespace cfisac::almmo {

struct Problem {
  metrics::RegimeSpec regime;
  int n = 0;    // N_T M_T
  int K = 0;    // users
  int N_R = 0;
  int M_R = 0;
  double budget = 0.0;  // rho N_T
  // Lifted quadratic forms, (n + 1) x (n + 1): Gt~^H Gt~, sum_c Gc~^H Gc~, f~ f~^H.
  std::vector<CMat> A_t, A_c;
  std::vector<CVec> f;  // lifted f~_k
  double gamma_C_th = 0.0;  // SINR threshold 2^(vartheta/kappa) - 1
  double gamma_S_th = 0.0;  // SCNR threshold 2^(zeta/kappa) - 1

  int rows() const { return n + 1; }
  int cols() const { return K + 1; }
  /// Number of constraints that are switched on.
  int n_constraints() const { return (regime.beta_C ? K : 0) + (regime.beta_S ? N_R : 0); }
};

Problem make_problem(const std::vector<CVec>& f_hat, const channel::SensingResponse& s,
                     const metrics::RegimeSpec& regime, double rho, int N_T);

/// V = [W / sqrt(P); z] normalised to unit trace. Power left unused by W goes to z.
CMat lift(const CMat& W, double budget);
CMat recover(const CMat& V, double budget);

/// Per-user SINR and per-RAP SCNR evaluated with lifted data.
std::vector<double> sinr(const Problem& p, const CMat& V);
std::vector<double> scnr(const Problem& p, const CMat& V);

/// Auxiliary variables: one per user (weighted by eta) then one per RAP (weighted by 1 - eta).
/// The optimum of the dual transform is mu = gamma.
struct Aux {
  std::vector<double> comm, sens;
};
Aux mu_update(const Problem& p, const CMat& V);

/// Dual-transformed objective f_bar(W, mu) (maximised), natural units scaled by 1/ln 2 like the rates.
double fp_objective(const Problem& p, const CMat& V, const Aux& mu);

/// Constraint values u (<= 0 when met), communication constraints first.
std::vector<double> constraints(const Problem& p, const CMat& V);

struct Multipliers {
  std::vector<double> lambda;
  double zeta = 10.0;
};
Multipliers initial_multipliers(const Problem& p, double zeta0 = 10.0);

/// f_hat(V) + zeta/2 sum max(0, lambda/zeta + u)^2.
double cost(const Problem& p, const CMat& V, const Aux& mu, const Multipliers& m);
/// Real gradient of cost (2 d/d conj(V)): d cost = Re Tr(G^H dV).
CMat euclidean_grad(const Problem& p, const CMat& V, const Aux& mu, const Multipliers& m);

}  // namespace cfisac::almmo
