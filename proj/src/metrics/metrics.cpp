#include "cfisac/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfisac::metrics {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::sc: return "sc";
    case Regime::cc: return "cc";
    case Regime::joint: return "joint";
  }
  return "?";
}

Regime parse_regime(const std::string& s) {
  if (s == "sc") return Regime::sc;
  if (s == "cc") return Regime::cc;
  if (s == "joint") return Regime::joint;
  throw std::invalid_argument("unknown regime '" + s + "' (expected sc, cc or joint)");
}

RegimeSpec RegimeSpec::sensing_centric(double vartheta_th, double kappa) {
  return {Regime::sc, 0.0, true, false, vartheta_th, 0.0, kappa};
}

RegimeSpec RegimeSpec::communication_centric(double zeta_th, double kappa) {
  return {Regime::cc, 1.0, false, true, 0.0, zeta_th, kappa};
}

RegimeSpec RegimeSpec::joint(double eta, double kappa) { return {Regime::joint, eta, true, true, 0.0, 0.0, kappa}; }

void RegimeSpec::validate() const {
  bool ok = false;
  switch (kind) {
    case Regime::sc: ok = eta == 0.0 && beta_C && !beta_S; break;
    case Regime::cc: ok = eta == 1.0 && !beta_C && beta_S; break;
    case Regime::joint: ok = eta > 0.0 && eta < 1.0 && beta_C && beta_S; break;
  }
  if (!ok) throw std::invalid_argument("regime parameters do not match regime " + to_string(kind));
  if (vartheta_th < 0 || zeta_th < 0) throw std::invalid_argument("rate thresholds must be nonnegative");
  if (!(kappa > 0 && kappa <= 1)) throw std::invalid_argument("kappa must lie in (0, 1]");
}

double sinr_user(const std::vector<CVec>& f, const CMat& W, int k) {
  const CVec g = W.adjoint() * f.at(k);  // conj(f_k^H w_j) per column
  double interference = 0.0;
  for (int j = 0; j < g.size(); ++j)
    if (j != k + 1) interference += std::norm(g[j]);
  return std::norm(g[k + 1]) / (interference + 1.0);
}

std::vector<double> sinr_all(const std::vector<CVec>& f, const CMat& W) {
  std::vector<double> out;
  for (int k = 0; k < static_cast<int>(f.size()); ++k) out.push_back(sinr_user(f, W, k));
  return out;
}

double comm_rate(double sinr, double kappa) { return kappa * std::log2(1.0 + sinr); }

double scnr_rap(const CMat& G_t, const std::vector<CMat>& G_c, const CMat& W, int M_R) {
  double clutter = 0.0;
  for (const CMat& g : G_c) clutter += (g * W).squaredNorm();
  return (G_t * W).squaredNorm() / (clutter + M_R);
}

std::vector<double> scnr_all(const channel::SensingResponse& s, const CMat& W) {
  std::vector<double> out;
  for (int j = 0; j < s.N_R; ++j) {
    std::vector<CMat> gc(s.G_c.begin() + j * s.N_C, s.G_c.begin() + (j + 1) * s.N_C);
    out.push_back(scnr_rap(s.G_t[j], gc, W, s.M_R));
  }
  return out;
}

double sensing_rate(double scnr, double kappa) { return kappa * std::log2(1.0 + scnr); }

double objective(const RegimeSpec& regime, const std::vector<double>& sinr, const std::vector<double>& scnr) {
  double c = 0.0, s = 0.0;
  for (double g : sinr) c += std::log2(1.0 + g);
  for (double g : scnr) s += std::log2(1.0 + g);
  return regime.eta * c + (1.0 - regime.eta) * s;
}

Rates evaluate(const std::vector<CVec>& f, const channel::SensingResponse& s, const CMat& W, double kappa) {
  Rates r;
  r.sinr = sinr_all(f, W);
  r.scnr = scnr_all(s, W);
  for (double g : r.sinr) {
    r.R_C.push_back(comm_rate(g, kappa));
    r.sum_R_C += r.R_C.back();
  }
  for (double g : r.scnr) {
    r.R_S.push_back(sensing_rate(g, kappa));
    r.sum_R_S += r.R_S.back();
  }
  return r;
}

ConstraintReport check_constraints(const RegimeSpec& regime, const Rates& rates, const CMat& W, double rho, int N_T,
                                   double tol) {
  ConstraintReport rep;
  double total = 0.0;
  int count = 0;
  if (regime.beta_C) {
    for (double r : rates.R_C) {
      rep.comm_violation.push_back(std::max(0.0, regime.vartheta_th - r));
      total += rep.comm_violation.back();
      ++count;
    }
  }
  if (regime.beta_S) {
    for (double r : rates.R_S) {
      rep.sensing_violation.push_back(std::max(0.0, regime.zeta_th - r));
      total += rep.sensing_violation.back();
      ++count;
    }
  }
  for (double v : rep.comm_violation) rep.max_violation = std::max(rep.max_violation, v);
  for (double v : rep.sensing_violation) rep.max_violation = std::max(rep.max_violation, v);
  rep.mean_violation = count > 0 ? total / count : 0.0;
  rep.power_slack = rho * N_T - W.squaredNorm();
  rep.feasible = rep.max_violation <= tol && rep.power_slack >= -1e-9;
  return rep;
}

}  // namespace cfisac::metrics
