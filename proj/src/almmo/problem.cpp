#include "cfisac/almmo/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfisac::almmo {

namespace {

double quad_all(const CMat& A, const CMat& V) { return (V.adjoint() * A * V).trace().real(); }

// |f^H v_col|^2
double proj2(const CVec& f, const CMat& V, int col) { return std::norm(f.dot(V.col(col))); }

struct CommTerms {
  double s, i;  // desired and interference power
};

CommTerms comm_terms(const Problem& p, const CMat& V, int k) {
  CommTerms t{proj2(p.f[k], V, k + 1), 0.0};
  for (int j = 0; j <= p.K; ++j)
    if (j != k + 1) t.i += proj2(p.f[k], V, j);
  return t;
}

struct SensTerms {
  double a, c;
};

SensTerms sens_terms(const Problem& p, const CMat& V, int j) { return {quad_all(p.A_t[j], V), quad_all(p.A_c[j], V)}; }

// Adds weight * gradient of |f^H v_col|^2.
void add_proj_grad(CMat& G, const CVec& f, const CMat& V, int col, double weight) {
  G.col(col) += (2.0 * weight * f.dot(V.col(col))) * f;
}

}  // namespace

Problem make_problem(const std::vector<CVec>& f_hat, const channel::SensingResponse& s,
                     const metrics::RegimeSpec& regime, double rho, int N_T) {
  regime.validate();
  if (f_hat.empty()) throw std::invalid_argument("almmo: no users");
  Problem p;
  p.regime = regime;
  p.K = static_cast<int>(f_hat.size());
  p.n = static_cast<int>(f_hat[0].size());
  p.N_R = s.N_R;
  p.M_R = s.M_R;
  p.budget = rho * N_T;
  if (p.budget <= 0.0) throw std::invalid_argument("almmo: power budget must be positive");
  const double scale = std::sqrt(p.budget);
  for (const CVec& f : f_hat) {
    if (f.size() != p.n) throw std::invalid_argument("almmo: inconsistent channel lengths");
    CVec ft = CVec::Zero(p.n + 1);
    ft.head(p.n) = scale * f;
    p.f.push_back(ft);
  }
  auto lifted_gram = [&](const CMat& G) {
    if (G.cols() != p.n) throw std::invalid_argument("almmo: sensing matrix width mismatch");
    CMat Gt = CMat::Zero(G.rows(), p.n + 1);
    Gt.leftCols(p.n) = scale * G;
    return CMat(Gt.adjoint() * Gt);
  };
  for (int j = 0; j < p.N_R; ++j) {
    p.A_t.push_back(lifted_gram(s.G_t[j]));
    CMat Ac = CMat::Zero(p.n + 1, p.n + 1);
    for (int c = 0; c < s.N_C; ++c) Ac += lifted_gram(s.clutter(j, c));
    p.A_c.push_back(Ac);
  }
  p.gamma_C_th = std::exp2(regime.vartheta_th / regime.kappa) - 1.0;
  p.gamma_S_th = std::exp2(regime.zeta_th / regime.kappa) - 1.0;
  return p;
}

CMat lift(const CMat& W, double budget) {
  if (budget <= 0.0) throw std::invalid_argument("lift: budget must be positive");
  CMat V = CMat::Zero(W.rows() + 1, W.cols());
  V.topRows(W.rows()) = W / std::sqrt(budget);
  const double used = V.squaredNorm();
  if (used < 1.0) {
    V.row(W.rows()).setConstant(cd(std::sqrt((1.0 - used) / static_cast<double>(W.cols())), 0.0));
  }
  const double norm = V.norm();
  if (norm == 0.0) throw std::invalid_argument("lift: zero matrix");
  return V / norm;
}

CMat recover(const CMat& V, double budget) { return std::sqrt(budget) * V.topRows(V.rows() - 1); }

std::vector<double> sinr(const Problem& p, const CMat& V) {
  std::vector<double> out(p.K);
  for (int k = 0; k < p.K; ++k) {
    const CommTerms t = comm_terms(p, V, k);
    out[k] = t.s / (t.i + 1.0);
  }
  return out;
}

std::vector<double> scnr(const Problem& p, const CMat& V) {
  std::vector<double> out(p.N_R);
  for (int j = 0; j < p.N_R; ++j) {
    const SensTerms t = sens_terms(p, V, j);
    out[j] = t.a / (t.c + p.M_R);
  }
  return out;
}

Aux mu_update(const Problem& p, const CMat& V) { return {sinr(p, V), scnr(p, V)}; }

double fp_objective(const Problem& p, const CMat& V, const Aux& mu) {
  const double eta = p.regime.eta;
  auto term = [](double m, double ratio) { return std::log2(1.0 + m) + (-m + (1.0 + m) * ratio) / std::log(2.0); };
  double total = 0.0;
  if (eta > 0.0) {
    for (int k = 0; k < p.K; ++k) {
      const CommTerms t = comm_terms(p, V, k);
      total += eta * term(mu.comm[k], t.s / (t.s + t.i + 1.0));
    }
  }
  if (eta < 1.0) {
    for (int j = 0; j < p.N_R; ++j) {
      const SensTerms t = sens_terms(p, V, j);
      total += (1.0 - eta) * term(mu.sens[j], t.a / (t.a + t.c + p.M_R));
    }
  }
  return total;
}

std::vector<double> constraints(const Problem& p, const CMat& V) {
  std::vector<double> u;
  if (p.regime.beta_C)
    for (double g : sinr(p, V)) u.push_back(p.gamma_C_th - g);
  if (p.regime.beta_S)
    for (double g : scnr(p, V)) u.push_back(p.gamma_S_th - g);
  return u;
}

Multipliers initial_multipliers(const Problem& p, double zeta0) {
  if (zeta0 <= 0.0) throw std::invalid_argument("almmo: penalty must be positive");
  return {std::vector<double>(p.n_constraints(), 0.0), zeta0};
}

namespace {

double objective_part(const Problem& p, const CMat& V, const Aux& mu) {
  const double eta = p.regime.eta;
  double f = 0.0;
  if (eta > 0.0)
    for (int k = 0; k < p.K; ++k) {
      const CommTerms t = comm_terms(p, V, k);
      f -= eta * (1.0 + mu.comm[k]) * t.s / (t.s + t.i + 1.0);
    }
  if (eta < 1.0)
    for (int j = 0; j < p.N_R; ++j) {
      const SensTerms t = sens_terms(p, V, j);
      f -= (1.0 - eta) * (1.0 + mu.sens[j]) * t.a / (t.a + t.c + p.M_R);
    }
  return f;
}

}  // namespace

double cost(const Problem& p, const CMat& V, const Aux& mu, const Multipliers& m) {
  double L = objective_part(p, V, mu);
  const std::vector<double> u = constraints(p, V);
  if (u.size() != m.lambda.size()) throw std::invalid_argument("almmo: multiplier count mismatch");
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::max(0.0, m.lambda[i] / m.zeta + u[i]);
    L += 0.5 * m.zeta * a * a;
  }
  return L;
}

CMat euclidean_grad(const Problem& p, const CMat& V, const Aux& mu, const Multipliers& m) {
  CMat G = CMat::Zero(V.rows(), V.cols());
  const double eta = p.regime.eta;

  // Objective part. d(s / (s + i + 1)) = ds / D - s / D^2 (ds + di).
  if (eta > 0.0)
    for (int k = 0; k < p.K; ++k) {
      const CommTerms t = comm_terms(p, V, k);
      const double D = t.s + t.i + 1.0;
      const double w = -eta * (1.0 + mu.comm[k]);
      for (int j = 0; j <= p.K; ++j) {
        const double coef = (j == k + 1) ? (1.0 / D - t.s / (D * D)) : -t.s / (D * D);
        add_proj_grad(G, p.f[k], V, j, w * coef);
      }
    }
  if (eta < 1.0)
    for (int j = 0; j < p.N_R; ++j) {
      const SensTerms t = sens_terms(p, V, j);
      const double D = t.a + t.c + p.M_R;
      const double w = -(1.0 - eta) * (1.0 + mu.sens[j]);
      G += (2.0 * w) * ((1.0 / D - t.a / (D * D)) * (p.A_t[j] * V) - (t.a / (D * D)) * (p.A_c[j] * V));
    }

  // Penalty part, active only where lambda/zeta + u > 0.
  const std::vector<double> u = constraints(p, V);
  if (u.size() != m.lambda.size()) throw std::invalid_argument("almmo: multiplier count mismatch");
  std::size_t idx = 0;
  if (p.regime.beta_C)
    for (int k = 0; k < p.K; ++k, ++idx) {
      const double a = m.lambda[idx] / m.zeta + u[idx];
      if (a <= 0.0) continue;
      // u = th - s / (i + 1)
      const CommTerms t = comm_terms(p, V, k);
      const double w = m.zeta * a;
      for (int j = 0; j <= p.K; ++j) {
        const double coef = (j == k + 1) ? -1.0 / (t.i + 1.0) : t.s / ((t.i + 1.0) * (t.i + 1.0));
        add_proj_grad(G, p.f[k], V, j, w * coef);
      }
    }
  if (p.regime.beta_S)
    for (int j = 0; j < p.N_R; ++j, ++idx) {
      const double a = m.lambda[idx] / m.zeta + u[idx];
      if (a <= 0.0) continue;
      // u = th - a / (c + M_R)
      const SensTerms t = sens_terms(p, V, j);
      const double D = t.c + p.M_R;
      G += (2.0 * m.zeta * a) * (-(p.A_t[j] * V) / D + (t.a / (D * D)) * (p.A_c[j] * V));
    }
  return G;
}

}  // namespace cfisac::almmo
