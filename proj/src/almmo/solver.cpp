#include "cfisac/almmo/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace cfisac::almmo {

CMat tangent(const CMat& V, const CMat& egrad) {
  const double radial = (V.adjoint() * egrad).trace().real();
  return egrad - radial * V;
}

CMat retract(const CMat& V, const CMat& direction) {
  CMat next = V + direction;
  const double n = next.norm();
  if (n == 0.0) throw std::runtime_error("retract: landed on the origin");
  return next / n;
}

StepResult riemannian_step(const Problem& p, const CMat& V, const Aux& mu, const Multipliers& m, double t0,
                           const Armijo& rule) {
  StepResult r;
  r.V = V;
  r.cost = cost(p, V, mu, m);
  const CMat xi = tangent(V, euclidean_grad(p, V, mu, m));
  r.grad_norm = xi.norm();
  if (r.grad_norm == 0.0) return r;
  const double slope = r.grad_norm * r.grad_norm;
  double t = t0;
  for (int b = 0; b <= rule.max_backtracks; ++b, t *= rule.shrink) {
    const CMat cand = retract(V, -t * xi);
    const double c = cost(p, cand, mu, m);
    if (c <= r.cost - rule.c * t * slope) {
      r.V = cand;
      r.cost = c;
      r.step = t;
      r.accepted = true;
      return r;
    }
  }
  return r;
}

void update_multipliers(Multipliers& m, const std::vector<double>& u, double violation, double previous_violation,
                        const PenaltyRule& rule) {
  if (u.size() != m.lambda.size()) throw std::invalid_argument("update_multipliers: size mismatch");
  for (std::size_t i = 0; i < u.size(); ++i) m.lambda[i] = std::max(0.0, m.lambda[i] + m.zeta * u[i]);
  if (violation > rule.required_decrease * previous_violation) m.zeta = std::min(rule.zeta_max, m.zeta * rule.growth);
}

double max_rate_violation(const Problem& p, const CMat& V) {
  const double kappa = p.regime.kappa;
  double worst = 0.0;
  if (p.regime.beta_C)
    for (double g : sinr(p, V)) worst = std::max(worst, p.regime.vartheta_th - kappa * std::log2(1.0 + g));
  if (p.regime.beta_S)
    for (double g : scnr(p, V)) worst = std::max(worst, p.regime.zeta_th - kappa * std::log2(1.0 + g));
  return worst;
}

double rate_objective(const Problem& p, const CMat& V) {
  const double kappa = p.regime.kappa;
  const double eta = p.regime.eta;
  double c = 0.0, s = 0.0;
  for (double g : sinr(p, V)) c += std::log2(1.0 + g);
  for (double g : scnr(p, V)) s += std::log2(1.0 + g);
  return kappa * (eta * c + (1.0 - eta) * s);
}

CMat random_init(const Problem& p, Rng& rng) {
  CMat W(p.n, p.K + 1);
  for (int i = 0; i < W.size(); ++i) W(i) = complex_normal(rng);
  return W * std::sqrt(p.budget) / W.norm();
}

namespace {

// Largest positive constraint value, in the solver's SINR/SCNR units.
double positive_part(const std::vector<double>& u) {
  double v = 0.0;
  for (double x : u) v = std::max(v, x);
  return v;
}

}  // namespace

SolveResult solve(const Problem& p, const CMat& W0, const SolveOptions& opt) {
  if (W0.rows() != p.n || W0.cols() != p.K + 1) throw std::invalid_argument("almmo::solve: initial W has wrong shape");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  SolveResult res;
  CMat V = lift(W0, p.budget);
  Multipliers m = initial_multipliers(p, opt.zeta0);
  Aux mu = mu_update(p, V);
  double prev_obj = rate_objective(p, V);
  double prev_u = positive_part(constraints(p, V));
  res.trace.push_back({0, prev_obj, max_rate_violation(p, V), tangent(V, euclidean_grad(p, V, mu, m)).norm(), 0.0});

  double t = 1.0;
  for (int outer = 1; outer <= opt.outer_iters; ++outer) {
    mu = mu_update(p, V);
    double gnorm = 0.0;
    int accepted = 0;
    for (int it = 0; it < opt.inner_iters; ++it) {
      const StepResult s = riemannian_step(p, V, mu, m, std::min(2.0 * t, 1e6), opt.armijo);
      gnorm = s.grad_norm;
      if (gnorm < opt.inner_tol || !s.accepted) break;
      res.worst_step_increase = std::max(res.worst_step_increase, s.cost - cost(p, V, mu, m));
      V = s.V;
      t = s.step;
      ++accepted;
      res.worst_sphere_error = std::max(res.worst_sphere_error, std::abs(V.squaredNorm() - 1.0));
    }
    res.inner_steps += accepted;

    const std::vector<double> u = constraints(p, V);
    const double viol_u = positive_part(u);
    const std::vector<double> lambda_before = m.lambda;
    update_multipliers(m, u, viol_u, prev_u, opt.penalty);
    prev_u = viol_u;

    const double obj = rate_objective(p, V);
    const double viol = max_rate_violation(p, V);
    res.trace.push_back({outer, obj, viol, gnorm, elapsed()});

    const bool settled = std::abs(obj - prev_obj) <= opt.outer_tol * std::max(std::abs(prev_obj), 1e-12);
    prev_obj = obj;
    if (settled && viol <= opt.violation_tol) {
      res.converged = true;
      break;
    }
    if (accepted == 0 && m.lambda == lambda_before && viol > opt.violation_tol) {
      res.stalled = true;
      break;
    }
  }
  res.W = recover(V, p.budget);
  return res;
}

}  // namespace cfisac::almmo
