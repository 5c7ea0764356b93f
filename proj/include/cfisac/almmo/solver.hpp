#pragma once

#include <vector>

#include "cfisac/almmo/problem.hpp"

namespace cfisac::almmo {

/// Projects a Euclidean gradient onto the tangent space of the sphere at V.
CMat tangent(const CMat& V, const CMat& egrad);
/// (V + d) / ||V + d||_F
CMat retract(const CMat& V, const CMat& direction);

struct Armijo {
  double c = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
};

struct StepResult {
  CMat V;
  double cost = 0.0;
  double step = 0.0;  // accepted step length, 0 when nothing was accepted
  double grad_norm = 0.0;
  bool accepted = false;
};

/// One steepest-descent step with backtracking, starting from step length t0.
StepResult riemannian_step(const Problem& p, const CMat& V, const Aux& mu, const Multipliers& m, double t0,
                           const Armijo& rule = {});

/// lambda <- max(0, lambda + zeta u); zeta grows when the violation did not shrink enough.
struct PenaltyRule {
  double growth = 2.0;
  double required_decrease = 0.9;
  double zeta_max = 1e6;
};
void update_multipliers(Multipliers& m, const std::vector<double>& u, double violation, double previous_violation,
                        const PenaltyRule& rule = {});

struct SolveOptions {
  int inner_iters = 200;
  double inner_tol = 1e-6;  // Riemannian gradient norm
  int outer_iters = 50;
  double outer_tol = 1e-5;  // relative objective change
  // An outer round may only stop early once every rate constraint is met to this level (bps/Hz).
  double violation_tol = 1e-4;
  double zeta0 = 10.0;
  PenaltyRule penalty;
  Armijo armijo;
};

struct TraceRow {
  int outer_iter = 0;
  double objective = 0.0;      // regime objective on the data the solver sees, bps/Hz
  double max_violation = 0.0;  // bps/Hz
  double grad_norm = 0.0;
  double seconds = 0.0;
};

struct SolveResult {
  CMat W;
  std::vector<TraceRow> trace;
  bool converged = false;
  bool stalled = false;
  int inner_steps = 0;
  // Sphere residual |Tr(VV^H) - 1| over every accepted step.
  double worst_sphere_error = 0.0;
  // Largest cost increase of an accepted step (should be <= 0).
  double worst_step_increase = 0.0;
};

/// Rate violations (bps/Hz) of the switched-on constraints at V.
double max_rate_violation(const Problem& p, const CMat& V);
/// Regime objective in bps/Hz at V.
double rate_objective(const Problem& p, const CMat& V);

/// Random complex W scaled to the power budget.
CMat random_init(const Problem& p, Rng& rng);

SolveResult solve(const Problem& p, const CMat& W0, const SolveOptions& opt = {});

}  // namespace cfisac::almmo
