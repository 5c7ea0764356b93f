#pragma once

// Central finite-difference gradient oracle used by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cfisac/autodiff/graph.hpp"

namespace cfisac::testing {

using BuildFn = std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)>;

struct GradientCheck {
  double max_rel_error = 0.0;  // normwise: max |analytic - numeric| / max |numeric|
  double max_abs_error = 0.0;
};

inline double evaluate(const std::vector<ad::Tensor>& inputs, const BuildFn& build) {
  ad::Graph g;
  std::vector<ad::Var> vars;
  for (const auto& t : inputs) vars.push_back(g.constant(t));
  return build(g, vars).value().item();
}

inline GradientCheck check_gradients(std::vector<ad::Tensor> inputs, const BuildFn& build,
                                     double step = 1e-5) {
  ad::Graph g;
  std::vector<ad::Var> vars;
  for (const auto& t : inputs) vars.push_back(g.variable(t));
  ad::Var loss = build(g, vars);
  g.backward(loss);

  GradientCheck out;
  double scale = 0.0;
  std::vector<double> diffs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const ad::Tensor analytic = vars[k].grad();
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k][i];
      inputs[k][i] = x0 + step;
      const double fp = evaluate(inputs, build);
      inputs[k][i] = x0 - step;
      const double fm = evaluate(inputs, build);
      inputs[k][i] = x0;
      const double numeric = (fp - fm) / (2.0 * step);
      scale = std::max(scale, std::abs(numeric));
      diffs.push_back(std::abs(numeric - analytic[i]));
    }
  }
  for (double d : diffs) out.max_abs_error = std::max(out.max_abs_error, d);
  out.max_rel_error = out.max_abs_error / std::max(scale, 1e-12);
  return out;
}

}  // namespace cfisac::testing
