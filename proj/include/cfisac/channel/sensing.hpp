#pragma once

#include <vector>

#include "cfisac/channel/scene.hpp"

namespace cfisac::channel {

struct SensingResponse {
  int N_T = 0, N_R = 0, N_C = 0, M_T = 0, M_R = 0;
  std::vector<CMat> G_t;  // per RAP, M_R x N_T M_T
  std::vector<CMat> G_c;  // index j * N_C + c
  // Reflection coefficients, index (i * N_R + j) * (N_C + 1) + m, m = 0 target.
  std::vector<cd> alpha;
  std::vector<CVec> a_T;  // index i * (N_C + 1) + m
  std::vector<CVec> a_R;  // index j * (N_C + 1) + m

  int alpha_index(int i, int j, int m) const { return (i * N_R + j) * (N_C + 1) + m; }
  const CMat& clutter(int j, int c) const { return G_c[j * N_C + c]; }
};

/// Deterministic amplitude of a bistatic echo: sqrt(lambda^2 sigma^2 / ((4 pi)^3 d_im^2 d_jm^2)),
/// scaled by the configured link gain.
double reflection_scale(const SystemConfig& cfg, double rcs_variance, double d_im, double d_jm);

/// Builds G from given normalised reflection fluctuations varpi (same indexing as alpha).
SensingResponse assemble_sensing(const Scene& scene, const SystemConfig& cfg, const std::vector<cd>& varpi);

/// Draws varpi ~ CN(0, 1) and assembles the response.
SensingResponse sensing_response(const Scene& scene, const SystemConfig& cfg, Rng& rng);

}  // namespace cfisac::channel
