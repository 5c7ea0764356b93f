#pragma once

#include <iosfwd>
#include <vector>

#include "cfisac/channel/sensing.hpp"

namespace cfisac::localization {

struct AngleGrid {
  double min_deg = -100.0;
  double max_deg = 100.0;
  double step_deg = 0.5;

  int size() const;
  double at(int i) const { return min_deg + step_deg * i; }
};

/// tau snapshots at RAP j: y = (G_t + sum_c G_c) W x + n with unit-power QPSK x and CN(0, noise_var I) noise.
CMat snapshots(const channel::SensingResponse& s, int j, const CMat& W, int tau, Rng& rng, double noise_var = 1.0);

CMat sample_covariance(const CMat& Y);

struct Subspaces {
  RVec eigenvalues;  // ascending
  CMat noise;        // M_R - n_sources smallest
  CMat signal;
};
/// Throws std::invalid_argument when there is no noise subspace (M_R <= n_sources).
Subspaces split_subspaces(const CMat& R, int n_sources);

struct Peak {
  double psi_deg = 0.0;    // azimuth
  double theta_deg = 0.0;  // elevation
  double value = 0.0;
};

struct MusicResult {
  AngleGrid grid;
  RMat spectrum;  // rows: azimuth index, cols: elevation index
  std::vector<Peak> peaks;  // strongest first, at most n_sources
  Subspaces subspaces;
};

/// 2D MUSIC for an M1 x M2 receive array. Grid rows are split across `threads`; the result
/// does not depend on the thread count.
MusicResult music(const CMat& Y, int n_sources, int M1, int M2, const AngleGrid& grid = {}, int threads = 1);

/// Euclidean angle error in degrees.
double rmse(double psi_true, double theta_true, double psi_est, double theta_est);

/// Peak closest to the given angles; throws if there are none.
const Peak& nearest_peak(const std::vector<Peak>& peaks, double psi_deg, double theta_deg);

/// `azimuth_deg,elevation_deg,value`, one row per grid cell.
void write_spectrum_csv(std::ostream& os, const MusicResult& r);

}  // namespace cfisac::localization
