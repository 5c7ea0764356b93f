#pragma once

#include <vector>

#include "cfisac/channel/scene.hpp"

namespace cfisac::channel {

struct SteeringPhase {
  double r1 = 0.0;
  double r2 = 0.0;
};

SteeringPhase steering_phase(double psi, double theta);

/// vec(b1 b2^H) with b_x[m] = exp(-j m r_x); element (m1, m2) sits at index m1 + M1 * m2.
CVec planar_steering(double psi, double theta, int M1, int M2);

/// Element positions of an M1 x M2 half-wavelength grid in the array plane, same ordering as
/// planar_steering.
std::vector<Point> half_wavelength_grid(int M1, int M2, double wavelength);

/// [R]_{m,m'} = sinc(2 |u_m - u_m'| / wavelength), sinc(x) = sin(pi x) / (pi x).
/// Negative eigenvalues are clipped to zero; throws std::runtime_error if one is below -1e-8.
CMat correlation_matrix(const std::vector<Point>& elements, double wavelength);

/// Hermitian PSD square root; negative eigenvalues above -1e-8 * |M| are clipped.
CMat psd_sqrt(const CMat& m);

/// Deterministic part of every TAP-user link.
struct LinkStatistics {
  int N_T = 0, K = 0, M_T = 0;
  std::vector<CVec> c;       // LoS mean, index i * K + k
  std::vector<double> e;     // scattered power
  std::vector<CMat> Rtilde;  // normalised correlation
  double antenna_area = 1.0;

  int index(int i, int k) const { return i * K + k; }
  /// C_h = e * A * Rtilde.
  CMat covariance(int i, int k) const { return e[index(i, k)] * antenna_area * Rtilde[index(i, k)]; }
};

LinkStatistics link_statistics(const Scene& scene, const SystemConfig& cfg);

struct ChannelSet {
  LinkStatistics stats;
  std::vector<CVec> h;  // index i * K + k
  std::vector<CVec> f;  // stacked per user, length N_T * M_T

  const CVec& link(int i, int k) const { return h[stats.index(i, k)]; }
};

/// Stacks h[0..N_T-1][k] into f_k for every user.
std::vector<CVec> stack_users(const std::vector<CVec>& h, int N_T, int K);

/// h = c + sqrt(e) L z with L = sqrt(A Rtilde) and z ~ CN(0, I).
ChannelSet draw_channels(const LinkStatistics& stats, Rng& rng);

ChannelSet sample_channels(const Scene& scene, const SystemConfig& cfg, Rng& rng);

}  // namespace cfisac::channel
