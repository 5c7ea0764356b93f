#include "cfisac/channel/channel_model.hpp"

#include <cmath>
#include <stdexcept>

#include "cfisac/localization/hermitian_eig.hpp"

namespace cfisac::channel {

SteeringPhase steering_phase(double psi, double theta) {
  return {kPi * std::cos(psi) * std::sin(theta), kPi * std::sin(psi) * std::sin(theta)};
}

CVec planar_steering(double psi, double theta, int M1, int M2) {
  if (M1 < 1 || M2 < 1) throw std::invalid_argument("planar_steering: array dimensions must be >= 1");
  const SteeringPhase r = steering_phase(psi, theta);
  CVec a(M1 * M2);
  for (int m2 = 0; m2 < M2; ++m2) {
    for (int m1 = 0; m1 < M1; ++m1) {
      // b1[m1] * conj(b2[m2]) = exp(-j m1 r1) exp(+j m2 r2)
      a[m1 + M1 * m2] = std::polar(1.0, -m1 * r.r1 + m2 * r.r2);
    }
  }
  return a;
}

std::vector<Point> half_wavelength_grid(int M1, int M2, double wavelength) {
  std::vector<Point> u;
  for (int m2 = 0; m2 < M2; ++m2)
    for (int m1 = 0; m1 < M1; ++m1) u.emplace_back(0.5 * wavelength * m1, 0.5 * wavelength * m2, 0.0);
  return u;
}

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

CMat rebuild_clipped(const localization::HermitianEig& eig, bool take_sqrt) {
  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 1e-300);
  if (eig.values.minCoeff() < -1e-8 * std::max(scale, 1.0)) {
    throw std::runtime_error("matrix is not positive semidefinite beyond tolerance");
  }
  RVec d = eig.values.cwiseMax(0.0);
  if (take_sqrt) d = d.cwiseSqrt();
  return eig.vectors * d.cast<cd>().asDiagonal() * eig.vectors.adjoint();
}

}  // namespace

CMat correlation_matrix(const std::vector<Point>& elements, double wavelength) {
  const int n = static_cast<int>(elements.size());
  CMat r(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) r(a, b) = sinc(2.0 * (elements[a] - elements[b]).norm() / wavelength);
  CMat clipped = rebuild_clipped(localization::hermitian_eig(r), false);
  // Clipping may move the diagonal slightly; restore the exact unit diagonal only if it was untouched.
  if ((clipped - r).norm() < 1e-12) return r;
  return clipped;
}

CMat psd_sqrt(const CMat& m) { return rebuild_clipped(localization::hermitian_eig(0.5 * (m + m.adjoint())), true); }

LinkStatistics link_statistics(const Scene& scene, const SystemConfig& cfg) {
  LinkStatistics st;
  st.N_T = scene.N_T();
  st.K = scene.K();
  st.M_T = cfg.M_T();
  st.antenna_area = cfg.antenna_area;
  const CMat r = correlation_matrix(half_wavelength_grid(cfg.M_T1, cfg.M_T2, cfg.wavelength), cfg.wavelength);
  for (int i = 0; i < st.N_T; ++i) {
    for (int k = 0; k < st.K; ++k) {
      const int idx = scene.comm_index(i, k);
      const double kf = scene.rician[idx];
      const double vs = scene.varsigma[idx];
      const Angles& ang = scene.comm[idx].angles;
      st.c.push_back(std::sqrt(kf * vs / (kf + 1.0)) * planar_steering(ang.psi, ang.theta, cfg.M_T1, cfg.M_T2));
      st.e.push_back(vs / (kf + 1.0));
      st.Rtilde.push_back(r);
    }
  }
  return st;
}

std::vector<CVec> stack_users(const std::vector<CVec>& h, int N_T, int K) {
  std::vector<CVec> f;
  const int mt = static_cast<int>(h.at(0).size());
  for (int k = 0; k < K; ++k) {
    CVec fk(N_T * mt);
    for (int i = 0; i < N_T; ++i) fk.segment(i * mt, mt) = h[i * K + k];
    f.push_back(fk);
  }
  return f;
}

ChannelSet draw_channels(const LinkStatistics& stats, Rng& rng) {
  ChannelSet set;
  set.stats = stats;
  std::vector<CMat> roots;
  for (const CMat& r : stats.Rtilde) {
    // Every link shares one correlation matrix in practice; reuse its root.
    if (!roots.empty() && (r - stats.Rtilde[roots.size() - 1]).norm() == 0.0) {
      roots.push_back(roots.back());
    } else {
      roots.push_back(psd_sqrt(stats.antenna_area * r));
    }
  }
  for (std::size_t l = 0; l < stats.c.size(); ++l) {
    const CVec z = complex_normal_vector(stats.M_T, rng);
    set.h.push_back(stats.c[l] + std::sqrt(stats.e[l]) * (roots[l] * z));
  }
  set.f = stack_users(set.h, stats.N_T, stats.K);
  return set;
}

ChannelSet sample_channels(const Scene& scene, const SystemConfig& cfg, Rng& rng) {
  return draw_channels(link_statistics(scene, cfg), rng);
}

}  // namespace cfisac::channel
