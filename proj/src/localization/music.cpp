#include "cfisac/localization/music.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "cfisac/channel/channel_model.hpp"
#include "cfisac/localization/hermitian_eig.hpp"

namespace cfisac::localization {

int AngleGrid::size() const {
  if (step_deg <= 0.0 || max_deg < min_deg) throw std::invalid_argument("AngleGrid: bad range");
  return static_cast<int>(std::floor((max_deg - min_deg) / step_deg + 1e-9)) + 1;
}

CMat snapshots(const channel::SensingResponse& s, int j, const CMat& W, int tau, Rng& rng, double noise_var) {
  if (j < 0 || j >= s.N_R) throw std::out_of_range("snapshots: RAP index");
  if (tau < 1) throw std::invalid_argument("snapshots: need at least one snapshot");
  CMat H = s.G_t[j];
  for (int c = 0; c < s.N_C; ++c) H += s.clutter(j, c);
  if (H.cols() != W.rows()) throw std::invalid_argument("snapshots: W does not match the sensing response");

  const double a = std::sqrt(0.5);
  std::bernoulli_distribution coin(0.5);
  CMat X(W.cols(), tau);
  for (int t = 0; t < tau; ++t)
    for (int k = 0; k < W.cols(); ++k) X(k, t) = cd(coin(rng) ? a : -a, coin(rng) ? a : -a);
  CMat Y = H * W * X;
  if (noise_var > 0.0) {
    const double sd = std::sqrt(noise_var);
    for (int i = 0; i < Y.size(); ++i) Y(i) += sd * complex_normal(rng);
  }
  return Y;
}

CMat sample_covariance(const CMat& Y) {
  if (Y.cols() == 0) throw std::invalid_argument("sample_covariance: no snapshots");
  return Y * Y.adjoint() / static_cast<double>(Y.cols());
}

Subspaces split_subspaces(const CMat& R, int n_sources) {
  const int M = static_cast<int>(R.rows());
  if (n_sources < 1 || M <= n_sources) throw std::invalid_argument("music: no noise subspace left (M_R <= sources)");
  const HermitianEig e = hermitian_eig(R);
  Subspaces s;
  s.eigenvalues = e.values;
  s.noise = e.vectors.leftCols(M - n_sources);
  s.signal = e.vectors.rightCols(n_sources);
  return s;
}

double rmse(double psi_true, double theta_true, double psi_est, double theta_est) {
  return std::hypot(psi_true - psi_est, theta_true - theta_est);
}

const Peak& nearest_peak(const std::vector<Peak>& peaks, double psi_deg, double theta_deg) {
  if (peaks.empty()) throw std::invalid_argument("nearest_peak: no peaks");
  return *std::min_element(peaks.begin(), peaks.end(), [&](const Peak& a, const Peak& b) {
    return rmse(psi_deg, theta_deg, a.psi_deg, a.theta_deg) < rmse(psi_deg, theta_deg, b.psi_deg, b.theta_deg);
  });
}

MusicResult music(const CMat& Y, int n_sources, int M1, int M2, const AngleGrid& grid, int threads) {
  if (Y.rows() != M1 * M2) throw std::invalid_argument("music: snapshot rows do not match the array");
  MusicResult r;
  r.grid = grid;
  r.subspaces = split_subspaces(sample_covariance(Y), n_sources);
  const int n = grid.size();
  r.spectrum.resize(n, n);
  const CMat NH = r.subspaces.noise.adjoint();
  const double deg = kPi / 180.0;

  auto fill = [&](int row_begin, int row_end) {
    for (int a = row_begin; a < row_end; ++a)
      for (int e = 0; e < n; ++e) {
        const CVec v = channel::planar_steering(grid.at(a) * deg, grid.at(e) * deg, M1, M2);
        const double d = (NH * v).squaredNorm();
        r.spectrum(a, e) = 1.0 / std::max(d, std::numeric_limits<double>::min());
      }
  };
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    fill(0, n);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(fill, n * t / threads, n * (t + 1) / threads);
    for (auto& th : pool) th.join();
  }

  // Local maxima over the 8-neighbourhood, strongest first.
  std::vector<Peak> cand;
  for (int a = 0; a < n; ++a)
    for (int e = 0; e < n; ++e) {
      const double v = r.spectrum(a, e);
      bool is_max = true;
      for (int da = -1; da <= 1 && is_max; ++da)
        for (int de = -1; de <= 1; ++de) {
          if (da == 0 && de == 0) continue;
          const int aa = a + da, ee = e + de;
          if (aa < 0 || ee < 0 || aa >= n || ee >= n) continue;
          // ties go to the lower index so a plateau yields one peak
          const double w = r.spectrum(aa, ee);
          if (w > v || (w == v && (aa < a || (aa == a && ee < e)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) cand.push_back({grid.at(a), grid.at(e), v});
    }
  std::stable_sort(cand.begin(), cand.end(), [](const Peak& x, const Peak& y) { return x.value > y.value; });
  if (static_cast<int>(cand.size()) > n_sources) cand.resize(n_sources);
  r.peaks = std::move(cand);
  return r;
}

void write_spectrum_csv(std::ostream& os, const MusicResult& r) {
  os << "azimuth_deg,elevation_deg,value\n";
  const int n = r.grid.size();
  for (int a = 0; a < n; ++a)
    for (int e = 0; e < n; ++e) os << r.grid.at(a) << ',' << r.grid.at(e) << ',' << r.spectrum(a, e) << '\n';
}

}  // namespace cfisac::localization
