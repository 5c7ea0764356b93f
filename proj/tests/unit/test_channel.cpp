#include <doctest.h>

#include <cmath>

#include "cfisac/channel/channel_model.hpp"
#include "cfisac/channel/sensing.hpp"
#include "cfisac/localization/hermitian_eig.hpp"

using namespace cfisac;
using namespace cfisac::channel;

namespace {

SystemConfig small_config() {
  SystemConfig cfg;
  cfg.validate();
  return cfg;
}

Scene toy_scene(const SystemConfig& cfg, Rng& rng) { return build_scene(cfg, rng); }

}  // namespace

TEST_CASE("config validation rejects broken invariants") {
  SystemConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tau_p = cfg.K - 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.tau_p = cfg.tau_c;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.rho = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.rician_min = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SystemConfig{};
  cfg.N_T = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("build_scene is deterministic and populates links") {
  const SystemConfig cfg = small_config();
  Rng a(42), b(42);
  const Scene s1 = build_scene(cfg, a);
  const Scene s2 = build_scene(cfg, b);
  REQUIRE(s1.users.size() == s2.users.size());
  for (std::size_t k = 0; k < s1.users.size(); ++k) CHECK(s1.users[k] == s2.users[k]);
  for (std::size_t l = 0; l < s1.varsigma.size(); ++l) {
    CHECK(s1.varsigma[l] == s2.varsigma[l]);
    CHECK(s1.rician[l] == s2.rician[l]);
  }
  CHECK(s1.comm.size() == static_cast<std::size_t>(cfg.N_T * cfg.K));
  CHECK(s1.tx.size() == static_cast<std::size_t>(cfg.N_T * (cfg.N_C + 1)));
  CHECK(s1.rx.size() == static_cast<std::size_t>(cfg.N_R * (cfg.N_C + 1)));
  for (std::size_t l = 0; l < s1.comm.size(); ++l) {
    CHECK(s1.comm[l].distance >= 1.0);
    CHECK(std::isfinite(s1.comm[l].angles.psi));
    CHECK(s1.varsigma[l] > 0);
    CHECK(s1.rician[l] >= cfg.rician_min);
    CHECK(s1.rician[l] <= cfg.rician_max);
  }
}

TEST_CASE("anchored sensing layout reproduces the requested angles at RAP 1") {
  const SystemConfig cfg = small_config();
  Rng rng(5);
  const Scene s = build_scene(cfg, rng);
  const Angles t = s.rx[s.rx_index(0, 0)].angles;
  CHECK(t.psi * 180 / kPi == doctest::Approx(-45.0));
  CHECK(t.theta * 180 / kPi == doctest::Approx(45.0));
  const Angles c = s.rx[s.rx_index(0, 1)].angles;
  CHECK(c.psi * 180 / kPi == doctest::Approx(45.0));
  CHECK(c.theta * 180 / kPi == doctest::Approx(30.0));
}

TEST_CASE("large-scale coefficient follows the log-distance pathloss") {
  SystemConfig cfg;
  cfg.link_gain_db = 0.0;
  CHECK(large_scale_coefficient(cfg, 1.0) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(large_scale_coefficient(cfg, 10.0) == doctest::Approx(1e-7).epsilon(1e-12));
  cfg.link_gain_db = 30.0;
  CHECK(large_scale_coefficient(cfg, 10.0) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK_THROWS_AS(large_scale_coefficient(cfg, 0.0), std::invalid_argument);
}

TEST_CASE("steering phase") {
  SteeringPhase r = steering_phase(0.0, kPi / 2);
  CHECK(r.r1 == doctest::Approx(kPi));
  CHECK(std::abs(r.r2) < 1e-15);
  r = steering_phase(1.234, 0.0);
  CHECK(r.r1 == 0.0);
  CHECK(r.r2 == 0.0);
  Rng rng(7);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int t = 0; t < 20; ++t) {
    const double psi = u(rng), theta = u(rng);
    r = steering_phase(psi, theta);
    CHECK(r.r1 == doctest::Approx(kPi * std::cos(psi) * std::sin(theta)).epsilon(1e-14));
    CHECK(r.r2 == doctest::Approx(kPi * std::sin(psi) * std::sin(theta)).epsilon(1e-14));
  }
}

TEST_CASE("planar steering vectors") {
  CVec a = planar_steering(0.3, 0.7, 1, 1);
  REQUIRE(a.size() == 1);
  CHECK(std::abs(a[0] - cd(1.0)) < 1e-15);

  a = planar_steering(0.9, 0.0, 3, 2);
  for (int m = 0; m < a.size(); ++m) CHECK(std::abs(a[m] - cd(1.0)) < 1e-15);

  a = planar_steering(0.0, kPi / 2, 2, 1);
  CHECK(std::abs(a[0] - cd(1.0)) < 1e-15);
  CHECK(std::abs(a[1] - cd(-1.0)) < 1e-12);

  // vec(b1 b2^H) built independently with explicit vectors
  const double psi = -0.4, theta = 0.8;
  const int M1 = 3, M2 = 2;
  const double r1 = kPi * std::cos(psi) * std::sin(theta), r2 = kPi * std::sin(psi) * std::sin(theta);
  CVec b1(M1), b2(M2);
  for (int m = 0; m < M1; ++m) b1[m] = std::exp(cd(0, -m * r1));
  for (int m = 0; m < M2; ++m) b2[m] = std::exp(cd(0, -m * r2));
  const CMat outer = b1 * b2.adjoint();
  a = planar_steering(psi, theta, M1, M2);
  for (int c = 0; c < M2; ++c)
    for (int r = 0; r < M1; ++r) CHECK(std::abs(a[r + M1 * c] - outer(r, c)) < 1e-13);
  for (int m = 0; m < a.size(); ++m) CHECK(std::abs(a[m]) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.squaredNorm() == doctest::Approx(M1 * M2));
  CHECK_THROWS_AS(planar_steering(0, 0, 0, 2), std::invalid_argument);
}

TEST_CASE("correlation matrix") {
  const double lambda = 0.1;
  CMat r = correlation_matrix(half_wavelength_grid(2, 1, lambda), lambda);
  CHECK(std::abs(r(0, 0) - cd(1.0)) < 1e-15);
  CHECK(std::abs(r(0, 1)) < 1e-15);  // sinc(1) = 0

  const auto grid = half_wavelength_grid(2, 2, lambda);
  r = correlation_matrix(grid, lambda);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double d = std::sqrt(std::pow(grid[a].x() - grid[b].x(), 2) + std::pow(grid[a].y() - grid[b].y(), 2));
      const double x = 2.0 * d / lambda;
      const double expect = x == 0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
      CHECK(std::abs(r(a, b) - cd(expect)) < 1e-12);
    }
  }
  CHECK((r - r.adjoint()).norm() < 1e-15);
  const auto eig = localization::hermitian_eig(r);
  CHECK(eig.values.minCoeff() >= -1e-8);

  // A 4x4 grid at half-wavelength spacing stays PSD and unit diagonal.
  r = correlation_matrix(half_wavelength_grid(4, 4, lambda), lambda);
  for (int m = 0; m < 16; ++m) CHECK(r(m, m).real() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(localization::hermitian_eig(r).values.minCoeff() >= -1e-8);
}

TEST_CASE("psd square root") {
  Rng rng(3);
  CMat b(4, 4);
  for (int i = 0; i < 16; ++i) b(i) = complex_normal(rng);
  const CMat m = b * b.adjoint();
  const CMat s = psd_sqrt(m);
  CHECK((s * s - m).norm() / m.norm() < 1e-10);
  CHECK((s - s.adjoint()).norm() < 1e-10);
  CMat neg = CMat::Identity(2, 2);
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(psd_sqrt(neg), std::runtime_error);
}

TEST_CASE("channel samples match the Rician statistics") {
  SystemConfig cfg;
  cfg.M_T1 = 2;
  cfg.M_T2 = 2;
  Rng rng(11);
  const Scene scene = toy_scene(cfg, rng);
  LinkStatistics st = link_statistics(scene, cfg);

  SUBCASE("LoS limit") {
    for (double& e : st.e) e = 0.0;
    const ChannelSet set = draw_channels(st, rng);
    for (std::size_t l = 0; l < set.h.size(); ++l) CHECK((set.h[l] - st.c[l]).norm() == 0.0);
  }
  SUBCASE("stacked users") {
    const ChannelSet set = draw_channels(st, rng);
    for (int k = 0; k < cfg.K; ++k)
      for (int i = 0; i < cfg.N_T; ++i)
        CHECK((set.f[k].segment(i * cfg.M_T(), cfg.M_T()) - set.link(i, k)).norm() == 0.0);
  }
  SUBCASE("mean and covariance over 1e4 draws") {
    const int draws = 10000;
    const int l = st.index(1, 2);
    const int n = cfg.M_T();
    CVec mean = CVec::Zero(n);
    CMat cov = CMat::Zero(n, n);
    for (int t = 0; t < draws; ++t) {
      const ChannelSet set = draw_channels(st, rng);
      mean += set.h[l];
      const CVec d = set.h[l] - st.c[l];
      cov += d * d.adjoint();
    }
    mean /= draws;
    cov /= draws;
    const CMat ch = st.covariance(1, 2);
    for (int m = 0; m < n; ++m) {
      const double sigma = std::sqrt(ch(m, m).real() / draws);
      CHECK(std::abs(mean[m] - st.c[l][m]) < 3.0 * sigma);
    }
    CHECK((cov - ch).norm() / ch.norm() < 0.05);
  }
}

TEST_CASE("sensing response") {
  SystemConfig cfg;
  Rng rng(21);
  const Scene scene = toy_scene(cfg, rng);
  const SensingResponse s = sensing_response(scene, cfg, rng);
  REQUIRE(s.G_t.size() == static_cast<std::size_t>(cfg.N_R));
  REQUIRE(s.G_c.size() == static_cast<std::size_t>(cfg.N_R * cfg.N_C));

  SUBCASE("every block is rank one") {
    for (const auto* set : {&s.G_t, &s.G_c}) {
      for (const CMat& g : *set) {
        for (int i = 0; i < cfg.N_T; ++i) {
          Eigen::JacobiSVD<CMat> svd(g.middleCols(i * cfg.M_T(), cfg.M_T()));
          const RVec sv = svd.singularValues();
          CHECK(sv[1] / sv[0] < 1e-10);
        }
      }
    }
  }
  SUBCASE("steering norms") {
    for (const CVec& a : s.a_T) CHECK(a.squaredNorm() == doctest::Approx(cfg.M_T()));
    for (const CVec& a : s.a_R) CHECK(a.squaredNorm() == doctest::Approx(cfg.M_R()));
  }
  SUBCASE("doubling the TAP distance halves the echo amplitude") {
    CHECK(reflection_scale(cfg, 1.0, 20.0, 15.0) == doctest::Approx(0.5 * reflection_scale(cfg, 1.0, 10.0, 15.0)));
    // Monte-Carlo: mean |alpha| with unit varpi statistics
    double m1 = 0, m2 = 0;
    Rng r2(5);
    for (int t = 0; t < 20000; ++t) {
      const double v = std::abs(complex_normal(r2));
      m1 += v * reflection_scale(cfg, 1.0, 10.0, 15.0);
      m2 += v * reflection_scale(cfg, 1.0, 20.0, 15.0);
    }
    CHECK(m2 / m1 == doctest::Approx(0.5));
  }
  SUBCASE("G W agrees with an elementwise sum over blocks") {
    const int n = cfg.tx_dim(), cols = cfg.K + 1;
    CMat w(n, cols);
    for (int i = 0; i < n * cols; ++i) w(i) = complex_normal(rng);
    const CMat gw = s.G_t[0] * w;
    const int ns = cfg.N_C + 1;
    for (int r = 0; r < cfg.M_R(); ++r) {
      for (int c = 0; c < cols; ++c) {
        cd acc = 0;
        for (int i = 0; i < cfg.N_T; ++i)
          for (int m = 0; m < cfg.M_T(); ++m)
            acc += s.alpha[s.alpha_index(i, 0, 0)] * s.a_R[0 * ns][r] * std::conj(s.a_T[i * ns][m]) *
                   w(i * cfg.M_T() + m, c);
        CHECK(std::abs(acc - gw(r, c)) < 1e-12 * (1 + std::abs(acc)));
      }
    }
  }
}
