#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace cfisac {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

// Standard circularly-symmetric complex Gaussian, E|z|^2 = 1.
inline cd complex_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

inline CVec complex_normal_vector(int n, Rng& rng) {
  CVec z(n);
  for (int i = 0; i < n; ++i) z[i] = complex_normal(rng);
  return z;
}

// splitmix64 finaliser; used to derive independent per-item seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace cfisac
