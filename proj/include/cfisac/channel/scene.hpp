#pragma once

#include <vector>

#include "cfisac/channel/config.hpp"
#include "cfisac/linalg.hpp"

namespace cfisac::channel {

using Point = Eigen::Vector3d;

struct Angles {
  double psi = 0.0;    // azimuth, rad
  double theta = 0.0;  // polar angle from the array normal, rad
};

struct LinkGeometry {
  Angles angles;
  double distance = 0.0;
};

/// Angles of `to` seen from an array at `from` facing the ground (normal along -z).
LinkGeometry link_geometry(const Point& from, const Point& to);

/// Linear large-scale coefficient for a link of the given length, including link_gain_db.
double large_scale_coefficient(const SystemConfig& cfg, double distance);

struct Scene {
  std::vector<Point> taps, raps, users, clutters;
  Point target = Point::Zero();

  // Communication links, index i * K + k.
  std::vector<LinkGeometry> comm;
  std::vector<double> rician;
  std::vector<double> varsigma;

  // Sensing links, scatterer m = 0 is the target and m = 1..N_C are clutters.
  // tx index i * (N_C + 1) + m, rx index j * (N_C + 1) + m.
  std::vector<LinkGeometry> tx;
  std::vector<LinkGeometry> rx;

  int K() const { return static_cast<int>(users.size()); }
  int N_T() const { return static_cast<int>(taps.size()); }
  int N_R() const { return static_cast<int>(raps.size()); }
  int N_C() const { return static_cast<int>(clutters.size()); }
  int comm_index(int i, int k) const { return i * K() + k; }
  int tx_index(int i, int m) const { return i * (N_C() + 1) + m; }
  int rx_index(int j, int m) const { return j * (N_C() + 1) + m; }
  const Point& scatterer(int m) const { return m == 0 ? target : clutters[m - 1]; }
};

/// Places all nodes (see SystemConfig for the layout) and derives every link quantity.
Scene build_scene(const SystemConfig& cfg, Rng& rng);

/// Recomputes angles, distances, Rician factors and large-scale coefficients from positions.
/// Rician factors are drawn uniformly from the configured range.
void derive_links(Scene& scene, const SystemConfig& cfg, Rng& rng);

}  // namespace cfisac::channel
