#include "cfisac/channel/scene.hpp"

#include <cmath>
#include <stdexcept>

namespace cfisac::channel {

LinkGeometry link_geometry(const Point& from, const Point& to) {
  const Point d = to - from;
  LinkGeometry g;
  g.distance = d.norm();
  g.angles.psi = std::atan2(d.y(), d.x());
  g.angles.theta = std::atan2(std::hypot(d.x(), d.y()), std::abs(d.z()));
  return g;
}

double large_scale_coefficient(const SystemConfig& cfg, double distance) {
  if (!(distance > 0)) throw std::invalid_argument("large_scale_coefficient: distance must be positive");
  const double pl_db = cfg.pathloss_ref_db - 10.0 * cfg.pathloss_exponent * std::log10(distance);
  return db_to_linear(pl_db + cfg.link_gain_db);
}

namespace {

Point uniform_point(const SystemConfig& cfg, double height, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, cfg.area_side);
  const double x = u(rng);
  const double y = u(rng);
  return {x, y, height};
}

double min_distance(const Point& p, const std::vector<Point>& others) {
  double best = INFINITY;
  for (const Point& o : others) best = std::min(best, (p - o).norm());
  return best;
}

// Ground node at least 1 m from every access point.
Point ground_node(const SystemConfig& cfg, const std::vector<Point>& aps, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Point p = uniform_point(cfg, cfg.ground_height, rng);
    if (min_distance(p, aps) >= 1.0) return p;
  }
  throw std::runtime_error("build_scene: could not place a node at least 1 m from the access points");
}

Point anchored_point(const SystemConfig& cfg, const Point& rap, std::pair<double, double> deg) {
  const double psi = deg.first * kPi / 180.0;
  const double theta = deg.second * kPi / 180.0;
  const double r = std::abs(cfg.ap_height - cfg.ground_height) * std::tan(theta);
  return {rap.x() + r * std::cos(psi), rap.y() + r * std::sin(psi), cfg.ground_height};
}

}  // namespace

void derive_links(Scene& s, const SystemConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> kdist(cfg.rician_min, cfg.rician_max);
  const int nt = s.N_T(), nr = s.N_R(), k = s.K(), ns = s.N_C() + 1;
  s.comm.assign(nt * k, {});
  s.rician.assign(nt * k, 0.0);
  s.varsigma.assign(nt * k, 0.0);
  for (int i = 0; i < nt; ++i) {
    for (int u = 0; u < k; ++u) {
      const int idx = s.comm_index(i, u);
      s.comm[idx] = link_geometry(s.taps[i], s.users[u]);
      s.rician[idx] = cfg.rician_min == cfg.rician_max ? cfg.rician_min : kdist(rng);
      s.varsigma[idx] = large_scale_coefficient(cfg, s.comm[idx].distance);
    }
  }
  s.tx.assign(nt * ns, {});
  s.rx.assign(nr * ns, {});
  for (int m = 0; m < ns; ++m) {
    for (int i = 0; i < nt; ++i) s.tx[s.tx_index(i, m)] = link_geometry(s.taps[i], s.scatterer(m));
    for (int j = 0; j < nr; ++j) s.rx[s.rx_index(j, m)] = link_geometry(s.raps[j], s.scatterer(m));
  }
}

Scene build_scene(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  Scene s;
  for (int i = 0; i < cfg.N_T; ++i) s.taps.push_back(uniform_point(cfg, cfg.ap_height, rng));
  for (int j = 0; j < cfg.N_R; ++j) s.raps.push_back(uniform_point(cfg, cfg.ap_height, rng));
  std::vector<Point> aps = s.taps;
  aps.insert(aps.end(), s.raps.begin(), s.raps.end());
  for (int k = 0; k < cfg.K; ++k) s.users.push_back(ground_node(cfg, aps, rng));
  if (cfg.sensing_layout == SensingLayout::anchored) {
    s.target = anchored_point(cfg, s.raps[0], cfg.target_angles_deg);
    for (int c = 0; c < cfg.N_C; ++c) s.clutters.push_back(anchored_point(cfg, s.raps[0], cfg.clutter_angles_deg[c]));
  } else {
    s.target = ground_node(cfg, aps, rng);
    for (int c = 0; c < cfg.N_C; ++c) s.clutters.push_back(ground_node(cfg, aps, rng));
  }
  derive_links(s, cfg, rng);
  return s;
}

}  // namespace cfisac::channel
