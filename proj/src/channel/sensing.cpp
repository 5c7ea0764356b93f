#include "cfisac/channel/sensing.hpp"

#include <cmath>
#include <stdexcept>

#include "cfisac/channel/channel_model.hpp"

namespace cfisac::channel {

double reflection_scale(const SystemConfig& cfg, double rcs_variance, double d_im, double d_jm) {
  const double four_pi = 4.0 * kPi;
  const double p = cfg.wavelength * cfg.wavelength * rcs_variance /
                   (four_pi * four_pi * four_pi * d_im * d_im * d_jm * d_jm);
  return std::sqrt(p * db_to_linear(cfg.link_gain_db + cfg.echo_gain_db));
}

SensingResponse assemble_sensing(const Scene& scene, const SystemConfig& cfg, const std::vector<cd>& varpi) {
  SensingResponse s;
  s.N_T = scene.N_T();
  s.N_R = scene.N_R();
  s.N_C = scene.N_C();
  s.M_T = cfg.M_T();
  s.M_R = cfg.M_R();
  const int ns = s.N_C + 1;
  if (static_cast<int>(varpi.size()) != s.N_T * s.N_R * ns) {
    throw std::invalid_argument("assemble_sensing: varpi has the wrong length");
  }
  for (int i = 0; i < s.N_T; ++i)
    for (int m = 0; m < ns; ++m) {
      const Angles& a = scene.tx[scene.tx_index(i, m)].angles;
      s.a_T.push_back(planar_steering(a.psi, a.theta, cfg.M_T1, cfg.M_T2));
    }
  for (int j = 0; j < s.N_R; ++j)
    for (int m = 0; m < ns; ++m) {
      const Angles& a = scene.rx[scene.rx_index(j, m)].angles;
      s.a_R.push_back(planar_steering(a.psi, a.theta, cfg.M_R1, cfg.M_R2));
    }
  s.alpha.assign(varpi.size(), cd(0.0));
  for (int i = 0; i < s.N_T; ++i)
    for (int j = 0; j < s.N_R; ++j)
      for (int m = 0; m < ns; ++m) {
        const double rcs = m == 0 ? cfg.rcs_target : cfg.rcs_clutter;
        const double amp = reflection_scale(cfg, rcs, scene.tx[scene.tx_index(i, m)].distance,
                                            scene.rx[scene.rx_index(j, m)].distance);
        const int idx = s.alpha_index(i, j, m);
        s.alpha[idx] = amp * varpi[idx];
      }

  for (int j = 0; j < s.N_R; ++j) {
    for (int m = 0; m < ns; ++m) {
      CMat g(s.M_R, s.N_T * s.M_T);
      const CVec& ar = s.a_R[j * ns + m];
      for (int i = 0; i < s.N_T; ++i) {
        g.middleCols(i * s.M_T, s.M_T) = s.alpha[s.alpha_index(i, j, m)] * ar * s.a_T[i * ns + m].adjoint();
      }
      if (m == 0) {
        s.G_t.push_back(g);
      } else {
        s.G_c.push_back(g);
      }
    }
  }
  return s;
}

SensingResponse sensing_response(const Scene& scene, const SystemConfig& cfg, Rng& rng) {
  const int n = scene.N_T() * scene.N_R() * (scene.N_C() + 1);
  std::vector<cd> varpi(n);
  for (cd& v : varpi) v = complex_normal(rng);
  return assemble_sensing(scene, cfg, varpi);
}

}  // namespace cfisac::channel
