#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cfisac::channel {

enum class SensingLayout {
  anchored,  // target/clutters at fixed angles seen from RAP 1
  random,    // target/clutters uniform over the area like users
};

/// System dimensions and large-scale parameters. Defaults are the desk-scale profile.
struct SystemConfig {
  int N_T = 4;
  int N_R = 2;
  int K = 3;
  int N_C = 1;
  int M_T1 = 2, M_T2 = 1;
  int M_R1 = 2, M_R2 = 2;

  double rho = 10.0;    // linear TAP transmit SNR (10 dB)
  double rho_p = 0.25;  // linear pilot SNR (-6 dB)
  int tau_c = 196;
  int tau_p = 4;

  double pathloss_exponent = 3.0;
  double pathloss_ref_db = -40.0;
  // Gain added to every link budget, i.e. the transmit power to receiver noise ratio not
  // captured by rho. Applied to the large-scale coefficients and to the radar echoes.
  double link_gain_db = 90.0;
  // Extra gain on radar echoes only (coherent integration over the frame).
  double echo_gain_db = 10.0;
  double rician_min = 1.0, rician_max = 3.0;
  double antenna_area = 1.0;
  double wavelength = 0.1;
  double rcs_target = 1.0;
  double rcs_clutter = 1.0;

  double area_side = 100.0;
  double ap_height = 10.0;
  double ground_height = 1.5;
  SensingLayout sensing_layout = SensingLayout::anchored;
  // (azimuth, elevation) in degrees as seen from RAP 1.
  std::pair<double, double> target_angles_deg{-45.0, 45.0};
  std::vector<std::pair<double, double>> clutter_angles_deg{{45.0, 30.0}, {0.0, -45.0}};

  std::uint64_t seed = 1;

  int M_T() const { return M_T1 * M_T2; }
  int M_R() const { return M_R1 * M_R2; }
  int tx_dim() const { return N_T * M_T(); }
  double kappa() const { return static_cast<double>(tau_c - tau_p) / tau_c; }
  double power_budget() const { return rho * N_T; }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

}  // namespace cfisac::channel
