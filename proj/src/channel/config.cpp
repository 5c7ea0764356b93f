#include "cfisac/channel/config.hpp"

#include <stdexcept>

namespace cfisac::channel {

void SystemConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
  };
  need(N_T >= 1 && N_R >= 1 && K >= 1 && N_C >= 0, "counts N_T, N_R, K must be >= 1 and N_C >= 0");
  need(M_T1 >= 1 && M_T2 >= 1 && M_R1 >= 1 && M_R2 >= 1, "array dimensions must be >= 1");
  need(tau_p >= K, "tau_p must be >= K");
  need(tau_p < tau_c, "tau_p must be < tau_c");
  need(rho > 0 && rho_p > 0, "rho and rho_p must be positive");
  need(rician_min <= rician_max && rician_min >= 0, "rician range must satisfy 0 <= min <= max");
  need(wavelength > 0 && antenna_area > 0, "wavelength and antenna area must be positive");
  need(rcs_target >= 0 && rcs_clutter >= 0, "rcs variances must be nonnegative");
  need(area_side > 0, "area_side must be positive");
  need(ap_height != ground_height, "ap_height and ground_height must differ");
  need(sensing_layout != SensingLayout::anchored ||
           static_cast<int>(clutter_angles_deg.size()) >= N_C,
       "anchored layout needs one clutter angle pair per clutter");
}

}  // namespace cfisac::channel
