#pragma once

#include <cstdint>
#include <vector>

#include "cfisac/channel/sensing.hpp"

namespace cfisac::stcib {

/// One channel realisation: true and estimated user channels plus the sensing response.
struct Sample {
  std::vector<CVec> f_true;
  std::vector<CVec> f_hat;
  channel::SensingResponse sensing;  // only G_t, G_c and the dimensions are required
};

struct Dims {
  int N_T = 4, M_T = 2, K = 3, N_R = 2, M_R = 4, N_C = 1;
  int tx_dim() const { return N_T * M_T; }
  int d() const { return 2 * N_T * M_T; }
  bool operator==(const Dims&) const = default;
};

struct Dataset {
  Dims dims;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;
};

}  // namespace cfisac::stcib
