#pragma once

#include <cstdint>
#include <string>

#include "cfisac/channel/config.hpp"
#include "cfisac/stcib/data.hpp"

namespace cfisac::harness {

stcib::Dims dims_of(const channel::SystemConfig& cfg);

struct GenerateOptions {
  int samples = 3000;
  std::uint64_t seed = 1;
  bool scene_per_sample = false;  // false: one deployment, small-scale fading varies per sample
  int threads = 1;
};

/// Draws `samples` realisations. Sample i uses its own stream seeded from (seed, i), so the output
/// does not depend on the thread count.
stcib::Dataset generate_dataset(const channel::SystemConfig& cfg, const GenerateOptions& opt);

/// Consecutive slice [start, start + count).
stcib::Dataset subset(const stcib::Dataset& d, std::size_t start, std::size_t count);

struct Splits {
  stcib::Dataset train, val, test;
};
Splits split(const stcib::Dataset& d, std::size_t n_train, std::size_t n_val, std::size_t n_test);

/// Text header with the dimensions, sample count and seed, then little-endian binary64 sections
/// f_true, f_hat, G_t, G_c with complex values interleaved (re, im), row-major.
void save_dataset(const std::string& path, const stcib::Dataset& d);
stcib::Dataset load_dataset(const std::string& path);

}  // namespace cfisac::harness
