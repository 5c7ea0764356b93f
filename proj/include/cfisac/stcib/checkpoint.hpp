#pragma once

#include <cstdint>
#include <string>

#include "cfisac/metrics/metrics.hpp"
#include "cfisac/stcib/model.hpp"

namespace cfisac::stcib {

struct CheckpointMeta {
  metrics::RegimeSpec regime;
  std::uint64_t seed = 0;
  int epoch = 0;
  double val_loss = 0.0;
};

/// Text header (architecture, regime, seed, epoch, validation loss, parameter table) followed by
/// the parameters as little-endian binary64 in table order.
void save_checkpoint(const std::string& path, const Model& model, const CheckpointMeta& meta);

/// Throws std::runtime_error on a malformed or mismatched file.
Model load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace cfisac::stcib
