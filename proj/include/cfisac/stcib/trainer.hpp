#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cfisac/autodiff/adam.hpp"
#include "cfisac/stcib/loss.hpp"
#include "cfisac/stcib/model.hpp"

namespace cfisac::stcib {

struct TrainSpec {
  LossConfig loss;
  int batch_size = 100;
  int max_epochs = 150;
  int patience = 20;
  double lr = 1e-4;
  // halve-style decay: after `plateau` epochs without a new best, lr *= decay (0 disables)
  int plateau = 0;
  double decay = 0.5;
  std::uint64_t seed = 1;  // batch order
  bool use_estimates = true;  // feed f_hat (true) or f_true into model and loss

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // used during this epoch
  double seconds = 0.0;
};

struct TrainResult {
  Model model;  // best-validation parameters
  std::vector<EpochLog> log;
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
  int best_epoch = 0;
  bool stopped_early = false;
};

std::vector<EncodedSample> encode_dataset(const Dataset& data, bool use_estimates);

/// Mean loss over all samples, evaluated in batches with frozen parameters.
double evaluate_loss(const Model& model, const std::vector<EncodedSample>& data, const LossConfig& loss,
                     double kappa, int batch_size);

/// Loss and parameter gradients for one batch.
double loss_and_gradients(const Model& model, const std::vector<const EncodedSample*>& batch,
                          const LossConfig& loss, double kappa, std::vector<Tensor>* grads);

/// Called after every epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochLog&)>;

/// Mini-batch Adam with early stopping on the validation loss. Throws std::runtime_error on a
/// non-finite loss, naming the learning rate and batch index.
TrainResult train(Model model, const Dataset& train_set, const Dataset& val_set, const TrainSpec& spec,
                  double kappa, const EpochCallback& on_epoch = {});

}  // namespace cfisac::stcib
