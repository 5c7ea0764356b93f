#include "cfisac/stcib/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cfisac::stcib {

using namespace cfisac::ad;

void TrainSpec::validate() const {
  loss.regime.validate();
  if (loss.penalty < 0) throw std::invalid_argument("train: penalties must be nonnegative");
  if (batch_size < 1 || max_epochs < 1) throw std::invalid_argument("train: batch size and epochs must be >= 1");
  if (patience >= max_epochs) throw std::invalid_argument("train: patience must be below max epochs");
  if (lr < 0) throw std::invalid_argument("train: learning rate must be nonnegative");
  if (plateau < 0 || !(decay > 0 && decay <= 1)) throw std::invalid_argument("train: need plateau >= 0 and decay in (0, 1]");
}

std::vector<EncodedSample> encode_dataset(const Dataset& data, bool use_estimates) {
  std::vector<EncodedSample> out;
  out.reserve(data.samples.size());
  for (const Sample& s : data.samples) out.push_back(encode_sample(use_estimates ? s.f_hat : s.f_true, s.sensing));
  return out;
}

namespace {

struct BatchVars {
  Var features, comm, sens;
};

BatchVars place_batch(Graph& g, const std::vector<const EncodedSample*>& batch) {
  std::vector<const Tensor*> f, c, s;
  for (const EncodedSample* e : batch) {
    f.push_back(&e->features);
    c.push_back(&e->comm);
    s.push_back(&e->sens);
  }
  return {g.constant(stack(f)), g.constant(stack(c)), g.constant(stack(s))};
}

}  // namespace

double loss_and_gradients(const Model& model, const std::vector<const EncodedSample*>& batch, const LossConfig& loss,
                          double kappa, std::vector<Tensor>* grads) {
  Graph g;
  const Binding p(g, model.params, grads != nullptr);
  const BatchVars b = place_batch(g, batch);
  const Var w = model.forward(p, b.features);
  const Var l = regime_loss(differentiable_rates(w, b.comm, b.sens, model.arch.dims, kappa), loss);
  const double value = l.value().item();
  if (grads) {
    g.backward(l);
    grads->clear();
    for (const Var& v : p.vars()) grads->push_back(v.grad());
  }
  return value;
}

double evaluate_loss(const Model& model, const std::vector<EncodedSample>& data, const LossConfig& loss, double kappa,
                     int batch_size) {
  if (data.empty()) throw std::invalid_argument("evaluate_loss: empty dataset");
  double total = 0.0;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    std::vector<const EncodedSample*> batch;
    for (std::size_t i = start; i < std::min(data.size(), start + batch_size); ++i) batch.push_back(&data[i]);
    total += loss_and_gradients(model, batch, loss, kappa, nullptr) * static_cast<double>(batch.size());
  }
  return total / static_cast<double>(data.size());
}

TrainResult train(Model model, const Dataset& train_set, const Dataset& val_set, const TrainSpec& spec, double kappa,
                  const EpochCallback& on_epoch) {
  spec.validate();
  if (!(train_set.dims == model.arch.dims) || !(val_set.dims == model.arch.dims)) {
    throw std::invalid_argument("train: dataset dimensions do not match the model");
  }
  const auto tr = encode_dataset(train_set, spec.use_estimates);
  const auto va = encode_dataset(val_set, spec.use_estimates);
  if (tr.empty() || va.empty()) throw std::invalid_argument("train: empty training or validation set");

  TrainResult res;
  res.initial_val_loss = evaluate_loss(model, va, spec.loss, kappa, spec.batch_size);
  res.best_val_loss = res.initial_val_loss;
  res.model = model;

  Adam opt({.lr = spec.lr});
  Rng rng(spec.seed);
  std::vector<std::size_t> order(tr.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Tensor*> params;
  for (Tensor& t : model.params.values) params.push_back(&t);
  std::vector<Tensor> grads;
  int since_best = 0;

  for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double train_total = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size, ++batch_index) {
      std::vector<const EncodedSample*> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + spec.batch_size); ++i) batch.push_back(&tr[order[i]]);
      const double l = loss_and_gradients(model, batch, spec.loss, kappa, &grads);
      if (!std::isfinite(l)) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << ", batch " << batch_index << " (lr " << opt.config().lr << ")";
        throw std::runtime_error(msg.str());
      }
      train_total += l * static_cast<double>(batch.size());
      opt.step(params, grads);
    }
    EpochLog log;
    log.epoch = epoch;
    log.lr = opt.config().lr;
    log.train_loss = train_total / static_cast<double>(tr.size());
    log.val_loss = evaluate_loss(model, va, spec.loss, kappa, spec.batch_size);
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.log.push_back(log);

    if (log.val_loss < res.best_val_loss) {
      res.best_val_loss = log.val_loss;
      res.best_epoch = epoch;
      res.model = model;
      since_best = 0;
    } else if (++since_best >= spec.patience) {
      res.stopped_early = true;
      break;
    } else if (spec.plateau > 0 && since_best % spec.plateau == 0) {
      opt.set_lr(opt.config().lr * spec.decay);
    }
    if (on_epoch && !on_epoch(log)) break;
  }
  return res;
}

}  // namespace cfisac::stcib
