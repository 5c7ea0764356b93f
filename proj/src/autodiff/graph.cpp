#include "cfisac/autodiff/graph.hpp"

#include <stdexcept>

namespace cfisac::ad {

Var Graph::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Graph::variable(Tensor value) { return record(std::move(value), true, nullptr); }

Var Graph::record(Tensor value, bool requires_grad, Backward fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw std::invalid_argument("loss belongs to another graph");
  if (loss.value().size() != 1) {
    throw std::invalid_argument("backward() needs a scalar loss, got " + loss.shape().str());
  }
  for (auto& n : nodes_) {
    if (n.requires_grad) {
      if (n.grad.shape() == n.value.shape()) {
        n.grad.fill(0.0);
      } else {
        n.grad = Tensor(n.value.shape());
      }
    }
  }
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad.fill(1.0);
  for (int id = loss.id(); id >= 0; --id) {
    if (nodes_[id].requires_grad && nodes_[id].backward) nodes_[id].backward(*this, id);
  }
}

}  // namespace cfisac::ad
