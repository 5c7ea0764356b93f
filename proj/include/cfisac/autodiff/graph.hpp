#pragma once

#include <functional>
#include <vector>

#include "cfisac/autodiff/tensor.hpp"

namespace cfisac::ad {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while its graph lives.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Tape of a single forward computation. Nodes are appended in topological order, so
/// backward() walks the tape in reverse.
class Graph {
 public:
  using Backward = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives a gradient (data, masks).
  Var constant(Tensor value);
  /// Leaf that receives a gradient (parameters, inputs under test).
  Var variable(Tensor value);

  /// Zeroes all gradients, seeds d(loss)/d(loss) = 1 and back-propagates.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Used by primitive implementations.
  Var record(Tensor value, bool requires_grad, Backward fn);
  const Tensor& value(int id) const { return nodes_[id].value; }
  Tensor& grad(int id) { return nodes_[id].grad; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return graph_->value(id_); }
inline const Tensor& Var::grad() const { return graph_->grad(id_); }
inline bool Var::requires_grad() const { return graph_->requires_grad(id_); }

}  // namespace cfisac::ad
