#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfisac/autodiff/ops.hpp"
#include "cfisac/linalg.hpp"

namespace cfisac::stcib {

using ad::Graph;
using ad::Tensor;
using ad::Var;

/// Flat, named list of learnable tensors. Modules refer to entries by index.
struct ParamStore {
  std::vector<std::string> names;
  std::vector<Tensor> values;

  int add(std::string name, Tensor value);
  std::size_t count() const;  // scalar parameter count
};

/// Parameters placed on a graph for one forward pass.
class Binding {
 public:
  /// trainable = true records the parameters as variables so backward() reaches them.
  Binding(Graph& g, const ParamStore& store, bool trainable);
  Var operator[](int id) const { return vars_[id]; }
  Graph& graph() const { return g_; }
  const std::vector<Var>& vars() const { return vars_; }

 private:
  Graph& g_;
  std::vector<Var> vars_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng);

struct Linear {
  int W = -1, b = -1;
  static Linear make(ParamStore& s, const std::string& name, int in, int out, Rng& rng);
  Var operator()(const Binding& p, Var x) const;
};

/// Row-wise feed-forward: Linear(d, hidden) -> relu -> Linear(hidden, d).
struct RowFF {
  Linear first, second;
  static RowFF make(ParamStore& s, const std::string& name, int d, int hidden, Rng& rng);
  Var operator()(const Binding& p, Var x) const;
};

struct LayerNormP {
  int gain = -1, bias = -1;
  static LayerNormP make(ParamStore& s, const std::string& name, int d);
  Var operator()(const Binding& p, Var x) const;
};

/// softmax(Q K^T / sqrt(cols(Q))) V, row-wise softmax.
Var attention(Var q, Var k, Var v);

/// Multiply-accumulate count of attention() calls on this thread since the last reset.
std::uint64_t attention_flops();
void reset_attention_flops();

/// Projections are d x d matrices whose column block h belongs to head h.
struct MultiHeadP {
  int WQ = -1, WK = -1, WV = -1, WO = -1;
  int heads = 1;
  static MultiHeadP make(ParamStore& s, const std::string& name, int d, int heads, Rng& rng);
  Var operator()(const Binding& p, Var q, Var k, Var v) const;
};

/// J = LN(X + MultiHead(X, Y, Y)); out = LN(J + rFF(J)).
struct MabP {
  MultiHeadP mh;
  LayerNormP ln1, ln2;
  RowFF ff;
  static MabP make(ParamStore& s, const std::string& name, int d, int heads, int hidden, Rng& rng);
  Var operator()(const Binding& p, Var x, Var y) const;
};

/// MAB(F, MAB(I, F)) with n learnable inducing points I.
struct IsabP {
  int inducing = -1;
  MabP inner, outer;
  static IsabP make(ParamStore& s, const std::string& name, int d, int heads, int hidden, int n, Rng& rng);
  Var operator()(const Binding& p, Var f) const;
};

/// MAB(P, rFF(U)) with q learnable seed vectors P.
struct PmaP {
  int seeds = -1;
  RowFF ff;
  MabP mab;
  static PmaP make(ParamStore& s, const std::string& name, int d, int heads, int hidden, int q, Rng& rng);
  Var operator()(const Binding& p, Var u) const;
};

/// SAB(V) = MAB(V, V).
inline Var sab(const Binding& p, const MabP& m, Var v) { return m(p, v, v); }

}  // namespace cfisac::stcib
