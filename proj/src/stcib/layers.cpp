#include "cfisac/stcib/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace cfisac::stcib {

using namespace cfisac::ad;

int ParamStore::add(std::string name, Tensor value) {
  names.push_back(std::move(name));
  values.push_back(std::move(value));
  return static_cast<int>(values.size()) - 1;
}

std::size_t ParamStore::count() const {
  std::size_t n = 0;
  for (const Tensor& t : values) n += t.size();
  return n;
}

Binding::Binding(Graph& g, const ParamStore& store, bool trainable) : g_(g) {
  for (const Tensor& t : store.values) vars_.push_back(trainable ? g.variable(t) : g.constant(t));
}

Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng) {
  return Tensor::uniform({1, fan_in, fan_out}, rng, std::sqrt(6.0 / (fan_in + fan_out)));
}

Linear Linear::make(ParamStore& s, const std::string& name, int in, int out, Rng& rng) {
  Linear l;
  l.W = s.add(name + ".W", xavier_uniform(in, out, rng));
  l.b = s.add(name + ".b", Tensor({1, 1, out}));
  return l;
}

Var Linear::operator()(const Binding& p, Var x) const { return matmul(x, p[W]) + p[b]; }

RowFF RowFF::make(ParamStore& s, const std::string& name, int d, int hidden, Rng& rng) {
  return {Linear::make(s, name + ".0", d, hidden, rng), Linear::make(s, name + ".1", hidden, d, rng)};
}

Var RowFF::operator()(const Binding& p, Var x) const { return second(p, relu(first(p, x))); }

LayerNormP LayerNormP::make(ParamStore& s, const std::string& name, int d) {
  LayerNormP ln;
  ln.gain = s.add(name + ".gain", Tensor({1, 1, d}, 1.0));
  ln.bias = s.add(name + ".bias", Tensor({1, 1, d}, 0.0));
  return ln;
}

Var LayerNormP::operator()(const Binding& p, Var x) const { return layer_norm(x, p[gain], p[bias]); }

namespace {
thread_local std::uint64_t g_attention_flops = 0;
}

std::uint64_t attention_flops() { return g_attention_flops; }
void reset_attention_flops() { g_attention_flops = 0; }

Var attention(Var q, Var k, Var v) {
  const Shape& qs = q.shape();
  const Shape& ks = k.shape();
  const Shape& vs = v.shape();
  const int batch = std::max({qs.batch, ks.batch, vs.batch});
  g_attention_flops += static_cast<std::uint64_t>(batch) * qs.rows * ks.rows * (qs.cols + vs.cols);
  const double inv = 1.0 / std::sqrt(static_cast<double>(qs.cols));
  return matmul(row_softmax(scale(matmul(q, transpose(k)), inv)), v);
}

MultiHeadP MultiHeadP::make(ParamStore& s, const std::string& name, int d, int heads, Rng& rng) {
  if (heads < 1 || d % heads != 0) throw std::invalid_argument("multihead: d must be divisible by the head count");
  MultiHeadP m;
  m.heads = heads;
  m.WQ = s.add(name + ".WQ", xavier_uniform(d, d, rng));
  m.WK = s.add(name + ".WK", xavier_uniform(d, d, rng));
  m.WV = s.add(name + ".WV", xavier_uniform(d, d, rng));
  m.WO = s.add(name + ".WO", xavier_uniform(d, d, rng));
  return m;
}

Var MultiHeadP::operator()(const Binding& p, Var q, Var k, Var v) const {
  const int d = q.shape().cols;
  const int dh = d / heads;
  const Var Q = matmul(q, p[WQ]);
  const Var K = matmul(k, p[WK]);
  const Var V = matmul(v, p[WV]);
  std::vector<Var> outs;
  for (int h = 0; h < heads; ++h) {
    outs.push_back(attention(slice(Q, Axis::cols, h * dh, dh), slice(K, Axis::cols, h * dh, dh),
                             slice(V, Axis::cols, h * dh, dh)));
  }
  const Var cat = heads == 1 ? outs[0] : concat(outs, Axis::cols);
  return matmul(cat, p[WO]);
}

MabP MabP::make(ParamStore& s, const std::string& name, int d, int heads, int hidden, Rng& rng) {
  MabP m;
  m.mh = MultiHeadP::make(s, name + ".mh", d, heads, rng);
  m.ln1 = LayerNormP::make(s, name + ".ln1", d);
  m.ff = RowFF::make(s, name + ".ff", d, hidden, rng);
  m.ln2 = LayerNormP::make(s, name + ".ln2", d);
  return m;
}

Var MabP::operator()(const Binding& p, Var x, Var y) const {
  const Var j = ln1(p, x + mh(p, x, y, y));
  return ln2(p, j + ff(p, j));
}

IsabP IsabP::make(ParamStore& s, const std::string& name, int d, int heads, int hidden, int n, Rng& rng) {
  IsabP b;
  b.inducing = s.add(name + ".I", Tensor::randn({1, n, d}, rng, 0.02));
  b.inner = MabP::make(s, name + ".inner", d, heads, hidden, rng);
  b.outer = MabP::make(s, name + ".outer", d, heads, hidden, rng);
  return b;
}

Var IsabP::operator()(const Binding& p, Var f) const {
  const Var h = inner(p, p[inducing], f);
  return outer(p, f, h);
}

PmaP PmaP::make(ParamStore& s, const std::string& name, int d, int heads, int hidden, int q, Rng& rng) {
  PmaP b;
  b.seeds = s.add(name + ".P", Tensor::randn({1, q, d}, rng, 0.02));
  b.ff = RowFF::make(s, name + ".ff", d, hidden, rng);
  b.mab = MabP::make(s, name + ".mab", d, heads, hidden, rng);
  return b;
}

Var PmaP::operator()(const Binding& p, Var u) const { return mab(p, p[seeds], ff(p, u)); }

}  // namespace cfisac::stcib
