#include "cfisac/stcib/model.hpp"

#include <stdexcept>

namespace cfisac::stcib {

using namespace cfisac::ad;

void Architecture::validate() const {
  if (dims.N_T < 1 || dims.M_T < 1 || dims.K < 1) throw std::invalid_argument("architecture: bad dimensions");
  if (heads < 1 || dims.d() % heads != 0) throw std::invalid_argument("architecture: d must be divisible by heads");
  if (inducing < 1) throw std::invalid_argument("architecture: need at least one inducing point");
  if (!(budget > 0)) throw std::invalid_argument("architecture: power budget must be positive");
}

Tensor user_features(const std::vector<CVec>& f) {
  if (f.empty()) throw std::invalid_argument("user_features: no users");
  const int n = static_cast<int>(f[0].size());
  Tensor t({1, static_cast<int>(f.size()), 2 * n});
  for (int k = 0; k < static_cast<int>(f.size()); ++k) {
    if (f[k].size() != n) throw std::invalid_argument("user_features: ragged channel vectors");
    for (int m = 0; m < n; ++m) {
      t(0, k, m) = f[k][m].real();
      t(0, k, n + m) = f[k][m].imag();
    }
  }
  return t;
}

Tensor stack(const std::vector<const Tensor*>& parts) {
  const Shape s = parts.at(0)->shape();
  Tensor out({static_cast<int>(parts.size()), s.rows, s.cols});
  const std::size_t per = static_cast<std::size_t>(s.rows) * s.cols;
  for (std::size_t b = 0; b < parts.size(); ++b) {
    if (parts[b]->shape() != s) throw std::invalid_argument("stack: shape mismatch");
    std::copy(parts[b]->data(), parts[b]->data() + per, out.data() + b * per);
  }
  return out;
}

CMat to_complex_beamformer(const Tensor& w, int sample) {
  const int cols = w.rows();
  const int n = w.cols() / 2;
  CMat W(n, cols);
  for (int j = 0; j < cols; ++j)
    for (int m = 0; m < n; ++m) W(m, j) = cd(w(sample, j, m), w(sample, j, n + m));
  return W;
}

Tensor to_iq(const CMat& W) {
  const int n = static_cast<int>(W.rows());
  Tensor t({1, static_cast<int>(W.cols()), 2 * n});
  for (int j = 0; j < W.cols(); ++j)
    for (int m = 0; m < n; ++m) {
      t(0, j, m) = W(m, j).real();
      t(0, j, n + m) = W(m, j).imag();
    }
  return t;
}

Model::Model(const Architecture& a, std::uint64_t seed) : arch(a) {
  arch.validate();
  Rng rng(seed);
  const int d = arch.dims.d();
  const int h = arch.heads;
  const int hid = arch.hidden_width();
  input_norm = LayerNormP::make(params, "input.ln", d);
  input_ff = RowFF::make(params, "input.ff", d, hid, rng);
  enc1 = IsabP::make(params, "enc.isab1", d, h, hid, arch.inducing, rng);
  enc2 = IsabP::make(params, "enc.isab2", d, h, hid, arch.inducing, rng);
  pma = PmaP::make(params, "dec.pma", d, h, hid, arch.dims.K + 1, rng);
  sab1 = MabP::make(params, "dec.sab1", d, h, hid, rng);
  sab2 = MabP::make(params, "dec.sab2", d, h, hid, rng);
  output_ff = RowFF::make(params, "dec.out", d, hid, rng);
}

Var Model::preprocess(const Binding& p, Var raw) const { return input_ff(p, input_norm(p, raw)); }

Var Model::encode(const Binding& p, Var f) const { return enc2(p, enc1(p, f)); }

Var Model::decode(const Binding& p, Var u) const {
  const Var z = pma(p, u);
  return output_ff(p, sab(p, sab2, sab(p, sab1, z)));
}

Var Model::forward(const Binding& p, Var raw) const {
  if (raw.shape().cols != arch.dims.d() || raw.shape().rows != arch.dims.K) {
    throw std::invalid_argument("model input has shape " + raw.shape().str() + ", expected (b, K, d)");
  }
  return conditional_scale(decode(p, encode(p, preprocess(p, raw))), arch.budget);
}

CMat Model::infer(const std::vector<CVec>& f_hat) const { return infer_batch({&f_hat}).front(); }

std::vector<CMat> Model::infer_batch(const std::vector<const std::vector<CVec>*>& f_hat) const {
  std::vector<Tensor> feats;
  feats.reserve(f_hat.size());
  for (const auto* f : f_hat) feats.push_back(user_features(*f));
  std::vector<const Tensor*> ptrs;
  for (const Tensor& t : feats) ptrs.push_back(&t);
  Graph g;
  const Binding p(g, params, false);
  const Var w = forward(p, g.constant(stack(ptrs)));
  std::vector<CMat> out;
  for (int b = 0; b < w.shape().batch; ++b) out.push_back(to_complex_beamformer(w.value(), b));
  return out;
}

}  // namespace cfisac::stcib
