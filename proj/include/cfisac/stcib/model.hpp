#pragma once

#include <vector>

#include "cfisac/stcib/data.hpp"
#include "cfisac/stcib/layers.hpp"

namespace cfisac::stcib {

struct Architecture {
  Dims dims;
  int heads = 2;
  int inducing = 16;
  int hidden = 0;  // rFF hidden width; 0 means 2d
  double budget = 40.0;  // rho N_T

  int hidden_width() const { return hidden > 0 ? hidden : 2 * dims.d(); }
  void validate() const;
};

/// Rows [Re f_k, Im f_k] for every user, shape (1, K, d).
Tensor user_features(const std::vector<CVec>& f);

/// Stacks per-sample (1, r, c) tensors into one (b, r, c) tensor.
Tensor stack(const std::vector<const Tensor*>& parts);

/// Inverse of the I/Q layout: row j = [Re w_j, Im w_j] becomes column j of W.
CMat to_complex_beamformer(const Tensor& w_tilde, int sample = 0);
/// Row j of the result is [Re w_j, Im w_j] for column j of W; shape (1, cols(W), 2 rows(W)).
Tensor to_iq(const CMat& W);

struct Model {
  Architecture arch;
  ParamStore params;
  LayerNormP input_norm;
  RowFF input_ff;
  IsabP enc1, enc2;
  PmaP pma;
  MabP sab1, sab2;
  RowFF output_ff;

  Model() = default;
  Model(const Architecture& arch, std::uint64_t seed);

  /// LayerNorm then rFF over the raw I/Q rows.
  Var preprocess(const Binding& p, Var raw) const;
  Var encode(const Binding& p, Var f) const;
  /// rFF(SAB(SAB(PMA(U)))), shape (b, K + 1, d).
  Var decode(const Binding& p, Var u) const;
  /// Full pipeline from raw I/Q features (b, K, d) to the power-projected W~ (b, K + 1, d).
  Var forward(const Binding& p, Var raw) const;

  /// Single forward pass without parameter mutation.
  CMat infer(const std::vector<CVec>& f_hat) const;
  std::vector<CMat> infer_batch(const std::vector<const std::vector<CVec>*>& f_hat) const;
};

}  // namespace cfisac::stcib
