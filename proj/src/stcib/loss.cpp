#include "cfisac/stcib/loss.hpp"

#include <stdexcept>

namespace cfisac::stcib {

using namespace cfisac::ad;

Tensor comm_basis(const std::vector<CVec>& f) {
  const int K = static_cast<int>(f.size());
  const int n = static_cast<int>(f.at(0).size());
  Tensor m({1, 2 * n, 2 * K});
  for (int k = 0; k < K; ++k) {
    for (int r = 0; r < n; ++r) {
      const double fr = f[k][r].real(), fi = f[k][r].imag();
      m(0, r, k) = fr;
      m(0, n + r, k) = fi;
      m(0, r, K + k) = -fi;
      m(0, n + r, K + k) = fr;
    }
  }
  return m;
}

Tensor sensing_basis(const channel::SensingResponse& s) {
  const int n = s.N_T * s.M_T;
  const int ns = s.N_C + 1;
  Tensor q({1, 2 * n, 2 * s.N_R * ns * s.M_R});
  int col = 0;
  for (int j = 0; j < s.N_R; ++j) {
    for (int m = 0; m < ns; ++m) {
      const CMat& g = m == 0 ? s.G_t[j] : s.clutter(j, m - 1);
      if (g.rows() != s.M_R || g.cols() != n) throw std::invalid_argument("sensing_basis: G has the wrong shape");
      for (int r = 0; r < s.M_R; ++r, col += 2) {
        for (int c = 0; c < n; ++c) {
          const double gr = g(r, c).real(), gi = g(r, c).imag();
          // g w = (gr wr - gi wi) + j (gi wr + gr wi)
          q(0, c, col) = gr;
          q(0, n + c, col) = -gi;
          q(0, c, col + 1) = gi;
          q(0, n + c, col + 1) = gr;
        }
      }
    }
  }
  return q;
}

EncodedSample encode_sample(const std::vector<CVec>& f, const channel::SensingResponse& s) {
  Tensor feat({1, static_cast<int>(f.size()), 2 * static_cast<int>(f.at(0).size())});
  const int n = static_cast<int>(f[0].size());
  for (int k = 0; k < static_cast<int>(f.size()); ++k)
    for (int m = 0; m < n; ++m) {
      feat(0, k, m) = f[k][m].real();
      feat(0, k, n + m) = f[k][m].imag();
    }
  return {std::move(feat), comm_basis(f), sensing_basis(s)};
}

RateVars differentiable_rates(Var w, Var comm, Var sens, const Dims& dims, double kappa) {
  Graph& g = w.graph();
  const int K = dims.K, ns = dims.N_C + 1;

  // |f_k^H w_j|^2 for every stream j and user k: (b, K + 1, K)
  Tensor pair({1, 2 * K, K});
  for (int k = 0; k < K; ++k) pair(0, k, k) = pair(0, K + k, k) = 1.0;
  const Var energy = matmul(square(matmul(w, comm)), g.constant(pair));
  Tensor mask({1, K + 1, K});
  for (int k = 0; k < K; ++k) mask(0, k + 1, k) = 1.0;
  const Var signal = sum(hadamard(energy, g.constant(mask)), Axis::rows);
  const Var total = sum(energy, Axis::rows);
  RateVars r;
  r.sinr = signal / ((total - signal) + 1.0);
  r.R_C = scale(log2(r.sinr + 1.0), kappa);

  // ||G_{j,m} W||_F^2 aggregated into target and clutter energy per RAP: (b, 1, N_R)
  const int cols = 2 * dims.N_R * ns * dims.M_R;
  Tensor at({1, cols, dims.N_R}), ac({1, cols, dims.N_R});
  int col = 0;
  for (int j = 0; j < dims.N_R; ++j)
    for (int m = 0; m < ns; ++m)
      for (int q = 0; q < 2 * dims.M_R; ++q, ++col) (m == 0 ? at : ac)(0, col, j) = 1.0;
  const Var per_col = sum(square(matmul(w, sens)), Axis::rows);
  const Var target = matmul(per_col, g.constant(at));
  const Var clutter = matmul(per_col, g.constant(ac));
  r.scnr = target / (clutter + static_cast<double>(dims.M_R));
  r.R_S = scale(log2(r.scnr + 1.0), kappa);
  return r;
}

Var regime_loss(const RateVars& r, const LossConfig& cfg) {
  const auto& reg = cfg.regime;
  const double n = static_cast<double>(r.R_C.shape().batch);
  switch (reg.kind) {
    case metrics::Regime::sc: {
      const Var shortfall = relu(scale(r.R_C, -1.0) + (reg.vartheta_th + cfg.margin));
      const Var per = sum_all(r.R_S) - scale(sum_all(square(shortfall)), cfg.penalty);
      return scale(per, -1.0 / n);
    }
    case metrics::Regime::cc: {
      const Var shortfall = relu(scale(r.R_S, -1.0) + (reg.zeta_th + cfg.margin));
      const Var per = sum_all(r.R_C) - scale(sum_all(square(shortfall)), cfg.penalty);
      return scale(per, -1.0 / n);
    }
    case metrics::Regime::joint:
      return scale(scale(sum_all(r.R_C), reg.eta) + scale(sum_all(r.R_S), 1.0 - reg.eta), -1.0 / n);
  }
  throw std::logic_error("regime_loss: unknown regime");
}

}  // namespace cfisac::stcib
