#pragma once

#include "cfisac/metrics/metrics.hpp"
#include "cfisac/stcib/data.hpp"
#include "cfisac/stcib/layers.hpp"

namespace cfisac::stcib {

/// Real (1, 2N, 2K) matrix M with (W~ M)[j, k] = Re(f_k^H w_j) and (W~ M)[j, K + k] = Im(f_k^H w_j).
Tensor comm_basis(const std::vector<CVec>& f);

/// Real (1, 2N, C) matrix whose products with W~ give Re and Im of every row of every G_{j,m} times w.
/// Column blocks run over RAP j, scatterer m (0 = target) and receive antenna r.
Tensor sensing_basis(const channel::SensingResponse& s);

struct EncodedSample {
  Tensor features;  // (1, K, d) from the channels the model sees
  Tensor comm;      // comm_basis of the same channels
  Tensor sens;      // sensing_basis
};

EncodedSample encode_sample(const std::vector<CVec>& f, const channel::SensingResponse& s);

struct RateVars {
  Var sinr, R_C;  // (b, 1, K)
  Var scnr, R_S;  // (b, 1, N_R)
};

/// SINR, SCNR and rates of a batch of projected beamformers, differentiable in w_tilde.
RateVars differentiable_rates(Var w_tilde, Var comm, Var sens, const Dims& dims, double kappa);

struct LossConfig {
  metrics::RegimeSpec regime;
  double penalty = 10.0;  // xi_k (SC) or varrho_j (CC), shared by all constraints
  double margin = 0.0;    // added to the rate threshold inside the penalty
};

/// SC: -mean[sum_j R_S - xi sum_k relu(th - R_C)^2]; CC: the mirror image;
/// joint: -mean[eta sum R_C + (1 - eta) sum R_S].
Var regime_loss(const RateVars& r, const LossConfig& cfg);

}  // namespace cfisac::stcib
