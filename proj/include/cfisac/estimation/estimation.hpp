#pragma once

#include <vector>

#include "cfisac/channel/channel_model.hpp"

namespace cfisac::estimation {

struct PilotBook {
  int tau_p = 0;
  std::vector<CVec> phi;  // phi[k] holds the row vector phi_k as a column of length tau_p
};

/// First K rows of the unitary DFT basis of size tau_p. Throws if tau_p < K.
PilotBook make_pilots(int K, int tau_p);

/// Per-user pilot energy rho_p tau_p / K: the total pilot power is shared among the K users.
double pilot_energy(const channel::SystemConfig& cfg);

/// Y_i = sqrt(energy) sum_k h_ik phi_k + N_i for every TAP, each M_T x tau_p.
/// With add_noise = false, N_i = 0.
std::vector<CMat> receive_pilots(const channel::ChannelSet& channels, const PilotBook& pilots, double energy,
                                 Rng& rng, bool add_noise = true);

/// y~ = Y phi^H.
CVec despread(const CMat& Y, const CVec& phi);

struct LinkEstimate {
  CVec h_hat;
  CMat C_hhat;
  CMat C_eps;
};

/// MMSE estimate of h ~ CN(c, C_h) from y~ = sqrt(energy) h + n, n ~ CN(0, I).
/// Throws std::runtime_error if the observation covariance has condition number above 1e12.
LinkEstimate mmse_estimate(const CVec& y_tilde, const CVec& c, const CMat& C_h, double energy);

struct ChannelEstimate {
  int N_T = 0, K = 0;
  std::vector<CVec> h_hat;  // index i * K + k
  std::vector<CMat> C_h, C_hhat, C_eps;
  std::vector<CVec> f_hat;  // per user
};

/// Full uplink training: pilots, reception at every TAP, despreading and MMSE estimation.
ChannelEstimate estimate_channels(const channel::ChannelSet& channels, const channel::SystemConfig& cfg,
                                  Rng& rng);

/// g + eps with eps ~ CN(0, chi |g|^2). Throws if chi is outside [0, 1].
cd corrupt_csi(cd g, double chi, Rng& rng);

/// Applies corrupt_csi entrywise.
CVec corrupt_csi(const CVec& g, double chi, Rng& rng);

}  // namespace cfisac::estimation
