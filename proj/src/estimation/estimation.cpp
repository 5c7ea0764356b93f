#include "cfisac/estimation/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "cfisac/localization/hermitian_eig.hpp"

namespace cfisac::estimation {

PilotBook make_pilots(int K, int tau_p) {
  if (K < 1 || tau_p < K) throw std::invalid_argument("make_pilots: need 1 <= K <= tau_p");
  PilotBook book;
  book.tau_p = tau_p;
  const double norm = 1.0 / std::sqrt(static_cast<double>(tau_p));
  for (int k = 0; k < K; ++k) {
    CVec row(tau_p);
    for (int t = 0; t < tau_p; ++t) {
      // exact phase reduction keeps the Gram matrix at machine precision
      const long long idx = (static_cast<long long>(k) * t) % tau_p;
      row[t] = std::polar(norm, -2.0 * kPi * static_cast<double>(idx) / tau_p);
    }
    book.phi.push_back(row);
  }
  return book;
}

double pilot_energy(const channel::SystemConfig& cfg) { return cfg.rho_p * cfg.tau_p / cfg.K; }

std::vector<CMat> receive_pilots(const channel::ChannelSet& channels, const PilotBook& pilots, double energy,
                                 Rng& rng, bool add_noise) {
  const auto& st = channels.stats;
  if (static_cast<int>(pilots.phi.size()) != st.K) throw std::invalid_argument("receive_pilots: pilot count != K");
  const double amp = std::sqrt(energy);
  std::vector<CMat> out;
  for (int i = 0; i < st.N_T; ++i) {
    CMat y = CMat::Zero(st.M_T, pilots.tau_p);
    for (int k = 0; k < st.K; ++k) y += amp * channels.link(i, k) * pilots.phi[k].transpose();
    if (add_noise) {
      for (int t = 0; t < y.size(); ++t) y(t) += complex_normal(rng);
    }
    out.push_back(std::move(y));
  }
  return out;
}

CVec despread(const CMat& Y, const CVec& phi) {
  if (Y.cols() != phi.size()) throw std::invalid_argument("despread: pilot length mismatch");
  return Y * phi.conjugate();
}

LinkEstimate mmse_estimate(const CVec& y_tilde, const CVec& c, const CMat& C_h, double energy) {
  const int n = static_cast<int>(c.size());
  const double amp = std::sqrt(energy);
  const CMat c_yy = energy * C_h + CMat::Identity(n, n);
  const auto eig = localization::hermitian_eig(0.5 * (c_yy + c_yy.adjoint()));
  if (eig.values.maxCoeff() / eig.values.minCoeff() > 1e12) {
    throw std::runtime_error("mmse_estimate: observation covariance is ill-conditioned");
  }
  const CMat c_yy_inv = eig.vectors * eig.values.cwiseInverse().cast<cd>().asDiagonal() * eig.vectors.adjoint();
  const CMat gain = amp * C_h * c_yy_inv;  // C_hy C_yy^-1
  LinkEstimate out;
  out.h_hat = c + gain * (y_tilde - amp * c);
  out.C_hhat = gain * (amp * C_h);
  out.C_hhat = 0.5 * (out.C_hhat + out.C_hhat.adjoint());
  out.C_eps = C_h - out.C_hhat;
  return out;
}

ChannelEstimate estimate_channels(const channel::ChannelSet& channels, const channel::SystemConfig& cfg, Rng& rng) {
  const auto& st = channels.stats;
  const PilotBook pilots = make_pilots(st.K, cfg.tau_p);
  const double energy = pilot_energy(cfg);
  const std::vector<CMat> y = receive_pilots(channels, pilots, energy, rng);
  ChannelEstimate est;
  est.N_T = st.N_T;
  est.K = st.K;
  for (int i = 0; i < st.N_T; ++i) {
    for (int k = 0; k < st.K; ++k) {
      const CMat ch = st.covariance(i, k);
      LinkEstimate le = mmse_estimate(despread(y[i], pilots.phi[k]), st.c[st.index(i, k)], ch, energy);
      est.h_hat.push_back(std::move(le.h_hat));
      est.C_h.push_back(ch);
      est.C_hhat.push_back(std::move(le.C_hhat));
      est.C_eps.push_back(std::move(le.C_eps));
    }
  }
  est.f_hat = channel::stack_users(est.h_hat, st.N_T, st.K);
  return est;
}

cd corrupt_csi(cd g, double chi, Rng& rng) {
  if (!(chi >= 0.0 && chi <= 1.0)) throw std::invalid_argument("corrupt_csi: chi must lie in [0, 1]");
  if (chi == 0.0) return g;
  return g + std::sqrt(chi) * std::abs(g) * complex_normal(rng);
}

CVec corrupt_csi(const CVec& g, double chi, Rng& rng) {
  CVec out(g.size());
  for (int m = 0; m < g.size(); ++m) out[m] = corrupt_csi(g[m], chi, rng);
  return out;
}

}  // namespace cfisac::estimation
