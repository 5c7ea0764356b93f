#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cfisac/channel/config.hpp"

namespace cfisac::harness {

/// `key = value` lines; `#` starts a comment; blank lines are ignored.
/// Throws std::runtime_error with the line number on malformed or repeated keys.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Everything an experiment run needs. Defaults are the desk-scale profile.
struct Profile {
  channel::SystemConfig system;

  // data
  int n_train = 2000, n_val = 500, n_test = 500;

  // model and training
  int heads = 2;
  int inducing = 16;
  int batch_size = 100;
  int max_epochs = 150;
  int patience = 20;
  double lr = 1e-3;
  int lr_plateau = 10;  // stalled epochs before halving lr, 0 = constant
  double lr_decay = 0.5;
  double penalty = 100.0;
  double margin = 0.05;  // training-only slack added to the rate thresholds

  // ALM-MO
  int alm_outer = 50;
  int alm_inner = 200;
  int alm_samples = 0;  // 0: whole test split

  // sweeps
  std::vector<double> sc_thresholds{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  std::vector<double> cc_thresholds{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<double> joint_etas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int sweep_warm_start = 1;  // 1: each sweep point starts from the previous point's model

  int est_N_T = 8;  // the estimation sweep runs on its own, larger array
  std::string est_array = "2x2";
  std::vector<int> est_users{2, 4, 6, 8};
  std::vector<int> est_pilots{8, 16, 24, 32, 40};
  int est_realizations = 1000;

  std::vector<double> csi_chi{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> csi_rician{1.0, 3.0, 5.0};
  double csi_zeta = 0.2;

  std::vector<int> bench_users{2, 3, 4};
  std::vector<std::string> bench_arrays{"2x1", "2x2"};
  int bench_instances = 100;

  std::uint64_t seed = 1;
  int threads = 1;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// Overrides profile fields from parsed key/values. Unknown keys throw std::invalid_argument.
void apply_overrides(Profile& p, const std::map<std::string, std::string>& kv);
Profile load_profile(const std::string& path);

/// Documented key list, in file order, for `--help` and the README.
std::vector<std::string> profile_keys();

/// "2x1" -> {2, 1}
std::pair<int, int> parse_array(const std::string& s);

}  // namespace cfisac::harness
