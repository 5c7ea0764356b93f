#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cfisac/almmo/solver.hpp"
#include "cfisac/harness/config_file.hpp"
#include "cfisac/harness/csv.hpp"
#include "cfisac/harness/dataset.hpp"
#include "cfisac/stcib/trainer.hpp"

namespace cfisac::harness {

/// Progress lines for long runs; empty means silent.
using Log = std::function<void(const std::string&)>;

/// n_train + n_val + n_test samples from one deployment, split in that order.
Splits make_splits(const Profile& p);

stcib::Architecture architecture(const Profile& p, const channel::SystemConfig& cfg);
stcib::Architecture architecture(const Profile& p);

/// `value` is the threshold for sc/cc and eta for joint.
metrics::RegimeSpec regime_for(const Profile& p, metrics::Regime kind, double value);
stcib::TrainSpec train_spec(const Profile& p, const metrics::RegimeSpec& regime);

/// Fresh model (seeded by the profile) trained on the splits.
stcib::TrainResult train_model(const Profile& p, const Splits& data, const metrics::RegimeSpec& regime,
                               bool use_estimates = true, const Log& log = {},
                               const stcib::Model* init = nullptr);

Table training_log_table(const std::vector<stcib::EpochLog>& log);
Table trace_table(const std::vector<almmo::TraceRow>& trace);

/// Beamformers from the model fed with each sample's estimated channels.
std::vector<CMat> stcib_designs(const stcib::Model& model, const stcib::Dataset& test);

struct AlmRun {
  std::vector<CMat> W;
  std::vector<almmo::SolveResult> results;  // W and trace per instance
};
/// ALM-MO on every sample's estimated channels from a seeded random start. Instances are spread over
/// `threads`; each has its own stream, so results do not depend on the thread count.
AlmRun almmo_designs(const Profile& p, const metrics::RegimeSpec& regime, const stcib::Dataset& test,
                     int threads);

struct SampleAudit {
  bool feasible = true;
  double max_violation = 0.0;  // bps/Hz, over the active rate constraints
  double violation_sum = 0.0;
  int violated = 0;            // constraints with a positive violation
  int constraints = 0;
  double R_c = 0.0, R_s = 0.0;
};

struct Audit {
  double feasibility_rate = 0.0;
  double mean_violation = 0.0;      // average over violated constraints only (0 if none)
  double mean_violation_all = 0.0;  // average over every active constraint
  double worst_violation = 0.0;
  double R_c = 0.0, R_s = 0.0;      // mean sum rates
  std::vector<SampleAudit> samples;
};

/// Scores designs on the TRUE channels of `test`.
Audit audit(const metrics::RegimeSpec& regime, const stcib::Dataset& test, const std::vector<CMat>& W,
            const channel::SystemConfig& cfg);
/// Recomputes the summary from a per-sample table; used to cross-check dumps.
Audit summarize(std::vector<SampleAudit> samples);

Table audit_table(const std::string& design, const Audit& a);
Table audit_samples_table(const Audit& a);

struct TradeoffOptions {
  bool with_almmo = true;
  std::string out_dir;  // training logs, checkpoints and one ALM trace per point; empty: none
  int threads = 1;
};
struct TradeoffPoint {
  double value = 0.0;
  stcib::TrainResult trained;
  Audit stcib;
  Audit almmo;  // empty samples when with_almmo is false
};
std::vector<TradeoffPoint> tradeoff_sweep(const Profile& p, const Splits& data, metrics::Regime kind,
                                          const std::vector<double>& values, const TradeoffOptions& opt,
                                          const Log& log = {});
/// `threshold,method,R_s,R_c,feasible_frac`; the first column holds eta for the joint sweep.
Table tradeoff_table(const std::vector<TradeoffPoint>& points);

struct EstimationCell {
  int K = 0, tau_p = 0;
  double avg_error_norm = 0.0;
};
/// Fresh scene, channels and pilot noise per realisation; error ||f_k - f_hat_k|| averaged over users.
std::vector<EstimationCell> estimation_sweep(const Profile& p, int threads = 1);
Table estimation_table(const std::vector<EstimationCell>& cells);

struct CsiPoint {
  double chi = 0.0, rician = 0.0, R_c = 0.0;
};
/// Evaluates a model trained on perfect CSI with corrupted inputs, one test set per Rician factor.
std::vector<CsiPoint> csi_robustness(const Profile& p, const stcib::Model& model);
Table csi_table(const std::vector<CsiPoint>& points);

struct RuntimeRow {
  std::string method;
  int n_users = 0;
  std::string mt_config;
  double mean_seconds = 0.0, std_seconds = 0.0;
};
/// Single-threaded wall clock per instance after a short warmup. The network is untrained: inference
/// cost does not depend on the weights.
std::vector<RuntimeRow> bench_runtime(const Profile& p, const Log& log = {});
Table runtime_table(const std::vector<RuntimeRow>& rows);

/// Creates the directory (and parents) if needed.
void ensure_dir(const std::string& dir);
std::string join_path(const std::string& dir, const std::string& file);

}  // namespace cfisac::harness
