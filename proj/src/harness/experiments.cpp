#include "cfisac/harness/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "cfisac/almmo/problem.hpp"
#include "cfisac/channel/channel_model.hpp"
#include "cfisac/estimation/estimation.hpp"
#include "cfisac/stcib/checkpoint.hpp"

namespace cfisac::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs body(i) for i in [0, n) on `threads` workers with a static stride.
template <class F>
void parallel_for(int n, int threads, F&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Stream tags so different experiments never share random numbers.
constexpr std::uint64_t kAlmInit = 0xA1A0;
constexpr std::uint64_t kCsiNoise = 0xC510;
constexpr std::uint64_t kBench = 0xBE0C;

almmo::SolveOptions solve_options(const Profile& p) {
  almmo::SolveOptions o;
  o.outer_iters = p.alm_outer;
  o.inner_iters = p.alm_inner;
  return o;
}

std::string tag(metrics::Regime kind, double value) {
  return metrics::to_string(kind) + "_" + format_number(value);
}

}  // namespace

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& file) {
  return dir.empty() ? file : (std::filesystem::path(dir) / file).string();
}

Splits make_splits(const Profile& p) {
  GenerateOptions o;
  o.samples = p.n_train + p.n_val + p.n_test;
  o.seed = p.seed;
  o.threads = p.threads;
  return split(generate_dataset(p.system, o), p.n_train, p.n_val, p.n_test);
}

stcib::Architecture architecture(const Profile& p, const channel::SystemConfig& cfg) {
  stcib::Architecture a;
  a.dims = dims_of(cfg);
  a.heads = p.heads;
  a.inducing = p.inducing;
  a.budget = cfg.power_budget();
  a.validate();
  return a;
}

stcib::Architecture architecture(const Profile& p) { return architecture(p, p.system); }

metrics::RegimeSpec regime_for(const Profile& p, metrics::Regime kind, double value) {
  const double kappa = p.system.kappa();
  switch (kind) {
    case metrics::Regime::sc: return metrics::RegimeSpec::sensing_centric(value, kappa);
    case metrics::Regime::cc: return metrics::RegimeSpec::communication_centric(value, kappa);
    case metrics::Regime::joint: break;
  }
  metrics::RegimeSpec r = metrics::RegimeSpec::joint(value, kappa);
  r.validate();
  return r;
}

stcib::TrainSpec train_spec(const Profile& p, const metrics::RegimeSpec& regime) {
  stcib::TrainSpec s;
  s.loss = {regime, p.penalty, p.margin};
  s.batch_size = p.batch_size;
  s.max_epochs = p.max_epochs;
  s.patience = p.patience;
  s.lr = p.lr;
  s.plateau = p.lr_plateau;
  s.decay = p.lr_decay;
  s.seed = p.seed;
  s.validate();
  return s;
}

stcib::TrainResult train_model(const Profile& p, const Splits& data, const metrics::RegimeSpec& regime,
                               bool use_estimates, const Log& log, const stcib::Model* init) {
  stcib::TrainSpec spec = train_spec(p, regime);
  spec.use_estimates = use_estimates;
  stcib::Model model = init ? *init : stcib::Model(architecture(p), p.seed);
  return stcib::train(std::move(model), data.train, data.val, spec, p.system.kappa(),
                      [&](const stcib::EpochLog& e) {
                        if (log && (e.epoch % 10 == 0 || e.epoch == 1))
                          log("  epoch " + std::to_string(e.epoch) + " train " + format_number(e.train_loss) +
                              " val " + format_number(e.val_loss));
                        return true;
                      });
}

Table training_log_table(const std::vector<stcib::EpochLog>& log) {
  Table t({"epoch", "train_loss", "val_loss", "seconds"});
  for (const auto& e : log)
    t.add({std::to_string(e.epoch), format_number(e.train_loss), format_number(e.val_loss), format_number(e.seconds)});
  return t;
}

Table trace_table(const std::vector<almmo::TraceRow>& trace) {
  Table t({"outer_iter", "objective", "max_violation", "grad_norm", "seconds"});
  for (const auto& r : trace)
    t.add({std::to_string(r.outer_iter), format_number(r.objective), format_number(r.max_violation),
           format_number(r.grad_norm), format_number(r.seconds)});
  return t;
}

std::vector<CMat> stcib_designs(const stcib::Model& model, const stcib::Dataset& test) {
  std::vector<CMat> W;
  W.reserve(test.samples.size());
  for (const auto& s : test.samples) W.push_back(model.infer(s.f_hat));
  return W;
}

AlmRun almmo_designs(const Profile& p, const metrics::RegimeSpec& regime, const stcib::Dataset& test, int threads) {
  const int n = static_cast<int>(test.samples.size());
  AlmRun run;
  run.W.resize(n);
  run.results.resize(n);
  const almmo::SolveOptions opt = solve_options(p);
  parallel_for(n, threads, [&](int i) {
    const auto& s = test.samples[i];
    const almmo::Problem prob = almmo::make_problem(s.f_hat, s.sensing, regime, p.system.rho, p.system.N_T);
    Rng rng(mix_seed(mix_seed(p.seed, kAlmInit), static_cast<std::uint64_t>(i)));
    run.results[i] = almmo::solve(prob, almmo::random_init(prob, rng), opt);
    run.W[i] = run.results[i].W;
  });
  return run;
}

Audit summarize(std::vector<SampleAudit> samples) {
  Audit a;
  a.samples = std::move(samples);
  if (a.samples.empty()) return a;
  int feasible = 0, violated = 0, constraints = 0;
  double vsum = 0.0;
  for (const auto& s : a.samples) {
    feasible += s.feasible;
    violated += s.violated;
    constraints += s.constraints;
    vsum += s.violation_sum;
    a.worst_violation = std::max(a.worst_violation, s.max_violation);
    a.R_c += s.R_c;
    a.R_s += s.R_s;
  }
  const double n = static_cast<double>(a.samples.size());
  a.feasibility_rate = feasible / n;
  a.mean_violation = violated > 0 ? vsum / violated : 0.0;
  a.mean_violation_all = constraints > 0 ? vsum / constraints : 0.0;
  a.R_c /= n;
  a.R_s /= n;
  return a;
}

Audit audit(const metrics::RegimeSpec& regime, const stcib::Dataset& test, const std::vector<CMat>& W,
            const channel::SystemConfig& cfg) {
  if (W.size() != test.samples.size()) throw std::invalid_argument("audit: one design per test sample expected");
  std::vector<SampleAudit> out;
  out.reserve(W.size());
  for (std::size_t i = 0; i < W.size(); ++i) {
    const auto& s = test.samples[i];
    const metrics::Rates r = metrics::evaluate(s.f_true, s.sensing, W[i], cfg.kappa());
    const metrics::ConstraintReport c = metrics::check_constraints(regime, r, W[i], cfg.rho, cfg.N_T);
    SampleAudit a;
    a.feasible = c.feasible;
    a.max_violation = c.max_violation;
    for (const auto* v : {&c.comm_violation, &c.sensing_violation})
      for (double x : *v) {
        a.violation_sum += x;
        a.violated += x > 0.0;
        ++a.constraints;
      }
    a.R_c = r.sum_R_C;
    a.R_s = r.sum_R_S;
    out.push_back(a);
  }
  return summarize(std::move(out));
}

Table audit_table(const std::string& design, const Audit& a) {
  Table t({"design", "feasibility_rate", "avg_violation", "worst_violation"});
  t.add({design, format_number(a.feasibility_rate), format_number(a.mean_violation), format_number(a.worst_violation)});
  return t;
}

Table audit_samples_table(const Audit& a) {
  Table t({"sample", "feasible", "max_violation", "violation_sum", "violated", "constraints", "R_c", "R_s"});
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& s = a.samples[i];
    t.add({std::to_string(i), s.feasible ? "1" : "0", format_number(s.max_violation), format_number(s.violation_sum),
           std::to_string(s.violated), std::to_string(s.constraints), format_number(s.R_c), format_number(s.R_s)});
  }
  return t;
}

std::vector<TradeoffPoint> tradeoff_sweep(const Profile& p, const Splits& data, metrics::Regime kind,
                                          const std::vector<double>& values, const TradeoffOptions& opt,
                                          const Log& log) {
  ensure_dir(opt.out_dir);
  stcib::Dataset alm_test = data.test;
  if (p.alm_samples > 0 && static_cast<std::size_t>(p.alm_samples) < alm_test.samples.size())
    alm_test = subset(data.test, 0, p.alm_samples);

  std::vector<TradeoffPoint> points;
  for (double v : values) {
    const metrics::RegimeSpec regime = regime_for(p, kind, v);
    if (log) log(metrics::to_string(kind) + " " + format_number(v) + ": training");
    TradeoffPoint pt;
    pt.value = v;
    // continuation: start from the neighbouring point's model
    const stcib::Model* init = p.sweep_warm_start && !points.empty() ? &points.back().trained.model : nullptr;
    pt.trained = train_model(p, data, regime, true, log, init);
    pt.stcib = audit(regime, data.test, stcib_designs(pt.trained.model, data.test), p.system);
    if (!opt.out_dir.empty()) {
      training_log_table(pt.trained.log).save(join_path(opt.out_dir, "train_log_" + tag(kind, v) + ".csv"));
      stcib::CheckpointMeta meta{regime, p.seed, pt.trained.best_epoch, pt.trained.best_val_loss};
      stcib::save_checkpoint(join_path(opt.out_dir, "stcib_" + tag(kind, v) + ".ckpt"), pt.trained.model, meta);
    }
    if (opt.with_almmo) {
      if (log) log(metrics::to_string(kind) + " " + format_number(v) + ": ALM-MO on " +
                   std::to_string(alm_test.samples.size()) + " instances");
      const AlmRun run = almmo_designs(p, regime, alm_test, opt.threads);
      pt.almmo = audit(regime, alm_test, run.W, p.system);
      if (!opt.out_dir.empty() && !run.results.empty())
        trace_table(run.results.front().trace).save(join_path(opt.out_dir, "almmo_trace_" + tag(kind, v) + ".csv"));
    }
    if (log)
      log(metrics::to_string(kind) + " " + format_number(v) + ": stcib R_s " + format_number(pt.stcib.R_s) +
          " R_c " + format_number(pt.stcib.R_c) + " feasible " + format_number(pt.stcib.feasibility_rate));
    points.push_back(std::move(pt));
  }
  return points;
}

Table tradeoff_table(const std::vector<TradeoffPoint>& points) {
  Table t({"threshold", "method", "R_s", "R_c", "feasible_frac"});
  for (const auto& pt : points) {
    t.add({format_number(pt.value), "stcib", format_number(pt.stcib.R_s), format_number(pt.stcib.R_c),
           format_number(pt.stcib.feasibility_rate)});
    if (!pt.almmo.samples.empty())
      t.add({format_number(pt.value), "almmo", format_number(pt.almmo.R_s), format_number(pt.almmo.R_c),
             format_number(pt.almmo.feasibility_rate)});
  }
  return t;
}

std::vector<EstimationCell> estimation_sweep(const Profile& p, int threads) {
  channel::SystemConfig base = p.system;
  base.N_T = p.est_N_T;
  std::tie(base.M_T1, base.M_T2) = parse_array(p.est_array);

  std::vector<EstimationCell> cells;
  const int R = p.est_realizations;
  for (int K : p.est_users)
    for (int tau : p.est_pilots) {
      channel::SystemConfig cfg = base;
      cfg.K = K;
      cfg.tau_p = tau;
      cfg.validate();
      // Realisation r uses the same stream in every cell: common random scenes across the sweep.
      std::vector<double> err(R);
      parallel_for(R, threads, [&](int r) {
        Rng rng(mix_seed(p.seed, static_cast<std::uint64_t>(r)));
        const channel::Scene scene = channel::build_scene(cfg, rng);
        const channel::ChannelSet ch = channel::sample_channels(scene, cfg, rng);
        const estimation::ChannelEstimate est = estimation::estimate_channels(ch, cfg, rng);
        double e = 0.0;
        for (int k = 0; k < K; ++k) e += (ch.f[k] - est.f_hat[k]).norm();
        err[r] = e / K;
      });
      double total = 0.0;
      for (double e : err) total += e;
      cells.push_back({K, tau, total / R});
    }
  return cells;
}

Table estimation_table(const std::vector<EstimationCell>& cells) {
  Table t({"K", "tau_p", "avg_error_norm"});
  for (const auto& c : cells) t.add({std::to_string(c.K), std::to_string(c.tau_p), format_number(c.avg_error_norm)});
  return t;
}

std::vector<CsiPoint> csi_robustness(const Profile& p, const stcib::Model& model) {
  std::vector<CsiPoint> out;
  for (double rician : p.csi_rician) {
    Profile q = p;
    q.system.rician_min = q.system.rician_max = rician;
    // same deployment and sample streams as the training data, only the Rician factor is pinned
    const stcib::Dataset test = make_splits(q).test;
    for (double chi : p.csi_chi) {
      double rc = 0.0;
      for (std::size_t i = 0; i < test.samples.size(); ++i) {
        const auto& s = test.samples[i];
        Rng rng(mix_seed(mix_seed(p.seed, kCsiNoise), i));  // common draws across chi
        std::vector<CVec> f_in;
        for (const auto& f : s.f_true) f_in.push_back(estimation::corrupt_csi(f, chi, rng));
        rc += metrics::evaluate(s.f_true, s.sensing, model.infer(f_in), p.system.kappa()).sum_R_C;
      }
      out.push_back({chi, rician, rc / test.samples.size()});
    }
  }
  return out;
}

Table csi_table(const std::vector<CsiPoint>& points) {
  Table t({"chi", "rician", "R_c"});
  for (const auto& c : points) t.add({format_number(c.chi), format_number(c.rician), format_number(c.R_c)});
  return t;
}

std::vector<RuntimeRow> bench_runtime(const Profile& p, const Log& log) {
  constexpr int kWarmup = 5;
  std::vector<RuntimeRow> rows;
  auto stats = [](const std::vector<double>& t) {
    double mean = 0.0;
    for (double x : t) mean += x;
    mean /= t.size();
    double var = 0.0;
    for (double x : t) var += (x - mean) * (x - mean);
    return std::pair{mean, t.size() > 1 ? std::sqrt(var / (t.size() - 1)) : 0.0};
  };

  for (int K : p.bench_users)
    for (const std::string& array : p.bench_arrays) {
      channel::SystemConfig cfg = p.system;
      cfg.K = K;
      std::tie(cfg.M_T1, cfg.M_T2) = parse_array(array);
      cfg.tau_p = std::max(cfg.tau_p, K);
      cfg.validate();
      GenerateOptions g;
      g.samples = kWarmup + p.bench_instances;
      g.seed = mix_seed(p.seed, kBench);
      const stcib::Dataset data = generate_dataset(cfg, g);

      const stcib::Model model(architecture(p, cfg), p.seed);
      std::vector<double> t_net, t_alm;
      for (int i = 0; i < g.samples; ++i) {
        const auto t0 = Clock::now();
        const CMat W = model.infer(data.samples[i].f_hat);
        const double dt = seconds_since(t0);
        if (W.rows() == 0) throw std::logic_error("bench_runtime: empty design");
        if (i >= kWarmup) t_net.push_back(dt);
      }
      const metrics::RegimeSpec regime = metrics::RegimeSpec::communication_centric(p.csi_zeta, cfg.kappa());
      const almmo::SolveOptions opt = solve_options(p);
      for (int i = 0; i < g.samples; ++i) {
        const auto& s = data.samples[i];
        Rng rng(mix_seed(mix_seed(p.seed, kAlmInit), static_cast<std::uint64_t>(i)));
        const auto t0 = Clock::now();
        const almmo::Problem prob = almmo::make_problem(s.f_hat, s.sensing, regime, cfg.rho, cfg.N_T);
        const almmo::SolveResult r = almmo::solve(prob, almmo::random_init(prob, rng), opt);
        const double dt = seconds_since(t0);
        if (i >= kWarmup) t_alm.push_back(dt);
      }
      const auto [mn, sn] = stats(t_net);
      const auto [ma, sa] = stats(t_alm);
      rows.push_back({"stcib", K, array, mn, sn});
      rows.push_back({"almmo", K, array, ma, sa});
      if (log)
        log("K=" + std::to_string(K) + " M_T=" + array + ": stcib " + format_number(mn) + " s, almmo " +
            format_number(ma) + " s, ratio " + format_number(mn / ma));
    }
  return rows;
}

Table runtime_table(const std::vector<RuntimeRow>& rows) {
  Table t({"method", "n_users", "mt_config", "mean_seconds", "std_seconds"});
  for (const auto& r : rows)
    t.add({r.method, std::to_string(r.n_users), r.mt_config, format_number(r.mean_seconds), format_number(r.std_seconds)});
  return t;
}

}  // namespace cfisac::harness
