// Command-line driver: dataset generation, training, the ALM-MO baseline, MUSIC and the sweeps.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "cfisac/almmo/problem.hpp"
#include "cfisac/channel/channel_model.hpp"
#include "cfisac/harness/experiments.hpp"
#include "cfisac/localization/music.hpp"
#include "cfisac/stcib/checkpoint.hpp"

using namespace cfisac;
using namespace cfisac::harness;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "out";
  int threads = 0;  // 0: take the profile's value
};

struct RegimeArgs {
  std::string regime = "cc";
  double vth = 3.0;
  double zth = 0.2;
  double eta = 0.5;
};

Profile load(const Common& c) {
  Profile p = c.config.empty() ? Profile{} : load_profile(c.config);
  if (c.seed_given) p.seed = c.seed;
  if (const char* env = std::getenv("CFISAC_SEED")) {
    char* end = nullptr;
    const unsigned long long s = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw std::runtime_error(std::string("CFISAC_SEED is not an integer: ") + env);
    p.seed = s;
  }
  p.system.seed = p.seed;
  if (c.threads > 0) p.threads = c.threads;
  p.validate();
  return p;
}

metrics::RegimeSpec regime_of(const Profile& p, const RegimeArgs& r) {
  const metrics::Regime kind = metrics::parse_regime(r.regime);
  const double v = kind == metrics::Regime::sc ? r.vth : kind == metrics::Regime::cc ? r.zth : r.eta;
  return regime_for(p, kind, v);
}

double regime_value(const metrics::RegimeSpec& r) {
  switch (r.kind) {
    case metrics::Regime::sc: return r.vartheta_th;
    case metrics::Regime::cc: return r.zeta_th;
    case metrics::Regime::joint: break;
  }
  return r.eta;
}

std::string tag(const metrics::RegimeSpec& r) { return metrics::to_string(r.kind) + "_" + format_number(regime_value(r)); }

void say(const std::string& s) { std::cout << s << std::endl; }

void saved(const std::string& path) { say("wrote " + path); }

void print_audit(const std::string& name, const Audit& a) {
  say(name + ": R_c " + format_number(a.R_c) + "  R_s " + format_number(a.R_s) + "  feasible " +
      format_number(a.feasibility_rate) + "  avg violation " + format_number(a.mean_violation) + "  worst " +
      format_number(a.worst_violation));
}

stcib::Model load_model(const std::string& path, const Profile& p) {
  stcib::Model m = stcib::load_checkpoint(path);
  if (!(m.arch.dims == dims_of(p.system)))
    throw std::runtime_error(path + ": checkpoint dimensions do not match the configured system");
  return m;
}

stcib::Model trained_or_loaded(const Profile& p, const Splits& data, const metrics::RegimeSpec& regime,
                               const std::string& model_path, bool use_estimates, const std::string& out) {
  if (!model_path.empty()) return load_model(model_path, p);
  say("training " + tag(regime) + (use_estimates ? "" : " on perfect CSI"));
  stcib::TrainResult r = train_model(p, data, regime, use_estimates, say);
  const std::string suffix = tag(regime) + (use_estimates ? "" : "_perfect");
  training_log_table(r.log).save(join_path(out, "train_log_" + suffix + ".csv"));
  stcib::save_checkpoint(join_path(out, "stcib_" + suffix + ".ckpt"), r.model,
                         {regime, p.seed, r.best_epoch, r.best_val_loss});
  saved(join_path(out, "stcib_" + suffix + ".ckpt"));
  return std::move(r.model);
}

int run_gen(const Common& c) {
  const Profile p = load(c);
  ensure_dir(c.out);
  GenerateOptions o;
  o.samples = p.n_train + p.n_val + p.n_test;
  o.seed = p.seed;
  o.threads = p.threads;
  const std::string path = join_path(c.out, "dataset.bin");
  save_dataset(path, generate_dataset(p.system, o));
  saved(path);
  return 0;
}

int run_train(const Common& c, const RegimeArgs& ra) {
  const Profile p = load(c);
  ensure_dir(c.out);
  const metrics::RegimeSpec regime = regime_of(p, ra);
  const Splits data = make_splits(p);
  const stcib::Model m = trained_or_loaded(p, data, regime, "", true, c.out);
  print_audit("test", audit(regime, data.test, stcib_designs(m, data.test), p.system));
  return 0;
}

int run_infer(const Common& c, const RegimeArgs& ra, const std::string& model_path) {
  const Profile p = load(c);
  ensure_dir(c.out);
  const stcib::Model m = load_model(model_path, p);
  const metrics::RegimeSpec regime = regime_of(p, ra);
  const Splits data = make_splits(p);
  const std::vector<CMat> W = stcib_designs(m, data.test);
  Table t({"sample", "column", "row", "re", "im"});
  for (std::size_t i = 0; i < W.size(); ++i)
    for (int col = 0; col < W[i].cols(); ++col)
      for (int row = 0; row < W[i].rows(); ++row)
        t.add({std::to_string(i), std::to_string(col), std::to_string(row), format_number(W[i](row, col).real()),
               format_number(W[i](row, col).imag())});
  const std::string path = join_path(c.out, "beamformers.csv");
  t.save(path);
  saved(path);
  print_audit("test", audit(regime, data.test, W, p.system));
  return 0;
}

int run_almmo(const Common& c, const RegimeArgs& ra, int samples) {
  Profile p = load(c);
  ensure_dir(c.out);
  const metrics::RegimeSpec regime = regime_of(p, ra);
  const Splits data = make_splits(p);
  const int n = samples > 0 ? std::min<int>(samples, data.test.samples.size()) : data.test.samples.size();
  const stcib::Dataset test = subset(data.test, 0, n);
  const auto t0 = std::chrono::steady_clock::now();
  const AlmRun run = almmo_designs(p, regime, test, p.threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Audit a = audit(regime, test, run.W, p.system);

  Table per({"sample", "R_c", "R_s", "feasible", "max_violation", "outer_iters", "converged", "seconds"});
  for (int i = 0; i < n; ++i) {
    const auto& r = run.results[i];
    per.add({std::to_string(i), format_number(a.samples[i].R_c), format_number(a.samples[i].R_s),
             a.samples[i].feasible ? "1" : "0", format_number(a.samples[i].max_violation),
             std::to_string(r.trace.back().outer_iter), r.converged ? "1" : "0", format_number(r.trace.back().seconds)});
  }
  const std::string ppath = join_path(c.out, "almmo_" + tag(regime) + ".csv");
  const std::string tpath = join_path(c.out, "almmo_trace_" + tag(regime) + ".csv");
  per.save(ppath);
  trace_table(run.results.front().trace).save(tpath);
  saved(ppath);
  saved(tpath);
  print_audit("ALM-MO", a);
  say("mean wall time per instance " + format_number(secs / n) + " s on " + std::to_string(p.threads) + " thread(s)");
  return 0;
}

int run_music(const Common& c, const RegimeArgs& ra, int rap) {
  const Profile p = load(c);
  ensure_dir(c.out);
  const channel::SystemConfig& cfg = p.system;
  if (rap < 0 || rap >= cfg.N_R) throw std::runtime_error("--rap must be in [0, N_R)");
  // same draws as the deployment behind the datasets
  Rng rng(p.seed);
  const channel::Scene scene = channel::build_scene(cfg, rng);
  const channel::SensingResponse s = channel::sensing_response(scene, cfg, rng);
  const channel::ChannelSet ch = channel::sample_channels(scene, cfg, rng);

  RegimeArgs sc = ra;
  sc.regime = "sc";
  const metrics::RegimeSpec regime = regime_of(p, sc);
  const almmo::Problem prob = almmo::make_problem(ch.f, s, regime, cfg.rho, cfg.N_T);
  almmo::SolveOptions opt;
  opt.outer_iters = p.alm_outer;
  opt.inner_iters = p.alm_inner;
  const CMat W = almmo::solve(prob, almmo::random_init(prob, rng), opt).W;

  const int tau = cfg.tau_c - cfg.tau_p;
  const CMat Y = localization::snapshots(s, rap, W, tau, rng);
  const localization::MusicResult r = localization::music(Y, cfg.N_C + 1, cfg.M_R1, cfg.M_R2, {}, p.threads);
  const std::string path = join_path(c.out, "music_rap" + std::to_string(rap) + ".csv");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  localization::write_spectrum_csv(os, r);
  saved(path);

  const double deg = 180.0 / kPi;
  const channel::Angles truth = scene.rx[scene.rx_index(rap, 0)].angles;
  for (const auto& pk : r.peaks)
    say("peak azimuth " + format_number(pk.psi_deg) + " elevation " + format_number(pk.theta_deg) + " value " +
        format_number(pk.value));
  const localization::Peak& best = localization::nearest_peak(r.peaks, truth.psi * deg, truth.theta * deg);
  say("target at azimuth " + format_number(truth.psi * deg) + " elevation " + format_number(truth.theta * deg) +
      ", RMSE " + format_number(localization::rmse(truth.psi * deg, truth.theta * deg, best.psi_deg, best.theta_deg)) +
      " deg");
  return 0;
}

int run_sweep(const Common& c, metrics::Regime kind, bool skip_almmo) {
  const Profile p = load(c);
  ensure_dir(c.out);
  const Splits data = make_splits(p);
  const std::vector<double>& values = kind == metrics::Regime::sc   ? p.sc_thresholds
                                      : kind == metrics::Regime::cc ? p.cc_thresholds
                                                                    : p.joint_etas;
  TradeoffOptions opt;
  opt.with_almmo = !skip_almmo;
  opt.out_dir = c.out;
  opt.threads = p.threads;
  const auto points = tradeoff_sweep(p, data, kind, values, opt, say);
  const std::string path = join_path(c.out, "tradeoff_" + metrics::to_string(kind) + ".csv");
  tradeoff_table(points).save(path);
  saved(path);
  return 0;
}

int run_estimation(const Common& c) {
  const Profile p = load(c);
  ensure_dir(c.out);
  const auto cells = estimation_sweep(p, p.threads);
  for (const auto& e : cells)
    say("K " + std::to_string(e.K) + " tau_p " + std::to_string(e.tau_p) + ": " + format_number(e.avg_error_norm));
  const std::string path = join_path(c.out, "estimation.csv");
  estimation_table(cells).save(path);
  saved(path);
  return 0;
}

int run_feasibility(const Common& c, const RegimeArgs& ra, const std::string& model_path) {
  const Profile p = load(c);
  ensure_dir(c.out);
  const metrics::RegimeSpec regime = regime_of(p, ra);
  const Splits data = make_splits(p);
  const stcib::Model m = trained_or_loaded(p, data, regime, model_path, true, c.out);
  const Audit a = audit(regime, data.test, stcib_designs(m, data.test), p.system);
  const std::string path = join_path(c.out, "feasibility_" + tag(regime) + ".csv");
  const std::string spath = join_path(c.out, "feasibility_" + tag(regime) + "_samples.csv");
  audit_table(metrics::to_string(regime.kind) + " " + format_number(regime_value(regime)), a).save(path);
  audit_samples_table(a).save(spath);
  saved(path);
  saved(spath);
  print_audit("STCIB", a);
  return 0;
}

int run_csi(const Common& c, const std::string& model_path) {
  const Profile p = load(c);
  ensure_dir(c.out);
  const metrics::RegimeSpec regime = regime_for(p, metrics::Regime::cc, p.csi_zeta);
  stcib::Model m;
  if (model_path.empty()) m = trained_or_loaded(p, make_splits(p), regime, "", false, c.out);
  else m = load_model(model_path, p);
  const auto pts = csi_robustness(p, m);
  for (const auto& x : pts)
    say("chi " + format_number(x.chi) + " rician " + format_number(x.rician) + ": R_c " + format_number(x.R_c));
  const std::string path = join_path(c.out, "csi.csv");
  csi_table(pts).save(path);
  saved(path);
  return 0;
}

int run_bench(const Common& c) {
  Common single = c;
  single.threads = 1;  // timing is always single-threaded
  const Profile p = load(single);
  ensure_dir(c.out);
  const auto rows = bench_runtime(p, say);
  const std::string path = join_path(c.out, "runtime.csv");
  runtime_table(rows).save(path);
  saved(path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free ISAC beamforming: set-transformer learning, ALM-MO baseline, MUSIC and sweeps"};
  app.require_subcommand(1);
  app.fallthrough();

  Common c;
  RegimeArgs ra;
  app.add_option("--config", c.config, "key = value profile file (defaults: desk scale)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { c.seed = s, c.seed_given = true; }, "Seed (CFISAC_SEED overrides)");
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (bench-runtime always uses one)")
      ->check(CLI::PositiveNumber);

  auto regime_flags = [&](CLI::App* sub) {
    sub->add_option("--regime", ra.regime, "sc, cc or joint")
        ->check(CLI::IsMember({"sc", "cc", "joint"}))
        ->capture_default_str();
    sub->add_option("--vth", ra.vth, "Communication rate threshold (sc), bps/Hz")->capture_default_str();
    sub->add_option("--zth", ra.zth, "Sensing rate threshold (cc), bps/Hz")->capture_default_str();
    sub->add_option("--eta", ra.eta, "Communication weight (joint)")->capture_default_str();
  };

  std::string model_path;
  int samples = 0;
  int rap = 0;
  bool skip_almmo = false;

  auto* gen = app.add_subcommand("gen", "Generate the dataset (train + val + test) into OUT/dataset.bin");
  auto* train = app.add_subcommand("train", "Train one model and report test-set rates");
  regime_flags(train);
  auto* infer = app.add_subcommand("infer", "Run a checkpoint on the test split and dump beamformers");
  regime_flags(infer);
  infer->add_option("--model", model_path, "Checkpoint file")->required();
  auto* alm = app.add_subcommand("almmo", "Solve the test split with ALM-MO");
  regime_flags(alm);
  alm->add_option("--samples", samples, "Only the first N test samples (0: all)");
  auto* music = app.add_subcommand("music", "2D MUSIC spectrum at one RAP for an ALM-MO sensing-centric design");
  regime_flags(music);
  music->add_option("--rap", rap, "Receive AP index")->capture_default_str();
  auto* sweep_sc = app.add_subcommand("sweep-sc", "Sensing-centric trade-off over sc_thresholds");
  auto* sweep_cc = app.add_subcommand("sweep-cc", "Communication-centric trade-off over cc_thresholds");
  auto* sweep_joint = app.add_subcommand("sweep-joint", "Weighted-sum trade-off over joint_etas");
  for (auto* s : {sweep_sc, sweep_cc, sweep_joint}) s->add_flag("--skip-almmo", skip_almmo, "Only train and score STCIB");
  auto* est = app.add_subcommand("estimation-sweep", "MMSE error norm over est_users x est_pilots");
  auto* feas = app.add_subcommand("feasibility", "Constraint audit of a trained model on the test split");
  regime_flags(feas);
  feas->add_option("--model", model_path, "Checkpoint file (default: train one)");
  auto* csi = app.add_subcommand("csi-robustness", "Sum rate under CSI errors for a model trained on perfect CSI");
  csi->add_option("--model", model_path, "Checkpoint file (default: train one)");
  auto* bench = app.add_subcommand("bench-runtime", "Single-threaded online runtime of STCIB and ALM-MO");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*gen) return run_gen(c);
    if (*train) return run_train(c, ra);
    if (*infer) return run_infer(c, ra, model_path);
    if (*alm) return run_almmo(c, ra, samples);
    if (*music) return run_music(c, ra, rap);
    if (*sweep_sc) return run_sweep(c, metrics::Regime::sc, skip_almmo);
    if (*sweep_cc) return run_sweep(c, metrics::Regime::cc, skip_almmo);
    if (*sweep_joint) return run_sweep(c, metrics::Regime::joint, skip_almmo);
    if (*est) return run_estimation(c);
    if (*feas) return run_feasibility(c, ra, model_path);
    if (*csi) return run_csi(c, model_path);
    if (*bench) return run_bench(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
