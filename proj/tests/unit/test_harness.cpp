#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cfisac/harness/config_file.hpp"
#include "cfisac/harness/csv.hpp"
#include "cfisac/harness/dataset.hpp"
#include "cfisac/harness/experiments.hpp"

using namespace cfisac;
using namespace cfisac::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cfisac_test_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Profile tiny() {
  Profile p;
  p.n_train = 40;
  p.n_val = 20;
  p.n_test = 20;
  p.max_epochs = 2;
  p.patience = 1;
  p.batch_size = 20;
  p.inducing = 4;
  p.alm_outer = 3;
  p.alm_inner = 10;
  return p;
}

bool same_samples(const stcib::Dataset& a, const stcib::Dataset& b) {
  if (a.samples.size() != b.samples.size() || !(a.dims == b.dims)) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    for (std::size_t k = 0; k < x.f_true.size(); ++k)
      if (x.f_true[k] != y.f_true[k] || x.f_hat[k] != y.f_hat[k]) return false;
    for (std::size_t j = 0; j < x.sensing.G_t.size(); ++j)
      if (x.sensing.G_t[j] != y.sensing.G_t[j]) return false;
    for (std::size_t j = 0; j < x.sensing.G_c.size(); ++j)
      if (x.sensing.G_c[j] != y.sensing.G_c[j]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("key value parser") {
  std::istringstream ok("# comment\n\nK = 4   # users\n  lr=0.01\nsc_thresholds = 1, 2 ,3\n");
  const auto kv = parse_key_values(ok);
  CHECK(kv.size() == 3);
  CHECK(kv.at("K") == "4");
  CHECK(kv.at("lr") == "0.01");
  CHECK(kv.at("sc_thresholds") == "1, 2 ,3");

  auto fails_at = [](const std::string& text, const std::string& where) {
    std::istringstream in(text);
    try {
      parse_key_values(in);
    } catch (const std::runtime_error& e) {
      return std::string(e.what()).find(where) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_at("K = 3\nnot a pair\n", "line 2"));
  CHECK(fails_at("K = 3\n\n\nK = 4\n", "line 4"));
  CHECK(fails_at("= 3\n", "line 1"));
  CHECK(fails_at("K =\n", "line 1"));
}

TEST_CASE("profile overrides and validation") {
  Profile p;
  apply_overrides(p, {{"K", "4"}, {"rho_db", "20"}, {"sc_thresholds", "1,2"}, {"sensing_layout", "random"},
                      {"clutter_angles_deg", "10 20, -5 7"}, {"seed", "42"}, {"bench_arrays", "2x2,4x1"}});
  CHECK(p.system.K == 4);
  CHECK(p.system.rho == doctest::Approx(100.0));
  CHECK(p.sc_thresholds == std::vector<double>{1.0, 2.0});
  CHECK(p.system.sensing_layout == channel::SensingLayout::random);
  REQUIRE(p.system.clutter_angles_deg.size() == 2);
  CHECK(p.system.clutter_angles_deg[1].first == -5.0);
  CHECK(p.seed == 42);
  CHECK(p.system.seed == 42);
  CHECK(p.bench_arrays.size() == 2);
  CHECK_NOTHROW(p.validate());

  Profile q;
  CHECK_THROWS_AS(apply_overrides(q, {{"no_such_key", "1"}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(q, {{"K", "three"}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(q, {{"K", "3.5"}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(q, {{"lr", "1e-3x"}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(q, {{"sensing_layout", "grid"}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(q, {{"target_angles_deg", "10"}}), std::invalid_argument);

  Profile r;
  r.cc_thresholds = {0.3, 0.1};
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = Profile{};
  r.joint_etas = {};
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = Profile{};
  r.joint_etas = {0.5, 1.0};
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = Profile{};
  r.bench_arrays = {"2by2"};
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);

  CHECK(parse_array("2x1") == std::pair{2, 1});
  CHECK_THROWS(parse_array("0x2"));
  CHECK(profile_keys().size() > 40);
}

TEST_CASE("profile files") {
  const fs::path dir = scratch("profile");
  {
    std::ofstream f(dir / "good.cfg");
    f << "# desk run\nn_train = 100\nmax_epochs = 5\npatience = 3\n";
  }
  const Profile p = load_profile((dir / "good.cfg").string());
  CHECK(p.n_train == 100);
  CHECK(p.max_epochs == 5);
  CHECK(p.n_val == 500);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "n_train = 100\nmax_epoch = 5\n";
  }
  try {
    load_profile((dir / "bad.cfg").string());
    FAIL("unknown key accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("max_epoch") != std::string::npos);
  }
  CHECK_THROWS_AS(load_profile((dir / "missing.cfg").string()), std::runtime_error);
}

TEST_CASE("csv tables") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  const double third = 1.0 / 3.0;
  CHECK(std::strtod(format_number(third).c_str(), nullptr) == third);

  Table t({"a", "b"});
  t.add({"1", "x"});
  t.add({"2", ""});
  CHECK_THROWS_AS(t.add({"3"}), std::invalid_argument);
  std::ostringstream os;
  t.write(os);
  CHECK(os.str() == "a,b\n1,x\n2,\n");

  const fs::path dir = scratch("csv");
  t.save((dir / "t.csv").string());
  const Table back = read_csv((dir / "t.csv").string());
  CHECK(back.header() == t.header());
  CHECK(back.rows() == t.rows());
  CHECK_THROWS_AS(t.save((dir / "no" / "such" / "t.csv").string()), std::runtime_error);
}

TEST_CASE("datasets are deterministic and thread invariant") {
  channel::SystemConfig cfg;
  GenerateOptions o;
  o.samples = 12;
  o.seed = 42;
  const stcib::Dataset a = generate_dataset(cfg, o);
  const stcib::Dataset b = generate_dataset(cfg, o);
  CHECK(same_samples(a, b));
  o.threads = 3;
  CHECK(same_samples(a, generate_dataset(cfg, o)));
  o.seed = 43;
  CHECK_FALSE(same_samples(a, generate_dataset(cfg, o)));

  // a shared deployment: the sensing response is the same in every sample
  CHECK(a.samples[0].sensing.G_t[0] == a.samples[5].sensing.G_t[0]);
  CHECK(a.samples[0].f_true[0] != a.samples[5].f_true[0]);

  const fs::path dir = scratch("dataset");
  save_dataset((dir / "a.bin").string(), a);
  save_dataset((dir / "b.bin").string(), b);
  CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
  const stcib::Dataset back = load_dataset((dir / "a.bin").string());
  CHECK(back.seed == 42);
  CHECK(same_samples(a, back));

  const Splits s = split(a, 6, 3, 3);
  CHECK(s.train.samples.size() == 6);
  CHECK(s.test.samples[2].f_true[1] == a.samples[11].f_true[1]);
  CHECK_THROWS(split(a, 10, 3, 3));
}

TEST_CASE("audit summary matches a recount of the per-sample dump") {
  const Profile p = tiny();
  const Splits data = make_splits(p);
  const metrics::RegimeSpec cc = regime_for(p, metrics::Regime::cc, 0.4);
  const stcib::Model model(architecture(p), 3);
  const std::vector<CMat> W = stcib_designs(model, data.test);
  const Audit a = audit(cc, data.test, W, p.system);
  REQUIRE(a.samples.size() == 20);

  const fs::path dir = scratch("audit");
  audit_samples_table(a).save((dir / "samples.csv").string());
  const Table dump = read_csv((dir / "samples.csv").string());
  REQUIRE(dump.rows().size() == 20);
  int feasible = 0, violated = 0;
  double sum = 0.0, worst = 0.0, rc = 0.0;
  for (const auto& row : dump.rows()) {
    feasible += row[1] == "1";
    worst = std::max(worst, std::stod(row[2]));
    sum += std::stod(row[3]);
    violated += std::stoi(row[4]);
    rc += std::stod(row[6]);
  }
  CHECK(a.feasibility_rate == doctest::Approx(feasible / 20.0));
  CHECK(a.worst_violation == doctest::Approx(worst));
  CHECK(a.mean_violation == doctest::Approx(violated ? sum / violated : 0.0));
  CHECK(a.mean_violation_all == doctest::Approx(sum / (20.0 * p.system.N_R)));
  CHECK(a.R_c == doctest::Approx(rc / 20.0));

  // independent check against the metrics module, sample by sample
  for (std::size_t i = 0; i < W.size(); ++i) {
    const auto& s = data.test.samples[i];
    const metrics::Rates r = metrics::evaluate(s.f_true, s.sensing, W[i], p.system.kappa());
    bool ok = true;
    for (double rs : r.R_S) ok = ok && rs >= 0.4;
    CHECK(a.samples[i].feasible == ok);
  }

  const Table four = audit_table("CC 0.4", a);
  CHECK(four.header().size() == 4);
  CHECK(four.rows().size() == 1);
}

TEST_CASE("zero thresholds are always met") {
  const Profile p = tiny();
  const Splits data = make_splits(p);
  const stcib::Model model(architecture(p), 5);
  const std::vector<CMat> W = stcib_designs(model, data.test);
  for (auto kind : {metrics::Regime::sc, metrics::Regime::cc}) {
    const Audit a = audit(regime_for(p, kind, 0.0), data.test, W, p.system);
    CHECK(a.feasibility_rate == 1.0);
    CHECK(a.mean_violation == 0.0);
    CHECK(a.worst_violation == 0.0);
  }
  const Audit j = audit(regime_for(p, metrics::Regime::joint, 0.5), data.test, W, p.system);
  CHECK(j.feasibility_rate == 1.0);
  CHECK_THROWS_AS(regime_for(p, metrics::Regime::joint, 1.0), std::invalid_argument);
}

TEST_CASE("summary of hand-made samples") {
  std::vector<SampleAudit> s(4);
  for (auto& x : s) x.constraints = 2;
  s[1] = {false, 0.3, 0.5, 2, 2, 1.0, 2.0};
  s[3] = {false, 0.1, 0.1, 1, 2, 3.0, 4.0};
  const Audit a = summarize(s);
  CHECK(a.feasibility_rate == 0.5);
  CHECK(a.mean_violation == doctest::Approx(0.6 / 3));
  CHECK(a.mean_violation_all == doctest::Approx(0.6 / 8));
  CHECK(a.worst_violation == 0.3);
  CHECK(a.R_c == 1.0);
  CHECK(a.R_s == 1.5);
  CHECK(summarize({}).feasibility_rate == 0.0);
}

TEST_CASE("estimation sweep") {
  Profile p;
  p.est_users = {2, 4};
  p.est_pilots = {4, 16};
  p.est_realizations = 30;
  const auto cells = estimation_sweep(p);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].K == 2);
  CHECK(cells[0].tau_p == 4);
  CHECK(cells[3].K == 4);
  CHECK(cells[3].tau_p == 16);
  // more pilot energy per user lowers the error; more users sharing it raises it
  CHECK(cells[1].avg_error_norm < cells[0].avg_error_norm);
  CHECK(cells[3].avg_error_norm < cells[2].avg_error_norm);
  CHECK(cells[2].avg_error_norm > cells[0].avg_error_norm);

  const auto threaded = estimation_sweep(p, 3);
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(threaded[i].avg_error_norm == cells[i].avg_error_norm);

  const Table t = estimation_table(cells);
  CHECK(t.header() == std::vector<std::string>{"K", "tau_p", "avg_error_norm"});
  CHECK(t.rows().size() == 4);
}

TEST_CASE("trade-off sweep writes one row per method and point") {
  Profile p = tiny();
  const Splits data = make_splits(p);
  const fs::path dir = scratch("tradeoff");
  TradeoffOptions opt;
  opt.out_dir = (dir / "out").string();
  const auto pts = tradeoff_sweep(p, data, metrics::Regime::sc, {0.5, 1.0}, opt);
  REQUIRE(pts.size() == 2);
  const Table t = tradeoff_table(pts);
  CHECK(t.header() == std::vector<std::string>{"threshold", "method", "R_s", "R_c", "feasible_frac"});
  REQUIRE(t.rows().size() == 4);
  CHECK(t.rows()[0][1] == "stcib");
  CHECK(t.rows()[1][1] == "almmo");
  CHECK(t.rows()[2][0] == "1");
  CHECK(fs::exists(dir / "out" / "train_log_sc_0.5.csv"));
  CHECK(fs::exists(dir / "out" / "stcib_sc_1.ckpt"));
  const Table trace = read_csv((dir / "out" / "almmo_trace_sc_1.csv").string());
  CHECK(trace.header()[0] == "outer_iter");
  CHECK(trace.rows().size() >= 2);
  const Table log = read_csv((dir / "out" / "train_log_sc_0.5.csv").string());
  CHECK(log.rows().size() == 2);

  // single-threaded ALM designs do not depend on the thread count
  const auto regime = regime_for(p, metrics::Regime::sc, 1.0);
  const AlmRun one = almmo_designs(p, regime, data.test, 1);
  const AlmRun two = almmo_designs(p, regime, data.test, 2);
  for (std::size_t i = 0; i < one.W.size(); ++i) CHECK(one.W[i] == two.W[i]);

  opt.with_almmo = false;
  opt.out_dir.clear();
  CHECK(tradeoff_table(tradeoff_sweep(p, data, metrics::Regime::joint, {0.5}, opt)).rows().size() == 1);
}

TEST_CASE("sweep continuation starts each point from the previous model") {
  Profile p = tiny();
  const Splits data = make_splits(p);
  TradeoffOptions opt;
  opt.with_almmo = false;
  const auto va = stcib::encode_dataset(data.val, true);
  const auto second = regime_for(p, metrics::Regime::cc, 0.3);
  const double kappa = p.system.kappa();

  const auto warm = tradeoff_sweep(p, data, metrics::Regime::cc, {0.1, 0.3}, opt);
  const double from_prev =
      stcib::evaluate_loss(warm[0].trained.model, va, train_spec(p, second).loss, kappa, p.batch_size);
  CHECK(warm[1].trained.initial_val_loss == doctest::Approx(from_prev).epsilon(1e-12));

  p.sweep_warm_start = 0;
  const auto cold = tradeoff_sweep(p, data, metrics::Regime::cc, {0.1, 0.3}, opt);
  const double fresh = stcib::evaluate_loss(stcib::Model(architecture(p), p.seed), va,
                                            train_spec(p, second).loss, kappa, p.batch_size);
  CHECK(cold[1].trained.initial_val_loss == doctest::Approx(fresh).epsilon(1e-12));
  CHECK(cold[1].trained.initial_val_loss != warm[1].trained.initial_val_loss);
  // the first point never has a predecessor
  CHECK(cold[0].trained.initial_val_loss == warm[0].trained.initial_val_loss);

  p.sweep_warm_start = 2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("CSI robustness at chi = 0 equals clean inference") {
  Profile p = tiny();
  p.csi_chi = {0.0, 0.5};
  p.csi_rician = {2.0};
  const stcib::Model model(architecture(p), 7);
  const auto pts = csi_robustness(p, model);
  REQUIRE(pts.size() == 2);

  Profile q = p;
  q.system.rician_min = q.system.rician_max = 2.0;
  const stcib::Dataset test = make_splits(q).test;
  double rc = 0.0;
  for (const auto& s : test.samples)
    rc += metrics::evaluate(s.f_true, s.sensing, model.infer(s.f_true), p.system.kappa()).sum_R_C;
  CHECK(pts[0].R_c == doctest::Approx(rc / test.samples.size()).epsilon(1e-12));
  CHECK(pts[1].R_c != pts[0].R_c);
  CHECK(csi_table(pts).rows().size() == 2);
}

TEST_CASE("runtime benchmark rows") {
  Profile p;
  p.bench_users = {2};
  p.bench_arrays = {"2x1", "1x1"};
  p.bench_instances = 3;
  p.alm_outer = 2;
  p.alm_inner = 5;
  p.inducing = 4;
  const auto rows = bench_runtime(p);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == "stcib");
  CHECK(rows[1].method == "almmo");
  CHECK(rows[3].mt_config == "1x1");
  for (const auto& r : rows) {
    CHECK(r.mean_seconds > 0.0);
    CHECK(r.std_seconds >= 0.0);
  }
  CHECK(runtime_table(rows).rows().size() == 4);
}
