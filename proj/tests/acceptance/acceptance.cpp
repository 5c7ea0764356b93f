// Acceptance run at desk scale: one PASS/FAIL line per criterion on stdout, progress on stderr.
// Usage: acceptance [criterion numbers...]   (default: all twelve)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "cfisac/almmo/problem.hpp"
#include "cfisac/channel/channel_model.hpp"
#include "cfisac/harness/experiments.hpp"
#include "cfisac/localization/music.hpp"
#include "gradient_cases.hpp"
#include "unit_suites.hpp"

using namespace cfisac;
using namespace cfisac::harness;

namespace {

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void progress(const std::string& s) { std::cerr << s << std::endl; }

std::string num(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Lazily built shared state so a single criterion can be run on its own.
struct Bench {
  Profile profile;
  std::optional<Splits> splits;
  std::map<double, stcib::TrainResult> sc_models, cc_models;
  std::map<double, double> train_seconds;  // cc models

  const Splits& data() {
    if (!splits) {
      progress("generating desk dataset");
      splits = make_splits(profile);
    }
    return *splits;
  }

  const stcib::TrainResult& model(metrics::Regime kind, double th) {
    auto& cache = kind == metrics::Regime::sc ? sc_models : cc_models;
    auto it = cache.find(th);
    if (it != cache.end()) return it->second;
    progress("training " + metrics::to_string(kind) + " " + num(th));
    const auto t0 = Clock::now();
    stcib::TrainResult r = train_model(profile, data(), regime_for(profile, kind, th));
    if (kind == metrics::Regime::cc) train_seconds[th] = since(t0);
    progress("  done in " + num(since(t0), 3) + " s, best epoch " + std::to_string(r.best_epoch));
    return cache.emplace(th, std::move(r)).first->second;
  }
};

std::vector<CVec> random_users(int K, int n, double scale, Rng& rng) {
  std::vector<CVec> f(K);
  for (auto& v : f) v = scale * complex_normal_vector(n, rng);
  return f;
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::pow(10.0, std::uniform_real_distribution<double>(std::log10(lo), std::log10(hi))(rng));
}

// 1. Permutation invariance of inference.
Verdict permutation_invariance(Bench& b) {
  const stcib::Model& m = b.model(metrics::Regime::cc, 0.2).model;
  const auto t0 = Clock::now();
  Rng rng(101);
  const int K = m.arch.dims.K, n = m.arch.dims.tx_dim();
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::vector<CVec> f = random_users(K, n, log_uniform(rng, 1e-2, 1e3), rng);
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    do std::shuffle(perm.begin(), perm.end(), rng);
    while (std::is_sorted(perm.begin(), perm.end()));
    std::vector<CVec> pf;
    for (int k : perm) pf.push_back(f[k]);
    const CMat w = m.infer(f);
    worst = std::max(worst, (m.infer(pf) - w).norm() / w.norm());
  }
  const double secs = since(t0);
  return {worst <= 1e-9 && secs < 60.0,
          "max relative Frobenius difference " + num(worst) + " over 1000 permuted inputs, " + num(secs, 3) + " s"};
}

// 2. Power budget of inference outputs.
Verdict power_feasibility(Bench& b) {
  const stcib::Model& m = b.model(metrics::Regime::cc, 0.2).model;
  Rng rng(102);
  const int K = m.arch.dims.K, n = m.arch.dims.tx_dim();
  const double budget = b.profile.system.power_budget();
  int violations = 0, total = 0;
  double worst_excess = -budget;
  auto check = [&](const std::vector<CVec>& f) {
    const double excess = m.infer(f).squaredNorm() - budget;
    worst_excess = std::max(worst_excess, excess);
    violations += excess > 1e-9;
    ++total;
  };
  for (const auto* set : {&b.data().test, &b.data().val})
    for (const auto& s : set->samples) check(s.f_hat);
  while (total < 10000) check(random_users(K, n, log_uniform(rng, 1e-4, 1e4), rng));
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(total) +
                               " outputs, largest ||W||^2 - rho N_T = " + num(worst_excess)};
}

// 3. Gradients of every primitive and of the three losses at desk dimensions.
Verdict gradients(Bench& b) {
  const auto t0 = Clock::now();
  double prim = 0.0;
  std::string prim_name;
  for (const auto& c : testing::primitive_gradient_checks(103))
    if (c.result.max_rel_error >= prim) {
      prim = c.result.max_rel_error;
      prim_name = c.name;
    }

  const stcib::Architecture arch = architecture(b.profile);
  const stcib::Model m(arch, 103);
  const auto& test = b.data().test;
  std::vector<stcib::EncodedSample> enc;
  for (int i = 0; i < 4; ++i) enc.push_back(stcib::encode_sample(test.samples[i].f_hat, test.samples[i].sensing));
  std::vector<const stcib::EncodedSample*> batch;
  for (const auto& e : enc) batch.push_back(&e);
  const double kappa = b.profile.system.kappa();
  double e2e = 0.0;
  int under = 0;
  std::string detail;
  for (const auto& regime : {regime_for(b.profile, metrics::Regime::sc, 3.0), regime_for(b.profile, metrics::Regime::cc, 0.4),
                             regime_for(b.profile, metrics::Regime::joint, 0.5)}) {
    const auto r = testing::loss_gradient_check(m, batch, {regime, b.profile.penalty, b.profile.margin}, kappa, 104);
    e2e = std::max(e2e, r.worst_rel);
    under += r.under_probed;
    detail += " " + metrics::to_string(regime.kind) + " " + num(r.worst_rel);
  }
  const double secs = since(t0);
  return {prim < 1e-3 && e2e < 1e-3 && under == 0 && secs < 300.0,
          "primitives max rel " + num(prim) + " (" + prim_name + "); losses at d=" + std::to_string(arch.dims.d()) +
              ", K=" + std::to_string(arch.dims.K) + ":" + detail + "; " + num(secs, 3) + " s"};
}

// 4. Estimation error falls with pilot length.
Verdict estimation_trend(Bench& b) {
  Profile p = b.profile;
  p.est_users = {4};
  p.est_pilots = {8, 40};
  p.est_realizations = 1000;
  const auto t0 = Clock::now();
  const auto cells = estimation_sweep(p);
  const double secs = since(t0);
  const double drop = 100.0 * (1.0 - cells[1].avg_error_norm / cells[0].avg_error_norm);
  return {drop >= 25.0 && drop <= 45.0 && secs < 120.0,
          "K=4: error " + num(cells[0].avg_error_norm) + " at tau_p=8, " + num(cells[1].avg_error_norm) +
              " at tau_p=40, drop " + num(drop, 3) + "% (band 25-45%), " + num(secs, 3) + " s"};
}

almmo::Problem problem_of(const Profile& p, const stcib::Sample& s, const metrics::RegimeSpec& r) {
  return almmo::make_problem(s.f_hat, s.sensing, r, p.system.rho, p.system.N_T);
}

// 5. ALM-MO gradient and sphere invariant.
Verdict alm_gradient(Bench& b) {
  const auto& test = b.data().test;
  const Profile& p = b.profile;
  const metrics::RegimeSpec regimes[] = {regime_for(p, metrics::Regime::sc, 2.0), regime_for(p, metrics::Regime::cc, 0.4),
                                         regime_for(p, metrics::Regime::joint, 0.5)};
  Rng rng(105);
  auto sphere_point = [&](const almmo::Problem& q) {
    CMat V(q.rows(), q.cols());
    for (int i = 0; i < V.size(); ++i) V(i) = complex_normal(rng);
    return CMat(V / V.norm());
  };
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    const almmo::Problem q = problem_of(p, test.samples[point], regimes[point % 3]);
    const CMat V = sphere_point(q);
    const almmo::Aux mu = almmo::mu_update(q, sphere_point(q));
    almmo::Multipliers m = almmo::initial_multipliers(q, 10.0);
    for (double& l : m.lambda) l = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    const CMat G = almmo::euclidean_grad(q, V, mu, m);
    const double h = 1e-6;
    CMat numg(V.rows(), V.cols());
    for (int i = 0; i < V.size(); ++i) {
      double d[2];
      for (int part = 0; part < 2; ++part) {
        const cd step = part == 0 ? cd(h, 0) : cd(0, h);
        CMat a = V, c = V;
        a(i) += step;
        c(i) -= step;
        d[part] = (almmo::cost(q, a, mu, m) - almmo::cost(q, c, mu, m)) / (2 * h);
      }
      numg(i) = cd(d[0], d[1]);
    }
    worst = std::max(worst, (numg - G).norm() / G.norm());
  }

  double sphere = 0.0;
  int steps = 0;
  for (int i = 0; i < 30; ++i) {
    const almmo::Problem q = problem_of(p, test.samples[i], regimes[i % 3]);
    Rng init(mix_seed(106, i));
    const almmo::SolveResult r = almmo::solve(q, almmo::random_init(q, init));
    sphere = std::max(sphere, r.worst_sphere_error);
    steps += r.inner_steps;
  }
  return {worst < 1e-5 && sphere < 1e-10,
          "gradient max rel err " + num(worst) + " at 20 points; max |Tr(VV^H)-1| " + num(sphere) + " over " +
              std::to_string(steps) + " accepted steps in 30 solves"};
}

// Equal-power zero forcing on the estimated channels; if it meets every communication threshold the
// sensing-centric instance is feasible.
bool zf_certificate(const stcib::Sample& s, const metrics::RegimeSpec& r, double budget) {
  const int K = static_cast<int>(s.f_hat.size());
  const int n = static_cast<int>(s.f_hat[0].size());
  CMat F(n, K);
  for (int k = 0; k < K; ++k) F.col(k) = s.f_hat[k];
  const CMat Z = F * (F.adjoint() * F).inverse();
  CMat W = CMat::Zero(n, K + 1);
  for (int k = 0; k < K; ++k) W.col(k + 1) = std::sqrt(budget / K) * Z.col(k) / Z.col(k).norm();
  for (double g : metrics::sinr_all(s.f_hat, W))
    if (metrics::comm_rate(g, r.kappa) < r.vartheta_th) return false;
  return true;
}

// 6. ALM-MO convergence on sensing-centric instances.
Verdict alm_convergence(Bench& b) {
  const Profile& p = b.profile;
  const metrics::RegimeSpec r = regime_for(p, metrics::Regime::sc, 2.0);
  const auto& test = b.data().test;
  const int n = 100;
  int monotone = 0, stabilized = 0, feasible = 0, met = 0;
  double worst_drop = 0.0;
  int max_outer = 0;
  for (int i = 0; i < n; ++i) {
    const almmo::Problem q = problem_of(p, test.samples[i], r);
    Rng init(mix_seed(107, i));
    const almmo::SolveResult s = almmo::solve(q, almmo::random_init(q, init));
    bool mono = true;
    for (std::size_t t = 2; t < s.trace.size(); ++t) {
      const double drop = (s.trace[t - 1].objective - s.trace[t].objective) / std::abs(s.trace[t - 1].objective);
      worst_drop = std::max(worst_drop, drop);
      mono = mono && drop <= 1e-9;
    }
    monotone += mono;
    const auto& tr = s.trace;
    const std::size_t last = tr.size() - 1;
    const bool settled = last >= 1 && std::abs(tr[last].objective - tr[last - 1].objective) <=
                                          1e-5 * std::abs(tr[last - 1].objective);
    stabilized += settled;
    max_outer = std::max(max_outer, tr[last].outer_iter);
    if (zf_certificate(test.samples[i], r, q.budget)) {
      ++feasible;
      met += tr[last].max_violation < 1e-3;
    }
  }
  const double frac = feasible ? static_cast<double>(met) / feasible : 0.0;
  return {monotone == n && stabilized == n && max_outer <= 50 && feasible > 0 && frac >= 0.9,
          "SC 2 bps/Hz on " + std::to_string(n) + " instances: monotone " + std::to_string(monotone) +
              " (largest relative drop " + num(worst_drop) + "), stabilized " + std::to_string(stabilized) +
              " within " + std::to_string(max_outer) + " rounds, violation < 1e-3 on " + std::to_string(met) + "/" +
              std::to_string(feasible) + " certified-feasible instances"};
}

// Non-increasing with at most one inversion of at most 2%.
bool trend_ok(const std::vector<double>& v, std::string& detail) {
  int inversions = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) {
      ++inversions;
      worst = std::max(worst, (v[i] - v[i - 1]) / v[i - 1]);
    }
  for (double x : v) detail += num(x) + " ";
  detail += "(" + std::to_string(inversions) + " inversions, largest " + num(100 * worst, 3) + "%)";
  return inversions == 0 || (inversions == 1 && worst <= 0.02);
}

// 7. Trade-off monotonicity of the learned designs.
Verdict tradeoff(Bench& b) {
  const Profile& p = b.profile;
  // the same sweep the CLI runs, without the ALM-MO column
  TradeoffOptions opt;
  opt.with_almmo = false;
  std::vector<double> rs, rc;
  const Log log = [](const std::string& s) {
    if (s.find("stcib R_s") != std::string::npos) progress(s);
  };
  for (const auto& pt : tradeoff_sweep(p, b.data(), metrics::Regime::sc, p.sc_thresholds, opt, log))
    rs.push_back(pt.stcib.R_s);
  for (const auto& pt : tradeoff_sweep(p, b.data(), metrics::Regime::cc, p.cc_thresholds, opt, log))
    rc.push_back(pt.stcib.R_c);
  std::string ds = "SC sum R_s: ", dc = "; CC sum R_c: ";
  const bool a = trend_ok(rs, ds);
  const bool c = trend_ok(rc, dc);
  return {a && c, ds + dc};
}

// 8. Learned CC design against ALM-MO on the shared test set.
Verdict learning_vs_optimization(Bench& b) {
  const Profile& p = b.profile;
  const double zeta = 0.2;
  const metrics::RegimeSpec r = regime_for(p, metrics::Regime::cc, zeta);
  const auto& m = b.model(metrics::Regime::cc, zeta).model;
  const auto& test = b.data().test;
  const Audit net = audit(r, test, stcib_designs(m, test), p.system);
  progress("ALM-MO on " + std::to_string(test.samples.size()) + " test instances");
  const Audit alm = audit(r, test, almmo_designs(p, r, test, p.threads).W, p.system);
  const double ratio = net.R_c / alm.R_c;
  const double secs = b.train_seconds.count(zeta) ? b.train_seconds[zeta] : 0.0;
  return {ratio >= 0.9 && net.feasibility_rate >= 0.9 && secs <= 1800.0,
          "CC 0.2 bps/Hz on 500 samples: STCIB R_c " + num(net.R_c) + " vs ALM-MO " + num(alm.R_c) + " (" +
              num(100 * ratio, 3) + "%), sensing constraints met on " + num(100 * net.feasibility_rate, 3) +
              "% (ALM-MO " + num(100 * alm.feasibility_rate, 3) + "%), training " + num(secs, 3) + " s"};
}

// 9. Feasibility audit at the low end of the CC sweep.
Verdict feasibility(Bench& b) {
  const Profile& p = b.profile;
  const double zeta = p.cc_thresholds.front();
  const metrics::RegimeSpec r = regime_for(p, metrics::Regime::cc, zeta);
  const auto& test = b.data().test;
  const Audit a = audit(r, test, stcib_designs(b.model(metrics::Regime::cc, zeta).model, test), p.system);
  return {a.feasibility_rate >= 0.9 && a.mean_violation < 0.05,
          "CC " + num(zeta) + " bps/Hz: feasibility " + num(100 * a.feasibility_rate, 4) + "%, average violation " +
              num(a.mean_violation) + " bps/Hz, worst " + num(a.worst_violation) + " bps/Hz"};
}

// 10. MUSIC on random single-target geometries.
Verdict music(Bench& b) {
  channel::SystemConfig cfg = b.profile.system;
  cfg.N_C = 0;
  cfg.sensing_layout = channel::SensingLayout::random;
  const double deg = 180.0 / kPi;
  Rng rng(110);
  int within = 0;
  double worst = 0.0, ortho = 0.0;
  for (int g = 0; g < 50; ++g) {
    const channel::Scene scene = channel::build_scene(cfg, rng);
    const channel::SensingResponse s = channel::sensing_response(scene, cfg, rng);
    CMat W(cfg.tx_dim(), cfg.K + 1);
    for (int i = 0; i < W.size(); ++i) W(i) = complex_normal(rng);
    const CMat Y = localization::snapshots(s, 0, W, cfg.tau_c - cfg.tau_p, rng, 0.0);
    const auto r = localization::music(Y, 1, cfg.M_R1, cfg.M_R2);
    ortho = std::max(ortho, (r.subspaces.noise.adjoint() * r.subspaces.signal).norm());
    const channel::Angles a = scene.rx[scene.rx_index(0, 0)].angles;
    const double psi = a.psi * deg, theta = a.theta * deg;
    // A planar array sees only the direction cosines (cos psi sin theta, sin psi sin theta). The
    // grid covers them once up to mirror images; take the image of the truth closest to the peak.
    const auto& pk = r.peaks.front();
    double best = 1e9, best_dpsi = 0, best_dtheta = 0;
    for (double dp : {-360.0, -180.0, 0.0, 180.0, 360.0})
      for (double t : {theta, -theta, 180.0 - theta, theta - 180.0}) {
        const double p2 = psi + dp;
        const double su = std::cos(p2 / deg) * std::sin(t / deg) - std::cos(a.psi) * std::sin(a.theta);
        const double sv = std::sin(p2 / deg) * std::sin(t / deg) - std::sin(a.psi) * std::sin(a.theta);
        if (std::hypot(su, sv) > 1e-12) continue;
        const double e = localization::rmse(p2, t, pk.psi_deg, pk.theta_deg);
        if (e < best) {
          best = e;
          best_dpsi = std::abs(p2 - pk.psi_deg);
          best_dtheta = std::abs(t - pk.theta_deg);
        }
      }
    worst = std::max(worst, best);
    within += best_dpsi <= 0.5 + 1e-9 && best_dtheta <= 0.5 + 1e-9 && best <= 0.71;
  }
  return {within == 50 && ortho < 1e-8, std::to_string(within) + "/50 geometries within one grid cell, worst RMSE " +
                                            num(worst) + " deg, max ||N^H S|| " + num(ortho)};
}

// 11. Online runtime ordering.
Verdict runtime(Bench& b) {
  Profile p = b.profile;
  p.threads = 1;
  p.bench_users = {p.system.K};
  p.bench_arrays = {std::to_string(p.system.M_T1) + "x" + std::to_string(p.system.M_T2)};
  p.bench_instances = 100;
  const auto rows = bench_runtime(p);
  const double ratio = rows[0].mean_seconds / rows[1].mean_seconds;
  return {ratio < 0.05, "STCIB " + num(1e3 * rows[0].mean_seconds) + " ms vs ALM-MO " + num(1e3 * rows[1].mean_seconds) +
                            " ms per instance over 100 instances (" + num(100 * ratio, 3) + "%)"};
}

// 12. In-graph rates against complex arithmetic, and the unit suites' brute-force oracles.
Verdict oracle_equivalence(Bench& b) {
  const auto& train = b.data().train;
  const double kappa = b.profile.system.kappa();
  const stcib::Dims dims = train.dims;
  Rng rng(112);
  double worst = 0.0;
  const int pairs = 1000, batch = 50;
  for (int start = 0; start < pairs; start += batch) {
    std::vector<stcib::EncodedSample> enc;
    std::vector<CMat> ws;
    std::vector<ad::Tensor> iq;
    for (int i = start; i < start + batch; ++i) {
      const auto& s = train.samples[i];
      enc.push_back(stcib::encode_sample(s.f_hat, s.sensing));
      CMat w(dims.tx_dim(), dims.K + 1);
      const double scale = log_uniform(rng, 1e-2, 1e1);
      for (int k = 0; k < w.size(); ++k) w(k) = scale * complex_normal(rng);
      ws.push_back(w);
      iq.push_back(stcib::to_iq(w));
    }
    std::vector<const ad::Tensor*> pw, pc, ps;
    for (int i = 0; i < batch; ++i) {
      pw.push_back(&iq[i]);
      pc.push_back(&enc[i].comm);
      ps.push_back(&enc[i].sens);
    }
    ad::Graph g;
    const stcib::RateVars r = stcib::differentiable_rates(g.constant(stcib::stack(pw)), g.constant(stcib::stack(pc)),
                                                          g.constant(stcib::stack(ps)), dims, kappa);
    for (int i = 0; i < batch; ++i) {
      const auto& s = train.samples[start + i];
      const metrics::Rates ref = metrics::evaluate(s.f_hat, s.sensing, ws[i], kappa);
      for (int k = 0; k < dims.K; ++k) worst = std::max(worst, std::abs(r.R_C.value()(i, 0, k) - ref.R_C[k]));
      for (int j = 0; j < dims.N_R; ++j) worst = std::max(worst, std::abs(r.R_S.value()(i, 0, j) - ref.R_S[j]));
    }
  }

  std::string failed;
  int suites = 0;
  std::stringstream list(CFISAC_UNIT_SUITES);
  std::string exe;
  while (std::getline(list, exe, ';')) {
    if (exe.empty()) continue;
    ++suites;
    progress("running " + exe);
    const std::string cmd = "\"" + exe + "\" --minimal > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) failed += " " + exe.substr(exe.find_last_of('/') + 1);
  }
  return {worst < 1e-8 && failed.empty() && suites > 0,
          "max |rate difference| " + num(worst) + " bps/Hz over 1000 pairs; " + std::to_string(suites) +
              " oracle suites" + (failed.empty() ? " pass" : ", failing:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict(Bench&)>>> criteria = {
      {"permutation invariance", permutation_invariance},
      {"power feasibility", power_feasibility},
      {"gradient correctness", gradients},
      {"estimation trend", estimation_trend},
      {"ALM-MO gradient and sphere", alm_gradient},
      {"ALM-MO convergence", alm_convergence},
      {"trade-off monotonicity", tradeoff},
      {"learning vs optimization", learning_vs_optimization},
      {"feasibility audit", feasibility},
      {"MUSIC localization", music},
      {"runtime ordering", runtime},
      {"oracle equivalence", oracle_equivalence},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c < 1 || c > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << argv[i] << '\n';
      return 2;
    }
    pick.insert(c);
  }

  Bench bench;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second(bench);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
