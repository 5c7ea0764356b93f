#include "cfisac/harness/config_file.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "cfisac/linalg.hpp"

namespace cfisac::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "") throw std::invalid_argument(key + ": not a number: '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "") throw std::invalid_argument(key + ": not an integer: '" + v + "'");
  return x;
}

std::vector<std::string> split_list(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v, ',')) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v, ',')) out.push_back(static_cast<int>(to_int(key, s)));
  return out;
}

// "psi theta"
std::pair<double, double> angle_pair(const std::string& key, const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string t;
  while (ss >> t) parts.push_back(t);
  if (parts.size() != 2) throw std::invalid_argument(key + ": expected 'azimuth elevation'");
  return {to_double(key, parts[0]), to_double(key, parts[1])};
}

using Setter = std::function<void(Profile&, const std::string& key, const std::string& v)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  auto d = [](double channel::SystemConfig::*f) {
    return Setter([f](Profile& p, const std::string& k, const std::string& v) { p.system.*f = to_double(k, v); });
  };
  auto i = [](int channel::SystemConfig::*f) {
    return Setter([f](Profile& p, const std::string& k, const std::string& v) {
      p.system.*f = static_cast<int>(to_int(k, v));
    });
  };
  auto pd = [](double Profile::*f) {
    return Setter([f](Profile& p, const std::string& k, const std::string& v) { p.*f = to_double(k, v); });
  };
  auto pi = [](int Profile::*f) {
    return Setter([f](Profile& p, const std::string& k, const std::string& v) { p.*f = static_cast<int>(to_int(k, v)); });
  };
  using SC = channel::SystemConfig;
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"N_T", i(&SC::N_T)},
      {"N_R", i(&SC::N_R)},
      {"K", i(&SC::K)},
      {"N_C", i(&SC::N_C)},
      {"M_T1", i(&SC::M_T1)},
      {"M_T2", i(&SC::M_T2)},
      {"M_R1", i(&SC::M_R1)},
      {"M_R2", i(&SC::M_R2)},
      {"rho_db", [](Profile& p, const std::string& k, const std::string& v) {
         p.system.rho = db_to_linear(to_double(k, v));
       }},
      {"rho_p_db", [](Profile& p, const std::string& k, const std::string& v) {
         p.system.rho_p = db_to_linear(to_double(k, v));
       }},
      {"tau_c", i(&SC::tau_c)},
      {"tau_p", i(&SC::tau_p)},
      {"pathloss_exponent", d(&SC::pathloss_exponent)},
      {"pathloss_ref_db", d(&SC::pathloss_ref_db)},
      {"link_gain_db", d(&SC::link_gain_db)},
      {"echo_gain_db", d(&SC::echo_gain_db)},
      {"rician_min", d(&SC::rician_min)},
      {"rician_max", d(&SC::rician_max)},
      {"antenna_area", d(&SC::antenna_area)},
      {"wavelength", d(&SC::wavelength)},
      {"rcs_target", d(&SC::rcs_target)},
      {"rcs_clutter", d(&SC::rcs_clutter)},
      {"area_side", d(&SC::area_side)},
      {"ap_height", d(&SC::ap_height)},
      {"ground_height", d(&SC::ground_height)},
      {"sensing_layout", [](Profile& p, const std::string& k, const std::string& v) {
         if (v == "anchored") p.system.sensing_layout = channel::SensingLayout::anchored;
         else if (v == "random") p.system.sensing_layout = channel::SensingLayout::random;
         else throw std::invalid_argument(k + ": expected anchored or random");
       }},
      {"target_angles_deg", [](Profile& p, const std::string& k, const std::string& v) {
         p.system.target_angles_deg = angle_pair(k, v);
       }},
      {"clutter_angles_deg", [](Profile& p, const std::string& k, const std::string& v) {
         p.system.clutter_angles_deg.clear();
         for (const auto& s : split_list(v, ',')) p.system.clutter_angles_deg.push_back(angle_pair(k, s));
       }},
      {"n_train", pi(&Profile::n_train)},
      {"n_val", pi(&Profile::n_val)},
      {"n_test", pi(&Profile::n_test)},
      {"heads", pi(&Profile::heads)},
      {"inducing", pi(&Profile::inducing)},
      {"batch_size", pi(&Profile::batch_size)},
      {"max_epochs", pi(&Profile::max_epochs)},
      {"patience", pi(&Profile::patience)},
      {"lr", pd(&Profile::lr)},
      {"lr_plateau", pi(&Profile::lr_plateau)},
      {"sweep_warm_start", pi(&Profile::sweep_warm_start)},
      {"lr_decay", pd(&Profile::lr_decay)},
      {"penalty", pd(&Profile::penalty)},
      {"margin", pd(&Profile::margin)},
      {"alm_outer", pi(&Profile::alm_outer)},
      {"alm_inner", pi(&Profile::alm_inner)},
      {"alm_samples", pi(&Profile::alm_samples)},
      {"sc_thresholds", [](Profile& p, const std::string& k, const std::string& v) { p.sc_thresholds = doubles(k, v); }},
      {"cc_thresholds", [](Profile& p, const std::string& k, const std::string& v) { p.cc_thresholds = doubles(k, v); }},
      {"joint_etas", [](Profile& p, const std::string& k, const std::string& v) { p.joint_etas = doubles(k, v); }},
      {"est_N_T", pi(&Profile::est_N_T)},
      {"est_array", [](Profile& p, const std::string&, const std::string& v) { p.est_array = v; }},
      {"est_users", [](Profile& p, const std::string& k, const std::string& v) { p.est_users = ints(k, v); }},
      {"est_pilots", [](Profile& p, const std::string& k, const std::string& v) { p.est_pilots = ints(k, v); }},
      {"est_realizations", pi(&Profile::est_realizations)},
      {"csi_chi", [](Profile& p, const std::string& k, const std::string& v) { p.csi_chi = doubles(k, v); }},
      {"csi_rician", [](Profile& p, const std::string& k, const std::string& v) { p.csi_rician = doubles(k, v); }},
      {"csi_zeta", pd(&Profile::csi_zeta)},
      {"bench_users", [](Profile& p, const std::string& k, const std::string& v) { p.bench_users = ints(k, v); }},
      {"bench_arrays", [](Profile& p, const std::string&, const std::string& v) { p.bench_arrays = split_list(v, ','); }},
      {"bench_instances", pi(&Profile::bench_instances)},
      {"seed", [](Profile& p, const std::string& k, const std::string& v) {
         const long long s = to_int(k, v);
         if (s < 0) throw std::invalid_argument(k + ": must be nonnegative");
         p.seed = static_cast<std::uint64_t>(s);
       }},
      {"threads", pi(&Profile::threads)},
  };
  return table;
}

template <class T>
bool sorted_nonempty(const std::vector<T>& v) {
  return !v.empty() && std::is_sorted(v.begin(), v.end());
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("line " + std::to_string(number) + ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw std::runtime_error("line " + std::to_string(number) + ": repeated key '" + key + "'");
  }
  return kv;
}

void apply_overrides(Profile& p, const std::map<std::string, std::string>& kv) {
  const auto& table = setters();
  for (const auto& [key, value] : kv) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second(p, key, value);
  }
  p.system.seed = p.seed;
}

Profile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  Profile p;
  try {
    apply_overrides(p, parse_key_values(in));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  p.validate();
  return p;
}

std::vector<std::string> profile_keys() {
  std::vector<std::string> keys;
  for (const auto& e : setters()) keys.push_back(e.first);
  return keys;
}

std::pair<int, int> parse_array(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw std::invalid_argument("array layout must look like 2x2: '" + s + "'");
  const int a = static_cast<int>(to_int("array", s.substr(0, x)));
  const int b = static_cast<int>(to_int("array", s.substr(x + 1)));
  if (a < 1 || b < 1) throw std::invalid_argument("array dimensions must be >= 1: '" + s + "'");
  return {a, b};
}

void Profile::validate() const {
  system.validate();
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  need(n_train > 0 && n_val > 0 && n_test > 0, "n_train, n_val and n_test must be positive");
  need(heads > 0 && inducing > 0, "heads and inducing must be positive");
  need(batch_size > 0 && max_epochs > 0 && patience > 0, "batch_size, max_epochs and patience must be positive");
  need(patience < max_epochs, "patience must be below max_epochs");
  need(sweep_warm_start == 0 || sweep_warm_start == 1, "sweep_warm_start must be 0 or 1");
  need(lr_plateau >= 0 && lr_decay > 0.0 && lr_decay <= 1.0, "lr_plateau must be >= 0 and lr_decay in (0, 1]");
  need(lr >= 0.0 && penalty >= 0.0 && margin >= 0.0, "lr, penalty and margin must be nonnegative");
  need(alm_outer > 0 && alm_inner > 0 && alm_samples >= 0, "ALM iteration limits must be positive");
  need(sorted_nonempty(sc_thresholds), "sc_thresholds must be non-empty and sorted");
  need(sorted_nonempty(cc_thresholds), "cc_thresholds must be non-empty and sorted");
  need(sorted_nonempty(joint_etas), "joint_etas must be non-empty and sorted");
  need(joint_etas.front() > 0.0 && joint_etas.back() < 1.0, "joint_etas must lie strictly inside (0, 1)");
  need(sorted_nonempty(est_users) && sorted_nonempty(est_pilots), "estimation lists must be non-empty and sorted");
  need(est_users.front() > 0 && est_realizations > 0 && est_N_T > 0,
       "estimation users, realizations and est_N_T must be positive");
  parse_array(est_array);
  need(est_pilots.front() >= est_users.back(), "est_pilots must all be >= the largest entry of est_users");
  need(sorted_nonempty(csi_chi) && sorted_nonempty(csi_rician), "CSI lists must be non-empty and sorted");
  need(csi_chi.front() >= 0.0 && csi_chi.back() <= 1.0, "csi_chi must lie in [0, 1]");
  need(sorted_nonempty(bench_users) && !bench_arrays.empty(), "benchmark lists must be non-empty");
  need(bench_instances >= 1, "bench_instances must be positive");
  for (const auto& a : bench_arrays) parse_array(a);
  need(threads >= 1, "threads must be >= 1");
}

}  // namespace cfisac::harness
