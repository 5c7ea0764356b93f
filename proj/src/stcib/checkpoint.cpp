#include "cfisac/stcib/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cfisac/io.hpp"

namespace cfisac::stcib {

namespace {
constexpr const char* kMagic = "cfisac-checkpoint v1";
}

void save_checkpoint(const std::string& path, const Model& model, const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  const Architecture& a = model.arch;
  os.precision(17);
  os << kMagic << '\n'
     << "N_T " << a.dims.N_T << "\nM_T " << a.dims.M_T << "\nK " << a.dims.K << "\nN_R " << a.dims.N_R << "\nM_R "
     << a.dims.M_R << "\nN_C " << a.dims.N_C << "\nheads " << a.heads << "\ninducing " << a.inducing << "\nhidden "
     << a.hidden_width() << "\nbudget " << a.budget << "\nregime " << metrics::to_string(meta.regime.kind)
     << "\neta " << meta.regime.eta << "\nvartheta_th " << meta.regime.vartheta_th << "\nzeta_th "
     << meta.regime.zeta_th << "\nkappa " << meta.regime.kappa << "\nseed " << meta.seed << "\nepoch " << meta.epoch
     << "\nval_loss " << meta.val_loss << "\nparams " << model.params.values.size() << '\n';
  for (std::size_t i = 0; i < model.params.values.size(); ++i) {
    const auto& s = model.params.values[i].shape();
    os << "param " << model.params.names[i] << ' ' << s.batch << ' ' << s.rows << ' ' << s.cols << '\n';
  }
  os << "end\n";
  for (const Tensor& t : model.params.values) io::write_f64(os, t.data(), t.size());
  if (!os) throw std::runtime_error("failed writing checkpoint " + path);
}

Model load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  std::string line;
  std::getline(is, line);
  if (line != kMagic) throw std::runtime_error(path + " is not a checkpoint file");
  std::map<std::string, std::string> kv;
  std::vector<std::string> names;
  std::vector<ad::Shape> shapes;
  while (std::getline(is, line) && line != "end") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "param") {
      std::string name;
      ad::Shape s;
      ls >> name >> s.batch >> s.rows >> s.cols;
      names.push_back(name);
      shapes.push_back(s);
    } else {
      std::string value;
      ls >> value;
      kv[key] = value;
    }
  }
  if (line != "end") throw std::runtime_error(path + ": truncated header");
  auto get = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::runtime_error(path + ": missing header key " + k);
    return it->second;
  };
  Architecture a;
  a.dims = {std::stoi(get("N_T")), std::stoi(get("M_T")), std::stoi(get("K")),
            std::stoi(get("N_R")), std::stoi(get("M_R")), std::stoi(get("N_C"))};
  a.heads = std::stoi(get("heads"));
  a.inducing = std::stoi(get("inducing"));
  a.hidden = std::stoi(get("hidden"));
  a.budget = std::stod(get("budget"));
  Model m(a, 0);
  if (names.size() != m.params.values.size()) throw std::runtime_error(path + ": parameter count mismatch");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] != m.params.names[i] || !(shapes[i] == m.params.values[i].shape())) {
      throw std::runtime_error(path + ": parameter table does not match the architecture at " + names[i]);
    }
    io::read_f64(is, m.params.values[i].data(), m.params.values[i].size());
  }
  if (meta) {
    meta->regime.kind = metrics::parse_regime(get("regime"));
    meta->regime.eta = std::stod(get("eta"));
    meta->regime.beta_C = meta->regime.kind != metrics::Regime::cc;
    meta->regime.beta_S = meta->regime.kind != metrics::Regime::sc;
    meta->regime.vartheta_th = std::stod(get("vartheta_th"));
    meta->regime.zeta_th = std::stod(get("zeta_th"));
    meta->regime.kappa = std::stod(get("kappa"));
    meta->seed = std::stoull(get("seed"));
    meta->epoch = std::stoi(get("epoch"));
    meta->val_loss = std::stod(get("val_loss"));
  }
  return m;
}

}  // namespace cfisac::stcib
