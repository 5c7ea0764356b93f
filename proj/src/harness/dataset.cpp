#include "cfisac/harness/dataset.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cfisac/channel/channel_model.hpp"
#include "cfisac/estimation/estimation.hpp"
#include "cfisac/io.hpp"

namespace cfisac::harness {

stcib::Dims dims_of(const channel::SystemConfig& cfg) {
  return {cfg.N_T, cfg.M_T(), cfg.K, cfg.N_R, cfg.M_R(), cfg.N_C};
}

namespace {

stcib::Sample draw_sample(const channel::SystemConfig& cfg, const channel::Scene* fixed_scene,
                          const channel::SensingResponse* fixed_sensing, Rng& rng) {
  stcib::Sample s;
  if (fixed_scene) {
    const channel::ChannelSet ch = channel::sample_channels(*fixed_scene, cfg, rng);
    s.f_true = ch.f;
    s.f_hat = estimation::estimate_channels(ch, cfg, rng).f_hat;
    s.sensing = *fixed_sensing;
  } else {
    const channel::Scene scene = channel::build_scene(cfg, rng);
    const channel::ChannelSet ch = channel::sample_channels(scene, cfg, rng);
    s.f_true = ch.f;
    s.f_hat = estimation::estimate_channels(ch, cfg, rng).f_hat;
    s.sensing = channel::sensing_response(scene, cfg, rng);
  }
  // only the response matrices travel with a sample
  s.sensing.alpha.clear();
  s.sensing.a_T.clear();
  s.sensing.a_R.clear();
  return s;
}

}  // namespace

stcib::Dataset generate_dataset(const channel::SystemConfig& cfg, const GenerateOptions& opt) {
  cfg.validate();
  if (opt.samples < 0) throw std::invalid_argument("generate_dataset: negative sample count");
  stcib::Dataset d;
  d.dims = dims_of(cfg);
  d.seed = opt.seed;
  d.samples.resize(opt.samples);

  channel::Scene scene;
  channel::SensingResponse sensing;
  if (!opt.scene_per_sample) {
    Rng rng(opt.seed);
    scene = channel::build_scene(cfg, rng);
    sensing = channel::sensing_response(scene, cfg, rng);
  }
  const channel::Scene* sp = opt.scene_per_sample ? nullptr : &scene;
  const channel::SensingResponse* gp = opt.scene_per_sample ? nullptr : &sensing;

  auto work = [&](int first, int stride) {
    for (int i = first; i < opt.samples; i += stride) {
      Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(i)));
      d.samples[i] = draw_sample(cfg, sp, gp, rng);
    }
  };
  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  return d;
}

stcib::Dataset subset(const stcib::Dataset& d, std::size_t start, std::size_t count) {
  if (start + count > d.samples.size()) throw std::invalid_argument("subset: range exceeds dataset");
  stcib::Dataset out;
  out.dims = d.dims;
  out.seed = d.seed;
  out.samples.assign(d.samples.begin() + start, d.samples.begin() + start + count);
  return out;
}

Splits split(const stcib::Dataset& d, std::size_t n_train, std::size_t n_val, std::size_t n_test) {
  return {subset(d, 0, n_train), subset(d, n_train, n_val), subset(d, n_train + n_val, n_test)};
}

namespace {

constexpr const char* kMagic = "cfisac-dataset v1";

void write_complex(std::ostream& os, const cd* v, std::size_t n) {
  io::write_f64(os, reinterpret_cast<const double*>(v), 2 * n);
}

void write_matrix(std::ostream& os, const CMat& m) {
  // row-major
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) write_complex(os, &m(r, c), 1);
}

void read_matrix(std::istream& is, CMat& m, int rows, int cols) {
  m.resize(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double v[2];
      io::read_f64(is, v, 2);
      m(r, c) = cd(v[0], v[1]);
    }
}

}  // namespace

void save_dataset(const std::string& path, const stcib::Dataset& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write dataset " + path);
  const auto& m = d.dims;
  os << kMagic << "\nN_T " << m.N_T << "\nM_T " << m.M_T << "\nK " << m.K << "\nN_R " << m.N_R << "\nM_R " << m.M_R
     << "\nN_C " << m.N_C << "\nN_samples " << d.samples.size() << "\nseed " << d.seed
     << "\nsections f_true f_hat G_t G_c"
        "\nlayout f_true,f_hat [sample][user][N_T*M_T]; G_t [sample][rap][M_R][N_T*M_T]; "
        "G_c [sample][rap][clutter][M_R][N_T*M_T]; complex as (re, im) binary64 little-endian\nend\n";
  for (const auto& s : d.samples)
    for (const CVec& f : s.f_true) write_complex(os, f.data(), f.size());
  for (const auto& s : d.samples)
    for (const CVec& f : s.f_hat) write_complex(os, f.data(), f.size());
  for (const auto& s : d.samples)
    for (const CMat& g : s.sensing.G_t) write_matrix(os, g);
  for (const auto& s : d.samples)
    for (const CMat& g : s.sensing.G_c) write_matrix(os, g);
  if (!os) throw std::runtime_error("failed writing dataset " + path);
}

stcib::Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset " + path);
  std::string line;
  std::getline(is, line);
  if (line != kMagic) throw std::runtime_error(path + " is not a dataset file");
  std::map<std::string, std::string> kv;
  while (std::getline(is, line) && line != "end") {
    std::istringstream ls(line);
    std::string k, v;
    ls >> k >> v;
    kv[k] = v;
  }
  if (line != "end") throw std::runtime_error(path + ": truncated header");
  auto get = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::runtime_error(path + ": missing header key " + k);
    return std::stoll(it->second);
  };
  stcib::Dataset d;
  d.dims = {static_cast<int>(get("N_T")), static_cast<int>(get("M_T")), static_cast<int>(get("K")),
            static_cast<int>(get("N_R")), static_cast<int>(get("M_R")), static_cast<int>(get("N_C"))};
  d.seed = std::stoull(kv.at("seed"));
  const auto n = static_cast<std::size_t>(get("N_samples"));
  d.samples.resize(n);
  const auto& m = d.dims;
  const int len = m.N_T * m.M_T;
  auto read_users = [&](std::vector<CVec>& out) {
    out.assign(m.K, CVec(len));
    for (CVec& f : out) io::read_f64(is, reinterpret_cast<double*>(f.data()), 2 * static_cast<std::size_t>(len));
  };
  for (auto& s : d.samples) read_users(s.f_true);
  for (auto& s : d.samples) read_users(s.f_hat);
  for (auto& s : d.samples) {
    s.sensing.N_T = m.N_T;
    s.sensing.N_R = m.N_R;
    s.sensing.N_C = m.N_C;
    s.sensing.M_T = m.M_T;
    s.sensing.M_R = m.M_R;
    s.sensing.G_t.resize(m.N_R);
    for (CMat& g : s.sensing.G_t) read_matrix(is, g, m.M_R, len);
  }
  for (auto& s : d.samples) {
    s.sensing.G_c.resize(static_cast<std::size_t>(m.N_R) * m.N_C);
    for (CMat& g : s.sensing.G_c) read_matrix(is, g, m.M_R, len);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path + ": trailing bytes after payload");
  return d;
}

}  // namespace cfisac::harness
