// Copyright 2026 The CSA-EO Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks. Each criterion prints one PASS/FAIL line; `--only N` runs a single one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "csaeo/channel.hpp"
#include "csaeo/geometry.hpp"
#include "csaeo/harness.hpp"
#include "csaeo/linkbudget.hpp"
#include "csaeo/modem.hpp"
#include "csaeo/pipeline.hpp"
#include "csaeo/semaug.hpp"
#include "oracles.hpp"

using namespace csaeo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& tag)
      : root(fs::temp_directory_path() / ("csaeo_acc_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(root / name) << text;
    return root / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Runs train then sweep on `config` and returns sweep_agg.csv rows (header dropped).
std::vector<std::vector<std::string>> train_and_sweep(const Scratch& dir, const std::string& config) {
  harness::CommandOptions opts;
  opts.config = dir.write("cfg.toml", config);
  opts.out = dir.root / "out";
  harness::cmd_train(opts);
  opts.overwrite = true;
  harness::cmd_sweep(opts);
  auto rows = read_csv(opts.out / "sweep_agg.csv");
  rows.erase(rows.begin());
  return rows;
}

Outcome link_budget() {
  const double fspl = linkbudget::fspl_db(600e3, 28.0);
  const auto total = linkbudget::ground_path_loss_with_shadow(600e3, linkbudget::LinkBudgetParams{}, 0.0).total_db;
  return {std::abs(fspl - 176.96) <= 0.01 && std::abs(total - 177.76) <= 0.01,
          fmt("fspl %.4f dB, total %.4f dB", fspl, total)};
}

Outcome geometry_identity() {
  bool exact = true;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    geometry::GeometryParams g;
    g.altitude_km = 200.0 + 20.0 * i;
    g.elevation_rad = std::numbers::pi / 2.0;
    exact = exact && geometry::slant_range_geometric(g) == g.altitude_km;
    g.elevation_rad = 0.0;
    worst = std::max(worst, oracle::relative_error(geometry::slant_range_geometric(g), geometry::slant_range_literal(g)));
  }
  return {exact && worst <= 1e-9, fmt("zenith exact %s, horizon max rel diff %.2e", exact ? "yes" : "no", worst)};
}

Outcome modem_oracle() {
  const auto c = modem::build_16psk();
  Rng rng = make_stream(1, StreamTag::Modem);
  bool ok = true;
  std::string detail;
  for (double snr : {10.0, 14.0, 18.0}) {
    const std::size_t n = 1000000;
    const double mc = modem::ser_monte_carlo(c, snr, n, rng);
    const double ref = oracle::psk16_ser(snr);
    const double z = (mc - ref) / oracle::binomial_sigma(ref, static_cast<double>(n));
    ok = ok && std::abs(z) <= 3.0;
    detail += fmt("%g dB: %.5f vs %.5f (z=%.2f) ", snr, mc, ref, z);
  }
  return {ok, detail};
}

Outcome fading_statistics() {
  const std::size_t n = 1000000;
  channel::ChannelKind rician;
  rician.kind = channel::FadingKind::Rician;
  rician.k_factor = 2.8;
  Rng rng = make_stream(2, StreamTag::Channel);
  std::vector<double> power(n);
  double mean = 0.0;
  for (auto& p : power) {
    p = std::norm(channel::sample_fading(rician, 1.0, rng));
    mean += p / static_cast<double>(n);
  }
  const double k_est = oracle::rician_k_moment(power);

  const std::size_t m = 100000;
  channel::ChannelKind k0 = rician;
  k0.k_factor = 0.0;
  channel::ChannelKind rayleigh;
  rayleigh.kind = channel::FadingKind::Rayleigh;
  std::vector<double> a(m), b(m);
  for (auto& v : a) v = std::abs(channel::sample_fading(k0, 1.0, rng));
  for (auto& v : b) v = std::abs(channel::sample_fading(rayleigh, 1.0, rng));
  const double d = oracle::ks_statistic(a, b);
  const double crit = oracle::ks_critical_001(m, m);
  const bool ok = std::abs(mean - 1.0) <= 0.01 && std::abs(k_est - 2.8) <= 0.28 && d < crit;
  return {ok, fmt("E|H|^2 %.4f, K_est %.3f, KS D %.4f < %.4f", mean, k_est, d, crit)};
}

Outcome sa_identities() {
  using dtjscc::ClassifierDecoder;
  using dtjscc::Matrix;
  Rng rng(5);
  std::normal_distribution<double> n01;
  auto rnd = [&](Eigen::Index r, Eigen::Index c, double s) {
    Matrix x(r, c);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = s * n01(rng);
    return x;
  };
  double worst_reduction = 0.0;
  std::size_t ordered = 0;
  const std::size_t batches = 1000;
  for (std::size_t t = 0; t < batches; ++t) {
    const Matrix f = rnd(16, 8, 1.0);
    std::vector<int> y;
    for (int i = 0; i < 16; ++i) y.push_back(static_cast<int>(rng() % 5));
    ClassifierDecoder dec{rnd(5, 8, 0.7), rnd(5, 1, 0.2)};
    const Matrix sigma = rnd(16, 8, 1.0).cwiseAbs2();
    const double ce = semaug::cross_entropy(f, y, dec);
    worst_reduction = std::max(worst_reduction, std::abs(semaug::sa_loss(f, y, dec, sigma, 0.0) - ce));
    worst_reduction = std::max(worst_reduction, std::abs(semaug::sa_loss(f, y, dec, Matrix::Zero(16, 8), 1.7) - ce));
    const double lambda = 0.05 + 2.0 * std::abs(n01(rng));
    ordered += semaug::sa_loss(f, y, dec, sigma, lambda) >= ce ? 1 : 0;
  }

  const Matrix f = rnd(12, 6, 1.0);
  std::vector<int> y;
  for (int i = 0; i < 12; ++i) y.push_back(i % 4);
  ClassifierDecoder dec{rnd(4, 6, 0.5), rnd(4, 1, 0.1)};
  const Matrix sigma = rnd(12, 6, 1.0).cwiseAbs2();
  const auto g = semaug::sa_loss_and_gradients(f, y, dec, sigma, 0.8);
  double worst_grad = 0.0;
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < dec.weight.size(); ++k) {
    ClassifierDecoder up = dec, dn = dec;
    up.weight.data()[k] += h;
    dn.weight.data()[k] -= h;
    const double num = (semaug::sa_loss(f, y, up, sigma, 0.8) - semaug::sa_loss(f, y, dn, sigma, 0.8)) / (2 * h);
    worst_grad = std::max(worst_grad, oracle::relative_error(g.d_weight.data()[k], num));
  }
  const bool ok = worst_reduction <= 1e-12 && ordered == batches && worst_grad <= 1e-4;
  return {ok, fmt("reduction err %.1e, sa>=ce %zu/%zu, grad rel err %.1e", worst_reduction, ordered, batches,
                  worst_grad)};
}

Outcome codec_trainability() {
  data::SyntheticSpec spec;
  spec.seed = 1;
  const auto ds = data::generate_synthetic(spec);
  const auto stats = dtjscc::pooled_dataset(ds);
  const auto labels = dtjscc::dataset_labels(ds);
  dtjscc::CodecShape shape;
  Rng init = make_stream(1, StreamTag::Init);
  auto codec = dtjscc::make_codec(shape, init);
  Rng order = make_stream(1, StreamTag::Shuffle);
  const auto trace = dtjscc::train_stats(codec, stats, labels, dtjscc::TrainConfig{}, order);
  const double top1 = trace.accuracy.back();

  std::vector<std::vector<double>> means;
  for (const auto& item : ds.items) {
    std::vector<double> m(item.image.bands(), 0.0);
    for (std::size_t i = 0; i < item.image.height(); ++i)
      for (std::size_t j = 0; j < item.image.width(); ++j)
        for (std::size_t k = 0; k < item.image.bands(); ++k) m[k] += item.image.at(i, j, k);
    means.push_back(m);
  }
  const double ncm = oracle::nearest_mean_accuracy(means, labels, means, labels, 10);
  return {top1 >= 0.95 && top1 >= ncm - 0.05,
          fmt("train top-1 %.4f after %zu epochs, nearest-class-mean %.4f", top1, trace.accuracy.size(), ncm)};
}

Outcome psnr_trend() {
  Scratch dir("psnr");
  const auto rows = train_and_sweep(dir, R"(
[pipeline]
k_q = 16
[sweep]
psnr_db = [0.0, 4.0, 8.0, 12.0, 16.0]
k_q = [16]
channels = ["rician", "rayleigh"]
constellations = ["16psk"]
seeds = [1, 2, 3, 4, 5]
csa_enabled = false
)");
  std::map<std::string, std::vector<double>> curve;
  for (const auto& r : rows) curve[r[1]].push_back(std::stod(r[6]));
  bool ok = true;
  std::string detail;
  for (const auto& [ch, v] : curve) {
    int violations = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] < v[i - 1]) {
        ++violations;
        ok = ok && v[i - 1] - v[i] <= 0.02;
      }
    }
    ok = ok && violations <= 1;
    detail += ch + fmt(" %.3f %.3f %.3f %.3f %.3f; ", v[0], v[1], v[2], v[3], v[4]);
  }
  for (std::size_t i = 0; i < 5; ++i) ok = ok && curve["rician"][i] >= curve["rayleigh"][i];
  return {ok, detail};
}

Outcome kq_stability() {
  Scratch dir("kq");
  const auto rows = train_and_sweep(dir, R"(
[codec]
codebook_sizes = [32, 64, 128]
[pipeline]
k_q = 32
[channel.downlink]
kind = "rician"
[sweep]
psnr_db = [8.0]
k_q = [32, 64, 128]
channels = ["rician"]
constellations = ["16psk"]
seeds = [1, 2, 3, 4, 5]
csa_enabled = false
)");
  std::vector<double> var;
  std::string detail;
  for (const auto& r : rows) {
    const double sd = std::stod(r[7]);
    var.push_back(sd * sd);
    detail += "K_q " + r[4] + fmt(": mean %.4f var %.3g; ", std::stod(r[6]), sd * sd);
  }
  const bool ok = var.size() == 3 && var[0] >= var[1] && var[1] >= var[2];
  return {ok, detail};
}

Outcome csa_table() {
  Scratch dir("csa");
  harness::CommandOptions opts;
  opts.config = fs::path(CSAEO_SOURCE_DIR) / "configs" / "compare_csa.toml";
  opts.out = dir.root / "csa";
  const auto s = harness::load_settings(opts.config);
  const auto rows = read_csv(harness::cmd_compare_csa(opts));
  std::size_t not_worse = 0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) not_worse += std::stod(rows[i][4]) >= 0.0 ? 1 : 0;
  const double gain = std::stod(rows.back()[4]);

  opts.out = dir.root / "control";
  auto cfg = s.scenario;
  pipeline::CompareOptions co;
  co.data = s.data;
  co.shape = s.codec;
  co.train = s.train;
  co.train_fraction = s.train_fraction;
  co.n_seeds = s.compare_seeds;
  co.control = true;
  const auto control = pipeline::compare_csa(cfg, co);
  double control_diff = 0.0;
  for (std::size_t c = 0; c < control.csa.size(); ++c)
    control_diff = std::max(control_diff, std::abs(control.csa[c] - control.non_csa[c]));
  const bool ok = not_worse >= 8 && gain >= 2.0 && control_diff == 0.0 && s.compare_seeds == 5;
  return {ok, fmt("classes not worse %zu/10, mean gain %.2f points, control max diff %.2g", not_worse, gain,
                  control_diff)};
}

Outcome cli_determinism() {
  Scratch dir("cli");
  const auto cfg = dir.write("cfg.toml", R"(
[data]
n_per_class = 30
height = 32
width = 32
[codec]
codebook_sizes = [16, 32]
[pipeline]
compare_seeds = 2
[sweep]
psnr_db = [4.0, 12.0]
k_q = [16, 32]
channels = ["awgn", "leo_rician"]
constellations = ["16psk", "16apsk"]
seeds = [1, 2]
[ser_curve]
snr_db = [0.0, 8.0, 16.0]
n_symbols = 20000
[channel_probe]
n_draws = 20000
)");
  const std::string cli = CSAEO_CLI_PATH;
  auto run_all = [&](const fs::path& out, int jobs) {
    const std::string common = " --config " + cfg.string() + " --seed 7 --jobs " + std::to_string(jobs) + " --out ";
    int rc = 0;
    rc |= std::system((cli + " train" + common + out.string() + " >/dev/null").c_str());
    rc |= std::system((cli + " sweep" + common + out.string() + " --overwrite >/dev/null").c_str());
    rc |= std::system((cli + " ser-curve" + common + out.string() + " --overwrite >/dev/null").c_str());
    rc |= std::system((cli + " compare-csa" + common + out.string() + " --overwrite >/dev/null").c_str());
    rc |= std::system((cli + " channel-probe" + common + out.string() + " --overwrite >/dev/null").c_str());
    return rc == 0;
  };
  const bool ran = run_all(dir.root / "a", 1) && run_all(dir.root / "b", 2);
  std::size_t files = 0, identical = 0;
  for (const auto& e : fs::directory_iterator(dir.root / "a")) {
    ++files;
    const auto other = dir.root / "b" / e.path().filename();
    identical += fs::exists(other) && slurp(e.path()) == slurp(other) ? 1 : 0;
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.root / "b")) ++files_b;
  const bool ok = ran && files >= 9 && identical == files && files_b == files;
  return {ok, fmt("%zu/%zu artifacts byte-identical across reruns (jobs 1 vs 2)", identical, files)};
}

Outcome lossless_relay() {
  data::SyntheticSpec spec;
  spec.n_per_class = 210;
  spec.seed = 11;
  const auto ds = data::generate_synthetic(spec);
  auto [train_set, stream] = data::stratified_split(ds, 0.5, 11);
  data::shuffle(stream, 12);
  Rng init = make_stream(11, StreamTag::Init);
  auto codec = dtjscc::make_codec(dtjscc::CodecShape{}, init);
  Rng order = make_stream(11, StreamTag::Shuffle);
  dtjscc::TrainConfig tc;
  tc.epochs = 5;
  dtjscc::train(codec, train_set, tc, order);

  pipeline::ScenarioConfig cfg;
  cfg.isl.perfect = true;
  cfg.downlink.perfect = true;
  cfg.csa_enabled = false;
  cfg.batch_size = 25;
  cfg.n_timesteps = pipeline::max_timesteps(stream.size(), cfg.batch_size);
  auto models = pipeline::make_models(codec, 11, nullptr);
  const auto report = pipeline::run_episode(cfg, models, stream);
  const auto ut = report.all_ut_predictions();
  const bool same = ut == report.all_sat2_predictions();
  return {ut.size() >= 1000 && same, fmt("%zu images, UT == Sat2 predictions: %s", ut.size(), same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc == 3 && std::string(argv[1]) == "--only") only = std::atoi(argv[2]);

  const std::vector<Criterion> criteria{
      {1, "link-budget oracle", 1.0, link_budget},
      {2, "geometry identity", 1.0, geometry_identity},
      {3, "16PSK SER oracle", 30.0, modem_oracle},
      {4, "fading statistics", 30.0, fading_statistics},
      {5, "SA-loss identities", 60.0, sa_identities},
      {6, "codec trainability", 120.0, codec_trainability},
      {7, "PSNR and fading-family trend", 600.0, psnr_trend},
      {8, "seed variance non-increasing in K_q", 600.0, kq_stability},
      {9, "CSA per-class gain and control", 900.0, csa_table},
      {10, "CLI rerun determinism", 0.0, cli_determinism},
      {11, "lossless relay identity", 60.0, lossless_relay},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
