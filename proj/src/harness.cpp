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

#include "csaeo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "csaeo/checkpoint.hpp"
#include "csaeo/metrics.hpp"
#include "csaeo/modem.hpp"

namespace csaeo::harness {
namespace fs = std::filesystem;
namespace {

// Wraps domain validation errors so they surface as config errors at the offending key.
template <typename F>
auto at_key(const config::Document& doc, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const config::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    doc.fail(key, e.what());
  }
}

pipeline::LinkConfig read_link(const config::Document& doc, const std::string& sec, pipeline::LinkConfig link) {
  auto& ch = link.channel;
  const std::string kind_name = doc.get_string(sec + ".kind", std::string(channel::to_string(ch.kind)));
  ch.kind = at_key(doc, sec + ".kind", [&] { return channel::parse_fading_kind(kind_name); });
  ch.k_factor = doc.get_double(sec + ".k_factor", ch.k_factor);
  ch.los_only = doc.get_bool(sec + ".los_only", ch.los_only);
  ch.los_phase_rad = doc.get_double(sec + ".los_phase_rad", ch.los_phase_rad);
  ch.zeta_db = doc.get_double(sec + ".zeta_db", ch.zeta_db);
  ch.doppler_hz = doc.get_double(sec + ".doppler_hz", ch.doppler_hz);
  ch.delay_s = doc.get_double(sec + ".delay_s", ch.delay_s);
  link.psnr_db = doc.get_double(sec + ".psnr_db", link.psnr_db);
  link.perfect = doc.get_bool(sec + ".perfect", link.perfect);
  at_key(doc, sec + ".kind", [&] {
    link.validate();
    return 0;
  });
  return link;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

fs::path checkpoint_dir_for(const Settings& s, const CommandOptions& opts) {
  if (opts.checkpoints) return *opts.checkpoints;
  if (!s.sweep.checkpoint_dir.empty()) return s.sweep.checkpoint_dir;
  return opts.out;
}

TrainedCodec load_trained(const fs::path& dir, std::size_t k_q) {
  const fs::path path = dir / checkpoint_name(k_q);
  if (!fs::exists(path)) {
    throw std::runtime_error("checkpoint " + path.string() + " not found; run the train command with k_q " +
                             std::to_string(k_q) + " first");
  }
  auto ck = checkpoint::load(path);
  return TrainedCodec{std::move(ck.codec), std::move(ck.predictor), {}};
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void SweepSpec::validate() const {
  if (psnr_db.empty()) throw std::invalid_argument("sweep.psnr_db must not be empty");
  if (k_q.empty()) throw std::invalid_argument("sweep.k_q must not be empty");
  if (channels.empty()) throw std::invalid_argument("sweep.channels must not be empty");
  if (constellations.empty()) throw std::invalid_argument("sweep.constellations must not be empty");
  if (seeds.empty()) throw std::invalid_argument("sweep.seeds must not be empty");
  for (const auto& c : channels) (void)channel::parse_fading_kind(c);
  for (const auto& c : constellations) (void)modem::build_by_name(c);
  for (double p : psnr_db) {
    if (!std::isfinite(p)) throw std::invalid_argument("sweep.psnr_db entries must be finite");
  }
}

Settings load_settings(const config::Document& doc, std::optional<std::uint64_t> seed_override) {
  Settings s;
  s.seed = doc.get_u64("run.seed", s.seed);
  if (seed_override) s.seed = *seed_override;

  s.data_source = doc.get_string("data.source", s.data_source);
  if (s.data_source != "synthetic" && s.data_source != "directory") {
    doc.fail("data.source", "expected \"synthetic\" or \"directory\"");
  }
  s.data_path = doc.get_string("data.path", "");
  if (s.data_source == "directory" && s.data_path.empty()) doc.fail("data.source", "directory source needs data.path");
  auto& d = s.data;
  d.n_classes = doc.get_size("data.n_classes", d.n_classes);
  d.n_per_class = doc.get_size("data.n_per_class", d.n_per_class);
  d.height = doc.get_size("data.height", d.height);
  d.width = doc.get_size("data.width", d.width);
  d.bands = doc.get_size("data.bands", d.bands);
  d.noise_level = doc.get_double("data.noise_level", d.noise_level);
  d.class_separation = doc.get_double("data.class_separation", d.class_separation);
  d.intra_class_std = doc.get_double("data.intra_class_std", d.intra_class_std);
  d.label_noise = doc.get_double("data.label_noise", d.label_noise);
  d.seed = derive_seed(s.seed, {static_cast<std::uint64_t>(StreamTag::Data)});
  at_key(doc, "data.n_classes", [&] {
    d.validate();
    return 0;
  });
  s.train_fraction = doc.get_double("data.train_fraction", s.train_fraction);
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) doc.fail("data.train_fraction", "must lie in (0, 1)");

  auto& c = s.codec;
  c.n_subvectors = doc.get_size("codec.n_subvectors", c.n_subvectors);
  c.subvector_dim = doc.get_size("codec.subvector_dim", c.subvector_dim);
  c.hidden = doc.get_size("codec.hidden", c.hidden);
  s.train_k_q = doc.get_sizes("codec.codebook_sizes", s.train_k_q);
  if (s.train_k_q.empty()) doc.fail("codec.codebook_sizes", "must not be empty");
  for (auto k : s.train_k_q) {
    at_key(doc, "codec.codebook_sizes", [&] {
      auto probe = c;
      probe.codebook_size = k;
      probe.validate();
      return 0;
    });
  }
  c.codebook_size = s.train_k_q.front();

  auto& t = s.train;
  t.epochs = doc.get_size("train.epochs", t.epochs);
  t.batch_size = doc.get_size("train.batch_size", t.batch_size);
  t.lr = doc.get_double("train.lr", t.lr);
  t.momentum = doc.get_double("train.momentum", t.momentum);
  t.commitment = doc.get_double("train.commitment", t.commitment);
  t.ema_decay = doc.get_double("train.ema_decay", t.ema_decay);
  t.flip_prob = doc.get_double("train.flip_prob", t.flip_prob);
  t.lambda_sa = doc.get_double("train.lambda_sa", t.lambda_sa);
  s.channel_in_loop = doc.get_bool("train.channel_in_loop", s.channel_in_loop);
  at_key(doc, "train.lr", [&] {
    t.validate();
    return 0;
  });

  auto& sc = s.scenario;
  auto& g = sc.geometry;
  g.earth_radius_km = doc.get_double("geometry.earth_radius_km", g.earth_radius_km);
  g.altitude_km = doc.get_double("geometry.altitude_km", g.altitude_km);
  g.elevation_rad = geometry::deg_to_rad(doc.get_double("geometry.elevation_deg", 90.0));
  g.radial_velocity_mps = doc.get_double("geometry.radial_velocity_mps", g.radial_velocity_mps);
  const std::string mode = doc.get_string("geometry.slant_range_mode", std::string(geometry::to_string(sc.slant_range_mode)));
  sc.slant_range_mode = at_key(doc, "geometry.slant_range_mode", [&] { return geometry::parse_slant_range_mode(mode); });
  at_key(doc, "geometry.altitude_km", [&] {
    g.validate();
    return 0;
  });

  auto& b = sc.budget;
  b.carrier_ghz = doc.get_double("linkbudget.carrier_ghz", b.carrier_ghz);
  b.tx_gain_dbi = doc.get_double("linkbudget.tx_gain_dbi", b.tx_gain_dbi);
  b.rx_gain_dbi = doc.get_double("linkbudget.rx_gain_dbi", b.rx_gain_dbi);
  b.gas_loss_db = doc.get_double("linkbudget.gas_loss_db", b.gas_loss_db);
  b.scint_loss_db = doc.get_double("linkbudget.scint_loss_db", b.scint_loss_db);
  b.shadow_sigma_db = doc.get_double("linkbudget.shadow_sigma_db", b.shadow_sigma_db);
  at_key(doc, "linkbudget.carrier_ghz", [&] {
    b.validate();
    return 0;
  });

  sc.isl = read_link(doc, "channel.isl", sc.isl);
  sc.downlink = read_link(doc, "channel.downlink", sc.downlink);

  sc.constellation = doc.get_string("modem.constellation", sc.constellation);
  sc.apsk_gamma = doc.get_double("modem.apsk_gamma", sc.apsk_gamma);
  at_key(doc, "modem.constellation", [&] { return modem::build_by_name(sc.constellation, sc.apsk_gamma); });
  const std::string eq = doc.get_string("modem.equalization", "perfect");
  sc.equalization = at_key(doc, "modem.equalization", [&] { return channel::parse_equalization(eq); });
  sc.symbol_period_s = doc.get_double("modem.symbol_period_s", sc.symbol_period_s);
  sc.frequency_offset_hz = doc.get_double("modem.frequency_offset_hz", sc.frequency_offset_hz);

  const double lambda = doc.get_double("semaug.lambda", sc.sat2_sa.lambda);
  const double blend = doc.get_double("semaug.blend", sc.sat2_sa.blend);
  const double p_lr = doc.get_double("semaug.predictor_lr", sc.sat2_sa.predictor_lr);
  const double p_w = doc.get_double("semaug.predictor_sa_weight", sc.sat2_sa.predictor_sa_weight);
  const double commit = doc.get_double("semaug.commitment", sc.sat2_sa.commitment);
  const std::size_t ramp = doc.get_size("semaug.lambda_ramp_steps", sc.sat2_sa.lambda_ramp_steps);
  for (auto* sa : {&sc.sat2_sa, &sc.ut_sa}) {
    sa->lambda = lambda;
    sa->blend = blend;
    sa->predictor_lr = p_lr;
    sa->predictor_sa_weight = p_w;
    sa->commitment = commit;
    sa->lambda_ramp_steps = ramp;
  }
  sc.sat2_sa.lr = doc.get_double("semaug.sat2_lr", sc.sat2_sa.lr);
  sc.ut_sa.lr = doc.get_double("semaug.ut_lr", sc.ut_sa.lr);
  s.predictor = doc.get_bool("semaug.predictor", s.predictor);
  s.predictor_warmup_epochs = doc.get_size("semaug.warmup_epochs", s.predictor_warmup_epochs);
  sc.use_predictor = s.predictor;

  sc.csa_enabled = doc.get_bool("pipeline.csa_enabled", sc.csa_enabled);
  sc.n_timesteps = doc.get_size("pipeline.n_timesteps", sc.n_timesteps);
  sc.batch_size = doc.get_size("pipeline.batch_size", sc.batch_size);
  sc.k_q = doc.get_size("pipeline.k_q", s.train_k_q.front());
  s.compare_seeds = doc.get_size("pipeline.compare_seeds", s.compare_seeds);
  s.compare_control = doc.get_bool("pipeline.control", s.compare_control);
  if (s.compare_seeds == 0) doc.fail("pipeline.compare_seeds", "must be >= 1");
  sc.seed = s.seed;
  at_key(doc, "pipeline.batch_size", [&] {
    sc.validate();
    return 0;
  });

  auto& sw = s.sweep;
  sw.psnr_db = doc.get_doubles("sweep.psnr_db", sw.psnr_db);
  sw.k_q = doc.get_sizes("sweep.k_q", sw.k_q);
  sw.channels = doc.get_strings("sweep.channels", sw.channels);
  sw.constellations = doc.get_strings("sweep.constellations", sw.constellations);
  sw.seeds = doc.get_u64s("sweep.seeds", sw.seeds);
  sw.csa_enabled = doc.get_bool("sweep.csa_enabled", sw.csa_enabled);
  sw.checkpoint_dir = doc.get_string("sweep.checkpoint_dir", "");
  at_key(doc, "sweep.psnr_db", [&] {
    sw.validate();
    return 0;
  });

  s.ser_curve.snr_db = doc.get_doubles("ser_curve.snr_db", s.ser_curve.snr_db);
  s.ser_curve.n_symbols = doc.get_size("ser_curve.n_symbols", s.ser_curve.n_symbols);
  if (s.ser_curve.snr_db.empty()) doc.fail("ser_curve.snr_db", "must not be empty");
  if (s.ser_curve.n_symbols == 0) doc.fail("ser_curve.n_symbols", "must be >= 1");

  s.probe.kinds = doc.get_strings("channel_probe.kinds", s.probe.kinds);
  s.probe.n_draws = doc.get_size("channel_probe.n_draws", s.probe.n_draws);
  if (s.probe.kinds.empty()) doc.fail("channel_probe.kinds", "must not be empty");
  for (const auto& k : s.probe.kinds) at_key(doc, "channel_probe.kinds", [&] { return channel::parse_fading_kind(k); });
  if (s.probe.n_draws < 2) doc.fail("channel_probe.n_draws", "must be >= 2");

  doc.reject_unknown();
  return s;
}

Settings load_settings(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  return load_settings(config::Document::load(path), seed_override);
}

std::pair<data::LabeledDataset, data::LabeledDataset> prepare_data(const Settings& s) {
  data::LabeledDataset full =
      s.data_source == "directory" ? data::load_dataset_dir(s.data_path) : data::generate_synthetic(s.data);
  if (full.empty()) throw std::runtime_error("dataset is empty");
  return data::stratified_split(full, s.train_fraction, derive_seed(s.seed, {static_cast<std::uint64_t>(StreamTag::Split)}));
}

dtjscc::CodecShape shape_for(const Settings& s, const data::LabeledDataset& ds, std::size_t k_q) {
  dtjscc::CodecShape shape = s.codec;
  const auto& img = ds.items.front().image;
  shape.height = img.height();
  shape.width = img.width();
  shape.bands = img.bands();
  shape.n_classes = ds.n_classes();
  shape.codebook_size = k_q;
  shape.validate();
  return shape;
}

TrainedCodec train_codec(const Settings& s, const data::LabeledDataset& train_set, std::size_t k_q) {
  const auto shape = shape_for(s, train_set, k_q);
  Rng init_rng = make_stream(s.seed, StreamTag::Init, {k_q});
  TrainedCodec out{dtjscc::make_codec(shape, init_rng), std::nullopt, {}};
  dtjscc::TrainConfig tc = s.train;
  if (s.channel_in_loop) {
    const auto c = modem::build_by_name(s.scenario.constellation, s.scenario.apsk_gamma);
    tc.flip_prob = pipeline::estimate_symbol_error_rate(s.scenario.downlink, c, s.scenario.equalization, 200000,
                                                        shape.symbols_per_image(), derive_seed(s.seed, {0xF11B}));
  }
  Rng train_rng = make_stream(s.seed, StreamTag::Shuffle, {k_q});
  out.trace = dtjscc::train(out.codec, train_set, tc, train_rng);

  if (s.predictor) {
    Rng g_rng = make_stream(s.seed, StreamTag::Init, {k_q, 0x9});
    auto g = semaug::make_covariance_predictor(shape.n_classes, shape.feature_dim(), g_rng);
    const auto stats = dtjscc::pooled_dataset(train_set);
    const auto labels = dtjscc::dataset_labels(train_set);
    const dtjscc::Matrix feats = dtjscc::dequantize_message(dtjscc::encode_stats(stats, out.codec), out.codec.codebook);
    semaug::ClassCovarianceBank bank(shape.n_classes, shape.feature_dim());
    bank.update(feats, labels);
    semaug::SaStepConfig cfg = s.scenario.sat2_sa;
    cfg.predictor_sa_weight = 0.0;
    const std::size_t bsz = s.train.batch_size;
    for (std::size_t e = 0; e < s.predictor_warmup_epochs; ++e) {
      for (std::size_t start = 0; start < stats.size(); start += bsz) {
        const std::size_t n = std::min(bsz, stats.size() - start);
        const dtjscc::Matrix cond = feats.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n));
        const dtjscc::Matrix zero = dtjscc::Matrix::Zero(cond.rows(), cond.cols());
        semaug::update_predictor(g, cond, std::span<const int>(labels).subspan(start, n), bank, zero, cfg);
      }
    }
    out.predictor = std::move(g);
  }
  return out;
}

fs::path checkpoint_name(std::size_t k_q) { return "codec_k" + std::to_string(k_q) + ".dtjc"; }

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw UsageError("output path " + dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !overwrite) {
      throw UsageError("output directory " + dir.string() + " is not empty; pass --overwrite to reuse it");
    }
    return;
  }
  fs::create_directories(dir);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<TrainSummary> cmd_train(const CommandOptions& opts) {
  const Settings s = load_settings(opts.config, opts.seed);
  prepare_output_dir(opts.out, opts.overwrite);
  const auto [train_set, test_set] = prepare_data(s);
  std::vector<TrainSummary> out;
  for (std::size_t k_q : s.train_k_q) {
    const auto trained = train_codec(s, train_set, k_q);
    TrainSummary sum;
    sum.k_q = k_q;
    sum.checkpoint = opts.out / checkpoint_name(k_q);
    sum.trace = opts.out / ("train_trace_k" + std::to_string(k_q) + ".csv");
    checkpoint::save(sum.checkpoint, trained.codec, trained.predictor ? &*trained.predictor : nullptr);
    std::ostringstream trace;
    trace << "schema_version,epoch,loss,train_top1\n";
    for (std::size_t e = 0; e < trained.trace.loss.size(); ++e) {
      trace << kSchemaVersion << ',' << e + 1 << ',' << format_number(trained.trace.loss[e]) << ','
            << format_number(trained.trace.accuracy[e]) << '\n';
    }
    write_text(sum.trace, trace.str());
    sum.train_top1 = trained.trace.accuracy.empty()
                         ? metrics::top1(dtjscc::predict_stats(trained.codec, dtjscc::pooled_dataset(train_set)),
                                         dtjscc::dataset_labels(train_set))
                         : trained.trace.accuracy.back();
    sum.test_top1 = metrics::top1(dtjscc::predict_stats(trained.codec, dtjscc::pooled_dataset(test_set)),
                                  dtjscc::dataset_labels(test_set));
    out.push_back(sum);
  }
  return out;
}

fs::path cmd_sweep(const CommandOptions& opts) {
  const Settings s = load_settings(opts.config, opts.seed);
  const fs::path ck_dir = checkpoint_dir_for(s, opts);
  std::map<std::size_t, TrainedCodec> codecs;
  for (auto k : s.sweep.k_q) codecs.emplace(k, load_trained(ck_dir, k));
  if (ck_dir != opts.out) prepare_output_dir(opts.out, opts.overwrite);
  else fs::create_directories(opts.out);

  const auto [train_set, test_set] = prepare_data(s);
  const auto stats = dtjscc::pooled_dataset(test_set);
  const auto labels = dtjscc::dataset_labels(test_set);

  struct Point {
    std::string channel, constellation;
    double psnr = 0.0;
    std::size_t k_q = 0;
    std::uint64_t seed = 0;
    double top1 = 0.0, ier = 0.0, rician_k = 0.0;
  };
  std::vector<Point> points;
  for (const auto& ch : s.sweep.channels) {
    for (const auto& con : s.sweep.constellations) {
      for (double p : s.sweep.psnr_db) {
        for (auto k : s.sweep.k_q) {
          for (auto seed : s.sweep.seeds) points.push_back(Point{ch, con, p, k, seed});
        }
      }
    }
  }
  parallel_for(points.size(), opts.jobs, [&](std::size_t i) {
    Point& pt = points[i];
    pipeline::ScenarioConfig sc = s.scenario;
    sc.downlink.channel.kind = channel::parse_fading_kind(pt.channel);
    sc.downlink.psnr_db = pt.psnr;
    sc.constellation = pt.constellation;
    sc.k_q = pt.k_q;
    sc.csa_enabled = s.sweep.csa_enabled;
    // Channel streams depend only on the sweep seed, so points differing in K_q or
    // constellation see paired realizations.
    sc.seed = derive_seed(s.seed, {0x5EE9, pt.seed});
    if (sc.n_timesteps == 0) sc.n_timesteps = pipeline::max_timesteps(stats.size(), sc.batch_size);
    const auto& tc = codecs.at(pt.k_q);
    auto models = pipeline::make_models(tc.codec, sc.seed, tc.predictor ? &*tc.predictor : nullptr);
    const auto report = pipeline::run_episode(sc, models, stats, labels);
    pt.top1 = report.ut_top1();
    pt.ier = report.mean_relay_index_error();
    pt.rician_k = sc.downlink.channel.effective_k();
  });

  std::ostringstream raw;
  raw << "schema_version,run_id,channel,constellation,psnr_db,k_q,rician_k,seed,top1,index_error_rate\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    raw << kSchemaVersion << ',' << i << ',' << pt.channel << ',' << pt.constellation << ',' << format_number(pt.psnr)
        << ',' << pt.k_q << ',' << (pt.channel == "awgn" ? std::string() : format_number(pt.rician_k)) << ','
        << pt.seed << ',' << format_number(pt.top1) << ',' << format_number(pt.ier) << '\n';
  }
  const fs::path raw_path = opts.out / "sweep.csv";
  write_text(raw_path, raw.str());

  std::ostringstream agg;
  agg << "schema_version,channel,constellation,psnr_db,k_q,n_seeds,top1_mean,top1_std,index_error_rate_mean,"
         "index_error_rate_std\n";
  const std::size_t per = s.sweep.seeds.size();
  for (std::size_t g = 0; g < points.size(); g += per) {
    std::vector<double> t, e;
    for (std::size_t i = g; i < g + per; ++i) {
      t.push_back(points[i].top1);
      e.push_back(points[i].ier);
    }
    const auto& pt = points[g];
    agg << kSchemaVersion << ',' << pt.channel << ',' << pt.constellation << ',' << format_number(pt.psnr) << ','
        << pt.k_q << ',' << per << ',' << format_number(mean_of(t)) << ',' << format_number(std_of(t)) << ','
        << format_number(mean_of(e)) << ',' << format_number(std_of(e)) << '\n';
  }
  write_text(opts.out / "sweep_agg.csv", agg.str());
  return raw_path;
}

fs::path cmd_ser_curve(const CommandOptions& opts) {
  const Settings s = load_settings(opts.config, opts.seed);
  prepare_output_dir(opts.out, opts.overwrite);
  const auto psk = modem::build_16psk();
  const auto apsk = modem::build_16apsk(s.scenario.apsk_gamma);
  const auto& snrs = s.ser_curve.snr_db;
  std::vector<double> ser_psk(snrs.size()), ser_apsk(snrs.size());
  parallel_for(snrs.size(), opts.jobs, [&](std::size_t i) {
    Rng a = make_stream(s.seed, StreamTag::Modem, {0x5E7, i, 0});
    Rng b = make_stream(s.seed, StreamTag::Modem, {0x5E7, i, 1});
    ser_psk[i] = modem::ser_monte_carlo(psk, snrs[i], s.ser_curve.n_symbols, a);
    ser_apsk[i] = modem::ser_monte_carlo(apsk, snrs[i], s.ser_curve.n_symbols, b);
  });
  std::ostringstream os;
  os << "schema_version,snr_db,n_symbols,ser_16psk,ser_16apsk,ser_16psk_analytic\n";
  for (std::size_t i = 0; i < snrs.size(); ++i) {
    os << kSchemaVersion << ',' << format_number(snrs[i]) << ',' << s.ser_curve.n_symbols << ','
       << format_number(ser_psk[i]) << ',' << format_number(ser_apsk[i]) << ','
       << format_number(modem::ser_16psk_analytic(snrs[i])) << '\n';
  }
  const fs::path path = opts.out / "ser_curve.csv";
  write_text(path, os.str());
  return path;
}

fs::path cmd_compare_csa(const CommandOptions& opts) {
  const Settings s = load_settings(opts.config, opts.seed);
  prepare_output_dir(opts.out, opts.overwrite);
  pipeline::CompareOptions co;
  co.data = s.data;
  co.shape = s.codec;
  co.train = s.train;
  co.train_fraction = s.train_fraction;
  co.n_seeds = s.compare_seeds;
  co.control = s.compare_control;
  pipeline::CsaTable table;
  if (s.data_source == "directory") {
    const auto ds = data::load_dataset_dir(s.data_path);
    table = pipeline::compare_csa(s.scenario, co, &ds);
  } else {
    table = pipeline::compare_csa(s.scenario, co);
  }
  const fs::path path = opts.out / "csa_table.csv";
  write_text(path, table.to_csv());
  return path;
}

fs::path cmd_channel_probe(const CommandOptions& opts) {
  const Settings s = load_settings(opts.config, opts.seed);
  prepare_output_dir(opts.out, opts.overwrite);
  std::ostringstream os;
  os << "schema_version,kind,k_factor,zeta_db,n_draws,mean_power,var_power,k_moment_estimate,amp_p05,amp_p50,amp_p95\n";
  for (std::size_t i = 0; i < s.probe.kinds.size(); ++i) {
    channel::ChannelKind kind = s.scenario.downlink.channel;
    kind.kind = channel::parse_fading_kind(s.probe.kinds[i]);
    kind.validate();
    const double zeta_lin = linkbudget::zeta_linear(kind.zeta_db);
    Rng rng = make_stream(s.seed, StreamTag::Channel, {0x9B0BE, i});
    std::vector<double> amp(s.probe.n_draws);
    double sum = 0.0, sum2 = 0.0;
    for (auto& a : amp) {
      const double p = std::norm(channel::sample_fading(kind, zeta_lin, rng));
      a = std::sqrt(p);
      sum += p;
      sum2 += p * p;
    }
    const double n = static_cast<double>(amp.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    // Moment estimate of K from the normalized power variance.
    const double gamma = var / (mean * mean);
    std::string k_est;
    if (gamma > 0.0 && gamma < 1.0) k_est = format_number((1.0 - gamma + std::sqrt(1.0 - gamma)) / gamma);
    std::sort(amp.begin(), amp.end());
    auto q = [&](double f) { return amp[static_cast<std::size_t>(f * (n - 1))]; };
    os << kSchemaVersion << ',' << s.probe.kinds[i] << ',' << format_number(kind.effective_k()) << ','
       << format_number(kind.zeta_db) << ',' << amp.size() << ',' << format_number(mean) << ',' << format_number(var)
       << ',' << k_est << ',' << format_number(q(0.05)) << ',' << format_number(q(0.5)) << ','
       << format_number(q(0.95)) << '\n';
  }
  const fs::path path = opts.out / "channel_probe.csv";
  write_text(path, os.str());
  return path;
}

}  // namespace csaeo::harness
