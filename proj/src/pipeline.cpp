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

#include "csaeo/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace csaeo::pipeline {
namespace {

enum LinkId : std::uint64_t { kIsl = 1, kDirect = 2, kRelay = 3 };

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<int> batch_predictions(const Matrix& logits) { return metrics::argmax_rows(logits); }

Matrix local_logits(const dtjscc::Codec& codec, const dtjscc::SemanticMessage& msg) {
  return dtjscc::decode(msg, codec.codebook, codec.decoder);
}

}  // namespace

void LinkConfig::validate() const {
  channel.validate();
  if (!perfect && !std::isfinite(psnr_db)) throw std::invalid_argument("link PSNR must be finite");
}

LinkConfig default_isl() {
  LinkConfig l;
  l.channel.kind = channel::FadingKind::Rician;
  l.channel.los_only = true;
  l.psnr_db = 20.0;
  return l;
}

LinkConfig default_downlink() {
  LinkConfig l;
  l.channel.kind = channel::FadingKind::Rician;
  l.psnr_db = 10.0;
  return l;
}

void ScenarioConfig::validate() const {
  isl.validate();
  downlink.validate();
  (void)modem::build_by_name(constellation, apsk_gamma);
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(symbol_period_s > 0.0)) throw std::invalid_argument("symbol_period_s must be positive");
  if (!std::isfinite(frequency_offset_hz)) throw std::invalid_argument("frequency_offset_hz must be finite");
  geometry.validate();
  budget.validate();
  for (const auto* sa : {&sat2_sa, &ut_sa}) {
    if (!(sa->lambda >= 0.0) || !(sa->lr >= 0.0) || !(sa->blend >= 0.0 && sa->blend <= 1.0)) {
      throw std::invalid_argument("invalid SA step configuration");
    }
  }
}

Models make_models(const dtjscc::Codec& base, std::uint64_t seed, const semaug::CovariancePredictor* base_predictor) {
  Models m;
  m.sat1 = base;
  m.sat2 = base;
  m.ut = base.decoder;
  const std::size_t c = base.shape.n_classes;
  const std::size_t a = base.shape.feature_dim();
  if (base_predictor != nullptr) {
    m.sat2_predictor = *base_predictor;
    m.ut_predictor = *base_predictor;
  } else {
    Rng rng = make_stream(seed, StreamTag::Init, {0x9});
    m.sat2_predictor = semaug::make_covariance_predictor(c, a, rng);
    m.ut_predictor = m.sat2_predictor;
  }
  m.sat2_bank = semaug::ClassCovarianceBank(c, a);
  m.ut_bank = semaug::ClassCovarianceBank(c, a);
  return m;
}

std::vector<int> EpisodeReport::all_labels() const {
  std::vector<int> out;
  for (const auto& s : steps) out.insert(out.end(), s.labels.begin(), s.labels.end());
  return out;
}

std::vector<int> EpisodeReport::all_ut_predictions() const {
  std::vector<int> out;
  for (const auto& s : steps) out.insert(out.end(), s.ut_pred.begin(), s.ut_pred.end());
  return out;
}

std::vector<int> EpisodeReport::all_sat2_predictions() const {
  std::vector<int> out;
  for (const auto& s : steps) out.insert(out.end(), s.sat2_pred.begin(), s.sat2_pred.end());
  return out;
}

double EpisodeReport::ut_top1() const { return metrics::top1(all_ut_predictions(), all_labels()); }
double EpisodeReport::sat2_top1() const { return metrics::top1(all_sat2_predictions(), all_labels()); }

double EpisodeReport::mean_relay_index_error() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : steps) s += r.relay_index_error;
  return s / static_cast<double>(steps.size());
}

void EpisodeReport::write_csv(std::ostream& os) const {
  os << "schema_version,step,image,label,sat2_pred,ut_pred,isl_index_error,direct_index_error,relay_index_error,"
        "downlink_zeta_db,ut_logits\n";
  for (const auto& s : steps) {
    for (std::size_t b = 0; b < s.labels.size(); ++b) {
      os << kCsvSchemaVersion << ',' << s.step << ',' << b << ',' << s.labels[b] << ',' << s.sat2_pred[b] << ',' << s.ut_pred[b] << ','
         << fmt(s.isl_index_error) << ',' << fmt(s.direct_index_error) << ',' << fmt(s.relay_index_error) << ','
         << fmt(s.downlink_zeta_db) << ',';
      for (Eigen::Index j = 0; j < s.ut_logits.cols(); ++j) {
        if (j > 0) os << ';';
        os << fmt(s.ut_logits(static_cast<Eigen::Index>(b), j));
      }
      os << '\n';
    }
  }
}

std::string EpisodeReport::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

std::string EpisodeReport::summary() const {
  std::ostringstream os;
  os << "timesteps: " << steps.size() << '\n';
  if (steps.empty()) return os.str();
  os << "images: " << all_labels().size() << '\n';
  os << "ut_top1: " << fmt6(ut_top1()) << '\n';
  os << "sat2_top1: " << fmt6(sat2_top1()) << '\n';
  os << "mean_relay_index_error: " << fmt6(mean_relay_index_error()) << '\n';
  return os.str();
}

std::size_t max_timesteps(std::size_t stream_size, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  const std::size_t batches = stream_size / batch_size;
  return batches == 0 ? 0 : batches - 1;
}

LinkOutcome send_over_link(const dtjscc::SemanticMessage& msg, const LinkConfig& link, const ScenarioConfig& cfg,
                           const modem::Constellation& constellation, std::uint64_t link_id, std::size_t step) {
  LinkOutcome out;
  if (link.perfect) {
    out.received = msg;
    return out;
  }
  const auto& kind = link.channel;
  double zeta_db = kind.zeta_db;
  if (kind.is_leo() && cfg.budget.shadow_sigma_db > 0.0) {
    // Only the deviation from the nominal budget matters: PSNR is referenced to the
    // nominal received peak power.
    Rng shadow_rng = make_stream(cfg.seed, StreamTag::Shadow, {link_id, step});
    const double d_m = geometry::slant_range_km(cfg.geometry, cfg.slant_range_mode) * 1000.0;
    const double shadow = linkbudget::sample_shadow_fading_db(cfg.budget.shadow_sigma_db, shadow_rng);
    const auto nominal = linkbudget::ground_path_loss_with_shadow(d_m, cfg.budget, 0.0);
    const auto actual = linkbudget::ground_path_loss_with_shadow(d_m, cfg.budget, shadow);
    zeta_db += actual.total_db - nominal.total_db;
  }
  out.zeta_db = zeta_db;
  const double zeta_lin = linkbudget::zeta_linear(zeta_db);

  const std::size_t per_image = msg.n_subvectors * dtjscc::symbols_per_index(msg.codebook_size);
  Rng fading_rng = make_stream(cfg.seed, StreamTag::Channel, {link_id, step});
  std::vector<channel::Complex> gains;
  gains.reserve(msg.batch_size * per_image);
  for (std::size_t b = 0; b < msg.batch_size; ++b) {
    const channel::Complex h = channel::sample_fading(kind, zeta_lin, fading_rng);
    for (std::size_t s = 0; s < per_image; ++s) {
      if (kind.is_leo()) {
        const double t = static_cast<double>(gains.size()) * cfg.symbol_period_s;
        gains.push_back(channel::response_at(t, cfg.frequency_offset_hz, h, kind.doppler_hz, kind.delay_s));
      } else {
        gains.push_back(h);
      }
    }
  }
  const double sigma = channel::noise_sigma_from_psnr(link.psnr_db, constellation.peak_power());
  Rng noise_rng = make_stream(cfg.seed, StreamTag::Modem, {link_id, step});
  out.received = dtjscc::transmit(msg, constellation, gains, sigma, noise_rng, cfg.equalization);
  out.index_error = metrics::index_error_rate(msg, out.received);
  return out;
}

EpisodeReport run_episode(const ScenarioConfig& cfg, Models& models, std::span<const Vector> stats,
                          std::span<const int> labels) {
  cfg.validate();
  if (stats.size() != labels.size()) throw std::invalid_argument("stream stats/label count mismatch");
  if (!(models.sat1.shape == models.sat2.shape)) throw std::invalid_argument("Sat1 and Sat2 codecs differ in shape");
  if (models.ut.weight.rows() != static_cast<Eigen::Index>(models.sat2.shape.n_classes) ||
      models.ut.weight.cols() != static_cast<Eigen::Index>(models.sat2.shape.feature_dim())) {
    throw std::invalid_argument("UT decoder does not match codec dimensions");
  }
  if (cfg.k_q != 0 && cfg.k_q != models.sat2.shape.codebook_size) {
    throw std::invalid_argument("scenario k_q does not match the codec's codebook size");
  }
  EpisodeReport report;
  report.n_classes = models.sat2.shape.n_classes;
  const std::size_t n = cfg.n_timesteps;
  if (n == 0) return report;
  const std::size_t bsz = cfg.batch_size;
  if (stats.size() < (n + 1) * bsz) {
    throw std::invalid_argument("stream holds " + std::to_string(stats.size()) + " images, episode needs " +
                                std::to_string((n + 1) * bsz));
  }
  const auto constellation = modem::build_by_name(cfg.constellation, cfg.apsk_gamma);
  auto batch_stats = [&](std::size_t i) { return stats.subspan(i * bsz, bsz); };
  auto batch_labels = [&](std::size_t i) { return labels.subspan(i * bsz, bsz); };
  semaug::CovariancePredictor* g_s2 = cfg.use_predictor && models.sat2_predictor ? &*models.sat2_predictor : nullptr;
  semaug::CovariancePredictor* g_ut = cfg.use_predictor && models.ut_predictor ? &*models.ut_predictor : nullptr;

  for (std::size_t i = 0; i < n; ++i) {
    TimestepRecord rec;
    rec.step = i;
    // Sat1 -> Sat2 (ISL) and Sat1 -> UT (direct downlink).
    const auto sat1_msg = dtjscc::encode_stats(batch_stats(i), models.sat1);
    const auto isl = send_over_link(sat1_msg, cfg.isl, cfg, constellation, kIsl, i);
    const auto direct = send_over_link(sat1_msg, cfg.downlink, cfg, constellation, kDirect, i);
    rec.isl_index_error = isl.index_error;
    rec.direct_index_error = direct.index_error;

    if (cfg.csa_enabled) {
      const Matrix isl_features = dtjscc::dequantize_message(isl.received, models.sat2.codebook);
      rec.sat2_sa_loss = semaug::sa_train_step(models.sat2, g_s2, models.sat2_bank, batch_stats(i), batch_labels(i),
                                               isl_features, cfg.sat2_sa.at_step(i))
                             .loss;
      const Matrix ut_features = dtjscc::dequantize_message(direct.received, models.sat2.codebook);
      rec.ut_sa_loss =
          semaug::sa_decoder_step(models.ut, g_ut, models.ut_bank, ut_features, batch_labels(i), ut_features, cfg.ut_sa.at_step(i))
              .loss;
    }

    // Sat2 encodes U(t_{i+1}) with its (possibly refined) extractor and relays it.
    const auto sat2_msg = dtjscc::encode_stats(batch_stats(i + 1), models.sat2);
    rec.sat2_pred = batch_predictions(local_logits(models.sat2, sat2_msg));
    const auto relay = send_over_link(sat2_msg, cfg.downlink, cfg, constellation, kRelay, i);
    rec.relay_index_error = relay.index_error;
    rec.downlink_zeta_db = relay.zeta_db;
    rec.ut_logits = dtjscc::decode(relay.received, models.sat2.codebook, models.ut);
    rec.ut_pred = batch_predictions(rec.ut_logits);
    const auto next = batch_labels(i + 1);
    rec.labels.assign(next.begin(), next.end());
    report.steps.push_back(std::move(rec));
  }
  return report;
}

EpisodeReport run_episode(const ScenarioConfig& cfg, Models& models, const data::LabeledDataset& stream) {
  for (const auto& item : stream.items) {
    if (item.image.height() != models.sat1.shape.height || item.image.width() != models.sat1.shape.width ||
        item.image.bands() != models.sat1.shape.bands) {
      throw std::invalid_argument("stream image shape does not match the codec input");
    }
  }
  const auto stats = dtjscc::pooled_dataset(stream);
  const auto labels = dtjscc::dataset_labels(stream);
  return run_episode(cfg, models, stats, labels);
}

double estimate_symbol_error_rate(const LinkConfig& link, const modem::Constellation& constellation,
                                  channel::Equalization eq, std::size_t n_symbols, std::size_t block,
                                  std::uint64_t seed) {
  link.validate();
  if (n_symbols == 0 || block == 0) throw std::invalid_argument("need at least one symbol and block length >= 1");
  if (link.perfect) return 0.0;
  Rng sym_rng = make_stream(seed, StreamTag::Data, {0x5E});
  Rng fading_rng = make_stream(seed, StreamTag::Channel, {0x5E});
  Rng noise_rng = make_stream(seed, StreamTag::Modem, {0x5E});
  std::uniform_int_distribution<int> pick(0, static_cast<int>(modem::kOrder) - 1);
  const double zeta_lin = linkbudget::zeta_linear(link.channel.zeta_db);
  const double sigma = channel::noise_sigma_from_psnr(link.psnr_db, constellation.peak_power());
  std::size_t errors = 0;
  std::vector<modem::Symbol> sent(block);
  std::vector<channel::Complex> gains(block);
  for (std::size_t done = 0; done < n_symbols; done += block) {
    const std::size_t len = std::min(block, n_symbols - done);
    sent.resize(len);
    for (auto& s : sent) s = static_cast<modem::Symbol>(pick(sym_rng));
    gains.assign(len, channel::sample_fading(link.channel, zeta_lin, fading_rng));
    const auto tx = modem::modulate(sent, constellation);
    auto rx = channel::apply_channel(tx, gains, sigma, noise_rng);
    if (eq == channel::Equalization::Perfect) rx = channel::equalize(rx, gains);
    const auto got = modem::demodulate_hard(rx, constellation);
    for (std::size_t k = 0; k < len; ++k) errors += got[k] != sent[k] ? 1 : 0;
  }
  return static_cast<double>(errors) / static_cast<double>(n_symbols);
}

std::size_t CsaTable::classes_not_worse() const {
  std::size_t k = 0;
  for (std::size_t c = 0; c < csa.size(); ++c) k += csa[c] >= non_csa[c] ? 1 : 0;
  return k;
}

void CsaTable::write_csv(std::ostream& os) const {
  os << "schema_version,class,csa,non_csa,difference\n";
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    os << kCsvSchemaVersion << ',' << class_names[c] << ',' << metrics::format_percent(csa[c]) << ',' << metrics::format_percent(non_csa[c]) << ','
       << metrics::format_percent(csa[c] - non_csa[c]) << '\n';
  }
  os << kCsvSchemaVersion << ",Mean," << metrics::format_percent(csa_mean) << ',' << metrics::format_percent(non_csa_mean) << ','
     << metrics::format_percent(csa_mean - non_csa_mean) << '\n';
}

std::string CsaTable::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

std::vector<double> per_class_accuracy(const EpisodeReport& report) {
  const auto cm = metrics::confusion(report.all_ut_predictions(), report.all_labels(), report.n_classes);
  std::vector<double> out(report.n_classes);
  for (std::size_t c = 0; c < report.n_classes; ++c) out[c] = cm.class_accuracy(c);
  return out;
}

CsaTable compare_csa(const ScenarioConfig& cfg, const CompareOptions& opts, const data::LabeledDataset* dataset) {
  if (opts.n_seeds == 0) throw std::invalid_argument("compare_csa needs at least one seed");
  CsaTable table;
  table.n_seeds = opts.n_seeds;
  for (std::size_t s = 0; s < opts.n_seeds; ++s) {
    const std::uint64_t seed = derive_seed(cfg.seed, {0xC5A, s});
    data::LabeledDataset generated;
    if (dataset == nullptr) {
      data::SyntheticSpec spec = opts.data;
      spec.seed = derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::Data)});
      generated = data::generate_synthetic(spec);
    }
    const data::LabeledDataset& full = dataset != nullptr ? *dataset : generated;
    auto [train_set, test_set] = data::stratified_split(full, opts.train_fraction, seed);
    if (table.class_names.empty()) {
      table.class_names = full.class_names;
      table.csa.assign(full.n_classes(), 0.0);
      table.non_csa.assign(full.n_classes(), 0.0);
    }

    dtjscc::CodecShape shape = opts.shape;
    shape.height = full.items.front().image.height();
    shape.width = full.items.front().image.width();
    shape.bands = full.items.front().image.bands();
    shape.n_classes = full.n_classes();
    if (cfg.k_q != 0) shape.codebook_size = cfg.k_q;
    Rng init_rng = make_stream(seed, StreamTag::Init);
    dtjscc::Codec base = dtjscc::make_codec(shape, init_rng);
    Rng train_rng = make_stream(seed, StreamTag::Shuffle);
    dtjscc::train(base, train_set, opts.train, train_rng);

    const auto stats = dtjscc::pooled_dataset(test_set);
    const auto labels = dtjscc::dataset_labels(test_set);
    ScenarioConfig run = cfg;
    run.seed = seed;
    if (run.n_timesteps == 0) run.n_timesteps = max_timesteps(stats.size(), run.batch_size);

    ScenarioConfig with = run;
    with.csa_enabled = true;
    ScenarioConfig without = run;
    without.csa_enabled = opts.control;
    Models m_with = make_models(base, seed);
    Models m_without = make_models(base, seed);
    const auto a = per_class_accuracy(run_episode(with, m_with, stats, labels));
    const auto b = per_class_accuracy(run_episode(without, m_without, stats, labels));
    for (std::size_t c = 0; c < a.size(); ++c) {
      table.csa[c] += a[c] / static_cast<double>(opts.n_seeds);
      table.non_csa[c] += b[c] / static_cast<double>(opts.n_seeds);
    }
  }
  const double nc = static_cast<double>(table.csa.size());
  table.csa_mean = std::accumulate(table.csa.begin(), table.csa.end(), 0.0) / nc;
  table.non_csa_mean = std::accumulate(table.non_csa.begin(), table.non_csa.end(), 0.0) / nc;
  return table;
}

}  // namespace csaeo::pipeline
