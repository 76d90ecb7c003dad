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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "csaeo/channel.hpp"
#include "csaeo/checkpoint.hpp"
#include "csaeo/config.hpp"
#include "csaeo/geometry.hpp"
#include "csaeo/harness.hpp"
#include "csaeo/linkbudget.hpp"
#include "csaeo/metrics.hpp"
#include "csaeo/modem.hpp"
#include "csaeo/semaug.hpp"

namespace py = pybind11;
using namespace csaeo;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

data::MultispectralImage image_from_array(const FloatArray& a) {
  if (a.ndim() != 3) throw std::invalid_argument("image must be an H x W x D array");
  std::vector<float> values(a.data(), a.data() + a.size());
  return data::MultispectralImage(a.shape(0), a.shape(1), a.shape(2), std::move(values));
}

FloatArray image_to_array(const data::MultispectralImage& img) {
  FloatArray out({img.height(), img.width(), img.bands()});
  std::memcpy(out.mutable_data(), img.values().data(), img.size() * sizeof(float));
  return out;
}

std::vector<dtjscc::Vector> stats_of(const FloatArray& images) {
  if (images.ndim() != 4) throw std::invalid_argument("images must be an N x H x W x D array");
  const auto n = static_cast<std::size_t>(images.shape(0));
  const std::size_t per = static_cast<std::size_t>(images.shape(1) * images.shape(2) * images.shape(3));
  std::vector<dtjscc::Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> values(images.data() + i * per, images.data() + (i + 1) * per);
    out.push_back(dtjscc::pooled_statistics(
        data::MultispectralImage(images.shape(1), images.shape(2), images.shape(3), std::move(values))));
  }
  return out;
}

py::tuple dataset_to_arrays(const data::LabeledDataset& ds) {
  if (ds.items.empty()) return py::make_tuple(FloatArray(), py::array_t<int>(), ds.class_names);
  const auto& first = ds.items.front().image;
  FloatArray images({ds.size(), first.height(), first.width(), first.bands()});
  py::array_t<int> labels(static_cast<py::ssize_t>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::memcpy(images.mutable_data() + i * first.size(), ds.items[i].image.values().data(),
                first.size() * sizeof(float));
    labels.mutable_at(static_cast<py::ssize_t>(i)) = ds.items[i].label;
  }
  return py::make_tuple(images, labels, ds.class_names);
}

py::array_t<std::uint16_t> message_to_array(const dtjscc::SemanticMessage& msg) {
  py::array_t<std::uint16_t> out({msg.batch_size, msg.n_subvectors});
  std::copy(msg.indices.begin(), msg.indices.end(), out.mutable_data());
  return out;
}

dtjscc::SemanticMessage message_from_array(const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& a,
                                           const dtjscc::Codec& codec) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != codec.shape.n_subvectors) {
    throw std::invalid_argument("indices must be an N x n_subvectors array");
  }
  dtjscc::SemanticMessage msg;
  msg.batch_size = static_cast<std::size_t>(a.shape(0));
  msg.n_subvectors = codec.shape.n_subvectors;
  msg.codebook_size = codec.shape.codebook_size;
  msg.n_classes = codec.shape.n_classes;
  msg.feature_dim = codec.shape.feature_dim();
  msg.indices.assign(a.data(), a.data() + a.size());
  msg.validate();
  return msg;
}

harness::CommandOptions command_options(const std::string& config, const std::string& out,
                                        std::optional<std::uint64_t> seed, std::size_t jobs, bool overwrite) {
  harness::CommandOptions o;
  o.config = config;
  o.out = out;
  o.seed = seed;
  o.jobs = jobs;
  o.overwrite = overwrite;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semantic EO relay simulator core";

  py::register_exception<config::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<data::MsimError>(m, "MsimError", PyExc_IOError);
  py::register_exception<checkpoint::CheckpointError>(m, "CheckpointError", PyExc_IOError);

  m.def("fspl_db", &linkbudget::fspl_db, py::arg("distance_m"), py::arg("carrier_ghz"));
  m.def(
      "slant_range_km",
      [](double altitude_km, double elevation_deg, const std::string& mode) {
        geometry::GeometryParams g;
        g.altitude_km = altitude_km;
        g.elevation_rad = geometry::deg_to_rad(elevation_deg);
        return geometry::slant_range_km(g, geometry::parse_slant_range_mode(mode));
      },
      py::arg("altitude_km"), py::arg("elevation_deg"), py::arg("mode") = "geometric");
  m.def(
      "ground_path_loss_db",
      [](double distance_m, double carrier_ghz, double gas_db, double scint_db, double shadow_db) {
        linkbudget::LinkBudgetParams p;
        p.carrier_ghz = carrier_ghz;
        p.gas_loss_db = gas_db;
        p.scint_loss_db = scint_db;
        return linkbudget::ground_path_loss_with_shadow(distance_m, p, shadow_db).total_db;
      },
      py::arg("distance_m"), py::arg("carrier_ghz") = 28.0, py::arg("gas_db") = 0.3, py::arg("scint_db") = 0.5,
      py::arg("shadow_db") = 0.0);

  m.def(
      "constellation",
      [](const std::string& name) {
        const auto c = modem::build_by_name(name);
        std::vector<channel::Complex> pts;
        for (int s = 0; s < modem::kOrder; ++s) pts.push_back(c.point_for(static_cast<modem::Symbol>(s)));
        return pts;
      },
      py::arg("name"), "Points indexed by symbol label.");
  m.def(
      "ser_monte_carlo",
      [](const std::string& name, double snr_db, std::size_t n, std::uint64_t seed) {
        Rng rng = make_stream(seed, StreamTag::Modem);
        return modem::ser_monte_carlo(modem::build_by_name(name), snr_db, n, rng);
      },
      py::arg("constellation"), py::arg("snr_db"), py::arg("n_symbols"), py::arg("seed") = 1);
  m.def("ser_16psk_analytic", &modem::ser_16psk_analytic, py::arg("snr_db"));
  m.def(
      "sample_fading",
      [](const std::string& kind, double k_factor, double zeta_db, std::size_t n, std::uint64_t seed) {
        channel::ChannelKind ck;
        ck.kind = channel::parse_fading_kind(kind);
        ck.k_factor = k_factor;
        ck.validate();
        Rng rng = make_stream(seed, StreamTag::Channel);
        const double zeta = linkbudget::zeta_linear(zeta_db);
        std::vector<channel::Complex> out(n);
        for (auto& h : out) h = channel::sample_fading(ck, zeta, rng);
        return out;
      },
      py::arg("kind"), py::arg("k_factor") = 2.8, py::arg("zeta_db") = 0.0, py::arg("n") = 1, py::arg("seed") = 1);

  m.def(
      "generate_synthetic",
      [](std::size_t n_classes, std::size_t n_per_class, std::size_t height, std::size_t width, std::size_t bands,
         double noise_level, double label_noise, std::uint64_t seed) {
        data::SyntheticSpec spec;
        spec.n_classes = n_classes;
        spec.n_per_class = n_per_class;
        spec.height = height;
        spec.width = width;
        spec.bands = bands;
        spec.noise_level = noise_level;
        spec.label_noise = label_noise;
        spec.seed = seed;
        return dataset_to_arrays(data::generate_synthetic(spec));
      },
      py::arg("n_classes") = 10, py::arg("n_per_class") = 100, py::arg("height") = 64, py::arg("width") = 64,
      py::arg("bands") = 3, py::arg("noise_level") = 0.1, py::arg("label_noise") = 0.0, py::arg("seed") = 0,
      "Returns (images N x H x W x D float32, labels, class_names).");
  m.def(
      "write_msim", [](const FloatArray& image, const std::string& path) { data::write_raw_tensor(image_from_array(image), path); },
      py::arg("image"), py::arg("path"));
  m.def(
      "load_msim", [](const std::string& path) { return image_to_array(data::load_raw_tensor(path)); }, py::arg("path"));
  m.def(
      "load_dataset_dir", [](const std::string& root) { return dataset_to_arrays(data::load_dataset_dir(root)); },
      py::arg("root"));

  py::class_<dtjscc::Codec>(m, "Codec")
      .def(py::init([](std::size_t height, std::size_t width, std::size_t bands, std::size_t n_classes,
                       std::size_t codebook_size, std::uint64_t seed) {
             dtjscc::CodecShape shape;
             shape.height = height;
             shape.width = width;
             shape.bands = bands;
             shape.n_classes = n_classes;
             shape.codebook_size = codebook_size;
             Rng rng = make_stream(seed, StreamTag::Init);
             return dtjscc::make_codec(shape, rng);
           }),
           py::arg("height") = 64, py::arg("width") = 64, py::arg("bands") = 3, py::arg("n_classes") = 10,
           py::arg("codebook_size") = 16, py::arg("seed") = 1)
      .def_property_readonly("codebook_size", [](const dtjscc::Codec& c) { return c.shape.codebook_size; })
      .def_property_readonly("n_subvectors", [](const dtjscc::Codec& c) { return c.shape.n_subvectors; })
      .def_property_readonly("decoder_weight", [](const dtjscc::Codec& c) { return c.decoder.weight; })
      .def_property_readonly("decoder_bias", [](const dtjscc::Codec& c) { return c.decoder.bias; })
      .def(
          "train",
          [](dtjscc::Codec& c, const FloatArray& images, const std::vector<int>& labels, std::size_t epochs,
             double lr, double flip_prob, double lambda_sa, std::uint64_t seed) {
            dtjscc::TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.lr = lr;
            cfg.flip_prob = flip_prob;
            cfg.lambda_sa = lambda_sa;
            const auto stats = stats_of(images);
            Rng rng = make_stream(seed, StreamTag::Shuffle);
            py::gil_scoped_release release;
            const auto trace = dtjscc::train_stats(c, stats, labels, cfg, rng);
            return std::make_pair(trace.loss, trace.accuracy);
          },
          py::arg("images"), py::arg("labels"), py::arg("epochs") = 30, py::arg("lr") = 0.05,
          py::arg("flip_prob") = 0.0, py::arg("lambda_sa") = 0.0, py::arg("seed") = 1,
          "Returns (loss per epoch, train accuracy per epoch).")
      .def(
          "encode", [](const dtjscc::Codec& c, const FloatArray& images) {
            return message_to_array(dtjscc::encode_stats(stats_of(images), c));
          },
          py::arg("images"), "N x n_subvectors codeword indices.")
      .def(
          "decode",
          [](const dtjscc::Codec& c, const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& idx) {
            return dtjscc::decode(message_from_array(idx, c), c.codebook, c.decoder);
          },
          py::arg("indices"), "N x C logits.")
      .def(
          "transmit",
          [](const dtjscc::Codec& c, const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& idx,
             const std::string& constellation, double psnr_db, std::uint64_t seed) {
            const auto con = modem::build_by_name(constellation);
            channel::ChannelInstance inst;
            inst.noise_sigma = channel::noise_sigma_from_psnr(psnr_db, con.peak_power());
            Rng rng = make_stream(seed, StreamTag::Channel);
            return message_to_array(dtjscc::transmit(message_from_array(idx, c), con, inst, rng));
          },
          py::arg("indices"), py::arg("constellation") = "16psk", py::arg("psnr_db") = 10.0, py::arg("seed") = 1,
          "Sends indices over a unit-gain AWGN link.")
      .def(
          "predict", [](const dtjscc::Codec& c, const FloatArray& images) { return dtjscc::predict_stats(c, stats_of(images)); },
          py::arg("images"))
      .def(
          "save", [](const dtjscc::Codec& c, const std::string& path) { checkpoint::save(path, c); }, py::arg("path"))
      .def_static(
          "load", [](const std::string& path) { return checkpoint::load(path).codec; }, py::arg("path"));

  m.def(
      "sa_loss",
      [](const dtjscc::Matrix& features, const std::vector<int>& labels, const dtjscc::Matrix& weight,
         const dtjscc::Vector& bias, const dtjscc::Matrix& sigma, double lambda) {
        return semaug::sa_loss(features, labels, dtjscc::ClassifierDecoder{weight, bias}, sigma, lambda);
      },
      py::arg("features"), py::arg("labels"), py::arg("weight"), py::arg("bias"), py::arg("sigma"), py::arg("lam"));
  m.def(
      "cross_entropy",
      [](const dtjscc::Matrix& features, const std::vector<int>& labels, const dtjscc::Matrix& weight,
         const dtjscc::Vector& bias) {
        return semaug::cross_entropy(features, labels, dtjscc::ClassifierDecoder{weight, bias});
      },
      py::arg("features"), py::arg("labels"), py::arg("weight"), py::arg("bias"));

  m.def(
      "confusion_csv",
      [](const std::vector<int>& predictions, const std::vector<int>& labels, std::vector<std::string> names) {
        return metrics::confusion(predictions, labels, std::move(names)).to_csv();
      },
      py::arg("predictions"), py::arg("labels"), py::arg("class_names"));
  m.def(
      "top1", [](const std::vector<int>& p, const std::vector<int>& l) { return metrics::top1(p, l); },
      py::arg("predictions"), py::arg("labels"));

  auto bind_command = [&](const char* name, auto fn) {
    m.def(
        name,
        [fn](const std::string& config, const std::string& out, std::optional<std::uint64_t> seed, std::size_t jobs,
             bool overwrite) {
          const auto opts = command_options(config, out, seed, jobs, overwrite);
          py::gil_scoped_release release;
          return fn(opts);
        },
        py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("jobs") = 1,
        py::arg("overwrite") = false);
  };
  bind_command("run_train", [](const harness::CommandOptions& o) {
    std::vector<std::string> paths;
    for (const auto& s : harness::cmd_train(o)) paths.push_back(s.checkpoint.string());
    return paths;
  });
  bind_command("run_sweep", [](const harness::CommandOptions& o) { return harness::cmd_sweep(o).string(); });
  bind_command("run_ser_curve", [](const harness::CommandOptions& o) { return harness::cmd_ser_curve(o).string(); });
  bind_command("run_compare_csa", [](const harness::CommandOptions& o) { return harness::cmd_compare_csa(o).string(); });
  bind_command("run_channel_probe",
               [](const harness::CommandOptions& o) { return harness::cmd_channel_probe(o).string(); });
}
