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

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "csaeo/config.hpp"
#include "csaeo/harness.hpp"

namespace {

using csaeo::harness::CommandOptions;

void add_common(CLI::App* cmd, CommandOptions& opts, std::uint64_t& seed) {
  cmd->add_option("--config", opts.config, "Configuration file")->required();
  cmd->add_option("--seed", seed, "Master seed (overrides run.seed)");
  cmd->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_flag("--overwrite", opts.overwrite, "Reuse a non-empty output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic EO relay simulator"};
  app.require_subcommand(1);
  CommandOptions opts;
  std::uint64_t seed = 0;
  std::string checkpoints;

  auto* train = app.add_subcommand("train", "Train codecs and write checkpoints");
  auto* sweep = app.add_subcommand("sweep", "Accuracy over PSNR x K_q x channel x constellation");
  auto* ser = app.add_subcommand("ser-curve", "Symbol error rate versus Es/N0");
  auto* compare = app.add_subcommand("compare-csa", "Per-class accuracy with and without CSA");
  auto* probe = app.add_subcommand("channel-probe", "Fading statistics per channel kind");
  for (auto* cmd : {train, sweep, ser, compare, probe}) add_common(cmd, opts, seed);
  sweep->add_option("--checkpoints", checkpoints, "Directory holding codec checkpoints");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto* cmd : {train, sweep, ser, compare, probe}) {
    if (cmd->count("--seed") > 0) opts.seed = seed;
  }
  if (!checkpoints.empty()) opts.checkpoints = checkpoints;

  try {
    if (train->parsed()) {
      for (const auto& s : csaeo::harness::cmd_train(opts)) {
        std::printf("k_q=%zu train_top1=%.4f test_top1=%.4f checkpoint=%s\n", s.k_q, s.train_top1, s.test_top1,
                    s.checkpoint.string().c_str());
      }
    } else if (sweep->parsed()) {
      std::printf("%s\n", csaeo::harness::cmd_sweep(opts).string().c_str());
    } else if (ser->parsed()) {
      std::printf("%s\n", csaeo::harness::cmd_ser_curve(opts).string().c_str());
    } else if (compare->parsed()) {
      std::printf("%s\n", csaeo::harness::cmd_compare_csa(opts).string().c_str());
    } else if (probe->parsed()) {
      std::printf("%s\n", csaeo::harness::cmd_channel_probe(opts).string().c_str());
    }
  } catch (const csaeo::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const csaeo::harness::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
