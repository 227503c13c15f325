// Copyright 2026 The prbnet Authors
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

// prbnet: data generation, training, evaluation, benchmarking and shape
// export for PRB-Net models.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "prbnet/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PRB-Net dynamics models for deformable linear objects"};
  app.set_version_flag("--version", std::string(prbnet::kVersion));
  app.require_subcommand(1);

  std::string config, out = ".";
  std::uint64_t seed = 0;
  bool quiet = false;
  const std::pair<const char*, const char*> commands[] = {
      {"gen-data", "simulate excitation trajectories with the analytic PRB model"},
      {"train", "fit a model to trajectory files"},
      {"eval", "RMSE table over prediction horizons"},
      {"bench", "prediction timing of learned vs analytic models"},
      {"shape", "per-step body positions of a rollout"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", seed, "random seed (overrides the config)"));
    sub->add_option("--out", out, "output directory");
    sub->add_flag("-q,--quiet", quiet, "only print errors");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : prbnet::kExitUsage;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    prbnet::CommandOptions opts;
    opts.config = config;
    if (seed_opts[i]->count() > 0) opts.seed = seed;
    opts.out = out;
    opts.log = quiet ? nullptr : &std::cerr;
    return prbnet::run_command(subs[i]->get_name(), opts);
  }
  return prbnet::kExitUsage;
}
