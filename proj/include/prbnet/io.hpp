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

// File formats: trajectory CSV plus JSON sidecar, model checkpoints, chain
// geometry JSON and training history.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "prbnet/kinematics.hpp"
#include "prbnet/model.hpp"
#include "prbnet/prb_sim.hpp"
#include "prbnet/training.hpp"

namespace prbnet {

namespace fs = std::filesystem;
using Json = nlohmann::json;

/// Malformed or unreadable input file.
class FormatError : public ContractError {
 public:
  using ContractError::ContractError;
};

Json chain_to_json(const ChainConfigd& cfg);
ChainConfigd chain_from_json(const Json& j);

Json material_to_json(const MaterialParams& mp);
MaterialParams material_from_json(const Json& j);
Json multisine_to_json(const MultisineConfig& cfg);
MultisineConfig multisine_from_json(const Json& j);

/// Provenance of a generated trajectory.
struct TrajectoryMeta {
  std::string csv;     // file name relative to the sidecar
  std::string hidden;  // simulator state file, may be empty
  double dt = 0.0;
  double duration = 0.0;
  int n_el = 0;
  bool gravity = true;
  MaterialParams material;
  MultisineConfig excitation;
};

Json meta_to_json(const TrajectoryMeta& m);
TrajectoryMeta meta_from_json(const Json& j);

/// Header: t, qb0..5, dqb0..5, ddqb0..5, pe0..2, dpe0..2. Values are written
/// with 17 significant digits so a read round-trips exactly.
void write_trajectory_csv(const fs::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const fs::path& path);
/// One row per sample with the simulator state [q_prb, dq_prb].
void write_hidden_csv(const fs::path& path, const Trajectory& traj);
void read_hidden_csv(const fs::path& path, Trajectory& traj);

/// Sidecar path of a trajectory CSV: same stem, ".json".
fs::path sidecar_path(const fs::path& csv);
void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

/// A trajectory CSV (and its sidecar, when present).
struct LoadedTrajectory {
  fs::path path;
  Trajectory traj;
  bool has_meta = false;
  TrajectoryMeta meta;
};

/// Accepts trajectory CSV files and directories (all *.csv that have a JSON
/// sidecar, sorted by name).
std::vector<LoadedTrajectory> load_trajectories(const std::vector<fs::path>& inputs, bool with_hidden = false);

/// Checkpoint = parameter file whose extra header carries the model spec,
/// the learned chain and the input normalization.
inline constexpr int kModelFormatVersion = 1;
void save_model(const fs::path& path, const ModelBundle& m);
ModelBundle load_model(const fs::path& path);
Json spec_to_json(const ModelSpec& s);
ModelSpec spec_from_json(const Json& j);

void write_history_csv(const fs::path& path, const std::vector<EpochRecord>& history);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace prbnet
