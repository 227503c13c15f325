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

// Regularized rollout loss, sliding-window datasets, the optimization loop
// and multi-horizon RMSE evaluation.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prbnet/autodiff.hpp"
#include "prbnet/model.hpp"
#include "prbnet/prb_sim.hpp"

namespace prbnet {

struct LossConfig {
  Vec6d w_y = (Vec6d() << 1, 1, 1, 0.1, 0.1, 0.1).finished();  // diagonal of W_y
  VecXd w_k;  // per-step weights; empty means 1 for every step
  double alpha_q = 1e-2;
  double alpha_dq = 1e-5;
  double alpha_length = 1.0;
  double alpha_el = 1.0;
  double alpha_eb = 1.0;
  VecXd theta_el_prior;
  Vec3d theta_eb_prior = Vec3d::Zero();
  double length = 0.0;

  void validate() const;
  double step_weight(int k) const;  // k = 1..N
};

/// Defaults around the model's own uniform discretization, W_y = diag(1, 1,
/// 1, beta, beta, beta).
LossConfig default_loss_config(const ModelBundle& m, double beta = 0.1);

enum class SplitTag { Train, Val, Test };

/// One window: y_k, inputs x_k..x_{k+N}, targets y_{k+1}..y_{k+N}.
struct WindowView {
  const Observation& y0;
  std::span<const Input> x;
  std::span<const Observation> y;
};

/// Windows referencing shared source trajectories.
struct WindowDataset {
  struct Ref {
    std::size_t traj = 0;
    std::size_t start = 0;
  };
  std::shared_ptr<const std::vector<Trajectory>> source;
  std::vector<Ref> windows;
  int horizon = 0;
  double dt = 0.0;
  SplitTag tag = SplitTag::Train;

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
  WindowView window(std::size_t i) const;
};

/// Windows at k = 0, stride, 2 stride, ... while k + N <= T - 1.
WindowDataset make_windows(std::shared_ptr<const std::vector<Trajectory>> trajectories, int horizon, int stride);
WindowDataset make_windows(const Trajectory& traj, int horizon, int stride);

struct SplitResult {
  WindowDataset train;
  WindowDataset val;
  bool degenerate = false;  // one side came out empty
};

/// Seeded shuffle, then the first floor(fraction * count) windows train.
SplitResult split(const WindowDataset& data, double fraction, std::uint64_t seed);

// --- loss ------------------------------------------------------------------

/// sum_k alpha_q |q_k|^2 + alpha_dq |dq_k|^2 over the given states.
double state_regularization(std::span<const VecXd> states, const LossConfig& cfg);
/// Length-sum penalty plus element-length and marker-offset priors.
double kinematic_regularization(const VecXd& theta_el, const Vec3d& theta_eb, const LossConfig& cfg);
/// State terms averaged over the states plus the kinematic terms.
double regularization(std::span<const VecXd> states, const VecXd& theta_el, const Vec3d& theta_eb,
                      const LossConfig& cfg);

/// Weighted squared error averaged over windows and steps, plus
/// regularization of the predicted states h_{k+1..k+N} (physics-informed
/// variants only; black-box variants use the data term alone).
double rollout_loss(const ModelBundle& m, std::span<const WindowView> batch, const LossConfig& cfg);
double rollout_loss(const ModelBundle& m, const WindowView& window, const LossConfig& cfg);

/// Loss and gradient with respect to the flat parameter vector. Windows are
/// reduced in order, so the result is bit-reproducible.
ad::ValueAndGrad rollout_loss_and_grad(const ModelBundle& m, std::span<const WindowView> batch,
                                       const LossConfig& cfg);

// --- optimization ----------------------------------------------------------

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double final_lr_fraction = 0.05;  // cosine decay floor
  int epochs = 10;
  int steps_per_epoch = 50;
  int batch_size = 8;
  double clip_norm = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int max_val_windows = 64;  // fixed validation subset, 0 = all
  std::vector<std::string> frozen;  // parameter-name prefixes held fixed
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_time_s = 0.0;
};

struct FitResult {
  ModelBundle model;  // best validation loss
  std::vector<EpochRecord> history;
  bool diverged = false;
  std::string message;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

FitResult fit(const ModelBundle& initial, const WindowDataset& train, const WindowDataset& val,
              const LossConfig& loss, const OptimizerConfig& opt, const EpochCallback& on_epoch = {});

/// Adam with bias correction.
class Adam {
 public:
  Adam(Eigen::Index size, double beta1, double beta2, double epsilon);
  void step(VecXd& params, const VecXd& grad, double lr, const VecXd* mask = nullptr);

 private:
  VecXd m_, v_;
  double beta1_, beta2_, epsilon_;
  long t_ = 0;
};

/// Mean of |q_prb|^2 over all predicted states of the given windows.
double mean_squared_joint_angle(const ModelBundle& m, const WindowDataset& data, int max_windows = 0);

// --- evaluation ------------------------------------------------------------

/// Predicts y_{k+1..k+H} of trajectory `traj` starting from sample k.
using Predictor = std::function<std::vector<Observation>(std::size_t traj, std::size_t k, int horizon)>;

struct RmseResult {
  double position = 0.0;
  double velocity = 0.0;
  std::size_t windows = 0;
  std::size_t skipped = 0;  // trajectories too short for the horizon
  double max_position_error = 0.0;
};

/// Non-overlapping windows of length `horizon` (stride defaults to the
/// horizon), encoding only at each window start.
RmseResult evaluate_rmse(const Predictor& predict, const std::vector<Trajectory>& test, int horizon, int stride = 0);
RmseResult evaluate_rmse(const ModelBundle& m, const std::vector<Trajectory>& test, int horizon, int stride = 0);

/// Mean and standard deviation per input channel (standard deviation floored
/// at `min_scale`).
std::pair<Input, Input> input_statistics(const std::vector<Trajectory>& data, double min_scale = 1e-3);

}  // namespace prbnet
