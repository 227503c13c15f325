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

// PRB-Net: physics-informed encoder, discrete-time dynamics network and
// forward-kinematics decoder, together with the black-box baselines that swap
// encoder and decoder for plain MLPs.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prbnet/autodiff.hpp"
#include "prbnet/kinematics.hpp"
#include "prbnet/neural.hpp"

namespace prbnet {

enum class Variant { PrbnRnn, PrbnResNet, Rnn, ResNet };

std::string to_string(Variant v);
Variant variant_from_string(std::string_view name);
/// True for the variants with a kinematic decoder and interpretable state.
bool is_physics_informed(Variant v);
bool is_recurrent(Variant v);

struct ModelSpec {
  Variant variant = Variant::PrbnRnn;
  int n_el = 3;
  double length = 1.0;  // DLO length [m], sets the initial discretization
  std::vector<int> encoder_hidden{64, 64};
  std::vector<int> dynamics_hidden{64, 64};  // residual variants only
  std::vector<int> decoder_hidden{64, 64};   // black-box variants only
  /// Fixed scale of the joint-rate half of h inside the dynamics network.
  double velocity_scale = 5.0;
  /// Sample period of the training data [s]; 0 when unknown.
  double dt = 0.0;

  int hidden_dim() const { return 4 * n_el; }
};

/// Parameters and bound blocks of one model.
class ModelBundle {
 public:
  ModelBundle() = default;
  /// Fresh model with seeded initialization and uniform discretization.
  ModelBundle(const ModelSpec& spec, std::uint64_t seed);
  /// Rebinds blocks of an existing parameter vector (e.g. from a checkpoint).
  ModelBundle(const ModelSpec& spec, ParamVector params);

  const ModelSpec& spec() const { return spec_; }
  Variant variant() const { return spec_.variant; }
  int n_el() const { return spec_.n_el; }
  int hidden_dim() const { return spec_.hidden_dim(); }

  const ParamVector& params() const { return params_; }
  ParamVector& params() { return params_; }

  /// Chain geometry with the current (learned) lengths.
  ChainConfigd chain() const;
  /// Initial discretization, the prior of the length regularization.
  ChainConfigd prior_chain() const { return uniform_discretization(spec_.length, spec_.n_el); }

  /// Per-channel affine normalization of x used inside the networks.
  const Input& input_mean() const { return input_mean_; }
  const Input& input_scale() const { return input_scale_; }
  void set_input_normalization(const Input& mean, const Input& scale);
  Input normalize_input(const Input& x) const;
  /// [1 ... 1, v ... v] with v = velocity_scale.
  const VecXd& state_scale() const { return state_scale_; }

  const Mlp& encoder() const { return encoder_; }
  const Mlp& decoder() const { return decoder_; }
  const Mlp& resnet() const { return resnet_; }
  const GruCell& gru() const { return gru_; }
  const ParamBlock& log_theta_el() const { return log_theta_el_; }
  const ParamBlock& theta_eb() const { return theta_eb_; }

 private:
  void bind();

  ModelSpec spec_;
  ParamVector params_;
  Mlp encoder_, decoder_, resnet_;
  GruCell gru_;
  ParamBlock log_theta_el_, theta_eb_;
  Input input_mean_ = Input::Zero();
  Input input_scale_ = Input::Ones();
  VecXd state_scale_;
};

/// [p_e - p_b, sin(Psi_b), cos(Psi_b)].
VecXd encode_features(const Observation& y, const Input& x);
/// Time derivative of the features along (dp_e, dq_b).
VecXd encode_feature_rate(const Observation& y, const Input& x);

/// Physics-informed variants: q_prb = Phi(features) and dq_prb its exact
/// forward-mode derivative along (dp_e, dq_b). Black-box variants: an MLP on
/// [y; normalized x] predicting the full h.
VecXd encode(const ModelBundle& m, const Observation& y, const Input& x);
VecXd dynamics_step(const ModelBundle& m, const VecXd& h, const Input& x);
/// Forward-kinematics decoder (physics-informed) or MLP decoder.
Observation decode(const ModelBundle& m, const VecXd& h, const Input& x);

struct RolloutResult {
  std::vector<Observation> y;  // predictions for steps 1..N
  std::vector<VecXd> hidden;   // states for steps 0..N
};

/// Encodes (y0, x[0]) once, then alternates dynamics and decoding. `x` holds
/// inputs for steps 0..N, so N = x.size() - 1. Non-finite states raise
/// DivergenceError with the offending step.
RolloutResult rollout(const ModelBundle& m, const Observation& y0, std::span<const Input> x);

// --- tape routes -----------------------------------------------------------

/// Kinematic parameters recorded on a tape (physics-informed variants).
struct KinematicVars {
  ad::Var theta_el;
  ad::Var theta_eb;
};

KinematicVars kinematic_vars(const ModelBundle& m, ad::Tape& tape);
ad::Var encode(const ModelBundle& m, ad::Tape& tape, const Observation& y, const Input& x);
ad::Var dynamics_step(const ModelBundle& m, ad::Var h, const Input& x);
/// `kin` is ignored by black-box variants.
ad::Var decode(const ModelBundle& m, ad::Var h, const Input& x, const KinematicVars& kin);

struct TapeRollout {
  std::vector<ad::Var> y;
  std::vector<ad::Var> hidden;
};
TapeRollout rollout(const ModelBundle& m, ad::Tape& tape, const Observation& y0, std::span<const Input> x);

/// FK decoder as a free function of (h, theta_el, theta_eb) on a tape.
ad::Var decode_fk(ad::Var h, ad::Var theta_el, ad::Var theta_eb, const Input& x, double total_length);

}  // namespace prbnet
