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

// Minimal neural building blocks: a named parameter layout over one flat
// vector, multilayer perceptrons, a GRU cell and a residual step.
//
// Every block has two evaluation routes: a template over the scalar type
// (plain doubles for inference, Dual<double> for forward-mode derivatives)
// and a tape route for reverse-mode gradients.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "prbnet/autodiff.hpp"
#include "prbnet/dual.hpp"
#include "prbnet/types.hpp"

namespace prbnet {

/// Ordered set of named blocks over a flat parameter vector.
class ParamLayout {
 public:
  ParamBlock add(const std::string& name, int rows, int cols = 1);
  const ParamBlock& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Eigen::Index size() const { return size_; }

  struct Entry {
    std::string name;
    ParamBlock block;
  };
  const std::vector<Entry>& entries() const { return entries_; }

  bool operator==(const ParamLayout& o) const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  Eigen::Index size_ = 0;
};

/// Flat parameters plus their layout.
struct ParamVector {
  ParamLayout layout;
  VecXd values;

  Eigen::Map<const MatXd> matrix(const std::string& name) const {
    const ParamBlock& b = layout.at(name);
    return {values.data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<MatXd> matrix(const std::string& name) {
    const ParamBlock& b = layout.at(name);
    return {values.data() + b.offset, b.rows, b.cols};
  }

  /// Named copies of every block.
  std::map<std::string, MatXd> unflatten() const;
  /// Inverse of unflatten; every block of the layout must be present.
  static ParamVector flatten(const ParamLayout& layout, const std::map<std::string, MatXd>& blocks);
};

/// Little-endian binary checkpoint: 8-byte magic, u64 header length, JSON
/// header (format version, shape index, `extra`), then float64 values.
void write_checkpoint(std::ostream& os, const ParamVector& p, const std::string& extra_json = "{}");
/// Returns the `extra` JSON text.
std::string read_checkpoint(std::istream& is, ParamVector& p);
inline constexpr int kCheckpointFormatVersion = 1;

enum class Activation { Tanh, Identity };

struct MlpSpec {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;
  Activation activation = Activation::Tanh;

  void validate() const;
};

/// MLP bound to its weight/bias blocks.
struct Mlp {
  MlpSpec spec;
  std::vector<ParamBlock> weights;
  std::vector<ParamBlock> biases;

  static Mlp create(ParamLayout& layout, const std::string& prefix, const MlpSpec& spec);
  static Mlp bind(const ParamLayout& layout, const std::string& prefix, const MlpSpec& spec);
};

/// GRU cell with gates stacked as [update; reset; candidate]:
///   z = s(W_z u + U_z h + b_z), r = s(W_r u + U_r h + b_r)
///   c = tanh(W_c u + U_c (r * h) + b_c),  h' = (1 - z) * h + z * c
struct GruCell {
  int input = 0;
  int hidden = 0;
  ParamBlock w;     // 3H x I
  ParamBlock u_zr;  // 2H x H
  ParamBlock u_c;   // H x H
  ParamBlock b;     // 3H

  static GruCell create(ParamLayout& layout, const std::string& prefix, int input, int hidden);
  static GruCell bind(const ParamLayout& layout, const std::string& prefix, int input, int hidden);
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
void init_mlp(const Mlp& mlp, VecXd& params, std::uint64_t seed);
void init_gru(const GruCell& gru, VecXd& params, std::uint64_t seed);

namespace detail {

template <typename Scalar>
Eigen::Map<const MatX<Scalar>> block_map(const VecX<Scalar>& params, const ParamBlock& b) {
  return {params.data() + b.offset, b.rows, b.cols};
}

template <typename Scalar>
Scalar tanh_s(const Scalar& a) {
  using std::tanh;
  return tanh(a);
}

}  // namespace detail

template <typename Scalar>
VecX<Scalar> mlp_forward(const Mlp& mlp, const VecX<Scalar>& params, const VecX<Scalar>& u) {
  if (u.size() != mlp.spec.input) {
    throw ContractError("mlp_forward: input has " + std::to_string(u.size()) + " entries, expected " +
                        std::to_string(mlp.spec.input));
  }
  VecX<Scalar> a = u;
  const std::size_t n_layers = mlp.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    VecX<Scalar> z = detail::block_map(params, mlp.weights[l]) * a + detail::block_map(params, mlp.biases[l]);
    if (l + 1 < n_layers && mlp.spec.activation == Activation::Tanh) {
      z = z.unaryExpr([](const Scalar& s) { return detail::tanh_s(s); });
    }
    a = std::move(z);
  }
  return a;
}

/// GRU update given the input projection g = W u + b (3H entries, consumed).
/// Lets a rollout project all inputs at once.
inline VecXd gru_from_projection(const GruCell& gru, const VecXd& params, Eigen::Ref<const VecXd> h,
                                 Eigen::ArrayXd& g) {
  const int n = gru.hidden;
  // Array form so Eigen can vectorize exp; tanh(a) = 1 - 2 / (exp(2a) + 1).
  g.head(2 * n).matrix().noalias() += detail::block_map(params, gru.u_zr) * h;
  g.head(2 * n) = 1.0 / (1.0 + (-g.head(2 * n)).exp());
  VecXd out = (g.segment(n, n) * h.array()).matrix();
  g.tail(n).matrix().noalias() += detail::block_map(params, gru.u_c) * out;
  g.tail(n) = 1.0 - 2.0 / ((2.0 * g.tail(n)).exp() + 1.0);
  out = (h.array() + g.head(n) * (g.tail(n) - h.array())).matrix();
  return out;
}

template <typename Scalar>
VecX<Scalar> gru_cell(const GruCell& gru, const VecX<Scalar>& params, const VecX<Scalar>& h,
                      const VecX<Scalar>& u) {
  PRBNET_REQUIRE(h.size() == gru.hidden, "gru_cell: hidden state has wrong dimension");
  PRBNET_REQUIRE(u.size() == gru.input, "gru_cell: input has wrong dimension");
  const int n = gru.hidden;
  const auto w = detail::block_map(params, gru.w);
  const auto b = detail::block_map(params, gru.b);
  if constexpr (std::is_same_v<Scalar, double>) {
    Eigen::ArrayXd g = (w * u + b).array();
    return gru_from_projection(gru, params, h, g);
  }
  const VecX<Scalar> wx = w * u + b;
  const VecX<Scalar> uh = detail::block_map(params, gru.u_zr) * h;
  const VecX<Scalar> z = (wx.head(n) + uh.head(n)).unaryExpr([](const Scalar& s) { return sigmoid(s); });
  const VecX<Scalar> r = (wx.segment(n, n) + uh.tail(n)).unaryExpr([](const Scalar& s) { return sigmoid(s); });
  const VecX<Scalar> rh = r.cwiseProduct(h);
  const VecX<Scalar> c = (wx.tail(n) + detail::block_map(params, gru.u_c) * rh).unaryExpr([](const Scalar& s) { return detail::tanh_s(s); });
  return h + z.cwiseProduct(c - h);
}

/// h' = h + mlp([h; u]).
template <typename Scalar>
VecX<Scalar> residual_step(const Mlp& mlp, const VecX<Scalar>& params, const VecX<Scalar>& h,
                           const VecX<Scalar>& u) {
  PRBNET_REQUIRE(mlp.spec.output == h.size(), "residual_step: MLP output must match the state dimension");
  VecX<Scalar> in(h.size() + u.size());
  in << h, u;
  return h + mlp_forward(mlp, params, in);
}

// --- tape routes -----------------------------------------------------------

ad::Var mlp_forward(const Mlp& mlp, ad::Var u);
/// MLP value and its directional derivative along `du` (tangent propagated
/// with tape ops, so the result stays differentiable in the parameters).
std::pair<ad::Var, ad::Var> mlp_forward_jvp(const Mlp& mlp, ad::Var u, ad::Var du);
ad::Var gru_cell(const GruCell& gru, ad::Var h, ad::Var u);
ad::Var residual_step(const Mlp& mlp, ad::Var h, ad::Var u);

}  // namespace prbnet
