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

// Vector-level reverse-mode differentiation.
//
// A Tape records every operation applied to Vars, each node holding a dense
// vector. Parameters live in one flat vector owned by the caller; ops that
// read parameter blocks accumulate into a gradient of the same layout. Nodes
// are appended in evaluation order, so a single reverse sweep is a valid
// topological order and gradients are bit-deterministic.

#pragma once

#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "prbnet/dual.hpp"
#include "prbnet/errors.hpp"
#include "prbnet/types.hpp"

namespace prbnet {

/// Contiguous block of a flat parameter vector holding a column-major
/// rows x cols matrix (cols == 1 for vectors).
struct ParamBlock {
  Eigen::Index offset = 0;
  int rows = 0;
  int cols = 1;
  Eigen::Index size() const { return static_cast<Eigen::Index>(rows) * cols; }
};

namespace ad {

class Tape;

/// Handle to a tape node.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const VecXd& value() const;
  Eigen::Index size() const { return value().size(); }
  double scalar() const;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(const VecXd& params) : params_(&params), param_grad_(VecXd::Zero(params.size())) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(VecXd value) { return push(std::move(value), nullptr); }
  /// Parameter block viewed as a vector.
  Var param(const ParamBlock& block);

  Var push(VecXd value, Backward backward);

  const VecXd& value(int id) const { return nodes_[id].value; }
  /// Adjoint accumulator of node `id`, allocated on first use.
  VecXd& adjoint(int id);
  bool has_adjoint(int id) const { return nodes_[id].grad.size() != 0; }

  const VecXd& params() const { return *params_; }
  Eigen::Map<const MatXd> param_matrix(const ParamBlock& b) const {
    return {params_->data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<MatXd> param_grad_matrix(const ParamBlock& b) {
    return {param_grad_.data() + b.offset, b.rows, b.cols};
  }
  const VecXd& param_grad() const { return param_grad_; }

  /// Seeds d root / d root = 1 and sweeps the tape backwards. The root must
  /// be a scalar node recorded on this tape.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }
  void check(const Var& v) const;

 private:
  struct Node {
    VecXd value;
    VecXd grad;
    Backward backward;
  };
  const VecXd* params_;
  VecXd param_grad_;
  std::vector<Node> nodes_;
};

// --- operations ------------------------------------------------------------

/// W x + b with W, b taken from parameter blocks.
Var affine(const ParamBlock& w, const ParamBlock& b, Var x);
/// W x with W taken from a parameter block.
Var matvec(const ParamBlock& w, Var x);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
Var add_constant(Var a, const VecXd& c);
Var scale_constant(Var a, const VecXd& c);  // elementwise by a constant
Var one_minus(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var concat(std::initializer_list<Var> parts);
Var slice(Var a, Eigen::Index start, Eigen::Index len);
/// Sum of entries, a size-1 node.
Var sum(Var a);
/// sum_i w_i a_i^2, a size-1 node.
Var weighted_sum_squares(Var a, const VecXd& w);
Var sum_squares(Var a);

/// Node with caller-supplied value and vector-Jacobian product. `vjp`
/// receives the output adjoint and returns one adjoint per input.
Var custom(std::vector<Var> inputs, VecXd value,
           std::function<std::vector<VecXd>(const VecXd& out_adjoint)> vjp);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

// --- drivers ---------------------------------------------------------------

struct ValueAndGrad {
  double value = 0.0;
  VecXd grad;
};

/// Reverse-mode gradient of a scalar function of the parameter vector.
ValueAndGrad value_and_grad(const std::function<Var(Tape&)>& fn, const VecXd& params);

/// Forward-mode directional derivative of `f` at `point` along `direction`.
/// `f` must be callable on VecX<Dual<double>>.
template <typename F>
std::pair<VecXd, VecXd> jvp(F&& f, const VecXd& point, const VecXd& direction) {
  PRBNET_REQUIRE(point.size() == direction.size(), "jvp: point and direction sizes differ");
  using D = Dual<double>;
  VecX<D> p(point.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) p(i) = D(point(i), direction(i));
  const VecX<D> out = f(p);
  VecXd value(out.size()), tangent(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    value(i) = out(i).v;
    tangent(i) = out(i).d;
  }
  return {value, tangent};
}

}  // namespace ad
}  // namespace prbnet
