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

#include "prbnet/autodiff.hpp"

#include <cmath>

namespace prbnet::ad {

const VecXd& Var::value() const {
  if (tape == nullptr) throw UnsupportedOperation("ad::Var: uninitialized handle");
  return tape->value(id);
}

double Var::scalar() const {
  const VecXd& v = value();
  if (v.size() != 1) throw UnsupportedOperation("ad::Var: not a scalar node");
  return v(0);
}

void Tape::check(const Var& v) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw UnsupportedOperation("ad: variable does not belong to this tape");
  }
}

Var Tape::push(VecXd value, Backward backward) {
  nodes_.push_back({std::move(value), VecXd(), std::move(backward)});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

VecXd& Tape::adjoint(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = VecXd::Zero(n.value.size());
  return n.grad;
}

Var Tape::param(const ParamBlock& block) {
  PRBNET_REQUIRE(block.offset >= 0 && block.offset + block.size() <= params_->size(),
                 "ad::Tape::param: block outside the parameter vector");
  VecXd v = params_->segment(block.offset, block.size());
  return push(std::move(v), [block](Tape& t, int self) {
    t.param_grad_.segment(block.offset, block.size()) += t.nodes_[self].grad;
  });
}

void Tape::backward(Var root) {
  check(root);
  if (nodes_[root.id].value.size() != 1) {
    throw UnsupportedOperation("ad::Tape::backward: root must be a scalar");
  }
  adjoint(root.id)(0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    if (nodes_[i].grad.size() == 0 || !nodes_[i].backward) continue;
    nodes_[i].backward(*this, i);
  }
}

namespace {

Tape& same_tape(const Var& a, const Var& b) {
  a.tape->check(a);
  a.tape->check(b);
  return *a.tape;
}

}  // namespace

Var affine(const ParamBlock& w, const ParamBlock& b, Var x) {
  Tape& t = *x.tape;
  t.check(x);
  PRBNET_REQUIRE(w.cols == x.size() && b.size() == w.rows, "ad::affine: shape mismatch");
  VecXd v = t.param_matrix(w) * x.value() + t.params().segment(b.offset, b.size());
  const int xi = x.id;
  return t.push(std::move(v), [w, b, xi](Tape& tp, int self) {
    const VecXd g = tp.adjoint(self);
    tp.param_grad_matrix(w).noalias() += g * tp.value(xi).transpose();
    tp.param_grad_matrix({b.offset, b.rows * b.cols, 1}) += g;
    tp.adjoint(xi).noalias() += tp.param_matrix(w).transpose() * g;
  });
}

Var matvec(const ParamBlock& w, Var x) {
  Tape& t = *x.tape;
  t.check(x);
  PRBNET_REQUIRE(w.cols == x.size(), "ad::matvec: shape mismatch");
  VecXd v = t.param_matrix(w) * x.value();
  const int xi = x.id;
  return t.push(std::move(v), [w, xi](Tape& tp, int self) {
    const VecXd g = tp.adjoint(self);
    tp.param_grad_matrix(w).noalias() += g * tp.value(xi).transpose();
    tp.adjoint(xi).noalias() += tp.param_matrix(w).transpose() * g;
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  PRBNET_REQUIRE(a.size() == b.size(), "ad::add: size mismatch");
  const int ai = a.id, bi = b.id;
  return t.push(a.value() + b.value(), [ai, bi](Tape& tp, int self) {
    const VecXd g = tp.adjoint(self);
    tp.adjoint(ai) += g;
    tp.adjoint(bi) += g;
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  PRBNET_REQUIRE(a.size() == b.size(), "ad::sub: size mismatch");
  const int ai = a.id, bi = b.id;
  return t.push(a.value() - b.value(), [ai, bi](Tape& tp, int self) {
    const VecXd g = tp.adjoint(self);
    tp.adjoint(ai) += g;
    tp.adjoint(bi) -= g;
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  PRBNET_REQUIRE(a.size() == b.size(), "ad::mul: size mismatch");
  const int ai = a.id, bi = b.id;
  return t.push(a.value().cwiseProduct(b.value()), [ai, bi](Tape& tp, int self) {
    const VecXd g = tp.adjoint(self);
    tp.adjoint(ai) += g.cwiseProduct(tp.value(bi));
    tp.adjoint(bi) += g.cwiseProduct(tp.value(ai));
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape;
  t.check(a);
  const int ai = a.id;
  return t.push(s * a.value(), [ai, s](Tape& tp, int self) { tp.adjoint(ai) += s * tp.adjoint(self); });
}

Var add_constant(Var a, const VecXd& c) {
  Tape& t = *a.tape;
  t.check(a);
  PRBNET_REQUIRE(a.size() == c.size(), "ad::add_constant: size mismatch");
  const int ai = a.id;
  return t.push(a.value() + c, [ai](Tape& tp, int self) { tp.adjoint(ai) += tp.adjoint(self); });
}

Var scale_constant(Var a, const VecXd& c) {
  Tape& t = *a.tape;
  t.check(a);
  PRBNET_REQUIRE(a.size() == c.size(), "ad::scale_constant: size mismatch");
  const int ai = a.id;
  return t.push(a.value().cwiseProduct(c),
                [ai, c](Tape& tp, int self) { tp.adjoint(ai) += tp.adjoint(self).cwiseProduct(c); });
}

Var one_minus(Var a) {
  Tape& t = *a.tape;
  t.check(a);
  const int ai = a.id;
  return t.push((1.0 - a.value().array()).matrix(),
                [ai](Tape& tp, int self) { tp.adjoint(ai) -= tp.adjoint(self); });
}

Var tanh(Var a) {
  Tape& t = *a.tape;
  t.check(a);
  const int ai = a.id;
  return t.push(a.value().array().tanh().matrix(), [ai](Tape& tp, int self) {
    const VecXd& y = tp.value(self);
    tp.adjoint(ai).array() += tp.adjoint(self).array() * (1.0 - y.array().square());
  });
}

Var sigmoid(Var a) {
  Tape& t = *a.tape;
  t.check(a);
  const int ai = a.id;
  VecXd v = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return t.push(std::move(v), [ai](Tape& tp, int self) {
    const VecXd& y = tp.value(self);
    tp.adjoint(ai).array() += tp.adjoint(self).array() * y.array() * (1.0 - y.array());
  });
}

Var exp(Var a) {
  Tape& t = *a.tape;
  t.check(a);
  const int ai = a.id;
  return t.push(a.value().array().exp().matrix(), [ai](Tape& tp, int self) {
    tp.adjoint(ai).array() += tp.adjoint(self).array() * tp.value(self).array();
  });
}

Var concat(std::initializer_list<Var> parts) {
  PRBNET_REQUIRE(parts.size() > 0, "ad::concat: no inputs");
  Tape& t = *parts.begin()->tape;
  Eigen::Index total = 0;
  std::vector<int> ids;
  for (const Var& p : parts) {
    t.check(p);
    total += p.size();
    ids.push_back(p.id);
  }
  VecXd v(total);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    v.segment(off, p.size()) = p.value();
    off += p.size();
  }
  return t.push(std::move(v), [ids](Tape& tp, int self) {
    const VecXd g = tp.adjoint(self);
    Eigen::Index o = 0;
    for (int id : ids) {
      const auto n = tp.value(id).size();
      tp.adjoint(id) += g.segment(o, n);
      o += n;
    }
  });
}

Var slice(Var a, Eigen::Index start, Eigen::Index len) {
  Tape& t = *a.tape;
  t.check(a);
  PRBNET_REQUIRE(start >= 0 && len >= 0 && start + len <= a.size(), "ad::slice: out of range");
  const int ai = a.id;
  return t.push(a.value().segment(start, len), [ai, start, len](Tape& tp, int self) {
    tp.adjoint(ai).segment(start, len) += tp.adjoint(self);
  });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  t.check(a);
  const int ai = a.id;
  return t.push(VecXd::Constant(1, a.value().sum()),
                [ai](Tape& tp, int self) { tp.adjoint(ai).array() += tp.adjoint(self)(0); });
}

Var weighted_sum_squares(Var a, const VecXd& w) {
  Tape& t = *a.tape;
  t.check(a);
  PRBNET_REQUIRE(a.size() == w.size(), "ad::weighted_sum_squares: size mismatch");
  const int ai = a.id;
  const double v = (w.array() * a.value().array().square()).sum();
  return t.push(VecXd::Constant(1, v), [ai, w](Tape& tp, int self) {
    tp.adjoint(ai).array() += 2.0 * tp.adjoint(self)(0) * w.array() * tp.value(ai).array();
  });
}

Var sum_squares(Var a) {
  Tape& t = *a.tape;
  t.check(a);
  const int ai = a.id;
  return t.push(VecXd::Constant(1, a.value().squaredNorm()), [ai](Tape& tp, int self) {
    tp.adjoint(ai) += 2.0 * tp.adjoint(self)(0) * tp.value(ai);
  });
}

Var custom(std::vector<Var> inputs, VecXd value,
           std::function<std::vector<VecXd>(const VecXd& out_adjoint)> vjp) {
  PRBNET_REQUIRE(!inputs.empty(), "ad::custom: no inputs");
  Tape& t = *inputs.front().tape;
  std::vector<int> ids;
  for (const Var& v : inputs) {
    t.check(v);
    ids.push_back(v.id);
  }
  return t.push(std::move(value), [ids, vjp = std::move(vjp)](Tape& tp, int self) {
    const std::vector<VecXd> grads = vjp(tp.adjoint(self));
    if (grads.size() != ids.size()) throw UnsupportedOperation("ad::custom: vjp arity mismatch");
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (grads[i].size() != tp.value(ids[i]).size()) {
        throw UnsupportedOperation("ad::custom: vjp returned a wrongly sized adjoint");
      }
      tp.adjoint(ids[i]) += grads[i];
    }
  });
}

ValueAndGrad value_and_grad(const std::function<Var(Tape&)>& fn, const VecXd& params) {
  Tape tape(params);
  const Var root = fn(tape);
  tape.check(root);
  ValueAndGrad out;
  out.value = root.scalar();
  tape.backward(root);
  out.grad = tape.param_grad();
  return out;
}

}  // namespace prbnet::ad
