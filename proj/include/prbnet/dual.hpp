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

#pragma once

#include <cmath>
#include <ostream>
#include <type_traits>

#include <Eigen/Core>

namespace prbnet {

/// Forward-mode dual number value + eps * tangent, eps^2 = 0.
///
/// Templated on the underlying scalar so that duals nest. Everything in this
/// library that is templated on `Scalar` accepts `Dual<double>`; evaluating a
/// function with tangent-seeded inputs yields its exact directional derivative.
template <typename T>
struct Dual {
  T v{0};
  T d{0};

  Dual() = default;
  template <typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>>
  Dual(U value) : v(static_cast<T>(value)), d(0) {}  // NOLINT(runtime/explicit)
  Dual(T value, T tangent) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

template <typename T> inline Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T> inline Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T> inline Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T> inline Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <typename T> inline Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <typename T> inline Dual<T> operator+(const Dual<T>& a) { return a; }

#define PRBNET_DUAL_MIXED_OP(op)                                              \
  template <typename T, typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>> \
  inline Dual<T> operator op(const Dual<T>& a, U b) { return a op Dual<T>(b); } \
  template <typename T, typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>> \
  inline Dual<T> operator op(U a, const Dual<T>& b) { return Dual<T>(a) op b; }
PRBNET_DUAL_MIXED_OP(+)
PRBNET_DUAL_MIXED_OP(-)
PRBNET_DUAL_MIXED_OP(*)
PRBNET_DUAL_MIXED_OP(/)
#undef PRBNET_DUAL_MIXED_OP

#define PRBNET_DUAL_CMP(op)                                                                 \
  template <typename T> inline bool operator op(const Dual<T>& a, const Dual<T>& b) { return a.v op b.v; } \
  template <typename T, typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>>   \
  inline bool operator op(const Dual<T>& a, U b) { return a.v op b; }                       \
  template <typename T, typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>>   \
  inline bool operator op(U a, const Dual<T>& b) { return a op b.v; }
PRBNET_DUAL_CMP(<)
PRBNET_DUAL_CMP(>)
PRBNET_DUAL_CMP(<=)
PRBNET_DUAL_CMP(>=)
PRBNET_DUAL_CMP(==)
PRBNET_DUAL_CMP(!=)
#undef PRBNET_DUAL_CMP

template <typename T> inline Dual<T> sin(const Dual<T>& a) {
  using std::cos, std::sin;
  return {sin(a.v), a.d * cos(a.v)};
}
template <typename T> inline Dual<T> cos(const Dual<T>& a) {
  using std::cos, std::sin;
  return {cos(a.v), -a.d * sin(a.v)};
}
template <typename T> inline Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return {e, a.d * e};
}
template <typename T> inline Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.v), a.d / a.v};
}
template <typename T> inline Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  return {s, a.d / (T(2) * s)};
}
template <typename T> inline Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  return {t, a.d * (T(1) - t * t)};
}
template <typename T> inline Dual<T> abs(const Dual<T>& a) { return a.v < T(0) ? -a : a; }
template <typename T> inline Dual<T> abs2(const Dual<T>& a) { return a * a; }
template <typename T> inline bool isfinite(const Dual<T>& a) {
  using std::isfinite;
  return isfinite(a.v) && isfinite(a.d);
}
template <typename T> inline bool isnan(const Dual<T>& a) {
  using std::isnan;
  return isnan(a.v) || isnan(a.d);
}
template <typename T> inline bool isinf(const Dual<T>& a) {
  using std::isinf;
  return isinf(a.v) || isinf(a.d);
}
template <typename T> inline Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.v, p), a.d * T(p) * pow(a.v, p - 1)};
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const Dual<T>& a) {
  return os << a.v << "+" << a.d << "e";
}

/// Logistic sigmoid shared by plain and dual scalars.
template <typename Scalar>
inline Scalar sigmoid(const Scalar& a) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-a));
}

/// Value part of a (possibly nested) dual, identity on plain scalars.
inline double value_of(double a) { return a; }
template <typename T>
inline double value_of(const Dual<T>& a) { return value_of(a.v); }

}  // namespace prbnet

namespace Eigen {

template <typename T>
struct NumTraits<prbnet::Dual<T>> : NumTraits<T> {
  using Real = prbnet::Dual<T>;
  using NonInteger = prbnet::Dual<T>;
  using Nested = prbnet::Dual<T>;
  using Literal = prbnet::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 3 * NumTraits<T>::MulCost + NumTraits<T>::AddCost,
  };
  static inline Real epsilon() { return Real(NumTraits<T>::epsilon()); }
  static inline Real dummy_precision() { return Real(NumTraits<T>::dummy_precision()); }
  static inline Real highest() { return Real(NumTraits<T>::highest()); }
  static inline Real lowest() { return Real(NumTraits<T>::lowest()); }
  static inline int digits10() { return NumTraits<T>::digits10(); }
};

template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<prbnet::Dual<T>, T, BinaryOp> {
  using ReturnType = prbnet::Dual<T>;
};
template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<T, prbnet::Dual<T>, BinaryOp> {
  using ReturnType = prbnet::Dual<T>;
};

}  // namespace Eigen
