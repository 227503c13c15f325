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

// Serial-chain kinematics of a pseudo-rigid-body (PRB) discretization.
//
// The chain hangs off the floating base frame {b}. Body 0 is welded to {b};
// joint j (1..n_el) sits at the distal end of body j-1 and carries two
// rotational DOF parameterized by YZ Euler angles. Bodies extend along their
// local x-axis:
//
//   {j-1}T{j} = Trans_x(theta_el[j]) * RotY(psi_y,j) * RotZ(psi_z,j)
//
// The end marker sits at theta_eb expressed in the last body frame {n_el}.
// Generalized coordinates are flattened as q_prb = [psi_y,1, psi_z,1, ...].

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "prbnet/errors.hpp"
#include "prbnet/types.hpp"

namespace prbnet {

template <typename Scalar>
Mat3<Scalar> rot_x(const Scalar& a) {
  using std::cos, std::sin;
  const Scalar c = cos(a), s = sin(a);
  Mat3<Scalar> r;
  r << Scalar(1), Scalar(0), Scalar(0), Scalar(0), c, -s, Scalar(0), s, c;
  return r;
}

template <typename Scalar>
Mat3<Scalar> rot_y(const Scalar& a) {
  using std::cos, std::sin;
  const Scalar c = cos(a), s = sin(a);
  Mat3<Scalar> r;
  r << c, Scalar(0), s, Scalar(0), Scalar(1), Scalar(0), -s, Scalar(0), c;
  return r;
}

template <typename Scalar>
Mat3<Scalar> rot_z(const Scalar& a) {
  using std::cos, std::sin;
  const Scalar c = cos(a), s = sin(a);
  Mat3<Scalar> r;
  r << c, -s, Scalar(0), s, c, Scalar(0), Scalar(0), Scalar(0), Scalar(1);
  return r;
}

/// RotY(psi_y) * RotZ(psi_z).
template <typename Scalar>
Mat3<Scalar> euler_yz_rotation(const Scalar& psi_y, const Scalar& psi_z) {
  return rot_y(psi_y) * rot_z(psi_z);
}

/// Intrinsic X-Y-Z Euler angles: RotX(a) * RotY(b) * RotZ(c).
template <typename Scalar>
Mat3<Scalar> euler_xyz_rotation(const Vec3<Scalar>& psi) {
  return rot_x(psi(0)) * rot_y(psi(1)) * rot_z(psi(2));
}

/// Geometry of the PRB chain. Lengths are in meters.
template <typename Scalar>
struct ChainConfig {
  int n_el = 1;
  VecX<Scalar> theta_el;  // body lengths of bodies 0..n_el-1
  Vec3<Scalar> theta_eb = Vec3<Scalar>::Zero();  // marker offset in the last body frame
  double total_length = 0.0;

  int num_coords() const { return 2 * n_el; }

  void validate() const {
    PRBNET_REQUIRE(n_el >= 1, "ChainConfig: n_el must be >= 1");
    PRBNET_REQUIRE(theta_el.size() == n_el, "ChainConfig: theta_el size must equal n_el");
    for (int i = 0; i < n_el; ++i) {
      if (!(value_of_scalar(theta_el(i)) > 0.0)) {
        throw DomainError("ChainConfig: element lengths must be positive");
      }
    }
  }

  template <typename Other>
  ChainConfig<Other> cast() const {
    ChainConfig<Other> out;
    out.n_el = n_el;
    out.theta_el = theta_el.template cast<Other>();
    out.theta_eb = theta_eb.template cast<Other>();
    out.total_length = total_length;
    return out;
  }

 private:
  template <typename S>
  static double value_of_scalar(const S& s) {
    if constexpr (std::is_arithmetic_v<S>) {
      return static_cast<double>(s);
    } else {
      return value_of_scalar(s.v);
    }
  }
};

using ChainConfigd = ChainConfig<double>;

namespace detail {

template <typename Scalar>
void check_coords(const ChainConfig<Scalar>& cfg, Eigen::Index n_q) {
  PRBNET_REQUIRE(cfg.theta_el.size() == cfg.n_el, "chain: theta_el size must equal n_el");
  if (n_q != 2 * cfg.n_el) {
    throw ContractError("chain: q_prb has " + std::to_string(n_q) + " entries, expected " +
                        std::to_string(2 * cfg.n_el));
  }
}

/// Body-frame rotations/origins in {b}, plus the intermediate rotation after
/// each joint's Y rotation (needed for the Z-axis direction).
template <typename Scalar>
struct ChainFrames {
  std::vector<Mat3<Scalar>> rot;      // rot[j]: {b}R{j}, j = 0..n
  std::vector<Mat3<Scalar>> rot_mid;  // rot_mid[j]: {b}R{j-1} * RotY(psi_y,j), j = 1..n
  std::vector<Vec3<Scalar>> origin;   // origin[j]: position of {j} in {b}
  Vec3<Scalar> marker;                // end marker in {b}
};

template <typename Scalar>
ChainFrames<Scalar> chain_frames(const ChainConfig<Scalar>& cfg, const VecX<Scalar>& q_prb) {
  check_coords(cfg, q_prb.size());
  const int n = cfg.n_el;
  ChainFrames<Scalar> f;
  f.rot.resize(n + 1);
  f.rot_mid.resize(n + 1);
  f.origin.resize(n + 1);
  f.rot[0].setIdentity();
  f.rot_mid[0].setIdentity();
  f.origin[0].setZero();
  for (int j = 1; j <= n; ++j) {
    f.origin[j] = f.origin[j - 1] + f.rot[j - 1].col(0) * cfg.theta_el(j - 1);
    f.rot_mid[j] = f.rot[j - 1] * rot_y(q_prb(2 * (j - 1)));
    f.rot[j] = f.rot_mid[j] * rot_z(q_prb(2 * (j - 1) + 1));
  }
  f.marker = f.origin[n] + f.rot[n] * cfg.theta_eb;
  return f;
}

}  // namespace detail

/// Transforms {b}T{1}, ..., {b}T{n_el} followed by the end-marker frame.
template <typename Scalar>
std::vector<Isometry3<Scalar>> chain_transforms(const ChainConfig<Scalar>& cfg,
                                                const VecX<Scalar>& q_prb) {
  const auto f = detail::chain_frames(cfg, q_prb);
  std::vector<Isometry3<Scalar>> out;
  out.reserve(cfg.n_el + 1);
  for (int j = 1; j <= cfg.n_el; ++j) {
    Isometry3<Scalar> t = Isometry3<Scalar>::Identity();
    t.linear() = f.rot[j];
    t.translation() = f.origin[j];
    out.push_back(t);
  }
  Isometry3<Scalar> marker = Isometry3<Scalar>::Identity();
  marker.linear() = f.rot[cfg.n_el];
  marker.translation() = f.marker;
  out.push_back(marker);
  return out;
}

/// Endpoint position p_e = R_b(Psi_b) * {b}p_e(q_prb) + p_b.
template <typename Scalar>
Vec3<Scalar> fk_endpoint(const ChainConfig<Scalar>& cfg, const Vec6<Scalar>& q_b,
                         const VecX<Scalar>& q_prb) {
  const auto f = detail::chain_frames(cfg, q_prb);
  const Vec3<Scalar> psi = q_b.template tail<3>();
  return euler_xyz_rotation(psi) * f.marker + q_b.template head<3>();
}

/// d p_e / d[q_b, q_prb, theta_el, theta_eb], a 3 x (6 + 3 n_el + 3) matrix.
///
/// Columns follow from rotating the downstream chain about each joint axis,
/// so the result is exact. Evaluated on dual scalars it also yields exact
/// second-order directional information.
template <typename Scalar>
Mat3X<Scalar> fk_jacobian_full(const ChainConfig<Scalar>& cfg, const Vec6<Scalar>& q_b,
                               const VecX<Scalar>& q_prb) {
  const auto f = detail::chain_frames(cfg, q_prb);
  const int n = cfg.n_el;
  const Vec3<Scalar> p_b = q_b.template head<3>();
  const Mat3<Scalar> rx = rot_x(q_b(3));
  const Mat3<Scalar> rxy = rx * rot_y(q_b(4));
  const Mat3<Scalar> r_b = rxy * rot_z(q_b(5));
  const Vec3<Scalar> rel = r_b * f.marker;  // p_e - p_b
  const Vec3<Scalar> p_e = rel + p_b;

  Mat3X<Scalar> jac(3, 6 + 3 * n + 3);
  jac.template block<3, 3>(0, 0).setIdentity();
  jac.col(3) = Vec3<Scalar>::UnitX().cross(rel);
  jac.col(4) = rx.col(1).cross(rel);
  jac.col(5) = rxy.col(2).cross(rel);
  for (int j = 1; j <= n; ++j) {
    const Vec3<Scalar> lever = p_e - (p_b + r_b * f.origin[j]);
    const Mat3<Scalar> r_prev = r_b * f.rot[j - 1];
    jac.col(6 + 2 * (j - 1)) = r_prev.col(1).cross(lever);
    jac.col(6 + 2 * (j - 1) + 1) = (r_b * f.rot_mid[j].col(2)).cross(lever);
    jac.col(6 + 2 * n + (j - 1)) = r_prev.col(0);
  }
  jac.template block<3, 3>(0, 6 + 3 * n) = r_b * f.rot[n];
  return jac;
}

/// Joint Jacobian J_lin = [d fk / d q_b, d fk / d q_prb], 3 x (6 + 2 n_el).
template <typename Scalar>
Mat3X<Scalar> jacobian_linear(const ChainConfig<Scalar>& cfg, const Vec6<Scalar>& q_b,
                              const VecX<Scalar>& q_prb) {
  return fk_jacobian_full(cfg, q_b, q_prb).leftCols(6 + 2 * cfg.n_el);
}

/// dp_e = J_lin * [dq_b; dq_prb].
template <typename Scalar>
Vec3<Scalar> endpoint_velocity(const ChainConfig<Scalar>& cfg, const Vec6<Scalar>& q_b,
                               const VecX<Scalar>& q_prb, const Vec6<Scalar>& dq_b,
                               const VecX<Scalar>& dq_prb) {
  PRBNET_REQUIRE(dq_prb.size() == q_prb.size(), "endpoint_velocity: dq_prb size mismatch");
  const Mat3X<Scalar> jac = jacobian_linear(cfg, q_b, q_prb);
  return jac.template leftCols<6>() * dq_b + jac.rightCols(2 * cfg.n_el) * dq_prb;
}

/// Endpoint position and velocity in one pass, by propagating the angular
/// velocity along the chain. Double-only fast path used by model rollouts.
std::pair<Vec3d, Vec3d> fk_endpoint_with_velocity(const ChainConfigd& cfg, const Vec6d& q_b, const VecXd& q_prb,
                                                  const Vec6d& dq_b, const VecXd& dq_prb);

/// World positions of {b}, of every joint frame {1..n_el}, and of the end
/// marker (n_el + 2 points).
template <typename Scalar>
std::vector<Vec3<Scalar>> body_positions(const ChainConfig<Scalar>& cfg, const Vec6<Scalar>& q_b,
                                         const VecX<Scalar>& q_prb) {
  const auto f = detail::chain_frames(cfg, q_prb);
  const Vec3<Scalar> psi = q_b.template tail<3>();
  const Mat3<Scalar> r_b = euler_xyz_rotation(psi);
  const Vec3<Scalar> p_b = q_b.template head<3>();
  std::vector<Vec3<Scalar>> out;
  out.reserve(cfg.n_el + 2);
  for (int j = 0; j <= cfg.n_el; ++j) out.push_back(r_b * f.origin[j] + p_b);
  out.push_back(r_b * f.marker + p_b);
  return out;
}

/// Law-of-cosines upper bound on the endpoint error caused by welding a first
/// body of length `l1` to {b} when the DLO of length `length` deflects by
/// `zeta` at its root.
double element_error_bound(double length, double l1, double zeta);

/// Equal division of `length` into n_el element lengths plus the marker
/// offset: every segment is length / (n_el + 1).
ChainConfigd uniform_discretization(double length, int n_el);

}  // namespace prbnet
