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

#include "prbnet/kinematics.hpp"

#include <cmath>
#include <numbers>

namespace prbnet {

std::pair<Vec3d, Vec3d> fk_endpoint_with_velocity(const ChainConfigd& cfg, const Vec6d& q_b, const VecXd& q_prb,
                                                  const Vec6d& dq_b, const VecXd& dq_prb) {
  detail::check_coords(cfg, q_prb.size());
  PRBNET_REQUIRE(dq_prb.size() == q_prb.size(), "fk_endpoint_with_velocity: dq_prb size mismatch");
  const Mat3d rx = rot_x(q_b(3));
  const Mat3d rxy = rx * rot_y(q_b(4));
  Mat3d r = rxy * rot_z(q_b(5));
  Vec3d omega = dq_b(3) * Vec3d::UnitX() + dq_b(4) * rx.col(1) + dq_b(5) * rxy.col(2);
  Vec3d p = q_b.head<3>();
  Vec3d v = dq_b.head<3>();
  for (int j = 0; j < cfg.n_el; ++j) {
    const Vec3d step = cfg.theta_el(j) * r.col(0);
    p += step;
    v += omega.cross(step);
    // Post-multiply by RotY then RotZ, updating only the affected columns.
    const double cy = std::cos(q_prb(2 * j)), sy = std::sin(q_prb(2 * j));
    omega += dq_prb(2 * j) * r.col(1);
    const Vec3d c0 = cy * r.col(0) - sy * r.col(2);
    r.col(2) = sy * r.col(0) + cy * r.col(2);
    r.col(0) = c0;
    const double cz = std::cos(q_prb(2 * j + 1)), sz = std::sin(q_prb(2 * j + 1));
    omega += dq_prb(2 * j + 1) * r.col(2);
    const Vec3d d0 = cz * r.col(0) + sz * r.col(1);
    r.col(1) = cz * r.col(1) - sz * r.col(0);
    r.col(0) = d0;
  }
  const Vec3d step = r * cfg.theta_eb;
  return {p + step, v + omega.cross(step)};
}

double element_error_bound(double length, double l1, double zeta) {
  if (!(length > 0.0 && l1 > 0.0 && l1 < length)) {
    throw DomainError("element_error_bound: need 0 < L1 < L");
  }
  if (!(zeta >= 0.0 && zeta <= std::numbers::pi)) {
    throw DomainError("element_error_bound: deflection must lie in [0, pi]");
  }
  if (zeta == 0.0) return 0.0;
  return std::sqrt(length * length + l1 * l1 - 2.0 * length * l1 * std::cos(zeta)) - (length - l1);
}

ChainConfigd uniform_discretization(double length, int n_el) {
  if (!(length > 0.0)) throw DomainError("uniform_discretization: length must be positive");
  if (n_el < 1) throw DomainError("uniform_discretization: n_el must be >= 1");
  const double seg = length / static_cast<double>(n_el + 1);
  ChainConfigd cfg;
  cfg.n_el = n_el;
  cfg.theta_el = VecXd::Constant(n_el, seg);
  cfg.theta_eb = Vec3d(seg, 0.0, 0.0);
  cfg.total_length = length;
  return cfg;
}

}  // namespace prbnet
