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

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace prbnet {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Mat3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
template <typename Scalar>
using Isometry3 = Eigen::Transform<Scalar, 3, Eigen::Isometry>;

using Vec3d = Vec3<double>;
using Vec6d = Vec6<double>;
using Mat3d = Mat3<double>;
using VecXd = VecX<double>;
using MatXd = MatX<double>;
using Mat3Xd = Mat3X<double>;

/// Input x = [q_b, dq_b, ddq_b]: base pose (position, intrinsic XYZ Euler
/// angles), its rate and its second derivative.
using Input = Eigen::Matrix<double, 18, 1>;
/// Observation y = [p_e, dp_e]: endpoint position and velocity.
using Observation = Vec6d;

inline constexpr int kInputDim = 18;
inline constexpr int kObsDim = 6;

inline Vec6d base_pose(const Input& x) { return x.segment<6>(0); }
inline Vec6d base_rate(const Input& x) { return x.segment<6>(6); }
inline Vec6d base_accel(const Input& x) { return x.segment<6>(12); }

inline Input make_input(const Vec6d& q, const Vec6d& dq, const Vec6d& ddq) {
  Input x;
  x << q, dq, ddq;
  return x;
}

}  // namespace prbnet
