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

// Analytical pseudo-rigid-body baseline: material lumping, hybrid dynamics of
// the chain on a prescribed floating base, implicit Radau IIA integration and
// synthetic trajectory generation.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "prbnet/dual.hpp"
#include "prbnet/kinematics.hpp"

namespace prbnet {

/// Beam material and cross-section (SI units; damping in N s/m).
struct MaterialParams {
  std::string name;
  double length = 0.0;
  double d_in = 0.0;
  double d_out = 0.0;
  double density = 0.0;
  double youngs_modulus = 0.0;
  double damping = 0.0;

  void validate() const;
};

/// Named presets "aluminum_rod" and "foam_cylinder".
MaterialParams material_preset(std::string_view name);
std::vector<std::string> material_preset_names();

/// Lumped joint and body coefficients of a PRB chain.
struct JointCoeffs {
  double area_moment = 0.0;    // I_a [m^4]
  double cross_section = 0.0;  // A [m^2]
  VecXd stiffness;             // k_j [N m / rad], one per joint
  VecXd damping;               // c_j [N m s / rad], one per joint
  VecXd body_mass;             // bodies 0..n_el [kg]
  VecXd body_length;           // bodies 0..n_el [m]
  /// Thin-rod inertia about each body's center of mass, in the body frame.
  std::vector<Mat3d> body_inertia;
};

/// Per joint k = E I_a / dL and c = eta I_a / dL with dL the mean length of
/// the two bodies the joint connects; body mass rho A l.
JointCoeffs material_to_coeffs(const MaterialParams& mp, const ChainConfigd& cfg);

/// Everything the hybrid dynamics needs.
struct SimModel {
  ChainConfigd chain;
  JointCoeffs coeffs;
  Vec3d gravity{0.0, 0.0, -9.81};

  int n_el() const { return chain.n_el; }
  int state_dim() const { return 4 * chain.n_el; }
};

/// Uniformly discretized model for a material preset.
SimModel make_sim_model(const MaterialParams& mp, int n_el, bool gravity = true);

namespace detail {

// The chain with its floating base is treated as a serial chain of
// 6 + 2 n_el one-DOF joints: three prismatic base joints, three revolute
// base joints (intrinsic XYZ), then for each element a revolute Y joint
// offset by the previous body's length and a revolute Z joint carrying the
// next body. Virtual joints carry no mass.
struct JointSpec {
  bool prismatic = false;
  int axis = 0;         // local axis index
  int offset_src = -1;  // body whose length offsets this joint along x, -1 = none
  int body = -1;        // body attached after this joint, -1 = none
};

std::vector<JointSpec> chain_joint_specs(int n_el);

template <typename Scalar>
Mat3<Scalar> axis_rotation(int axis, const Scalar& a) {
  switch (axis) {
    case 0: return rot_x(a);
    case 1: return rot_y(a);
    default: return rot_z(a);
  }
}

template <typename Scalar>
struct ChainPoseCache {
  std::vector<Mat3<Scalar>> rot;  // joint frame after motion
  std::vector<Vec3<Scalar>> origin;
  std::vector<Vec3<Scalar>> axis;  // world joint axis
};

template <typename Scalar>
ChainPoseCache<Scalar> chain_poses(const SimModel& model, const std::vector<JointSpec>& specs,
                                   const VecX<Scalar>& q) {
  const auto k_joints = specs.size();
  ChainPoseCache<Scalar> c;
  c.rot.resize(k_joints);
  c.origin.resize(k_joints);
  c.axis.resize(k_joints);
  Mat3<Scalar> r_prev = Mat3<Scalar>::Identity();
  Vec3<Scalar> o_prev = Vec3<Scalar>::Zero();
  for (std::size_t k = 0; k < k_joints; ++k) {
    const JointSpec& js = specs[k];
    Vec3<Scalar> o = o_prev;
    if (js.offset_src >= 0) o += r_prev.col(0) * Scalar(model.coeffs.body_length(js.offset_src));
    const Vec3<Scalar> z = r_prev.col(js.axis);
    c.axis[k] = z;
    if (js.prismatic) {
      c.origin[k] = o + z * q(k);
      c.rot[k] = r_prev;
    } else {
      c.origin[k] = o;
      c.rot[k] = r_prev * axis_rotation(js.axis, q(k));
    }
    r_prev = c.rot[k];
    o_prev = c.origin[k];
  }
  return c;
}

}  // namespace detail

/// Joint torques/forces tau = M(q) ddq + C(q, dq) dq + g(q) over all
/// 6 + 2 n_el generalized coordinates [q_b, q_prb] (recursive Newton-Euler,
/// gravity folded into the base acceleration). Spring and damper torques are
/// not included.
template <typename Scalar>
VecX<Scalar> inverse_dynamics(const SimModel& model, const VecX<Scalar>& q, const VecX<Scalar>& dq,
                              const VecX<Scalar>& ddq) {
  const auto specs = detail::chain_joint_specs(model.n_el());
  const auto k_joints = static_cast<int>(specs.size());
  PRBNET_REQUIRE(q.size() == k_joints && dq.size() == k_joints && ddq.size() == k_joints,
                 "inverse_dynamics: coordinate size mismatch");
  const auto& co = model.coeffs;

  std::vector<Vec3<Scalar>> axis(k_joints), origin(k_joints), force(k_joints), moment(k_joints),
      com(k_joints);
  Mat3<Scalar> r_prev = Mat3<Scalar>::Identity();
  Vec3<Scalar> o_prev = Vec3<Scalar>::Zero();
  Vec3<Scalar> w = Vec3<Scalar>::Zero();
  Vec3<Scalar> dw = Vec3<Scalar>::Zero();
  Vec3<Scalar> acc = -model.gravity.template cast<Scalar>();

  for (int k = 0; k < k_joints; ++k) {
    const auto& js = specs[k];
    Vec3<Scalar> o = o_prev;
    if (js.offset_src >= 0) {
      const Vec3<Scalar> r_off = r_prev.col(0) * Scalar(co.body_length(js.offset_src));
      o += r_off;
      acc += dw.cross(r_off) + w.cross(w.cross(r_off));
    }
    const Vec3<Scalar> z = r_prev.col(js.axis);
    axis[k] = z;
    Mat3<Scalar> rot = r_prev;
    if (js.prismatic) {
      const Vec3<Scalar> d = z * q(k);
      o += d;
      acc += dw.cross(d) + w.cross(w.cross(d)) + Scalar(2) * w.cross(z * dq(k)) + z * ddq(k);
    } else {
      rot = r_prev * detail::axis_rotation(js.axis, q(k));
      dw += z * ddq(k) + w.cross(z * dq(k));
      w += z * dq(k);
    }
    origin[k] = o;
    force[k].setZero();
    moment[k].setZero();
    com[k] = o;
    if (js.body >= 0) {
      const double m = co.body_mass(js.body);
      const Vec3<Scalar> r = rot.col(0) * Scalar(0.5 * co.body_length(js.body));
      com[k] = o + r;
      const Vec3<Scalar> a_c = acc + dw.cross(r) + w.cross(w.cross(r));
      const Mat3<Scalar> inertia = rot * co.body_inertia[js.body].template cast<Scalar>() * rot.transpose();
      force[k] = a_c * Scalar(m);
      moment[k] = inertia * dw + w.cross(inertia * w);
    }
    r_prev = rot;
    o_prev = o;
  }

  VecX<Scalar> tau(k_joints);
  Vec3<Scalar> f_next = Vec3<Scalar>::Zero();
  Vec3<Scalar> n_next = Vec3<Scalar>::Zero();
  Vec3<Scalar> o_next = Vec3<Scalar>::Zero();
  for (int k = k_joints - 1; k >= 0; --k) {
    const Vec3<Scalar> f = force[k] + f_next;
    Vec3<Scalar> n = moment[k] + (com[k] - origin[k]).cross(force[k]) + n_next;
    if (k + 1 < k_joints) n += (o_next - origin[k]).cross(f_next);
    tau(k) = specs[k].prismatic ? axis[k].dot(f) : axis[k].dot(n);
    f_next = f;
    n_next = n;
    o_next = origin[k];
  }
  return tau;
}

/// Block of the joint-space mass matrix over the coordinates
/// [first, first + count), built from body Jacobians.
template <typename Scalar>
MatX<Scalar> mass_matrix_block(const SimModel& model, const VecX<Scalar>& q, int first, int count) {
  const auto specs = detail::chain_joint_specs(model.n_el());
  const auto k_joints = static_cast<int>(specs.size());
  PRBNET_REQUIRE(q.size() == k_joints, "mass_matrix: coordinate size mismatch");
  PRBNET_REQUIRE(first >= 0 && count >= 0 && first + count <= k_joints, "mass_matrix: bad block");
  const auto poses = detail::chain_poses(model, specs, q);
  const auto& co = model.coeffs;
  MatX<Scalar> m = MatX<Scalar>::Zero(count, count);
  Eigen::Matrix<Scalar, 3, Eigen::Dynamic> jv(3, count), jw(3, count);
  for (int k = 0; k < k_joints; ++k) {
    const int b = specs[k].body;
    if (b < 0) continue;
    const Vec3<Scalar> c = poses.origin[k] + poses.rot[k].col(0) * Scalar(0.5 * co.body_length(b));
    jv.setZero();
    jw.setZero();
    for (int i = first; i < first + count && i <= k; ++i) {
      if (specs[i].prismatic) {
        jv.col(i - first) = poses.axis[i];
      } else {
        jv.col(i - first) = poses.axis[i].cross(c - poses.origin[i]);
        jw.col(i - first) = poses.axis[i];
      }
    }
    const Mat3<Scalar> inertia =
        poses.rot[k] * co.body_inertia[b].template cast<Scalar>() * poses.rot[k].transpose();
    m.noalias() += Scalar(co.body_mass(b)) * jv.transpose() * jv;
    m.noalias() += jw.transpose() * inertia * jw;
  }
  return m;
}

template <typename Scalar>
MatX<Scalar> mass_matrix(const SimModel& model, const VecX<Scalar>& q) {
  return mass_matrix_block(model, q, 0, static_cast<int>(q.size()));
}

/// Stacks [q_b; q_prb] (and rates, accelerations) into full coordinates.
template <typename Scalar>
VecX<Scalar> full_coords(const Vec6<Scalar>& base, const VecX<Scalar>& internal) {
  VecX<Scalar> out(6 + internal.size());
  out << base, internal;
  return out;
}

/// Hybrid dynamics: the base follows x exactly, internal joints obey
/// M_ii ddq_prb = tau_spring - bias_i - M_ib ddq_b.
template <typename Scalar>
VecX<Scalar> hybrid_accel(const SimModel& model, const VecX<Scalar>& h, const Input& x) {
  const int n_q = 2 * model.n_el();
  PRBNET_REQUIRE(h.size() == 2 * n_q, "hybrid_accel: hidden state has wrong dimension");
  const VecX<Scalar> q_i = h.head(n_q);
  const VecX<Scalar> dq_i = h.tail(n_q);
  const Vec6<Scalar> q_b = base_pose(x).template cast<Scalar>();
  const Vec6<Scalar> dq_b = base_rate(x).template cast<Scalar>();
  const Vec6<Scalar> ddq_b = base_accel(x).template cast<Scalar>();
  const VecX<Scalar> q = full_coords(q_b, q_i);
  const VecX<Scalar> dq = full_coords(dq_b, dq_i);
  const VecX<Scalar> ddq = full_coords(ddq_b, VecX<Scalar>(VecX<Scalar>::Zero(n_q)));
  const VecX<Scalar> bias = inverse_dynamics(model, q, dq, ddq).tail(n_q);
  VecX<Scalar> rhs(n_q);
  for (int j = 0; j < model.n_el(); ++j) {
    for (int a = 0; a < 2; ++a) {
      const int i = 2 * j + a;
      rhs(i) = -Scalar(model.coeffs.stiffness(j)) * q_i(i) - Scalar(model.coeffs.damping(j)) * dq_i(i);
    }
  }
  rhs -= bias;
  const MatX<Scalar> m_ii = mass_matrix_block(model, q, 6, n_q);
  Eigen::LLT<MatX<Scalar>> llt(m_ii);
  if (llt.info() != Eigen::Success) throw DomainError("hybrid_accel: internal mass matrix is not positive definite");
  return llt.solve(rhs);
}

/// dh/dt = [dq_prb; ddq_prb].
template <typename Scalar>
VecX<Scalar> state_derivative(const SimModel& model, const VecX<Scalar>& h, const Input& x) {
  const int n_q = 2 * model.n_el();
  VecX<Scalar> out(2 * n_q);
  out.head(n_q) = h.tail(n_q);
  out.tail(n_q) = hybrid_accel(model, h, x);
  return out;
}

/// Exact d f / d h via forward-mode dual numbers, one column per pass.
MatXd state_jacobian(const SimModel& model, const VecXd& h, const Input& x);

/// Kinetic + spring potential + gravitational energy. Meaningful when the
/// base is at rest.
double mechanical_energy(const SimModel& model, const VecXd& h, const Input& x);

/// World-frame center of mass of every body 0..n_el.
std::vector<Vec3d> body_centers(const SimModel& model, const Vec6d& q_b, const VecXd& q_prb);

// --- integration -----------------------------------------------------------

using VectorField = std::function<VecXd(double t, const VecXd& h)>;
using VectorFieldJacobian = std::function<MatXd(double t, const VecXd& h)>;

struct Irk3Options {
  double tolerance = 1e-10;  // infinity norm of the stage residual
  int max_iterations = 50;
};

/// One step of the two-stage Radau IIA method (order 3). The stage
/// equations are solved with a damped Newton iteration whose matrix uses the
/// Jacobian at (t, h), refreshed every step. Throws IntegrationError if the
/// residual does not drop below tolerance.
VecXd step_irk3(const VectorField& f, const VectorFieldJacobian& jac, double t, const VecXd& h,
                double dt, const Irk3Options& opts = {});

/// Same with a central-difference Jacobian.
VecXd step_irk3(const VectorField& f, double t, const VecXd& h, double dt,
                const Irk3Options& opts = {});

/// Classical explicit RK4 step, used for fine reference solutions.
VecXd step_rk4(const VectorField& f, double t, const VecXd& h, double dt);

// --- trajectories ----------------------------------------------------------

using BaseMotion = std::function<Input(double t)>;

/// Time-indexed samples at fixed dt. `hidden` holds the generator's state
/// when the trajectory comes from the simulator, and is empty otherwise.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<Input> x;
  std::vector<Observation> y;
  std::vector<VecXd> hidden;

  std::size_t size() const { return t.size(); }
};

Trajectory simulate_trajectory(const SimModel& model, const VecXd& h0, const BaseMotion& base_motion,
                               double duration, double dt, const Irk3Options& opts = {});

/// h with dq = 0 and q solving spring torque = gravity load for a base at rest
/// in the pose of `x`.
VecXd static_equilibrium(const SimModel& model, const Input& x);

struct MultisineConfig {
  std::uint64_t seed = 0;
  Vec3d position_amplitude{0.05, 0.05, 0.05};  // [m]
  Vec3d rotation_amplitude{0.1, 0.1, 0.1};     // [rad]
  std::vector<double> harmonics_hz{0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.3};
  double duration = 20.0;  // total length; motion is active for the first half
  double pitch_limit = 80.0 * 3.14159265358979323846 / 180.0;
};

/// Smooth sum-of-sinusoids base motion under a C2 sin^4 envelope, active on
/// [0, duration/2] and at the identity pose afterwards. Rates and
/// accelerations are exact derivatives of the same expression.
BaseMotion multisine_excitation(const MultisineConfig& cfg);

}  // namespace prbnet
