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

#include "prbnet/prb_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace prbnet {

void MaterialParams::validate() const {
  if (!(length > 0.0 && density > 0.0 && youngs_modulus > 0.0 && damping > 0.0)) {
    throw DomainError("MaterialParams: length, density, E and eta must be positive");
  }
  if (!(d_in >= 0.0 && d_in < d_out)) throw DomainError("MaterialParams: need 0 <= d_in < d_out");
}

MaterialParams material_preset(std::string_view name) {
  if (name == "aluminum_rod") return {"aluminum_rod", 1.92, 0.004, 0.006, 2710.0, 5.15e10, 1.2e8};
  if (name == "foam_cylinder") return {"foam_cylinder", 1.90, 0.0, 0.06, 105.0, 1.8e6, 3.5e5};
  throw ContractError("unknown material preset '" + std::string(name) + "'");
}

std::vector<std::string> material_preset_names() { return {"aluminum_rod", "foam_cylinder"}; }

JointCoeffs material_to_coeffs(const MaterialParams& mp, const ChainConfigd& cfg) {
  mp.validate();
  cfg.validate();
  constexpr double pi = std::numbers::pi;
  const int n = cfg.n_el;
  JointCoeffs c;
  c.area_moment = pi * (std::pow(mp.d_out, 4) - std::pow(mp.d_in, 4)) / 64.0;
  c.cross_section = pi * (mp.d_out * mp.d_out - mp.d_in * mp.d_in) / 4.0;
  c.body_length.resize(n + 1);
  c.body_length.head(n) = cfg.theta_el;
  c.body_length(n) = cfg.theta_eb.x();
  if ((c.body_length.array() <= 0.0).any()) throw DomainError("material_to_coeffs: zero element length");
  c.stiffness.resize(n);
  c.damping.resize(n);
  for (int j = 0; j < n; ++j) {
    const double dl = 0.5 * (c.body_length(j) + c.body_length(j + 1));
    c.stiffness(j) = mp.youngs_modulus * c.area_moment / dl;
    c.damping(j) = mp.damping * c.area_moment / dl;
  }
  c.body_mass = mp.density * c.cross_section * c.body_length;
  c.body_inertia.resize(n + 1);
  for (int b = 0; b <= n; ++b) {
    const double i_t = c.body_mass(b) * c.body_length(b) * c.body_length(b) / 12.0;
    c.body_inertia[b] = Vec3d(0.0, i_t, i_t).asDiagonal();
  }
  return c;
}

SimModel make_sim_model(const MaterialParams& mp, int n_el, bool gravity) {
  SimModel m;
  m.chain = uniform_discretization(mp.length, n_el);
  m.coeffs = material_to_coeffs(mp, m.chain);
  if (!gravity) m.gravity.setZero();
  return m;
}

namespace detail {

std::vector<JointSpec> chain_joint_specs(int n_el) {
  std::vector<JointSpec> s;
  s.reserve(6 + 2 * n_el);
  for (int a = 0; a < 3; ++a) s.push_back({true, a, -1, -1});
  s.push_back({false, 0, -1, -1});
  s.push_back({false, 1, -1, -1});
  s.push_back({false, 2, -1, 0});
  for (int j = 1; j <= n_el; ++j) {
    s.push_back({false, 1, j - 1, -1});
    s.push_back({false, 2, -1, j});
  }
  return s;
}

}  // namespace detail

MatXd state_jacobian(const SimModel& model, const VecXd& h, const Input& x) {
  using D = Dual<double>;
  const auto n = h.size();
  MatXd jac(n, n);
  VecX<D> hd = h.cast<D>();
  for (Eigen::Index i = 0; i < n; ++i) {
    hd(i).d = 1.0;
    const VecX<D> f = state_derivative(model, hd, x);
    for (Eigen::Index r = 0; r < n; ++r) jac(r, i) = f(r).d;
    hd(i).d = 0.0;
  }
  return jac;
}

std::vector<Vec3d> body_centers(const SimModel& model, const Vec6d& q_b, const VecXd& q_prb) {
  const auto specs = detail::chain_joint_specs(model.n_el());
  const auto poses = detail::chain_poses<double>(model, specs, full_coords<double>(q_b, q_prb));
  std::vector<Vec3d> out(model.n_el() + 1);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const int b = specs[k].body;
    if (b < 0) continue;
    out[b] = poses.origin[k] + poses.rot[k].col(0) * (0.5 * model.coeffs.body_length(b));
  }
  return out;
}

double mechanical_energy(const SimModel& model, const VecXd& h, const Input& x) {
  const int n_q = 2 * model.n_el();
  PRBNET_REQUIRE(h.size() == 2 * n_q, "mechanical_energy: hidden state has wrong dimension");
  const VecXd q = full_coords<double>(base_pose(x), h.head(n_q));
  const VecXd dq = full_coords<double>(base_rate(x), h.tail(n_q));
  const double kinetic = 0.5 * dq.dot(mass_matrix(model, q) * dq);
  double spring = 0.0;
  for (int j = 0; j < model.n_el(); ++j) {
    spring += 0.5 * model.coeffs.stiffness(j) * h.segment<2>(2 * j).squaredNorm();
  }
  double grav = 0.0;
  const auto centers = body_centers(model, base_pose(x), h.head(n_q));
  for (std::size_t b = 0; b < centers.size(); ++b) {
    grav -= model.coeffs.body_mass(b) * model.gravity.dot(centers[b]);
  }
  return kinetic + spring + grav;
}

// --- integration -----------------------------------------------------------

namespace {

// Two-stage Radau IIA tableau.
constexpr double kC[2] = {1.0 / 3.0, 1.0};
constexpr double kA[2][2] = {{5.0 / 12.0, -1.0 / 12.0}, {3.0 / 4.0, 1.0 / 4.0}};

struct StageEval {
  VecXd residual;
  double norm = 0.0;
};

StageEval stage_residual(const VectorField& f, double t, const VecXd& h, double dt, const VecXd& z) {
  const auto n = h.size();
  const VecXd f1 = f(t + kC[0] * dt, h + z.head(n));
  const VecXd f2 = f(t + kC[1] * dt, h + z.tail(n));
  StageEval e;
  e.residual.resize(2 * n);
  e.residual.head(n) = z.head(n) - dt * (kA[0][0] * f1 + kA[0][1] * f2);
  e.residual.tail(n) = z.tail(n) - dt * (kA[1][0] * f1 + kA[1][1] * f2);
  e.norm = e.residual.allFinite() ? e.residual.lpNorm<Eigen::Infinity>()
                                  : std::numeric_limits<double>::infinity();
  return e;
}

Eigen::PartialPivLU<MatXd> newton_matrix(const MatXd& j, double dt) {
  const auto n = j.rows();
  MatXd m = MatXd::Identity(2 * n, 2 * n);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) m.block(r * n, c * n, n, n) -= dt * kA[r][c] * j;
  }
  return Eigen::PartialPivLU<MatXd>(m);
}

// Damped simplified Newton; returns true on convergence.
bool solve_stages(const VectorField& f, const MatXd& j, double t, const VecXd& h, double dt,
                  const Irk3Options& opts, VecXd& z) {
  const auto lu = newton_matrix(j, dt);
  StageEval cur = stage_residual(f, t, h, dt, z);
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (cur.norm < opts.tolerance) return true;
    const VecXd step = lu.solve(cur.residual);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
      VecXd trial = z - lambda * step;
      StageEval next = stage_residual(f, t, h, dt, trial);
      if (next.norm < cur.norm) {
        z = std::move(trial);
        cur = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) return cur.norm < opts.tolerance;
  }
  return cur.norm < opts.tolerance;
}

}  // namespace

VecXd step_irk3(const VectorField& f, const VectorFieldJacobian& jac, double t, const VecXd& h,
                double dt, const Irk3Options& opts) {
  if (!(dt > 0.0)) throw DomainError("step_irk3: dt must be positive");
  const auto n = h.size();
  VecXd z = VecXd::Zero(2 * n);
  if (solve_stages(f, jac(t, h), t, h, dt, opts, z)) return h + z.tail(n);
  // Retry once with the Jacobian at the end-point stage value.
  const VecXd h_end = h + z.tail(n);
  if (h_end.allFinite()) {
    z.setZero();
    if (solve_stages(f, jac(t + dt, h_end), t, h, dt, opts, z)) return h + z.tail(n);
  }
  throw IntegrationError("Radau IIA Newton iteration did not converge", t);
}

VecXd step_irk3(const VectorField& f, double t, const VecXd& h, double dt, const Irk3Options& opts) {
  const VectorFieldJacobian fd = [&f](double tt, const VecXd& hh) {
    const auto n = hh.size();
    MatXd j(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double eps = 1e-7 * std::max(1.0, std::abs(hh(i)));
      VecXd hp = hh, hm = hh;
      hp(i) += eps;
      hm(i) -= eps;
      j.col(i) = (f(tt, hp) - f(tt, hm)) / (2.0 * eps);
    }
    return j;
  };
  return step_irk3(f, fd, t, h, dt, opts);
}

VecXd step_rk4(const VectorField& f, double t, const VecXd& h, double dt) {
  const VecXd k1 = f(t, h);
  const VecXd k2 = f(t + 0.5 * dt, h + 0.5 * dt * k1);
  const VecXd k3 = f(t + 0.5 * dt, h + 0.5 * dt * k2);
  const VecXd k4 = f(t + dt, h + dt * k3);
  return h + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// --- trajectories ----------------------------------------------------------

Trajectory simulate_trajectory(const SimModel& model, const VecXd& h0, const BaseMotion& base_motion,
                               double duration, double dt, const Irk3Options& opts) {
  if (!(duration > 0.0 && dt > 0.0)) throw DomainError("simulate_trajectory: T and dt must be positive");
  PRBNET_REQUIRE(h0.size() == model.state_dim(), "simulate_trajectory: h0 has wrong dimension");
  const auto steps = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
  const int n_q = 2 * model.n_el();

  const VectorField f = [&](double t, const VecXd& h) {
    return state_derivative<double>(model, h, base_motion(t));
  };
  const VectorFieldJacobian jac = [&](double t, const VecXd& h) {
    return state_jacobian(model, h, base_motion(t));
  };

  Trajectory traj;
  traj.dt = dt;
  traj.t.reserve(steps + 1);
  traj.x.reserve(steps + 1);
  traj.y.reserve(steps + 1);
  traj.hidden.reserve(steps + 1);
  VecXd h = h0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Input x = base_motion(t);
    const VecXd q = h.head(n_q);
    const VecXd dq = h.tail(n_q);
    Observation y;
    y << fk_endpoint<double>(model.chain, base_pose(x), q),
        endpoint_velocity<double>(model.chain, base_pose(x), q, base_rate(x), dq);
    traj.t.push_back(t);
    traj.x.push_back(x);
    traj.y.push_back(y);
    traj.hidden.push_back(h);
    if (k < steps) h = step_irk3(f, jac, t, h, dt, opts);
  }
  return traj;
}

VecXd static_equilibrium(const SimModel& model, const Input& x) {
  const int n_q = 2 * model.n_el();
  Input rest = x;
  rest.tail<12>().setZero();
  // Newton on ddq(q, dq = 0) = 0; the Jacobian block d(ddq)/dq drives it.
  VecXd h = VecXd::Zero(2 * n_q);
  for (int it = 0; it < 100; ++it) {
    const VecXd acc = hybrid_accel<double>(model, h, rest);
    if (acc.lpNorm<Eigen::Infinity>() < 1e-12) return h;
    const MatXd j = state_jacobian(model, h, rest).bottomLeftCorner(n_q, n_q);
    const VecXd step = j.partialPivLu().solve(acc);
    double lambda = 1.0;
    for (int ls = 0; ls < 20; ++ls, lambda *= 0.5) {
      VecXd trial = h;
      trial.head(n_q) -= lambda * step;
      if (hybrid_accel<double>(model, trial, rest).norm() < acc.norm()) {
        h = trial;
        break;
      }
    }
  }
  throw DomainError("static_equilibrium: Newton iteration did not converge");
}

BaseMotion multisine_excitation(const MultisineConfig& cfg) {
  if (cfg.harmonics_hz.empty()) throw DomainError("multisine_excitation: empty harmonic set");
  if (!(cfg.duration > 0.0)) throw DomainError("multisine_excitation: duration must be positive");
  if ((cfg.position_amplitude.array() < 0.0).any() || (cfg.rotation_amplitude.array() < 0.0).any()) {
    throw DomainError("multisine_excitation: amplitudes must be non-negative");
  }
  if (cfg.rotation_amplitude(1) > cfg.pitch_limit) {
    throw DomainError("multisine_excitation: pitch amplitude exceeds the pitch limit");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const auto n_h = cfg.harmonics_hz.size();
  Vec6d bound;
  bound << cfg.position_amplitude, cfg.rotation_amplitude;

  // amp(d, i) sin(omega_i t + phase(d, i)); sum_i |amp(d, i)| = bound(d) so
  // the envelope-weighted signal never leaves the bounds.
  MatXd amp(6, n_h), phase(6, n_h);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int d = 0; d < 6; ++d) {
    for (std::size_t i = 0; i < n_h; ++i) {
      amp(d, i) = uni(rng);
      phase(d, i) = std::numbers::pi * uni(rng);
    }
    const double s = amp.row(d).cwiseAbs().sum();
    amp.row(d) *= (s > 0.0 ? bound(d) / s : 0.0);
  }
  VecXd omega(n_h);
  for (std::size_t i = 0; i < n_h; ++i) omega(i) = two_pi * cfg.harmonics_hz[i];
  const double active = 0.5 * cfg.duration;

  return [amp, phase, omega, active](double t) {
    Input x = Input::Zero();
    if (t <= 0.0 || t >= active) return x;
    const double k = std::numbers::pi / active;
    const double s = std::sin(k * t), c = std::cos(k * t);
    const double w = s * s * s * s;
    const double dw = 4.0 * s * s * s * c * k;
    const double ddw = k * k * (12.0 * s * s * c * c - 4.0 * s * s * s * s);
    for (int d = 0; d < 6; ++d) {
      double sig = 0.0, dsig = 0.0, ddsig = 0.0;
      for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const double arg = omega(i) * t + phase(d, i);
        const double sa = std::sin(arg), ca = std::cos(arg);
        sig += amp(d, i) * sa;
        dsig += amp(d, i) * omega(i) * ca;
        ddsig -= amp(d, i) * omega(i) * omega(i) * sa;
      }
      x(d) = w * sig;
      x(6 + d) = dw * sig + w * dsig;
      x(12 + d) = ddw * sig + 2.0 * dw * dsig + w * ddsig;
    }
    return x;
  };
}

}  // namespace prbnet
