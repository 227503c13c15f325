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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "prbnet/dual.hpp"
#include "prbnet/kinematics.hpp"

namespace prbnet {
namespace {

constexpr double kPi = std::numbers::pi;

ChainConfigd random_chain(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(0.1, 0.6), off(-0.2, 0.2);
  ChainConfigd cfg;
  cfg.n_el = n;
  cfg.theta_el = VecXd::NullaryExpr(n, [&] { return len(rng); });
  cfg.theta_eb = Vec3d(len(rng), off(rng), off(rng));
  return cfg;
}

VecXd random_vec(Eigen::Index n, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return VecXd::NullaryExpr(n, [&] { return u(rng); });
}

TEST(Rotations, AreProperOrthogonal) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Vec3d psi = random_vec(3, kPi, rng);
    const Mat3d r = euler_xyz_rotation(psi);
    EXPECT_LT((r * r.transpose() - Mat3d::Identity()).norm(), 1e-14);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-14);
  }
}

TEST(Rotations, MatchAngleAxis) {
  const double a = 0.7;
  EXPECT_LT((rot_x(a) - Eigen::AngleAxisd(a, Vec3d::UnitX()).toRotationMatrix()).norm(), 1e-15);
  EXPECT_LT((rot_y(a) - Eigen::AngleAxisd(a, Vec3d::UnitY()).toRotationMatrix()).norm(), 1e-15);
  EXPECT_LT((rot_z(a) - Eigen::AngleAxisd(a, Vec3d::UnitZ()).toRotationMatrix()).norm(), 1e-15);
  const Vec3d psi(0.3, -0.4, 1.1);
  const Mat3d expected = (Eigen::AngleAxisd(psi(0), Vec3d::UnitX()) * Eigen::AngleAxisd(psi(1), Vec3d::UnitY()) *
                          Eigen::AngleAxisd(psi(2), Vec3d::UnitZ()))
                             .toRotationMatrix();
  EXPECT_LT((euler_xyz_rotation(psi) - expected).norm(), 1e-15);
}

TEST(ForwardKinematics, StraightChainReach) {
  ChainConfigd cfg;
  cfg.n_el = 3;
  cfg.theta_el = Vec3d(0.2, 0.3, 0.4);
  cfg.theta_eb = Vec3d(0.5, 0, 0);
  const Vec3d p = fk_endpoint(cfg, Vec6d::Zero().eval(), VecXd::Zero(6).eval());
  EXPECT_NEAR(p.x(), 1.4, 1e-15);
  EXPECT_EQ(p.y(), 0.0);
  EXPECT_EQ(p.z(), 0.0);
}

TEST(ForwardKinematics, SingleElementPlanarClosedForm) {
  ChainConfigd cfg;
  cfg.n_el = 1;
  cfg.theta_el = VecXd::Constant(1, 0.7);
  cfg.theta_eb = Vec3d(0.4, 0, 0);
  const double phi = 0.6;
  const Vec3d pz = fk_endpoint(cfg, Vec6d::Zero().eval(), VecXd(Eigen::Vector2d(0, phi)));
  EXPECT_LT((pz - Vec3d(0.7 + 0.4 * std::cos(phi), 0.4 * std::sin(phi), 0)).norm(), 1e-15);
  const Vec3d py = fk_endpoint(cfg, Vec6d::Zero().eval(), VecXd(Eigen::Vector2d(phi, 0)));
  EXPECT_LT((py - Vec3d(0.7 + 0.4 * std::cos(phi), 0, -0.4 * std::sin(phi))).norm(), 1e-15);
}

TEST(ForwardKinematics, TranslationEquivariance) {
  std::mt19937_64 rng(2);
  const ChainConfigd cfg = random_chain(4, rng);
  for (int i = 0; i < 20; ++i) {
    Vec6d qb = random_vec(6, 1.0, rng);
    const VecXd q = random_vec(8, 1.0, rng);
    const Vec3d c = random_vec(3, 5.0, rng);
    const Vec3d p0 = fk_endpoint(cfg, qb, q);
    qb.head<3>() += c;
    EXPECT_LT((fk_endpoint(cfg, qb, q) - (p0 + c)).norm(), 1e-12);
  }
}

TEST(ForwardKinematics, TransformsAreRigid) {
  std::mt19937_64 rng(3);
  const ChainConfigd cfg = random_chain(5, rng);
  const VecXd q = random_vec(10, 2.0, rng);
  const auto frames = chain_transforms(cfg, q);
  ASSERT_EQ(frames.size(), 6u);
  Vec3d prev = Vec3d::Zero();
  for (int j = 0; j < 5; ++j) {
    EXPECT_NEAR((frames[j].translation() - prev).norm(), cfg.theta_el(j), 1e-14);
    prev = frames[j].translation();
  }
  EXPECT_NEAR((frames[5].translation() - prev).norm(), cfg.theta_eb.norm(), 1e-14);

  const Vec6d qb = random_vec(6, 1.0, rng);
  const auto pts = body_positions(cfg, qb, q);
  ASSERT_EQ(pts.size(), 7u);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR((pts[j + 1] - pts[j]).norm(), cfg.theta_el(j), 1e-14);
  EXPECT_LT((pts.back() - fk_endpoint(cfg, qb, q)).norm(), 1e-14);
}

TEST(ForwardKinematics, ZeroStateIsCollinear) {
  const ChainConfigd cfg = uniform_discretization(2.0, 3);
  const auto pts = body_positions(cfg, Vec6d::Zero().eval(), VecXd::Zero(6).eval());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    EXPECT_NEAR(pts[j].x(), 0.5 * static_cast<double>(j), 1e-15);
    EXPECT_EQ(pts[j].y(), 0.0);
    EXPECT_EQ(pts[j].z(), 0.0);
  }
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const ChainConfigd cfg = random_chain(n, rng);
    const Vec6d qb = random_vec(6, 1.2, rng);
    const VecXd q = random_vec(2 * n, 1.2, rng);
    const Mat3Xd jac = fk_jacobian_full(cfg, qb, q);
    ASSERT_EQ(jac.cols(), 6 + 3 * n + 3);
    VecXd z(jac.cols());
    z << qb, q, cfg.theta_el, cfg.theta_eb;
    const auto eval = [&](const VecXd& zz) {
      ChainConfigd c = cfg;
      c.theta_el = zz.segment(6 + 2 * n, n);
      c.theta_eb = zz.tail<3>();
      return fk_endpoint(c, Vec6d(zz.head<6>()), VecXd(zz.segment(6, 2 * n)));
    };
    Mat3Xd fd(3, z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      VecXd zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      fd.col(i) = (eval(zp) - eval(zm)) / (2 * h);
    }
    worst = std::max(worst, (fd - jac).norm() / jac.norm());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Jacobian, AgreesWithDualNumbers) {
  using D = Dual<double>;
  std::mt19937_64 rng(5);
  const ChainConfigd cfg = random_chain(3, rng);
  const Vec6d qb = random_vec(6, 1.0, rng);
  const VecXd q = random_vec(6, 1.0, rng);
  const Mat3Xd jac = jacobian_linear(cfg, qb, q);
  for (int i = 0; i < 12; ++i) {
    Vec6<D> qbd = qb.cast<D>();
    VecX<D> qd = q.cast<D>();
    if (i < 6) qbd(i).d = 1.0; else qd(i - 6).d = 1.0;
    const Vec3<D> p = fk_endpoint(cfg.cast<D>(), qbd, qd);
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(p(r).d, jac(r, i), 1e-14);
  }
}

TEST(EndpointVelocity, IsTimeDerivativeOfPosition) {
  std::mt19937_64 rng(6);
  const ChainConfigd cfg = random_chain(3, rng);
  const Vec6d qb0 = random_vec(6, 1.0, rng), dqb = random_vec(6, 1.0, rng);
  const VecXd q0 = random_vec(6, 1.0, rng), dq = random_vec(6, 1.0, rng);
  const double t = 0.3, h = 1e-5;
  const auto pos = [&](double s) { return fk_endpoint(cfg, Vec6d(qb0 + s * dqb), VecXd(q0 + s * dq)); };
  const Vec3d fd = (pos(t + h) - pos(t - h)) / (2 * h);
  const Vec3d v = endpoint_velocity(cfg, Vec6d(qb0 + t * dqb), VecXd(q0 + t * dq), dqb, dq);
  EXPECT_LT((fd - v).norm(), 1e-8);
}

TEST(EndpointVelocity, FastPathMatchesJacobianRoute) {
  std::mt19937_64 rng(16);
  for (int n = 1; n <= 6; ++n) {
    const ChainConfigd cfg = random_chain(n, rng);
    const Vec6d qb = random_vec(6, 2.0, rng), dqb = random_vec(6, 3.0, rng);
    const VecXd q = random_vec(2 * n, 2.0, rng), dq = random_vec(2 * n, 3.0, rng);
    const auto [p, v] = fk_endpoint_with_velocity(cfg, qb, q, dqb, dq);
    EXPECT_LT((p - fk_endpoint(cfg, qb, q)).norm(), 1e-13);
    EXPECT_LT((v - endpoint_velocity(cfg, qb, q, dqb, dq)).norm(), 1e-12);
  }
}

TEST(Kinematics, RejectsBadInput) {
  ChainConfigd cfg = uniform_discretization(1.0, 2);
  EXPECT_THROW(fk_endpoint(cfg, Vec6d::Zero().eval(), VecXd::Zero(3).eval()), ContractError);
  cfg.theta_el(1) = -0.1;
  EXPECT_THROW(cfg.validate(), DomainError);
  EXPECT_THROW(uniform_discretization(1.0, 0), DomainError);
  EXPECT_THROW(uniform_discretization(-1.0, 2), DomainError);
}

TEST(UniformDiscretization, SplitsLengthEvenly) {
  const ChainConfigd cfg = uniform_discretization(1.92, 3);
  EXPECT_EQ(cfg.n_el, 3);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(cfg.theta_el(i), 0.48);
  EXPECT_DOUBLE_EQ(cfg.theta_eb.x(), 0.48);
  EXPECT_NEAR(cfg.theta_el.sum() + cfg.theta_eb.x(), 1.92, 1e-15);
}

TEST(ElementErrorBound, ClosedFormValues) {
  EXPECT_EQ(element_error_bound(2.0, 0.5, 0.0), 0.0);
  // Full fold: the chord to the tip is L + L1, so the gap is 2 L1.
  EXPECT_NEAR(element_error_bound(2.0, 0.5, kPi), 1.0, 1e-14);
  // Right angle: sqrt(L^2 + L1^2) - (L - L1).
  EXPECT_NEAR(element_error_bound(2.0, 0.5, kPi / 2), std::sqrt(4.25) - 1.5, 1e-14);
  double prev = 0.0;
  for (double z = 0.1; z <= kPi; z += 0.1) {
    const double b = element_error_bound(2.0, 0.5, z);
    EXPECT_GT(b, prev);
    prev = b;
  }
  EXPECT_THROW(element_error_bound(1.0, 1.5, 0.1), DomainError);
  EXPECT_THROW(element_error_bound(1.0, 0.5, -0.1), DomainError);
}

}  // namespace
}  // namespace prbnet
