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

#include "prbnet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "prbnet/errors.hpp"

namespace prbnet {

void LossConfig::validate() const {
  if ((w_y.array() < 0.0).any() || !w_y.allFinite()) throw DomainError("loss: W_y entries must be >= 0");
  if (w_k.size() > 0 && ((w_k.array() < 0.0).any() || !w_k.allFinite())) {
    throw DomainError("loss: step weights must be >= 0");
  }
  for (double a : {alpha_q, alpha_dq, alpha_length, alpha_el, alpha_eb}) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("loss: regularization weights must be >= 0");
  }
}

double LossConfig::step_weight(int k) const {
  if (w_k.size() == 0) return 1.0;
  if (k < 1 || k > w_k.size()) throw ContractError("loss: step weights do not cover the rollout horizon");
  return w_k(k - 1);
}

LossConfig default_loss_config(const ModelBundle& m, double beta) {
  LossConfig cfg;
  cfg.w_y << 1, 1, 1, beta, beta, beta;
  cfg.length = m.spec().length;
  const ChainConfigd prior = m.prior_chain();
  cfg.theta_el_prior = prior.theta_el;
  cfg.theta_eb_prior = prior.theta_eb;
  return cfg;
}

// --- windows ---------------------------------------------------------------

WindowView WindowDataset::window(std::size_t i) const {
  PRBNET_REQUIRE(i < windows.size(), "WindowDataset: index out of range");
  const Ref& r = windows[i];
  const Trajectory& tr = (*source)[r.traj];
  const std::size_t n = static_cast<std::size_t>(horizon);
  return {tr.y[r.start], std::span<const Input>(tr.x).subspan(r.start, n + 1),
          std::span<const Observation>(tr.y).subspan(r.start + 1, n)};
}

WindowDataset make_windows(std::shared_ptr<const std::vector<Trajectory>> trajectories, int horizon, int stride) {
  PRBNET_REQUIRE(trajectories != nullptr, "make_windows: no trajectories");
  PRBNET_REQUIRE(horizon >= 1, "make_windows: horizon N must be >= 1");
  PRBNET_REQUIRE(stride >= 1, "make_windows: stride must be >= 1");
  WindowDataset out;
  out.horizon = horizon;
  out.source = trajectories;
  for (std::size_t ti = 0; ti < trajectories->size(); ++ti) {
    const Trajectory& tr = (*trajectories)[ti];
    PRBNET_REQUIRE(tr.x.size() == tr.size() && tr.y.size() == tr.size(), "make_windows: ragged trajectory");
    if (ti == 0) {
      out.dt = tr.dt;
    } else if (std::abs(tr.dt - out.dt) > 1e-12) {
      throw ContractError("make_windows: trajectories have different time steps");
    }
    const std::size_t n = static_cast<std::size_t>(horizon);
    if (tr.size() <= n) continue;
    for (std::size_t k = 0; k + n <= tr.size() - 1; k += stride) out.windows.push_back({ti, k});
  }
  if (out.windows.empty()) {
    throw ContractError("make_windows: every trajectory is shorter than N + 1 samples, dataset would be empty");
  }
  return out;
}

WindowDataset make_windows(const Trajectory& traj, int horizon, int stride) {
  return make_windows(std::make_shared<const std::vector<Trajectory>>(1, traj), horizon, stride);
}

SplitResult split(const WindowDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("split: fraction must lie in (0, 1)");
  PRBNET_REQUIRE(!data.empty(), "split: empty dataset");
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw keeps the permutation identical across
  // standard library implementations.
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(data.size())));
  SplitResult out;
  out.train = data;
  out.val = data;
  out.train.windows.clear();
  out.val.windows.clear();
  out.train.tag = SplitTag::Train;
  out.val.tag = SplitTag::Val;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.train : out.val).windows.push_back(data.windows[order[i]]);
  }
  if (out.train.empty() && !out.val.empty()) std::swap(out.train.windows, out.val.windows);
  out.degenerate = out.train.empty() || out.val.empty();
  return out;
}

// --- loss ------------------------------------------------------------------

namespace {

VecXd state_weights(int n_el, const LossConfig& cfg) {
  VecXd w(4 * n_el);
  w.head(2 * n_el).setConstant(cfg.alpha_q);
  w.tail(2 * n_el).setConstant(cfg.alpha_dq);
  return w;
}

void check_batch(std::span<const WindowView> batch) {
  PRBNET_REQUIRE(!batch.empty(), "rollout_loss: empty batch");
  const std::size_t n = batch.front().y.size();
  PRBNET_REQUIRE(n >= 1, "rollout_loss: window length N must be >= 1");
  for (const WindowView& w : batch) {
    PRBNET_REQUIRE(w.y.size() == n && w.x.size() == n + 1, "rollout_loss: windows must share N and carry N + 1 inputs");
  }
}

}  // namespace

double state_regularization(std::span<const VecXd> states, const LossConfig& cfg) {
  double s = 0.0;
  for (const VecXd& h : states) {
    PRBNET_REQUIRE(h.size() % 4 == 0, "regularization: state dimension must be 4 n_el");
    const Eigen::Index n = h.size() / 2;
    s += cfg.alpha_q * h.head(n).squaredNorm() + cfg.alpha_dq * h.tail(n).squaredNorm();
  }
  return s;
}

double kinematic_regularization(const VecXd& theta_el, const Vec3d& theta_eb, const LossConfig& cfg) {
  PRBNET_REQUIRE(cfg.theta_el_prior.size() == theta_el.size(), "regularization: theta_el prior has wrong size");
  const double reach = theta_el.sum() + cfg.theta_eb_prior.x() - cfg.length;
  return cfg.alpha_length * reach * reach + cfg.alpha_el * (theta_el - cfg.theta_el_prior).squaredNorm() +
         cfg.alpha_eb * (theta_eb - cfg.theta_eb_prior).squaredNorm();
}

double regularization(std::span<const VecXd> states, const VecXd& theta_el, const Vec3d& theta_eb,
                      const LossConfig& cfg) {
  const double s = states.empty() ? 0.0 : state_regularization(states, cfg) / static_cast<double>(states.size());
  return s + kinematic_regularization(theta_el, theta_eb, cfg);
}

double rollout_loss(const ModelBundle& m, std::span<const WindowView> batch, const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch);
  const bool physics = is_physics_informed(m.variant());
  const std::size_t n = batch.front().y.size();
  double data = 0.0, states = 0.0;
  for (const WindowView& w : batch) {
    const RolloutResult r = rollout(m, w.y0, w.x);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec6d e = w.y[k] - r.y[k];
      data += cfg.step_weight(static_cast<int>(k + 1)) * e.cwiseProduct(e).dot(cfg.w_y);
    }
    if (physics) states += state_regularization(std::span<const VecXd>(r.hidden).subspan(1), cfg);
  }
  const double denom = static_cast<double>(batch.size() * n);
  double loss = (data + states) / denom;
  if (physics) {
    const ChainConfigd chain = m.chain();
    loss += kinematic_regularization(chain.theta_el, chain.theta_eb, cfg);
  }
  if (!std::isfinite(loss)) throw DivergenceError("rollout_loss: non-finite loss", static_cast<long>(n));
  return loss;
}

double rollout_loss(const ModelBundle& m, const WindowView& window, const LossConfig& cfg) {
  return rollout_loss(m, std::span<const WindowView>(&window, 1), cfg);
}

ad::ValueAndGrad rollout_loss_and_grad(const ModelBundle& m, std::span<const WindowView> batch,
                                       const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch);
  const bool physics = is_physics_informed(m.variant());
  const std::size_t n = batch.front().y.size();
  const double inv = 1.0 / static_cast<double>(batch.size() * n);
  const VecXd w_state = state_weights(m.n_el(), cfg) * inv;
  const VecXd& params = m.params().values;

  ad::ValueAndGrad out;
  out.grad = VecXd::Zero(params.size());
  for (const WindowView& w : batch) {
    ad::Tape tape(params);
    const TapeRollout r = rollout(m, tape, w.y0, w.x);
    std::vector<ad::Var> terms;
    terms.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      const ad::Var e = ad::add_constant(r.y[k], -w.y[k]);
      terms.push_back(ad::weighted_sum_squares(e, cfg.w_y * (cfg.step_weight(static_cast<int>(k + 1)) * inv)));
      if (physics) terms.push_back(ad::weighted_sum_squares(r.hidden[k + 1], w_state));
    }
    ad::Var total = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) total = total + terms[i];
    tape.backward(total);
    out.value += total.scalar();
    out.grad += tape.param_grad();
  }
  if (physics) {
    ad::Tape tape(params);
    const KinematicVars kin = kinematic_vars(m, tape);
    VecXd offset(1);
    offset(0) = cfg.theta_eb_prior.x() - cfg.length;
    const ad::Var reach = ad::add_constant(ad::sum(kin.theta_el), offset);
    const ad::Var reg = ad::scale(ad::sum_squares(reach), cfg.alpha_length) +
                        ad::weighted_sum_squares(ad::add_constant(kin.theta_el, -cfg.theta_el_prior),
                                                 VecXd::Constant(m.n_el(), cfg.alpha_el)) +
                        ad::weighted_sum_squares(ad::add_constant(kin.theta_eb, -cfg.theta_eb_prior),
                                                 VecXd::Constant(3, cfg.alpha_eb));
    tape.backward(reg);
    out.value += reg.scalar();
    out.grad += tape.param_grad();
  }
  if (!std::isfinite(out.value)) throw DivergenceError("rollout_loss: non-finite loss", static_cast<long>(n));
  return out;
}

// --- optimization ----------------------------------------------------------

Adam::Adam(Eigen::Index size, double beta1, double beta2, double epsilon)
    : m_(VecXd::Zero(size)), v_(VecXd::Zero(size)), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(VecXd& params, const VecXd& grad, double lr, const VecXd* mask) {
  PRBNET_REQUIRE(grad.size() == params.size() && params.size() == m_.size(), "Adam: size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  VecXd delta = (lr / c1) * (m_.array() / ((v_.array() / c2).sqrt() + epsilon_)).matrix();
  if (mask != nullptr) delta = delta.cwiseProduct(*mask);
  params -= delta;
}

namespace {

std::vector<WindowView> views(const WindowDataset& d, std::size_t limit) {
  const std::size_t n = limit == 0 ? d.size() : std::min(limit, d.size());
  std::vector<WindowView> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(d.window(i));
  return out;
}

VecXd trainable_mask(const ParamLayout& layout, const std::vector<std::string>& frozen) {
  VecXd mask = VecXd::Ones(layout.size());
  for (const auto& e : layout.entries()) {
    for (const std::string& prefix : frozen) {
      if (e.name.rfind(prefix, 0) == 0) mask.segment(e.block.offset, e.block.size()).setZero();
    }
  }
  return mask;
}

}  // namespace

FitResult fit(const ModelBundle& initial, const WindowDataset& train, const WindowDataset& val,
              const LossConfig& loss, const OptimizerConfig& opt, const EpochCallback& on_epoch) {
  PRBNET_REQUIRE(!train.empty(), "fit: empty training set");
  PRBNET_REQUIRE(opt.epochs >= 0 && opt.steps_per_epoch >= 1 && opt.batch_size >= 1, "fit: invalid optimizer settings");
  if (!(opt.learning_rate > 0.0)) throw DomainError("fit: learning rate must be positive");
  loss.validate();

  const std::size_t val_limit = opt.max_val_windows > 0 ? static_cast<std::size_t>(opt.max_val_windows) : 0;
  const std::vector<WindowView> val_set = val.empty() ? views(train, val_limit) : views(val, val_limit);

  FitResult out{initial, {}, false, ""};
  ModelBundle current = initial;
  double best = rollout_loss(initial, val_set, loss);
  const VecXd mask = trainable_mask(initial.params().layout, opt.frozen);
  Adam adam(mask.size(), opt.beta1, opt.beta2, opt.epsilon);
  std::mt19937_64 rng(opt.seed);
  const long total_steps = static_cast<long>(opt.epochs) * opt.steps_per_epoch;
  long step = 0;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<WindowView> batch;

  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    double train_sum = 0.0;
    try {
      for (int s = 0; s < opt.steps_per_epoch; ++s, ++step) {
        batch.clear();
        for (int b = 0; b < opt.batch_size; ++b) batch.push_back(train.window(rng() % train.size()));
        ad::ValueAndGrad vg = rollout_loss_and_grad(current, batch, loss);
        vg.grad = vg.grad.cwiseProduct(mask);
        if (!vg.grad.allFinite()) throw DivergenceError("fit: non-finite gradient", step);
        const double norm = vg.grad.norm();
        if (opt.clip_norm > 0.0 && norm > opt.clip_norm) vg.grad *= opt.clip_norm / norm;
        const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
        const double decay = opt.final_lr_fraction +
                             (1.0 - opt.final_lr_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
        adam.step(current.params().values, vg.grad, opt.learning_rate * decay, &mask);
        train_sum += vg.value;
      }
      EpochRecord rec;
      rec.epoch = epoch;
      rec.train_loss = train_sum / opt.steps_per_epoch;
      rec.val_loss = rollout_loss(current, val_set, loss);
      rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.history.push_back(rec);
      if (rec.val_loss < best) {
        best = rec.val_loss;
        out.model = current;
      }
      if (on_epoch) on_epoch(rec);
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.message = std::string("training diverged in epoch ") + std::to_string(epoch) + ": " + e.what();
      break;
    }
  }
  return out;
}

double mean_squared_joint_angle(const ModelBundle& m, const WindowDataset& data, int max_windows) {
  PRBNET_REQUIRE(is_physics_informed(m.variant()), "mean_squared_joint_angle: needs a physics-informed model");
  const std::vector<WindowView> set = views(data, max_windows > 0 ? static_cast<std::size_t>(max_windows) : 0);
  PRBNET_REQUIRE(!set.empty(), "mean_squared_joint_angle: no windows");
  double s = 0.0;
  std::size_t count = 0;
  const Eigen::Index nq = 2 * m.n_el();
  for (const WindowView& w : set) {
    const RolloutResult r = rollout(m, w.y0, w.x);
    for (std::size_t k = 1; k < r.hidden.size(); ++k, ++count) s += r.hidden[k].head(nq).squaredNorm();
  }
  return s / static_cast<double>(count);
}

// --- evaluation ------------------------------------------------------------

RmseResult evaluate_rmse(const Predictor& predict, const std::vector<Trajectory>& test, int horizon, int stride) {
  PRBNET_REQUIRE(horizon >= 1, "evaluate_rmse: horizon must be >= 1");
  const std::size_t h = static_cast<std::size_t>(horizon);
  const std::size_t st = stride > 0 ? static_cast<std::size_t>(stride) : h;
  RmseResult out;
  double sp = 0.0, sv = 0.0;
  std::size_t steps = 0;
  for (std::size_t ti = 0; ti < test.size(); ++ti) {
    const Trajectory& tr = test[ti];
    if (tr.size() < h + 1) {
      ++out.skipped;
      continue;
    }
    for (std::size_t k = 0; k + h <= tr.size() - 1; k += st) {
      const std::vector<Observation> pred = predict(ti, k, horizon);
      PRBNET_REQUIRE(pred.size() == h, "evaluate_rmse: predictor returned the wrong number of steps");
      for (std::size_t j = 0; j < h; ++j) {
        const Vec6d e = tr.y[k + 1 + j] - pred[j];
        const double ep = e.head<3>().squaredNorm();
        sp += ep;
        sv += e.tail<3>().squaredNorm();
        out.max_position_error = std::max(out.max_position_error, std::sqrt(ep));
      }
      steps += h;
      ++out.windows;
    }
  }
  if (steps == 0) {
    out.position = out.velocity = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.position = std::sqrt(sp / static_cast<double>(steps));
  out.velocity = std::sqrt(sv / static_cast<double>(steps));
  return out;
}

RmseResult evaluate_rmse(const ModelBundle& m, const std::vector<Trajectory>& test, int horizon, int stride) {
  const Predictor predict = [&](std::size_t ti, std::size_t k, int n) {
    const Trajectory& tr = test[ti];
    return rollout(m, tr.y[k], std::span<const Input>(tr.x).subspan(k, static_cast<std::size_t>(n) + 1)).y;
  };
  return evaluate_rmse(predict, test, horizon, stride);
}

std::pair<Input, Input> input_statistics(const std::vector<Trajectory>& data, double min_scale) {
  Input sum = Input::Zero(), sq = Input::Zero();
  std::size_t count = 0;
  for (const Trajectory& tr : data) {
    for (const Input& x : tr.x) {
      sum += x;
      sq += x.cwiseProduct(x);
      ++count;
    }
  }
  PRBNET_REQUIRE(count > 0, "input_statistics: no samples");
  const Input mean = sum / static_cast<double>(count);
  Input var = sq / static_cast<double>(count) - mean.cwiseProduct(mean);
  Input scale = var.cwiseMax(0.0).cwiseSqrt().cwiseMax(min_scale);
  return {mean, scale};
}

}  // namespace prbnet
