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

#include "prbnet/model.hpp"

#include <cmath>
#include <optional>

#include "prbnet/errors.hpp"

namespace prbnet {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::PrbnRnn: return "prbn-rnn";
    case Variant::PrbnResNet: return "prbn-resnet";
    case Variant::Rnn: return "rnn";
    case Variant::ResNet: return "resnet";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  for (Variant v : {Variant::PrbnRnn, Variant::PrbnResNet, Variant::Rnn, Variant::ResNet}) {
    if (name == to_string(v)) return v;
  }
  throw ContractError("unknown model variant '" + std::string(name) +
                      "' (expected prbn-rnn, prbn-resnet, rnn or resnet)");
}

bool is_physics_informed(Variant v) { return v == Variant::PrbnRnn || v == Variant::PrbnResNet; }
bool is_recurrent(Variant v) { return v == Variant::PrbnRnn || v == Variant::Rnn; }

namespace {

constexpr int kFeatureDim = 9;

void check_spec(const ModelSpec& s) {
  PRBNET_REQUIRE(s.n_el >= 1, "model: n_el must be >= 1");
  if (!(s.length > 0.0)) throw DomainError("model: DLO length must be positive");
  if (!(s.velocity_scale > 0.0)) throw DomainError("model: velocity_scale must be positive");
}

MlpSpec mlp_spec(int in, const std::vector<int>& hidden, int out) {
  MlpSpec s;
  s.input = in;
  s.hidden = hidden;
  s.output = out;
  return s;
}

struct Shapes {
  MlpSpec encoder, decoder, resnet;
  int gru_input = 0;
};

Shapes shapes(const ModelSpec& s) {
  const int nh = s.hidden_dim();
  Shapes out;
  if (is_physics_informed(s.variant)) {
    out.encoder = mlp_spec(kFeatureDim, s.encoder_hidden, 2 * s.n_el);
  } else {
    out.encoder = mlp_spec(kObsDim + kInputDim, s.encoder_hidden, nh);
    out.decoder = mlp_spec(nh + kInputDim, s.decoder_hidden, kObsDim);
  }
  out.resnet = mlp_spec(nh + kInputDim, s.dynamics_hidden, nh);
  out.gru_input = nh + kInputDim;
  return out;
}

ParamLayout make_layout(const ModelSpec& s) {
  const Shapes sh = shapes(s);
  ParamLayout layout;
  Mlp::create(layout, "encoder", sh.encoder);
  if (is_recurrent(s.variant)) {
    GruCell::create(layout, "gru", sh.gru_input, s.hidden_dim());
  } else {
    Mlp::create(layout, "dynamics", sh.resnet);
  }
  if (is_physics_informed(s.variant)) {
    layout.add("kin/log_theta_el", s.n_el);
    layout.add("kin/theta_eb", 3);
  } else {
    Mlp::create(layout, "decoder", sh.decoder);
  }
  return layout;
}

}  // namespace

ModelBundle::ModelBundle(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
  check_spec(spec_);
  params_.layout = make_layout(spec_);
  params_.values = VecXd::Zero(params_.layout.size());
  bind();
  // Distinct streams per block keep initialization independent of layout order.
  init_mlp(encoder_, params_.values, seed);
  if (is_recurrent(spec_.variant)) {
    init_gru(gru_, params_.values, seed + 1);
  } else {
    init_mlp(resnet_, params_.values, seed + 1);
  }
  if (is_physics_informed(spec_.variant)) {
    const ChainConfigd prior = prior_chain();
    params_.values.segment(log_theta_el_.offset, spec_.n_el) = prior.theta_el.array().log().matrix();
    params_.values.segment(theta_eb_.offset, 3) = prior.theta_eb;
  } else {
    init_mlp(decoder_, params_.values, seed + 2);
  }
}

ModelBundle::ModelBundle(const ModelSpec& spec, ParamVector params) : spec_(spec), params_(std::move(params)) {
  check_spec(spec_);
  if (!(params_.layout == make_layout(spec_))) {
    throw ContractError("model: parameter layout does not match the model specification");
  }
  PRBNET_REQUIRE(params_.values.size() == params_.layout.size(), "model: parameter vector has wrong size");
  bind();
}

void ModelBundle::bind() {
  const Shapes sh = shapes(spec_);
  const ParamLayout& l = params_.layout;
  encoder_ = Mlp::bind(l, "encoder", sh.encoder);
  if (is_recurrent(spec_.variant)) {
    gru_ = GruCell::bind(l, "gru", sh.gru_input, spec_.hidden_dim());
  } else {
    resnet_ = Mlp::bind(l, "dynamics", sh.resnet);
  }
  if (is_physics_informed(spec_.variant)) {
    log_theta_el_ = l.at("kin/log_theta_el");
    theta_eb_ = l.at("kin/theta_eb");
  } else {
    decoder_ = Mlp::bind(l, "decoder", sh.decoder);
  }
  state_scale_ = VecXd::Ones(spec_.hidden_dim());
  state_scale_.tail(2 * spec_.n_el).setConstant(spec_.velocity_scale);
}

ChainConfigd ModelBundle::chain() const {
  if (!is_physics_informed(spec_.variant)) {
    throw UnsupportedOperation("model: black-box variants have no kinematic chain");
  }
  ChainConfigd cfg;
  cfg.n_el = spec_.n_el;
  cfg.theta_el = params_.values.segment(log_theta_el_.offset, spec_.n_el).array().exp().matrix();
  cfg.theta_eb = params_.values.segment<3>(theta_eb_.offset);
  cfg.total_length = spec_.length;
  return cfg;
}

void ModelBundle::set_input_normalization(const Input& mean, const Input& scale) {
  if (!mean.allFinite() || !scale.allFinite() || (scale.array() <= 0.0).any()) {
    throw DomainError("model: input normalization must be finite with positive scales");
  }
  input_mean_ = mean;
  input_scale_ = scale;
}

Input ModelBundle::normalize_input(const Input& x) const {
  return ((x - input_mean_).array() / input_scale_.array()).matrix();
}

// --- features --------------------------------------------------------------

VecXd encode_features(const Observation& y, const Input& x) {
  VecXd f(kFeatureDim);
  const Vec3d psi = x.segment<3>(3);
  f << y.head<3>() - x.head<3>(), psi.array().sin().matrix(), psi.array().cos().matrix();
  return f;
}

VecXd encode_feature_rate(const Observation& y, const Input& x) {
  VecXd df(kFeatureDim);
  const Vec3d psi = x.segment<3>(3);
  const Vec3d dpsi = x.segment<3>(9);
  df << y.tail<3>() - x.segment<3>(6), psi.array().cos() * dpsi.array(), -psi.array().sin() * dpsi.array();
  return df;
}

namespace {

void check_state(const ModelBundle& m, const VecXd& h) {
  if (h.size() != m.hidden_dim()) {
    throw ContractError("model: hidden state has " + std::to_string(h.size()) + " entries, expected " +
                        std::to_string(m.hidden_dim()));
  }
}

VecXd concat(const VecXd& a, const VecXd& b) {
  VecXd out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

// --- double route ----------------------------------------------------------

VecXd encode(const ModelBundle& m, const Observation& y, const Input& x) {
  const VecXd& p = m.params().values;
  if (is_physics_informed(m.variant())) {
    const VecX<Dual<double>> pd = p.cast<Dual<double>>();
    const auto [q, dq] = ad::jvp([&](const VecX<Dual<double>>& f) { return mlp_forward(m.encoder(), pd, f); },
                                 encode_features(y, x), encode_feature_rate(y, x));
    return concat(q, dq);
  }
  const VecXd in = concat(y, m.normalize_input(x));
  return m.state_scale().cwiseProduct(mlp_forward(m.encoder(), p, in));
}

VecXd dynamics_step(const ModelBundle& m, const VecXd& h, const Input& x) {
  check_state(m, h);
  const VecXd& p = m.params().values;
  const VecXd& s = m.state_scale();
  if (is_recurrent(m.variant())) {
    VecXd u(h.size() + kInputDim);
    u << h.cwiseQuotient(s), m.normalize_input(x);
    Eigen::ArrayXd g(3 * h.size());
    g.matrix().noalias() = detail::block_map(p, m.gru().w) * u;
    g += detail::block_map(p, m.gru().b).array();
    VecXd next = gru_from_projection(m.gru(), p, u.head(h.size()), g);
    next.array() *= s.array();
    return next;
  }
  const VecXd hs = h.cwiseQuotient(s);
  return s.cwiseProduct(residual_step(m.resnet(), p, hs, VecXd(m.normalize_input(x))));
}

namespace {

Observation decode_with(const ChainConfigd& chain, const VecXd& h, const Input& x) {
  const int n = chain.n_el;
  const auto [p, v] = fk_endpoint_with_velocity(chain, base_pose(x), h.head(2 * n), base_rate(x), h.tail(2 * n));
  Observation y;
  y << p, v;
  return y;
}

}  // namespace

Observation decode(const ModelBundle& m, const VecXd& h, const Input& x) {
  check_state(m, h);
  if (is_physics_informed(m.variant())) return decode_with(m.chain(), h, x);
  const VecXd in = concat(h.cwiseQuotient(m.state_scale()), m.normalize_input(x));
  return mlp_forward(m.decoder(), m.params().values, in);
}

RolloutResult rollout(const ModelBundle& m, const Observation& y0, std::span<const Input> x) {
  PRBNET_REQUIRE(x.size() >= 2, "rollout: need inputs for at least one step (N >= 1)");
  const std::size_t n_steps = x.size() - 1;
  RolloutResult out;
  out.y.reserve(n_steps);
  out.hidden.reserve(n_steps + 1);
  out.hidden.push_back(encode(m, y0, x[0]));
  if (!out.hidden.back().allFinite()) throw DivergenceError("rollout: non-finite encoded state", 0);
  const std::optional<ChainConfigd> chain =
      is_physics_informed(m.variant()) ? std::optional<ChainConfigd>(m.chain()) : std::nullopt;
  for (std::size_t j = 0; j < n_steps; ++j) {
    VecXd h = dynamics_step(m, out.hidden.back(), x[j]);
    if (!h.allFinite()) throw DivergenceError("rollout: non-finite hidden state", static_cast<long>(j + 1));
    Observation y = chain ? decode_with(*chain, h, x[j + 1]) : decode(m, h, x[j + 1]);
    if (!y.allFinite()) throw DivergenceError("rollout: non-finite prediction", static_cast<long>(j + 1));
    out.hidden.push_back(std::move(h));
    out.y.push_back(y);
  }
  return out;
}

// --- tape route ------------------------------------------------------------

KinematicVars kinematic_vars(const ModelBundle& m, ad::Tape& tape) {
  if (!is_physics_informed(m.variant())) return {};
  return {ad::exp(tape.param(m.log_theta_el())), tape.param(m.theta_eb())};
}

ad::Var encode(const ModelBundle& m, ad::Tape& tape, const Observation& y, const Input& x) {
  if (is_physics_informed(m.variant())) {
    const auto [q, dq] = mlp_forward_jvp(m.encoder(), tape.constant(encode_features(y, x)),
                                         tape.constant(encode_feature_rate(y, x)));
    return ad::concat({q, dq});
  }
  const ad::Var in = tape.constant(concat(y, m.normalize_input(x)));
  return ad::scale_constant(mlp_forward(m.encoder(), in), m.state_scale());
}

ad::Var dynamics_step(const ModelBundle& m, ad::Var h, const Input& x) {
  PRBNET_REQUIRE(h.size() == m.hidden_dim(), "model: hidden state has wrong dimension");
  ad::Tape& tape = *h.tape;
  const ad::Var hs = ad::scale_constant(h, m.state_scale().cwiseInverse());
  const ad::Var xs = tape.constant(m.normalize_input(x));
  const ad::Var next = is_recurrent(m.variant()) ? gru_cell(m.gru(), hs, ad::concat({hs, xs}))
                                                 : residual_step(m.resnet(), hs, xs);
  return ad::scale_constant(next, m.state_scale());
}

ad::Var decode_fk(ad::Var h, ad::Var theta_el, ad::Var theta_eb, const Input& x, double total_length) {
  using D = Dual<double>;
  const Eigen::Index n = theta_el.size();
  PRBNET_REQUIRE(n >= 1 && h.size() == 4 * n, "decode_fk: hidden state must have 4 n_el entries");
  PRBNET_REQUIRE(theta_eb.size() == 3, "decode_fk: theta_eb must have 3 entries");
  const VecXd& hv = h.value();
  const Vec6d q_b = base_pose(x), dq_b = base_rate(x);

  // The Jacobian evaluated on dual numbers with tangent (dq_b, dq_prb) yields
  // both J and its directional derivative, which is all the VJP needs.
  ChainConfig<D> cfg;
  cfg.n_el = static_cast<int>(n);
  cfg.theta_el = theta_el.value().cast<D>();
  cfg.theta_eb = theta_eb.value().cast<D>();
  cfg.total_length = total_length;
  cfg.validate();
  Vec6<D> qb_d;
  for (int i = 0; i < 6; ++i) qb_d(i) = D(q_b(i), dq_b(i));
  VecX<D> q_d(2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) q_d(i) = D(hv(i), hv(2 * n + i));
  const Mat3X<D> jd = fk_jacobian_full(cfg, qb_d, q_d);
  const Mat3Xd jac = jd.unaryExpr([](const D& d) { return d.v; });
  const Mat3Xd djac = jd.unaryExpr([](const D& d) { return d.d; });

  ChainConfigd cfg_v;
  cfg_v.n_el = cfg.n_el;
  cfg_v.theta_el = theta_el.value();
  cfg_v.theta_eb = theta_eb.value();
  cfg_v.total_length = total_length;
  VecXd value(6);
  value.head<3>() = fk_endpoint(cfg_v, q_b, VecXd(hv.head(2 * n)));
  value.tail<3>() = jac.leftCols<6>() * dq_b + jac.middleCols(6, 2 * n) * hv.tail(2 * n);

  return ad::custom({h, theta_el, theta_eb}, std::move(value), [jac, djac, n](const VecXd& g) {
    const Vec3d g_p = g.head<3>(), g_v = g.tail<3>();
    const VecXd gz = jac.transpose() * g_p + djac.transpose() * g_v;
    VecXd gh(4 * n);
    gh << gz.segment(6, 2 * n), jac.middleCols(6, 2 * n).transpose() * g_v;
    return std::vector<VecXd>{gh, gz.segment(6 + 2 * n, n), gz.tail(3)};
  });
}

ad::Var decode(const ModelBundle& m, ad::Var h, const Input& x, const KinematicVars& kin) {
  PRBNET_REQUIRE(h.size() == m.hidden_dim(), "model: hidden state has wrong dimension");
  if (is_physics_informed(m.variant())) {
    PRBNET_REQUIRE(kin.theta_el.tape == h.tape, "decode: kinematic parameters must live on the same tape");
    return decode_fk(h, kin.theta_el, kin.theta_eb, x, m.spec().length);
  }
  ad::Tape& tape = *h.tape;
  const ad::Var hs = ad::scale_constant(h, m.state_scale().cwiseInverse());
  return mlp_forward(m.decoder(), ad::concat({hs, tape.constant(m.normalize_input(x))}));
}

TapeRollout rollout(const ModelBundle& m, ad::Tape& tape, const Observation& y0, std::span<const Input> x) {
  PRBNET_REQUIRE(x.size() >= 2, "rollout: need inputs for at least one step (N >= 1)");
  const std::size_t n_steps = x.size() - 1;
  const KinematicVars kin = kinematic_vars(m, tape);
  TapeRollout out;
  out.hidden.reserve(n_steps + 1);
  out.y.reserve(n_steps);
  out.hidden.push_back(encode(m, tape, y0, x[0]));
  for (std::size_t j = 0; j < n_steps; ++j) {
    const ad::Var h = dynamics_step(m, out.hidden.back(), x[j]);
    if (!h.value().allFinite()) throw DivergenceError("rollout: non-finite hidden state", static_cast<long>(j + 1));
    out.hidden.push_back(h);
    out.y.push_back(decode(m, h, x[j + 1], kin));
  }
  return out;
}

}  // namespace prbnet
