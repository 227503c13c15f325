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

#include "prbnet/neural.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "json.hpp"

namespace prbnet {

ParamBlock ParamLayout::add(const std::string& name, int rows, int cols) {
  PRBNET_REQUIRE(rows >= 1 && cols >= 1, "ParamLayout: block '" + name + "' must be non-empty");
  PRBNET_REQUIRE(!contains(name), "ParamLayout: duplicate block '" + name + "'");
  ParamBlock b{size_, rows, cols};
  index_[name] = entries_.size();
  entries_.push_back({name, b});
  size_ += b.size();
  return b;
}

const ParamBlock& ParamLayout::at(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("ParamLayout: no block named '" + name + "'");
  return entries_[it->second].block;
}

bool ParamLayout::operator==(const ParamLayout& o) const {
  if (entries_.size() != o.entries_.size() || size_ != o.size_) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = o.entries_[i];
    if (a.name != b.name || a.block.offset != b.block.offset || a.block.rows != b.block.rows ||
        a.block.cols != b.block.cols) {
      return false;
    }
  }
  return true;
}

std::map<std::string, MatXd> ParamVector::unflatten() const {
  std::map<std::string, MatXd> out;
  for (const auto& e : layout.entries()) out[e.name] = matrix(e.name);
  return out;
}

ParamVector ParamVector::flatten(const ParamLayout& layout, const std::map<std::string, MatXd>& blocks) {
  ParamVector p{layout, VecXd::Zero(layout.size())};
  for (const auto& e : layout.entries()) {
    const auto it = blocks.find(e.name);
    if (it == blocks.end()) throw ContractError("ParamVector::flatten: missing block '" + e.name + "'");
    if (it->second.rows() != e.block.rows || it->second.cols() != e.block.cols) {
      throw ContractError("ParamVector::flatten: block '" + e.name + "' has the wrong shape");
    }
    p.matrix(e.name) = it->second;
  }
  return p;
}

// --- checkpoint ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'P', 'R', 'B', 'N', 'P', 'A', 'R', 'M'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw ContractError("checkpoint: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& os, const ParamVector& p, const std::string& extra_json) {
  PRBNET_REQUIRE(p.values.size() == p.layout.size(), "write_checkpoint: values do not match layout");
  nlohmann::json header;
  header["format"] = "prbnet-params";
  header["version"] = kCheckpointFormatVersion;
  header["size"] = p.layout.size();
  auto& blocks = header["blocks"] = nlohmann::json::array();
  for (const auto& e : p.layout.entries()) {
    blocks.push_back({{"name", e.name}, {"offset", e.block.offset}, {"rows", e.block.rows}, {"cols", e.block.cols}});
  }
  header["extra"] = nlohmann::json::parse(extra_json);
  const std::string text = header.dump();
  os.write(kMagic, 8);
  put_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (Eigen::Index i = 0; i < p.values.size(); ++i) put_u64(os, std::bit_cast<std::uint64_t>(p.values(i)));
  if (!os) throw ContractError("write_checkpoint: stream error");
}

std::string read_checkpoint(std::istream& is, ParamVector& p) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ContractError("checkpoint: bad magic");
  }
  const std::uint64_t len = get_u64(is);
  if (len > (1u << 26)) throw ContractError("checkpoint: header too large");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw ContractError("checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("checkpoint: malformed header: ") + e.what());
  }
  if (header.value("format", "") != "prbnet-params") throw ContractError("checkpoint: unknown format");
  if (header.value("version", 0) != kCheckpointFormatVersion) {
    throw ContractError("checkpoint: unsupported format version");
  }
  ParamLayout layout;
  try {
    for (const auto& b : header.at("blocks")) {
      const ParamBlock blk =
          layout.add(b.at("name").get<std::string>(), b.at("rows").get<int>(), b.at("cols").get<int>());
      if (blk.offset != b.at("offset").get<Eigen::Index>()) throw ContractError("checkpoint: inconsistent offsets");
    }
    if (layout.size() != header.at("size").get<Eigen::Index>()) throw ContractError("checkpoint: size mismatch");
    if (!header.contains("extra")) throw ContractError("checkpoint: missing extra section");
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("checkpoint: malformed header: ") + e.what());
  }
  VecXd values(layout.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = std::bit_cast<double>(get_u64(is));
  if (is.peek() != std::char_traits<char>::eof()) throw ContractError("checkpoint: trailing bytes");
  p.layout = std::move(layout);
  p.values = std::move(values);
  return header.at("extra").dump();
}

// --- blocks ----------------------------------------------------------------

void MlpSpec::validate() const {
  PRBNET_REQUIRE(input >= 1 && output >= 1, "MlpSpec: input and output widths must be >= 1");
  for (int w : hidden) PRBNET_REQUIRE(w >= 1, "MlpSpec: hidden widths must be >= 1");
}

Mlp Mlp::create(ParamLayout& layout, const std::string& prefix, const MlpSpec& spec) {
  spec.validate();
  Mlp m;
  m.spec = spec;
  int in = spec.input;
  std::vector<int> widths = spec.hidden;
  widths.push_back(spec.output);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    m.weights.push_back(layout.add(prefix + "/W" + std::to_string(l), widths[l], in));
    m.biases.push_back(layout.add(prefix + "/b" + std::to_string(l), widths[l]));
    in = widths[l];
  }
  return m;
}

Mlp Mlp::bind(const ParamLayout& layout, const std::string& prefix, const MlpSpec& spec) {
  spec.validate();
  Mlp m;
  m.spec = spec;
  int in = spec.input;
  std::vector<int> widths = spec.hidden;
  widths.push_back(spec.output);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const ParamBlock& w = layout.at(prefix + "/W" + std::to_string(l));
    const ParamBlock& b = layout.at(prefix + "/b" + std::to_string(l));
    if (w.rows != widths[l] || w.cols != in || b.rows != widths[l]) {
      throw ContractError("Mlp::bind: block shapes under '" + prefix + "' do not match the spec");
    }
    m.weights.push_back(w);
    m.biases.push_back(b);
    in = widths[l];
  }
  return m;
}

GruCell GruCell::create(ParamLayout& layout, const std::string& prefix, int input, int hidden) {
  PRBNET_REQUIRE(input >= 1 && hidden >= 1, "GruCell: dimensions must be >= 1");
  GruCell g;
  g.input = input;
  g.hidden = hidden;
  g.w = layout.add(prefix + "/W", 3 * hidden, input);
  g.u_zr = layout.add(prefix + "/U_zr", 2 * hidden, hidden);
  g.u_c = layout.add(prefix + "/U_c", hidden, hidden);
  g.b = layout.add(prefix + "/b", 3 * hidden);
  return g;
}

GruCell GruCell::bind(const ParamLayout& layout, const std::string& prefix, int input, int hidden) {
  GruCell g;
  g.input = input;
  g.hidden = hidden;
  g.w = layout.at(prefix + "/W");
  g.u_zr = layout.at(prefix + "/U_zr");
  g.u_c = layout.at(prefix + "/U_c");
  g.b = layout.at(prefix + "/b");
  if (g.w.rows != 3 * hidden || g.w.cols != input || g.u_zr.rows != 2 * hidden || g.u_c.rows != hidden) {
    throw ContractError("GruCell::bind: block shapes under '" + prefix + "' do not match");
  }
  return g;
}

namespace {

void init_weight(const ParamBlock& b, int fan_in, VecXd& params, std::mt19937_64& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> uni(-a, a);
  for (Eigen::Index i = 0; i < b.size(); ++i) params(b.offset + i) = uni(rng);
}

void zero(const ParamBlock& b, VecXd& params) { params.segment(b.offset, b.size()).setZero(); }

}  // namespace

void init_mlp(const Mlp& mlp, VecXd& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    init_weight(mlp.weights[l], mlp.weights[l].cols, params, rng);
    zero(mlp.biases[l], params);
  }
}

void init_gru(const GruCell& gru, VecXd& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  init_weight(gru.w, gru.input, params, rng);
  init_weight(gru.u_zr, gru.hidden, params, rng);
  init_weight(gru.u_c, gru.hidden, params, rng);
  zero(gru.b, params);
}

// --- tape routes -----------------------------------------------------------

ad::Var mlp_forward(const Mlp& mlp, ad::Var u) {
  PRBNET_REQUIRE(u.size() == mlp.spec.input, "mlp_forward: input has wrong dimension");
  ad::Var a = u;
  const std::size_t n_layers = mlp.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    a = ad::affine(mlp.weights[l], mlp.biases[l], a);
    if (l + 1 < n_layers && mlp.spec.activation == Activation::Tanh) a = ad::tanh(a);
  }
  return a;
}

std::pair<ad::Var, ad::Var> mlp_forward_jvp(const Mlp& mlp, ad::Var u, ad::Var du) {
  PRBNET_REQUIRE(u.size() == mlp.spec.input && du.size() == mlp.spec.input,
                 "mlp_forward_jvp: input has wrong dimension");
  ad::Var a = u, da = du;
  const std::size_t n_layers = mlp.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    a = ad::affine(mlp.weights[l], mlp.biases[l], a);
    da = ad::matvec(mlp.weights[l], da);
    if (l + 1 < n_layers && mlp.spec.activation == Activation::Tanh) {
      a = ad::tanh(a);
      da = ad::mul(ad::one_minus(ad::mul(a, a)), da);
    }
  }
  return {a, da};
}

ad::Var gru_cell(const GruCell& gru, ad::Var h, ad::Var u) {
  PRBNET_REQUIRE(h.size() == gru.hidden, "gru_cell: hidden state has wrong dimension");
  PRBNET_REQUIRE(u.size() == gru.input, "gru_cell: input has wrong dimension");
  const int n = gru.hidden;
  const ad::Var wx = ad::affine(gru.w, gru.b, u);
  const ad::Var uh = ad::matvec(gru.u_zr, h);
  const ad::Var z = ad::sigmoid(ad::slice(wx, 0, n) + ad::slice(uh, 0, n));
  const ad::Var r = ad::sigmoid(ad::slice(wx, n, n) + ad::slice(uh, n, n));
  const ad::Var c = ad::tanh(ad::slice(wx, 2 * n, n) + ad::matvec(gru.u_c, r * h));
  return h + z * (c - h);
}

ad::Var residual_step(const Mlp& mlp, ad::Var h, ad::Var u) {
  PRBNET_REQUIRE(mlp.spec.output == h.size(), "residual_step: MLP output must match the state dimension");
  return h + mlp_forward(mlp, ad::concat({h, u}));
}

}  // namespace prbnet
