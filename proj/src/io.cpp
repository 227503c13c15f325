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

#include "prbnet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace prbnet {

namespace {

std::vector<double> to_vec(const VecXd& v) { return {v.data(), v.data() + v.size()}; }

VecXd from_vec(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VecXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec3d vec3(const Json& j) {
  const VecXd v = from_vec(j);
  if (v.size() != 3) throw FormatError("expected a 3-vector");
  return v;
}

template <typename F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(n)};
}

std::vector<double> parse_row(const std::string& line, const fs::path& path, std::size_t line_no) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p <= end) {
    const char* comma = std::find(p, end, ',');
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(p, comma, v);
    if (ec != std::errc() || ptr != comma) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
    out.push_back(v);
    p = comma + 1;
  }
  return out;
}

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::string> trajectory_header() {
  std::vector<std::string> h{"t"};
  for (const char* block : {"qb", "dqb", "ddqb"}) {
    for (int i = 0; i < 6; ++i) h.push_back(block + std::to_string(i));
  }
  for (const char* block : {"pe", "dpe"}) {
    for (int i = 0; i < 3; ++i) h.push_back(block + std::to_string(i));
  }
  return h;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
  return s;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  return is;
}

}  // namespace

Json chain_to_json(const ChainConfigd& cfg) {
  return {{"n_el", cfg.n_el},
          {"theta_el", to_vec(cfg.theta_el)},
          {"theta_eb", to_vec(cfg.theta_eb)},
          {"total_length", cfg.total_length}};
}

ChainConfigd chain_from_json(const Json& j) {
  return guarded("chain", [&] {
    ChainConfigd cfg;
    cfg.n_el = j.at("n_el").get<int>();
    cfg.theta_el = from_vec(j.at("theta_el"));
    cfg.theta_eb = vec3(j.at("theta_eb"));
    cfg.total_length = j.value("total_length", 0.0);
    cfg.validate();
    return cfg;
  });
}

Json material_to_json(const MaterialParams& mp) {
  return {{"name", mp.name},       {"length", mp.length},   {"d_in", mp.d_in},
          {"d_out", mp.d_out},     {"density", mp.density}, {"youngs_modulus", mp.youngs_modulus},
          {"damping", mp.damping}};
}

MaterialParams material_from_json(const Json& j) {
  return guarded("material", [&] {
    MaterialParams mp;
    mp.name = j.value("name", std::string("custom"));
    mp.length = j.at("length").get<double>();
    mp.d_in = j.at("d_in").get<double>();
    mp.d_out = j.at("d_out").get<double>();
    mp.density = j.at("density").get<double>();
    mp.youngs_modulus = j.at("youngs_modulus").get<double>();
    mp.damping = j.at("damping").get<double>();
    mp.validate();
    return mp;
  });
}

Json multisine_to_json(const MultisineConfig& cfg) {
  return {{"seed", cfg.seed},
          {"position_amplitude", to_vec(cfg.position_amplitude)},
          {"rotation_amplitude", to_vec(cfg.rotation_amplitude)},
          {"harmonics_hz", cfg.harmonics_hz},
          {"duration", cfg.duration},
          {"pitch_limit", cfg.pitch_limit}};
}

MultisineConfig multisine_from_json(const Json& j) {
  return guarded("excitation", [&] {
    MultisineConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("position_amplitude")) cfg.position_amplitude = vec3(j["position_amplitude"]);
    if (j.contains("rotation_amplitude")) cfg.rotation_amplitude = vec3(j["rotation_amplitude"]);
    cfg.harmonics_hz = j.value("harmonics_hz", cfg.harmonics_hz);
    cfg.duration = j.value("duration", cfg.duration);
    cfg.pitch_limit = j.value("pitch_limit", cfg.pitch_limit);
    return cfg;
  });
}

Json meta_to_json(const TrajectoryMeta& m) {
  return {{"csv", m.csv},
          {"hidden", m.hidden},
          {"dt", m.dt},
          {"duration", m.duration},
          {"n_el", m.n_el},
          {"gravity", m.gravity},
          {"material", material_to_json(m.material)},
          {"excitation", multisine_to_json(m.excitation)}};
}

TrajectoryMeta meta_from_json(const Json& j) {
  return guarded("sidecar", [&] {
    TrajectoryMeta m;
    m.csv = j.at("csv").get<std::string>();
    m.hidden = j.value("hidden", std::string());
    m.dt = j.at("dt").get<double>();
    m.duration = j.at("duration").get<double>();
    m.n_el = j.at("n_el").get<int>();
    m.gravity = j.value("gravity", true);
    m.material = material_from_json(j.at("material"));
    m.excitation = multisine_from_json(j.at("excitation"));
    return m;
  });
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
  PRBNET_REQUIRE(traj.x.size() == traj.size() && traj.y.size() == traj.size(), "write_trajectory_csv: ragged trajectory");
  std::ostringstream os;
  os << join(trajectory_header()) << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.t[k]);
    for (int i = 0; i < kInputDim; ++i) os << ',' << format_double(traj.x[k](i));
    for (int i = 0; i < kObsDim; ++i) os << ',' << format_double(traj.y[k](i));
    os << '\n';
  }
  open_out(path) << os.str();
}

Trajectory read_trajectory_csv(const fs::path& path) {
  std::ifstream is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || trim_cr(line) != join(trajectory_header())) {
    throw FormatError(path.string() + ": missing or unexpected trajectory header");
  }
  Trajectory traj;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const std::vector<double> v = parse_row(line, path, line_no);
    if (v.size() != 1 + kInputDim + kObsDim) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 25 columns");
    }
    if (!std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); })) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-finite value");
    }
    traj.t.push_back(v[0]);
    traj.x.push_back(Eigen::Map<const Input>(v.data() + 1));
    traj.y.push_back(Eigen::Map<const Observation>(v.data() + 1 + kInputDim));
  }
  if (traj.size() < 2) throw FormatError(path.string() + ": need at least two samples");
  traj.dt = (traj.t.back() - traj.t.front()) / static_cast<double>(traj.size() - 1);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (std::abs(traj.t[k] - traj.t[k - 1] - traj.dt) > 1e-6 * traj.dt) {
      throw FormatError(path.string() + ": samples are not uniformly spaced in time");
    }
  }
  return traj;
}

void write_hidden_csv(const fs::path& path, const Trajectory& traj) {
  PRBNET_REQUIRE(traj.hidden.size() == traj.size() && !traj.hidden.empty(), "write_hidden_csv: no hidden states");
  const Eigen::Index n = traj.hidden.front().size();
  std::vector<std::string> header;
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("h" + std::to_string(i));
  std::ostringstream os;
  os << join(header) << '\n';
  for (const VecXd& h : traj.hidden) {
    for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << format_double(h(i));
    os << '\n';
  }
  open_out(path) << os.str();
}

void read_hidden_csv(const fs::path& path, Trajectory& traj) {
  std::ifstream is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) throw FormatError(path.string() + ": empty file");
  const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
  traj.hidden.clear();
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const std::vector<double> v = parse_row(line, path, line_no);
    if (v.size() != cols) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    traj.hidden.push_back(Eigen::Map<const VecXd>(v.data(), static_cast<Eigen::Index>(cols)));
  }
  if (traj.hidden.size() != traj.size()) throw FormatError(path.string() + ": row count differs from the trajectory");
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

void write_json(const fs::path& path, const Json& j) { open_out(path) << j.dump(2) << '\n'; }

Json read_json(const fs::path& path) {
  std::ifstream is = open_in(path);
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<LoadedTrajectory> load_trajectories(const std::vector<fs::path>& inputs, bool with_hidden) {
  std::vector<fs::path> files;
  for (const fs::path& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.path().extension() == ".csv" && fs::exists(sidecar_path(e.path()))) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw FormatError(in.string() + ": no trajectory files found");
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw FormatError(in.string() + ": no such file or directory");
    }
  }
  if (files.empty()) throw FormatError("no trajectory files given");
  std::vector<LoadedTrajectory> out;
  for (const fs::path& f : files) {
    LoadedTrajectory lt;
    lt.path = f;
    lt.traj = read_trajectory_csv(f);
    const fs::path side = sidecar_path(f);
    if (fs::exists(side)) {
      lt.has_meta = true;
      lt.meta = meta_from_json(read_json(side));
      if (with_hidden && !lt.meta.hidden.empty()) read_hidden_csv(f.parent_path() / lt.meta.hidden, lt.traj);
    }
    out.push_back(std::move(lt));
  }
  return out;
}

Json spec_to_json(const ModelSpec& s) {
  return {{"variant", to_string(s.variant)},
          {"n_el", s.n_el},
          {"length", s.length},
          {"encoder_hidden", s.encoder_hidden},
          {"dynamics_hidden", s.dynamics_hidden},
          {"decoder_hidden", s.decoder_hidden},
          {"velocity_scale", s.velocity_scale},
          {"dt", s.dt}};
}

ModelSpec spec_from_json(const Json& j) {
  return guarded("model", [&] {
    ModelSpec s;
    s.variant = variant_from_string(j.value("variant", to_string(s.variant)));
    s.n_el = j.value("n_el", s.n_el);
    s.length = j.value("length", s.length);
    s.encoder_hidden = j.value("encoder_hidden", s.encoder_hidden);
    s.dynamics_hidden = j.value("dynamics_hidden", s.dynamics_hidden);
    s.decoder_hidden = j.value("decoder_hidden", s.decoder_hidden);
    s.velocity_scale = j.value("velocity_scale", s.velocity_scale);
    s.dt = j.value("dt", s.dt);
    return s;
  });
}

void save_model(const fs::path& path, const ModelBundle& m) {
  Json extra = {{"format", "prbnet-model"},
                {"version", kModelFormatVersion},
                {"spec", spec_to_json(m.spec())},
                {"input_mean", to_vec(m.input_mean())},
                {"input_scale", to_vec(m.input_scale())}};
  if (is_physics_informed(m.variant())) extra["chain"] = chain_to_json(m.chain());
  // Write-then-rename so an interrupted save never leaves a truncated file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os = open_out(tmp);
    write_checkpoint(os, m.params(), extra.dump());
    if (!os) throw FormatError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

ModelBundle load_model(const fs::path& path) {
  std::ifstream is = open_in(path);
  ParamVector p;
  std::string extra_text;
  try {
    extra_text = read_checkpoint(is, p);
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const Json extra = guarded(path.string(), [&] { return Json::parse(extra_text); });
  if (extra.value("format", std::string()) != "prbnet-model") throw FormatError(path.string() + ": not a model checkpoint");
  if (extra.value("version", 0) != kModelFormatVersion) {
    throw FormatError(path.string() + ": unsupported model format version");
  }
  const ModelSpec spec = spec_from_json(extra.at("spec"));
  ModelBundle m(spec, std::move(p));
  const VecXd mean = guarded(path.string(), [&] { return from_vec(extra.at("input_mean")); });
  const VecXd scale = guarded(path.string(), [&] { return from_vec(extra.at("input_scale")); });
  if (mean.size() != kInputDim || scale.size() != kInputDim) throw FormatError(path.string() + ": bad normalization");
  m.set_input_normalization(mean, scale);
  return m;
}

void write_history_csv(const fs::path& path, const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss,wall_time_s\n";
  for (const EpochRecord& r : history) {
    os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
       << format_double(r.wall_time_s) << '\n';
  }
  open_out(path) << os.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace prbnet
