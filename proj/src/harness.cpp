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

#include "prbnet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "prbnet/errors.hpp"
#include "prbnet/io.hpp"
#include "prbnet/model.hpp"
#include "prbnet/prb_sim.hpp"
#include "prbnet/training.hpp"

namespace prbnet {

namespace {

struct Context {
  const CommandOptions& opts;
  std::string command;
  Json config;
  std::string config_text;
  std::uint64_t seed = 0;
  std::string started;
  std::vector<std::string> outputs;

  std::ostream& log() const {
    static std::ostream discard(nullptr);
    return opts.log != nullptr ? *opts.log : discard;
  }
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Context make_context(const CommandOptions& opts, std::string command) {
  Context c{opts, std::move(command), Json::object(), "{}", 0, utc_now(), {}};
  if (!opts.config.empty()) {
    c.config = read_json(opts.config);
    if (!c.config.is_object()) throw FormatError(opts.config.string() + ": config must be a JSON object");
  }
  c.config_text = c.config.dump();
  c.seed = opts.seed.value_or(c.config.value("seed", std::uint64_t{0}));
  return c;
}

/// Creates the output directory and checks that it is writable.
void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw FormatError("cannot create output directory " + out.string());
  const fs::path probe = out / ".prbnet-write-probe";
  {
    std::ofstream os(probe);
    if (!os) throw FormatError("output directory " + out.string() + " is not writable");
  }
  fs::remove(probe);
}

void write_manifest(const Context& c) {
  Json m = {{"command", c.command},
            {"config_hash", hex64(fnv1a64(c.config_text))},
            {"config", c.config},
            {"seed", c.seed},
            {"version", std::string("prbnet ") + std::string(kVersion)},
            {"outputs", c.outputs},
            {"started", c.started},
            {"finished", utc_now()}};
  write_json(c.opts.out / "manifest.json", m);
}

std::vector<fs::path> paths_from(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw FormatError("config: missing data entry '" + key + "'");
  std::vector<fs::path> out;
  if (j[key].is_string()) {
    out.emplace_back(j[key].get<std::string>());
  } else {
    for (const auto& p : j[key]) out.emplace_back(p.get<std::string>());
  }
  return out;
}

std::vector<Trajectory> trajectories_of(const std::vector<LoadedTrajectory>& loaded) {
  std::vector<Trajectory> out;
  out.reserve(loaded.size());
  for (const auto& l : loaded) out.push_back(l.traj);
  return out;
}

double common_dt(const std::vector<LoadedTrajectory>& loaded) {
  const double dt = loaded.front().traj.dt;
  for (const auto& l : loaded) {
    if (std::abs(l.traj.dt - dt) > 1e-9) throw FormatError("data files have different sample periods");
  }
  return dt;
}

MaterialParams material_of(const Json& cfg) {
  if (!cfg.contains("preset")) return material_preset("aluminum_rod");
  const Json& p = cfg["preset"];
  return p.is_string() ? material_preset(p.get<std::string>()) : material_from_json(p);
}

template <typename F>
int guarded(const CommandOptions& opts, const char* name, F&& body) {
  std::ostream& err = opts.log != nullptr ? *opts.log : std::cerr;
  try {
    return body();
  } catch (const DivergenceError& e) {
    err << name << ": numerical divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const IntegrationError& e) {
    err << name << ": integration failed: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const Json::exception& e) {
    err << name << ": invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    err << name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << name << ": unexpected error: " << e.what() << '\n';
    return kExitFailure;
  }
}

// --- gen-data --------------------------------------------------------------

int gen_data(const CommandOptions& opts) {
  Context c = make_context(opts, "gen-data");
  const Json& cfg = c.config;
  const MaterialParams mp = material_of(cfg);
  const int n_el = cfg.value("n_el", 7);
  const int count = cfg.value("count", 6);
  const double duration = cfg.value("duration", 20.0);
  const double dt = cfg.value("dt", 0.004);
  const bool gravity = cfg.value("gravity", true);
  const std::string prefix = cfg.value("prefix", std::string("traj"));
  PRBNET_REQUIRE(count >= 1, "gen-data: count must be >= 1");
  if (!(duration > 0.0 && dt > 0.0)) throw DomainError("gen-data: duration and dt must be positive");
  MultisineConfig excitation = multisine_from_json(cfg.value("excitation", Json::object()));
  excitation.duration = duration;
  const SimModel model = make_sim_model(mp, n_el, gravity);
  prepare_out(opts.out);

  for (int i = 0; i < count; ++i) {
    char stem[64];
    std::snprintf(stem, sizeof stem, "%s_%03d", prefix.c_str(), i);
    MultisineConfig ex = excitation;
    ex.seed = c.seed * 1000003ULL + static_cast<std::uint64_t>(i);
    const BaseMotion motion = multisine_excitation(ex);
    const VecXd h0 = static_equilibrium(model, motion(0.0));
    const Trajectory traj = simulate_trajectory(model, h0, motion, duration, dt);

    TrajectoryMeta meta;
    meta.csv = std::string(stem) + ".csv";
    meta.hidden = std::string(stem) + "_hidden.csv";
    meta.dt = dt;
    meta.duration = duration;
    meta.n_el = n_el;
    meta.gravity = gravity;
    meta.material = mp;
    meta.excitation = ex;
    write_trajectory_csv(opts.out / meta.csv, traj);
    write_hidden_csv(opts.out / meta.hidden, traj);
    write_json(opts.out / (std::string(stem) + ".json"), meta_to_json(meta));
    c.outputs.insert(c.outputs.end(), {meta.csv, meta.hidden, std::string(stem) + ".json"});
    c.log() << "gen-data: wrote " << meta.csv << " (" << traj.size() << " samples)\n";
  }
  write_manifest(c);
  return kExitOk;
}

// --- train -----------------------------------------------------------------

struct TrainSetup {
  ModelSpec spec;
  LossConfig loss;
  OptimizerConfig opt;
  int horizon = 100;
  int stride = 1;
  double split_fraction = 0.85;
  double beta = 0.1;
};

int train(const CommandOptions& opts) {
  Context c = make_context(opts, "train");
  const Json& cfg = c.config;
  const Json jm = cfg.value("model", Json::object());
  const Json jl = cfg.value("loss", Json::object());
  const Json jo = cfg.value("opt", Json::object());
  const Json jd = cfg.value("data", Json::object());

  // Everything that can fail on user input happens before any output exists.
  const std::vector<LoadedTrajectory> loaded = load_trajectories(paths_from(jd, "train"));
  const double dt = common_dt(loaded);

  TrainSetup s;
  s.spec = spec_from_json(jm);
  if (!jm.contains("length")) {
    s.spec.length = loaded.front().has_meta ? loaded.front().meta.material.length : s.spec.length;
  }
  s.spec.dt = dt;
  s.horizon = jd.value("N", 100);
  s.stride = jd.value("stride", 1);
  s.split_fraction = jd.value("split", 0.85);
  s.beta = jl.value("beta", 0.1);

  s.opt.learning_rate = jo.value("lr", s.opt.learning_rate);
  s.opt.final_lr_fraction = jo.value("final_lr_fraction", s.opt.final_lr_fraction);
  s.opt.epochs = jo.value("epochs", s.opt.epochs);
  s.opt.steps_per_epoch = jo.value("steps_per_epoch", s.opt.steps_per_epoch);
  s.opt.batch_size = jo.value("batch", s.opt.batch_size);
  s.opt.clip_norm = jo.value("clip", s.opt.clip_norm);
  s.opt.max_val_windows = jo.value("max_val_windows", s.opt.max_val_windows);
  s.opt.seed = c.seed;

  auto traj = std::make_shared<std::vector<Trajectory>>(trajectories_of(loaded));
  ModelBundle model(s.spec, c.seed);
  const auto [mean, scale] = input_statistics(*traj);
  model.set_input_normalization(mean, scale);

  s.loss = default_loss_config(model, s.beta);
  s.loss.alpha_q = jl.value("alpha_q", s.loss.alpha_q);
  s.loss.alpha_dq = jl.value("alpha_dq", s.loss.alpha_dq);
  s.loss.alpha_length = jl.value("alpha_length", s.loss.alpha_length);
  s.loss.alpha_el = jl.value("alpha_el", s.loss.alpha_el);
  s.loss.alpha_eb = jl.value("alpha_eb", s.loss.alpha_eb);
  const std::string w_mode = jl.value("w_k", std::string("uniform"));
  if (w_mode != "uniform") throw FormatError("loss.w_k: only \"uniform\" is supported");

  const WindowDataset all = make_windows(traj, s.horizon, s.stride);
  const SplitResult parts = split(all, s.split_fraction, c.seed);
  if (parts.degenerate) c.log() << "train: warning: degenerate train/validation split\n";

  prepare_out(opts.out);
  const FitResult fr = fit(model, parts.train, parts.val, s.loss, s.opt, [&](const EpochRecord& r) {
    c.log() << "train: epoch " << r.epoch << " train " << r.train_loss << " val " << r.val_loss << " ("
            << r.wall_time_s << " s)\n";
  });
  save_model(opts.out / "model.bin", fr.model);
  write_history_csv(opts.out / "history.csv", fr.history);
  c.outputs = {"model.bin", "history.csv"};
  write_manifest(c);
  if (fr.diverged) {
    (opts.log != nullptr ? *opts.log : std::cerr) << "train: " << fr.message << "; kept the best checkpoint so far\n";
    return kExitDivergence;
  }
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

Predictor simulator_predictor(const std::vector<LoadedTrajectory>& data) {
  for (const auto& l : data) {
    if (!l.has_meta || l.traj.hidden.empty()) {
      throw FormatError(l.path.string() + ": simulator baseline needs the sidecar and hidden-state file");
    }
  }
  return [&data](std::size_t ti, std::size_t k, int horizon) {
    const LoadedTrajectory& l = data[ti];
    const SimModel sim = make_sim_model(l.meta.material, l.meta.n_el, l.meta.gravity);
    const BaseMotion motion = multisine_excitation(l.meta.excitation);
    const double t0 = l.traj.t[k];
    const BaseMotion shifted = [&motion, t0](double t) { return motion(t0 + t); };
    const Trajectory tr = simulate_trajectory(sim, l.traj.hidden[k], shifted, horizon * l.traj.dt, l.traj.dt);
    return std::vector<Observation>(tr.y.begin() + 1, tr.y.begin() + 1 + horizon);
  };
}

int eval(const CommandOptions& opts) {
  Context c = make_context(opts, "eval");
  const Json& cfg = c.config;
  if (!cfg.contains("checkpoint") && !cfg.value("simulator", false)) {
    throw FormatError("eval: config needs a 'checkpoint' (or \"simulator\": true)");
  }
  const bool use_sim = cfg.value("simulator", false);
  const std::vector<LoadedTrajectory> loaded = load_trajectories(paths_from(cfg, "test"), use_sim);
  const double dt = common_dt(loaded);
  const int n = cfg.value("N", 100);
  PRBNET_REQUIRE(n >= 1, "eval: N must be >= 1");
  const std::vector<int> horizons = cfg.value("horizons", std::vector<int>{1, 2, 5, 10, 20});
  const std::vector<Trajectory> test = trajectories_of(loaded);

  struct Row {
    std::string name;
    Predictor predict;
  };
  std::vector<Row> rows;
  std::optional<ModelBundle> model;
  if (cfg.contains("checkpoint")) {
    model = load_model(cfg["checkpoint"].get<std::string>());
    if (model->spec().dt > 0.0 && std::abs(model->spec().dt - dt) > 1e-9) {
      throw FormatError("eval: checkpoint was trained at dt = " + std::to_string(model->spec().dt) +
                        " but the test data uses dt = " + std::to_string(dt));
    }
    const ModelBundle& m = *model;
    rows.push_back({to_string(m.variant()), [&m, &test](std::size_t ti, std::size_t k, int h) {
                      const Trajectory& tr = test[ti];
                      return rollout(m, tr.y[k], std::span<const Input>(tr.x).subspan(k, h + 1)).y;
                    }});
  }
  if (use_sim) rows.push_back({"simulator", simulator_predictor(loaded)});

  prepare_out(opts.out);
  std::ostringstream csv;
  csv << "model,horizon_multiplier,horizon_steps,position_rmse,velocity_rmse,windows,skipped\n";
  for (const Row& r : rows) {
    for (int mult : horizons) {
      PRBNET_REQUIRE(mult >= 1, "eval: horizon multipliers must be >= 1");
      const RmseResult res = evaluate_rmse(r.predict, test, mult * n);
      if (res.windows == 0) c.log() << "eval: skipped horizon " << mult << "N: test data too short\n";
      char line[256];
      std::snprintf(line, sizeof line, "%s,%d,%d,%.10g,%.10g,%zu,%zu\n", r.name.c_str(), mult, mult * n,
                    res.position, res.velocity, res.windows, res.skipped);
      csv << line;
      c.log() << "eval: " << line;
    }
  }
  std::ofstream(opts.out / "rmse.csv") << csv.str();
  c.outputs = {"rmse.csv"};
  write_manifest(c);
  return kExitOk;
}

// --- bench -----------------------------------------------------------------

template <typename F>
std::vector<double> time_runs(F&& f, int warmup, int reps) {
  for (int i = 0; i < warmup; ++i) f();
  std::vector<double> out;
  out.reserve(reps);
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    out.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int bench(const CommandOptions& opts) {
  Context c = make_context(opts, "bench");
  const Json& cfg = c.config;
  const double dt = cfg.value("dt", 0.004);
  const double horizon_s = cfg.value("horizon_s", 1.0);
  const int reps = cfg.value("repetitions", 30);
  const int warmup = cfg.value("warmup", 3);
  const std::vector<int> n_list = cfg.value("n_el", std::vector<int>{2, 5, 7, 10});
  const MaterialParams mp = material_of(cfg);
  PRBNET_REQUIRE(reps >= 1 && warmup >= 0, "bench: repetitions must be >= 1");
  if (!(dt > 0.0 && horizon_s > 0.0)) throw DomainError("bench: dt and horizon must be positive");
  const int steps = static_cast<int>(std::lround(horizon_s / dt));

  ModelBundle model = cfg.contains("checkpoint") ? load_model(cfg["checkpoint"].get<std::string>())
                                                 : ModelBundle(spec_from_json(cfg.value("model", Json::object())), c.seed);
  MultisineConfig ex = multisine_from_json(cfg.value("excitation", Json::object()));
  ex.seed = c.seed;
  const BaseMotion motion = multisine_excitation(ex);
  // Window inside the active half of the excitation.
  const double t_start = 0.25 * ex.duration;
  std::vector<Input> xs(2 * steps + 1);
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = motion(t_start + static_cast<double>(k) * dt);
  // Straight rod at the starting base pose; timing does not depend on it.
  const ChainConfigd straight = uniform_discretization(model.spec().length, model.n_el());
  Observation y0;
  y0 << fk_endpoint(straight, base_pose(xs.front()), VecXd(VecXd::Zero(2 * model.n_el()))), Vec3d::Zero();

  const auto learned = [&](int n_steps) {
    const std::span<const Input> window(xs.data(), static_cast<std::size_t>(n_steps) + 1);
    return time_runs([&] { return rollout(model, y0, window); }, warmup, reps);
  };
  const std::vector<double> t1 = learned(steps);
  const std::vector<double> t2 = learned(2 * steps);
  const double learned_median = median(t1);

  prepare_out(opts.out);
  std::ostringstream csv;
  csv << "kind,n_el,steps,median_s,min_s,repetitions,ratio_to_learned\n";
  const auto row = [&](const char* kind, int n_el, int n_steps, const std::vector<double>& t) {
    char line[256];
    std::snprintf(line, sizeof line, "%s,%d,%d,%.6e,%.6e,%zu,%.4g\n", kind, n_el, n_steps, median(t),
                  *std::min_element(t.begin(), t.end()), t.size(), median(t) / learned_median);
    csv << line;
    c.log() << "bench: " << line;
  };
  row(("learned-" + to_string(model.variant())).c_str(), model.n_el(), steps, t1);
  row(("learned-" + to_string(model.variant())).c_str(), model.n_el(), 2 * steps, t2);

  const int analytic_reps = cfg.value("analytic_repetitions", reps);
  const int analytic_warmup = cfg.value("analytic_warmup", 1);
  for (int n_el : n_list) {
    const SimModel sim = make_sim_model(mp, n_el, true);
    const BaseMotion shifted = [&motion, t_start](double t) { return motion(t_start + t); };
    const VecXd h0 = static_equilibrium(sim, shifted(0.0));
    const std::vector<double> t = time_runs([&] { return simulate_trajectory(sim, h0, shifted, horizon_s, dt); },
                                            analytic_warmup, analytic_reps);
    row("analytic-prb", n_el, steps, t);
  }
  std::ofstream(opts.out / "bench.csv") << csv.str();
  c.outputs = {"bench.csv"};
  write_manifest(c);
  return kExitOk;
}

// --- shape -----------------------------------------------------------------

int shape(const CommandOptions& opts) {
  Context c = make_context(opts, "shape");
  const Json& cfg = c.config;
  if (!cfg.contains("checkpoint")) throw FormatError("shape: config needs a 'checkpoint'");
  const ModelBundle model = load_model(cfg["checkpoint"].get<std::string>());
  if (!is_physics_informed(model.variant())) {
    throw FormatError("shape: " + to_string(model.variant()) +
                      " is a black-box model with no physically meaningful hidden state to reconstruct a shape from");
  }
  const std::vector<LoadedTrajectory> loaded = load_trajectories(paths_from(cfg, "data"));
  const Trajectory& tr = loaded.front().traj;
  const auto start = cfg.value("start", std::size_t{0});
  const int horizon = cfg.value("horizon", 100);
  PRBNET_REQUIRE(horizon >= 1, "shape: horizon must be >= 1");
  if (start + static_cast<std::size_t>(horizon) >= tr.size()) {
    throw FormatError("shape: window [start, start + horizon] exceeds the trajectory length");
  }
  const RolloutResult r = rollout(model, tr.y[start], std::span<const Input>(tr.x).subspan(start, horizon + 1));
  const ChainConfigd chain = model.chain();
  const Eigen::Index nq = 2 * model.n_el();

  prepare_out(opts.out);
  std::ostringstream csv;
  csv << "step,t,body,x,y,z\n";
  for (std::size_t j = 0; j < r.hidden.size(); ++j) {
    const std::size_t k = start + j;
    const std::vector<Vec3d> pts = body_positions(chain, base_pose(tr.x[k]), VecXd(r.hidden[j].head(nq)));
    for (std::size_t b = 0; b < pts.size(); ++b) {
      char line[192];
      std::snprintf(line, sizeof line, "%zu,%.17g,%zu,%.17g,%.17g,%.17g\n", j, tr.t[k], b, pts[b].x(), pts[b].y(),
                    pts[b].z());
      csv << line;
    }
  }
  std::ofstream(opts.out / "shape.csv") << csv.str();
  c.outputs = {"shape.csv"};
  write_manifest(c);
  return kExitOk;
}

}  // namespace

int cmd_gen_data(const CommandOptions& opts) { return guarded(opts, "gen-data", [&] { return gen_data(opts); }); }
int cmd_train(const CommandOptions& opts) { return guarded(opts, "train", [&] { return train(opts); }); }
int cmd_eval(const CommandOptions& opts) { return guarded(opts, "eval", [&] { return eval(opts); }); }
int cmd_bench(const CommandOptions& opts) { return guarded(opts, "bench", [&] { return bench(opts); }); }
int cmd_shape(const CommandOptions& opts) { return guarded(opts, "shape", [&] { return shape(opts); }); }

int run_command(std::string_view name, const CommandOptions& opts) {
  if (name == "gen-data") return cmd_gen_data(opts);
  if (name == "train") return cmd_train(opts);
  if (name == "eval") return cmd_eval(opts);
  if (name == "bench") return cmd_bench(opts);
  if (name == "shape") return cmd_shape(opts);
  (opts.log != nullptr ? *opts.log : std::cerr) << "unknown command '" << name << "'\n";
  return kExitUsage;
}

}  // namespace prbnet
