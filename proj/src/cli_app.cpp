// Copyright 2026 The sivsim Authors
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

#include "sivsim/cli_app.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sivsim/experiments.hpp"
#include "sivsim/run_config.hpp"
#include "sivsim/sweep_io.hpp"
#include "sivsim/version.hpp"

namespace sivsim {

namespace {

namespace fs = std::filesystem;

nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  j["model"] = fit_model_name(r.model);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual_norm"] = r.residual_norm;
  if (!r.message.empty()) j["message"] = r.message;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : r.params) {
    params[p.name] = {{"value", p.value}, {"stderr", p.stderr_est}};
  }
  j["params"] = params;
  if (r.model == FitModel::Lorentzian || r.model == FitModel::Gaussian)
    j["fwhm"] = fwhm(r);
  return j;
}

int do_list() {
  for (Template t : all_templates()) {
    const ExperimentInfo info = experiment_info(t);
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-14s sweeps %-16s [%g .. %g] (%zu points)  primary=%-10s fit=%s\n",
                  template_name(t), info.swept_knob.c_str(), info.default_grid.front(),
                  info.default_grid.back(), info.default_grid.size(), info.primary.c_str(),
                  fit_model_name(info.default_fit));
    std::fputs(line, stdout);
  }
  return 0;
}

SweepRequest request_from_config(const RunConfig& cfg) {
  const ExperimentInfo info = experiment_info(cfg.tmpl);
  SweepRequest req;
  req.tmpl = cfg.tmpl;
  req.swept_knob = cfg.swept_knob.empty() ? info.swept_knob : cfg.swept_knob;
  req.grid = cfg.grid.empty() ? info.default_grid : cfg.grid;
  req.fixed_knobs = cfg.knobs;
  req.seed = cfg.seed;
  req.workers = cfg.workers;
  return req;
}

int do_validate(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const SweepRequest req = request_from_config(cfg);

  // reject what run_sweep would reject
  if (req.fixed_knobs.count(req.swept_knob))
    throw std::invalid_argument("swept knob '" + req.swept_knob + "' is also a fixed knob");

  // compile the first sweep point to surface knob and sequence problems
  Knobs knobs = req.fixed_knobs;
  knobs[req.swept_knob] = req.grid.front();
  const Sequence seq = compile_template(cfg.tmpl, cfg.params, knobs);
  const auto diags = validate(seq);
  for (const auto& d : diags) {
    if (d.segment_index >= 0)
      std::fprintf(stderr, "segment %d: %s\n", d.segment_index, d.message.c_str());
    else
      std::fprintf(stderr, "%s\n", d.message.c_str());
  }
  for (const auto& note : validate_params(cfg.params))
    std::fprintf(stderr, "note: %s\n", note.c_str());
  if (!diags.empty()) return 1;

  std::printf("ok: %s, %zu points sweeping %s, %d segment(s) per shot\n",
              template_name(cfg.tmpl), req.grid.size(), req.swept_knob.c_str(),
              static_cast<int>(seq.segments.size()));
  return 0;
}

struct RunFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
  bool force = false;
  bool dump_sequence = false;
  bool trajectory = false;
};

std::string resolve_output_dir(const RunFlags& flags, const RunConfig& cfg) {
  if (!flags.out_dir.empty()) return flags.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("SIVSIM_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

int do_run(const RunFlags& flags) {
  RunConfig cfg = load_run_config(flags.config_path);
  if (flags.seed_given) cfg.seed = flags.seed;
  if (flags.workers > 0) cfg.workers = flags.workers;
  const SweepRequest req = request_from_config(cfg);
  const std::string out_dir = resolve_output_dir(flags, cfg);
  const std::string basename = template_name(cfg.tmpl);

  for (const auto& note : validate_params(cfg.params))
    std::fprintf(stderr, "note: %s\n", note.c_str());

  if (flags.dump_sequence) {
    Knobs knobs = req.fixed_knobs;
    knobs[req.swept_knob] = req.grid.front();
    std::fputs(serialize_sequence(compile_template(cfg.tmpl, cfg.params, knobs)).c_str(),
               stdout);
  }

  const SweepResult result = run_sweep(cfg.params, req);
  const fs::path csv_path =
      write_sweep_files(result, cfg.params, out_dir, basename, flags.force);
  std::printf("wrote %s (%zu points)\n", csv_path.string().c_str(), result.x.size());
  std::printf("wrote %s\n", (fs::path(out_dir) / (basename + ".meta.json")).string().c_str());

  if (cfg.fit_model) {
    const FitResult fr = fit_sweep(result, *cfg.fit_model);
    const nlohmann::json j = fit_result_to_json(fr);
    const fs::path fit_path = fs::path(out_dir) / (basename + ".fit.json");
    if (!flags.force && fs::exists(fit_path))
      throw std::runtime_error("refusing to overwrite " + fit_path.string() +
                               " (use --force to replace)");
    std::ofstream f(fit_path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + fit_path.string());
    f << j.dump(2) << "\n";
    std::printf("wrote %s\n", fit_path.string().c_str());
    std::printf("%s\n", j.dump().c_str());
  }

  if (flags.trajectory) {
    Knobs knobs = req.fixed_knobs;
    knobs[req.swept_knob] = req.grid.front();
    RunOptions opts;
    opts.seed = cfg.seed;
    opts.record_trajectory = true;
    const RunResult point = run_point(cfg.tmpl, cfg.params, knobs, opts);
    const fs::path traj_path = fs::path(out_dir) / (basename + ".traj.csv");
    if (!flags.force && fs::exists(traj_path))
      throw std::runtime_error("refusing to overwrite " + traj_path.string() +
                               " (use --force to replace)");
    std::ofstream f(traj_path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + traj_path.string());
    write_trajectory_csv(point.trajectory, f);
    std::printf("wrote %s (%zu samples)\n", traj_path.string().c_str(),
                point.trajectory.size());
  }
  return 0;
}

int do_fit(const std::string& csv_path, const std::string& model_name, std::string x_name,
           std::string y_name) {
  const CsvTable table = read_csv_file(csv_path);
  if (table.names.size() < 2)
    throw std::invalid_argument("csv needs at least two columns to fit");
  if (x_name.empty()) x_name = table.names[0];
  if (y_name.empty()) y_name = table.names[1];
  const FitResult r =
      fit(fit_model_from_name(model_name), table.column(x_name), table.column(y_name));
  nlohmann::json j = fit_result_to_json(r);
  j["x"] = x_name;
  j["y"] = y_name;
  std::printf("%s\n", j.dump(2).c_str());
  return r.converged ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"simulator for a driven electron-nuclear spin pair"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  app.add_subcommand("list", "list experiments and their defaults");

  std::string validate_config;
  auto* validate_cmd =
      app.add_subcommand("validate", "check a run config without writing anything");
  validate_cmd->add_option("config", validate_config, "JSON run config")->required();

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "run a sweep and write its outputs");
  run_cmd->add_option("config", run_flags.config_path, "JSON run config")->required();
  run_cmd->add_option("--out", run_flags.out_dir,
                      "output directory (default: config, then $SIVSIM_OUTPUT_DIR, then .)");
  auto* seed_opt = run_cmd->add_option("--seed", run_flags.seed, "override the config seed");
  run_cmd->add_option("--workers", run_flags.workers, "worker threads for sweep points");
  run_cmd->add_flag("--force", run_flags.force, "overwrite existing output files");
  run_cmd->add_flag("--dump-sequence", run_flags.dump_sequence,
                    "print the compiled pulse sequence of the first point");
  run_cmd->add_flag("--trajectory", run_flags.trajectory,
                    "also write the state trajectory of the first point");

  std::string fit_csv;
  std::string fit_model_opt;
  std::string fit_x, fit_y;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to two CSV columns");
  fit_cmd->add_option("csv", fit_csv, "CSV file (as written by `run`)")->required();
  fit_cmd->add_option("model", fit_model_opt,
                      "exp_decay | damped_sine | lorentzian | gaussian | line")
      ->required();
  fit_cmd->add_option("--x", fit_x, "x column (default: first)");
  fit_cmd->add_option("--y", fit_y, "y column (default: second)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // app.exit prints the message/help; fold CLI11's exit codes into the
    // documented contract (0 for --help/--version, 2 for usage errors).
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("list")) return do_list();
    if (app.got_subcommand("validate")) return do_validate(validate_config);
    if (app.got_subcommand("run")) {
      run_flags.seed_given = seed_opt->count() > 0;
      return do_run(run_flags);
    }
    if (app.got_subcommand("fit")) return do_fit(fit_csv, fit_model_opt, fit_x, fit_y);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "error: no subcommand\n");
  return 2;
}

}  // namespace sivsim
