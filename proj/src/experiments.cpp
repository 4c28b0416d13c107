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

#include "sivsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "sivsim/rng.hpp"

namespace sivsim {

namespace {

struct PointResult {
  double contrast = 0.0;
  double p_bright = 0.0;
  double s_z = 0.0;
  double i_z = 0.0;
  double i_z_probe = 0.0;
};

PointResult evaluate_point(const SystemParams& p, const SweepRequest& req, double x,
                           std::uint64_t point_seed) {
  Knobs knobs = req.fixed_knobs;
  knobs[req.swept_knob] = x;
  const Sequence seq = compile_template(req.tmpl, p, knobs);
  RunOptions opts;
  opts.seed = point_seed;
  const RunResult res = run(seq, p, opts);
  PointResult out;
  if (!res.records.empty()) {
    out.contrast = res.records.back().contrast;
    out.p_bright = res.records.back().p_bright;
  }
  out.s_z = res.s_z_pre_readout;
  out.i_z = res.i_z_pre_readout;
  out.i_z_probe = res.i_z_probe;
  return out;
}

}  // namespace

const std::vector<double>& SweepResult::column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c.values;
  }
  throw std::invalid_argument("sweep has no column named " + name);
}

std::vector<double> linspace(double first, double last, int count) {
  if (count < 2) throw std::invalid_argument("linspace needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] =
        first + (last - first) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

SweepResult run_sweep(const SystemParams& p, const SweepRequest& req) {
  if (req.grid.empty()) throw std::invalid_argument("sweep grid is empty");
  if (req.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (req.fixed_knobs.count(req.swept_knob))
    throw std::invalid_argument("swept knob '" + req.swept_knob + "' is also a fixed knob");
  // resolve the schema eagerly so bad knob names fail before any simulation
  const auto schema = template_knob_schema(req.tmpl);
  bool swept_known = false;
  for (const auto& s : schema) swept_known |= (s.name == req.swept_knob);
  if (!swept_known)
    throw std::invalid_argument("template " + std::string(template_name(req.tmpl)) +
                                " has no knob '" + req.swept_knob + "'");

  const std::size_t n = req.grid.size();
  std::vector<PointResult> points(n);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto work = [&](std::size_t i) {
    points[i] = evaluate_point(p, req, req.grid[i], derive_seed(req.seed, i));
  };

  const int workers = std::min<int>(req.workers, static_cast<int>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            work(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  // compile once more to resolve the fixed knob defaults and probe presence
  Knobs first = req.fixed_knobs;
  first[req.swept_knob] = req.grid.front();
  const Sequence probe_seq = compile_template(req.tmpl, p, first);
  const bool has_probe = probe_seq.i_z_probe_index >= 0;

  SweepResult out;
  out.experiment = template_name(req.tmpl);
  out.x_name = req.swept_knob;
  out.x = req.grid;
  out.seed = req.seed;
  out.knobs = resolve_template_knobs(req.tmpl, p, first);
  out.knobs.erase(req.swept_knob);  // varies per point; the grid records it
  out.primary = experiment_info(req.tmpl).primary;

  std::vector<std::pair<std::string, double PointResult::*>> fields = {
      {"contrast", &PointResult::contrast},
      {"p_bright", &PointResult::p_bright},
      {"s_z", &PointResult::s_z},
      {"i_z", &PointResult::i_z},
  };
  if (has_probe) fields.push_back({"i_z_probe", &PointResult::i_z_probe});

  // primary observable first, remaining columns in declaration order
  std::stable_sort(fields.begin(), fields.end(),
                   [&](const auto& a, const auto& b) {
                     return (a.first == out.primary) > (b.first == out.primary);
                   });
  for (const auto& [name, member] : fields) {
    SweepColumn col;
    col.name = name;
    col.values.reserve(n);
    for (const auto& pt : points) col.values.push_back(pt.*member);
    out.columns.push_back(std::move(col));
  }
  return out;
}

ExperimentInfo experiment_info(Template t) {
  ExperimentInfo info;
  info.tmpl = t;
  switch (t) {
    case Template::ElectronT1:
      info.swept_knob = "wait_us";
      info.x_unit = "us";
      info.primary = "contrast";
      info.default_fit = FitModel::ExpDecay;
      info.default_grid = linspace(0.0, 20000.0, 41);
      break;
    case Template::Odmr:
      info.swept_knob = "detuning_mhz";
      info.x_unit = "MHz";
      info.primary = "contrast";
      info.default_fit = FitModel::Gaussian;
      info.default_grid = linspace(-6.0, 6.0, 61);
      break;
    case Template::ElectronRabi:
      info.swept_knob = "mw_duration_us";
      info.x_unit = "us";
      info.primary = "contrast";
      info.default_fit = FitModel::DampedSine;
      info.default_grid = linspace(0.0, 1.0, 101);
      break;
    case Template::HahnEcho:
      info.swept_knob = "tau_us";
      info.x_unit = "us";
      info.primary = "contrast";
      info.default_fit = FitModel::ExpDecay;
      info.default_grid = linspace(0.0, 9.0, 31);
      break;
    case Template::HhSweep:
      info.swept_knob = "lock_rabi_mhz";
      info.x_unit = "MHz";
      info.primary = "s_z";
      info.default_fit = FitModel::Lorentzian;
      info.default_grid = linspace(1.0, 3.0, 41);
      break;
    case Template::SpinLock:
      info.swept_knob = "lock_us";
      info.x_unit = "us";
      info.primary = "i_z";
      info.default_fit = FitModel::DampedSine;
      info.default_grid = linspace(0.0, 20.0, 81);
      break;
    case Template::NovelBuildup:
      info.swept_knob = "n_reps";
      info.x_unit = "reps";
      info.primary = "i_z";
      info.default_fit = FitModel::ExpDecay;
      info.default_grid = linspace(1.0, 60.0, 60);
      break;
    case Template::NmrSweep:
      info.swept_knob = "rf_freq_mhz";
      info.x_unit = "MHz";
      info.primary = "i_z_probe";
      info.default_fit = FitModel::Lorentzian;
      // 5 kHz steps: the dips are only ~15-20 kHz wide (set by the RF pi-pulse
      // bandwidth), so a coarser grid cannot resolve them.
      info.default_grid = linspace(1.3, 2.7, 281);
      break;
    case Template::NuclearRabi:
      info.swept_knob = "rf_duration_us";
      info.x_unit = "us";
      info.primary = "i_z_probe";
      info.default_fit = FitModel::DampedSine;
      info.default_grid = linspace(0.0, 200.0, 81);
      break;
    case Template::NuclearEcho:
      info.swept_knob = "tau_us";
      info.x_unit = "us";
      info.primary = "i_z_probe";
      info.default_fit = FitModel::ExpDecay;
      info.default_grid = linspace(0.0, 16000.0, 33);
      break;
  }
  return info;
}

SweepResult run_default_sweep(Template t, const SystemParams& p, std::uint64_t seed, int workers,
                              const Knobs& knob_overrides) {
  const ExperimentInfo info = experiment_info(t);
  SweepRequest req;
  req.tmpl = t;
  req.swept_knob = info.swept_knob;
  req.grid = info.default_grid;
  req.fixed_knobs = knob_overrides;
  req.seed = seed;
  req.workers = workers;
  return run_sweep(p, req);
}

RunResult run_point(Template t, const SystemParams& p, const Knobs& knobs,
                    const RunOptions& opts) {
  return run(compile_template(t, p, knobs), p, opts);
}

FitResult fit_sweep(const SweepResult& result, FitModel model) {
  return fit(model, result.x, result.column(result.primary));
}

}  // namespace sivsim
