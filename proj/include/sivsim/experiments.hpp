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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sivsim/fitting.hpp"
#include "sivsim/pulse_program.hpp"

namespace sivsim {

// A sweep runs one protocol template across a grid of one knob and tabulates
// the observables of every point.  Points are statistically independent:
// each derives its own noise stream from (seed, point index), so results are
// identical whether points run serially or on worker threads.

struct SweepColumn {
  std::string name;
  std::vector<double> values;
};

struct SweepResult {
  std::string experiment;  // template name
  std::string x_name;      // swept knob
  std::vector<double> x;
  std::vector<SweepColumn> columns;  // primary observable first
  std::string primary;
  std::uint64_t seed = 0;
  Knobs knobs;  // fixed knobs the sweep ran with (resolved defaults included)

  const std::vector<double>& column(const std::string& name) const;
};

struct SweepRequest {
  Template tmpl = Template::Odmr;
  std::string swept_knob;
  std::vector<double> grid;
  Knobs fixed_knobs;
  std::uint64_t seed = 0;
  int workers = 1;
};

SweepResult run_sweep(const SystemParams& p, const SweepRequest& req);

// Default sweep configuration per experiment: the swept knob, its grid, the
// primary observable, and the line shape the result is normally fitted with.
struct ExperimentInfo {
  Template tmpl = Template::Odmr;
  std::string swept_knob;
  std::string x_unit;   // unit carried by the knob name ("us", "MHz", ...)
  std::string primary;  // primary observable column
  FitModel default_fit = FitModel::Line;
  std::vector<double> default_grid;
};

ExperimentInfo experiment_info(Template t);

// run_sweep with the registry defaults (fixed knobs may still be overridden)
SweepResult run_default_sweep(Template t, const SystemParams& p, std::uint64_t seed = 0,
                              int workers = 1, const Knobs& knob_overrides = {});

// Single sequence execution for trajectory export and inspection.
RunResult run_point(Template t, const SystemParams& p, const Knobs& knobs,
                    const RunOptions& opts = {});

// Fits the primary observable of a sweep.
FitResult fit_sweep(const SweepResult& result, FitModel model);

// Evenly spaced grid helper, inclusive of both endpoints.
std::vector<double> linspace(double first, double last, int count);

}  // namespace sivsim
