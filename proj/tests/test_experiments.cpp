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

#include <doctest.h>

#include <cmath>

#include "sivsim/experiments.hpp"
#include "sivsim/units.hpp"

using namespace sivsim;

TEST_CASE("linspace covers both endpoints evenly") {
  auto g = linspace(1.0, 3.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == 3.0);
  CHECK(g[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(linspace(0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("sweep results are identical across worker counts") {
  SystemParams p;
  SweepRequest req;
  req.tmpl = Template::Odmr;  // shots > 1: exercises the noise streams
  req.swept_knob = "detuning_mhz";
  req.grid = linspace(-2.0, 2.0, 7);
  req.fixed_knobs = {{"shots", 16.0}};
  req.seed = 11;
  req.workers = 1;
  SweepResult serial = run_sweep(p, req);
  req.workers = 4;
  SweepResult parallel = run_sweep(p, req);
  REQUIRE(serial.columns.size() == parallel.columns.size());
  for (std::size_t c = 0; c < serial.columns.size(); ++c) {
    REQUIRE(serial.columns[c].values.size() == parallel.columns[c].values.size());
    for (std::size_t i = 0; i < serial.columns[c].values.size(); ++i)
      CHECK(serial.columns[c].values[i] == parallel.columns[c].values[i]);
  }
}

TEST_CASE("sweep points derive independent noise from the master seed") {
  SystemParams p;
  SweepRequest req;
  req.tmpl = Template::HahnEcho;
  req.swept_knob = "tau_us";
  req.grid = {1.0, 2.0};
  req.fixed_knobs = {{"shots", 8.0}};
  req.seed = 5;
  SweepResult a = run_sweep(p, req);
  SweepResult b = run_sweep(p, req);
  CHECK(a.primary == "contrast");
  CHECK(a.column("contrast") == b.column("contrast"));  // reproducible
  req.seed = 6;
  SweepResult c = run_sweep(p, req);
  CHECK(a.column("contrast") != c.column("contrast"));  // seed-sensitive
}

TEST_CASE("run_sweep validates its request") {
  SystemParams p;
  SweepRequest req;
  req.tmpl = Template::Odmr;
  req.swept_knob = "detuning_mhz";
  req.grid = {};
  CHECK_THROWS_AS(run_sweep(p, req), std::invalid_argument);  // empty grid
  req.grid = {0.0};
  req.workers = 0;
  CHECK_THROWS_AS(run_sweep(p, req), std::invalid_argument);  // no workers
  req.workers = 1;
  req.fixed_knobs = {{"detuning_mhz", 1.0}};
  CHECK_THROWS_AS(run_sweep(p, req), std::invalid_argument);  // swept knob fixed
  req.fixed_knobs = {};
  req.swept_knob = "no_such_knob";
  CHECK_THROWS_AS(run_sweep(p, req), std::invalid_argument);  // unknown knob
}

TEST_CASE("every registry default compiles at both grid ends") {
  SystemParams p;
  for (Template t : all_templates()) {
    ExperimentInfo info = experiment_info(t);
    CHECK(info.tmpl == t);
    CHECK(!info.swept_knob.empty());
    CHECK(!info.primary.empty());
    REQUIRE(info.default_grid.size() >= 2);
    for (double v : {info.default_grid.front(), info.default_grid.back()}) {
      Knobs k{{info.swept_knob, v}};
      CHECK_NOTHROW(compile_template(t, p, k));
    }
  }
}

TEST_CASE("columns are tabulated with the primary observable first") {
  SystemParams p;
  SweepResult r = run_default_sweep(Template::NmrSweep, p, 0, 2,
                                    {{"polarize_reps", 2.0}});
  CHECK(r.experiment == "nmr_sweep");
  CHECK(r.x_name == "rf_freq_mhz");
  CHECK(r.primary == "i_z_probe");
  REQUIRE(!r.columns.empty());
  CHECK(r.columns[0].name == "i_z_probe");
  CHECK_NOTHROW(r.column("contrast"));
  CHECK_NOTHROW(r.column("p_bright"));
  CHECK_NOTHROW(r.column("s_z"));
  CHECK_NOTHROW(r.column("i_z"));
  CHECK_THROWS_AS(r.column("nonexistent"), std::invalid_argument);
  CHECK(r.x.size() == r.columns[0].values.size());
}

TEST_CASE("electron-only sweeps do not report a nuclear probe column") {
  SystemParams p;
  SweepRequest req;
  req.tmpl = Template::ElectronRabi;
  req.swept_knob = "mw_duration_us";
  req.grid = {0.05};
  req.fixed_knobs = {{"shots", 1.0}};
  SweepResult r = run_sweep(p, req);
  CHECK_THROWS_AS(r.column("i_z_probe"), std::invalid_argument);
}

TEST_CASE("knob overrides reach the compiled sequences") {
  SystemParams p;
  // halving the drive amplitude halves the fitted Rabi frequency
  SweepRequest req;
  req.tmpl = Template::ElectronRabi;
  req.swept_knob = "mw_duration_us";
  req.grid = linspace(0.0, 0.4, 81);
  req.fixed_knobs = {{"rabi_mhz", 5.0}, {"shots", 1.0}};
  SweepResult r = run_sweep(p, req);
  FitResult f = fit_sweep(r, FitModel::DampedSine);
  REQUIRE(f.converged);
  CHECK(f.value("frequency") == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("fit_sweep recovers the longitudinal relaxation time") {
  SystemParams p;
  SweepRequest req;
  req.tmpl = Template::ElectronT1;
  req.swept_knob = "wait_us";
  req.grid = linspace(0.0, 20000.0, 9);
  SweepResult r = run_sweep(p, req);
  FitResult f = fit_sweep(r, FitModel::ExpDecay);
  REQUIRE(f.converged);
  CHECK(f.value("decay_time") == doctest::Approx(5800.0).epsilon(0.01));
}

TEST_CASE("run_point returns the trajectory when asked") {
  SystemParams p;
  RunOptions opts;
  opts.record_trajectory = true;
  RunResult r = run_point(Template::SpinLock, p, {{"lock_us", 2.0}}, opts);
  CHECK(!r.trajectory.empty());
  CHECK(std::isfinite(r.s_z_pre_readout));
  REQUIRE(!r.records.empty());
  CHECK(r.records.back().contrast > 0.0);
}

TEST_CASE("default sweeps carry their resolved knobs in the result") {
  SystemParams p;
  SweepResult r = run_default_sweep(Template::HhSweep, p, 0, 2);
  CHECK(r.knobs.count("lock_us") == 1);
  CHECK(r.knobs.at("lock_us") == doctest::Approx(20.0));
  CHECK(r.seed == 0);
}
