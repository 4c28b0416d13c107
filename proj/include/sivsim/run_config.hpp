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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sivsim/experiments.hpp"

namespace sivsim {

// Run description loaded from a JSON file.  All fields except `experiment`
// are optional; omitted model parameters keep their defaults, an omitted
// sweep section uses the experiment's default grid.  Unknown keys are
// rejected (first offender named) so typos cannot silently configure
// nothing.
struct RunConfig {
  Template tmpl = Template::Odmr;
  std::uint64_t seed = 0;
  std::string output_dir;  // empty: resolved by the CLI
  int workers = 1;
  SystemParams params;
  Knobs knobs;
  std::string swept_knob;    // empty: registry default
  std::vector<double> grid;  // empty: registry default
  std::optional<FitModel> fit_model;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// SystemParams <-> JSON with unit-suffixed keys (times in us/ms, frequencies
// in MHz/kHz, rates in 1/s).  Infinite times serialize as the string "inf".
nlohmann::json params_to_json(const SystemParams& p);
// Applies the keys present in `j` on top of `base`; rejects unknown keys.
SystemParams params_from_json(const nlohmann::json& j, const SystemParams& base = {});

}  // namespace sivsim
