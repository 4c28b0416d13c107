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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sivsim/experiments.hpp"
#include "sivsim/pulse_program.hpp"

namespace sivsim {

// Sweep results are written as a CSV with '#' comment headers plus one plain
// header row, and a JSON metadata sidecar holding the full model parameters,
// knobs, seed and version.  Numbers are printed with round-trip precision so
// repeated runs produce byte-identical files.

void write_sweep_csv(const SweepResult& r, std::ostream& os);

// Columns read back from a sweep CSV (comment lines ignored).
struct CsvTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::filesystem::path& path);

// Writes <dir>/<basename>.csv and <dir>/<basename>.meta.json.  Refuses to
// overwrite existing files unless `force`; creates `dir` if missing.
// Returns the CSV path.
std::filesystem::path write_sweep_files(const SweepResult& r, const SystemParams& p,
                                        const std::filesystem::path& dir,
                                        const std::string& basename, bool force);

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj, std::ostream& os);

}  // namespace sivsim
