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

#include "sivsim/sweep_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sivsim/run_config.hpp"
#include "sivsim/units.hpp"
#include "sivsim/version.hpp"

namespace sivsim {

namespace {

// shortest representation that round-trips a double exactly
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double parsed = 0.0;
  std::sscanf(buf, "%lf", &parsed);
  if (parsed == v) {
    // try to shorten: %.17g is often longer than needed
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &parsed);
      if (parsed == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

void write_sweep_csv(const SweepResult& r, std::ostream& os) {
  os << "# experiment: " << r.experiment << "\n";
  os << "# version: " << kVersion << "\n";
  os << "# seed: " << r.seed << "\n";
  os << "# primary: " << r.primary << "\n";
  for (const auto& [name, value] : r.knobs)
    os << "# knob " << name << " = " << format_double(value) << "\n";
  os << r.x_name;
  for (const auto& col : r.columns) os << "," << col.name;
  os << "\n";
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    os << format_double(r.x[i]);
    for (const auto& col : r.columns) {
      if (col.values.size() != r.x.size())
        throw std::logic_error("sweep column size mismatch");
      os << "," << format_double(col.values[i]);
    }
    os << "\n";
  }
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw std::invalid_argument("csv has no column named " + name);
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      t.names = cells;
      t.columns.assign(cells.size(), {});
      header_seen = true;
      continue;
    }
    if (cells.size() != t.names.size())
      throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                  " has a different number of cells than the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cells[i], &pos);
        if (pos != cells[i].size()) throw std::invalid_argument("trailing characters");
        t.columns[i].push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                    ": cannot parse '" + cells[i] + "' as a number");
      }
    }
  }
  if (!header_seen) throw std::invalid_argument("csv has no header row");
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path.string());
  return read_csv(in);
}

std::filesystem::path write_sweep_files(const SweepResult& r, const SystemParams& p,
                                        const std::filesystem::path& dir,
                                        const std::string& basename, bool force) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path csv_path = dir / (basename + ".csv");
  const fs::path meta_path = dir / (basename + ".meta.json");
  if (!force) {
    if (fs::exists(csv_path))
      throw std::runtime_error("refusing to overwrite " + csv_path.string() +
                               " (use --force to replace)");
    if (fs::exists(meta_path))
      throw std::runtime_error("refusing to overwrite " + meta_path.string() +
                               " (use --force to replace)");
  }

  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  write_sweep_csv(r, csv);
  csv.close();
  if (!csv) throw std::runtime_error("write failed for " + csv_path.string());

  nlohmann::json meta;
  meta["experiment"] = r.experiment;
  meta["version"] = kVersion;
  meta["seed"] = r.seed;
  meta["x_name"] = r.x_name;
  meta["primary"] = r.primary;
  nlohmann::json knobs = nlohmann::json::object();
  for (const auto& [name, value] : r.knobs) knobs[name] = value;
  meta["knobs"] = knobs;
  meta["params"] = params_to_json(p);
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : r.columns) cols.push_back(c.name);
  meta["columns"] = cols;

  std::ofstream mf(meta_path, std::ios::trunc);
  if (!mf) throw std::runtime_error("cannot write " + meta_path.string());
  mf << meta.dump(2) << "\n";
  mf.close();
  if (!mf) throw std::runtime_error("write failed for " + meta_path.string());
  return csv_path;
}

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj, std::ostream& os) {
  os << "# trajectory samples (segment boundaries and lock sub-steps)\n";
  os << "time_us,s_z,i_z,s_lock\n";
  for (const auto& pt : traj) {
    os << format_double(us_from_sec(pt.time)) << "," << format_double(pt.s_z) << ","
       << format_double(pt.i_z) << "," << format_double(pt.s_lock) << "\n";
  }
}

}  // namespace sivsim
