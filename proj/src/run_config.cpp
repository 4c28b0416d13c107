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

#include "sivsim/run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "sivsim/units.hpp"

namespace sivsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& message) {
  throw std::invalid_argument(context.empty() ? message : context + ": " + message);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) fail(context, "unknown key '" + key + "'");
  }
}

double number_or_inf(const json& v, const std::string& context) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity")
      return std::numeric_limits<double>::infinity();
    fail(context, "expected a number or \"inf\", got \"" + s + "\"");
  }
  fail(context, "expected a number");
}

json inf_aware(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

// field tables: key name, getter from params, setter into params
struct NumField {
  const char* key;
  double (*get)(const SystemParams&);
  void (*set)(SystemParams&, double);
};

const NumField kParamFields[] = {
    {"gamma_n_mhz_per_t", [](const SystemParams& p) { return p.gamma_n_mhz_per_t; },
     [](SystemParams& p, double v) { p.gamma_n_mhz_per_t = v; }},
    {"b_field_t", [](const SystemParams& p) { return p.b_field_t; },
     [](SystemParams& p, double v) { p.b_field_t = v; }},
    {"omega_l_mhz", [](const SystemParams& p) { return mhz_from_rad(p.omega_l); },
     [](SystemParams& p, double v) { p.omega_l = rad_from_mhz(v); }},
    {"a_perp_khz", [](const SystemParams& p) { return khz_from_rad(p.a_perp); },
     [](SystemParams& p, double v) { p.a_perp = rad_from_khz(v); }},
    {"a_par_khz", [](const SystemParams& p) { return khz_from_rad(p.a_par); },
     [](SystemParams& p, double v) { p.a_par = rad_from_khz(v); }},
    {"t1_electron_ms", [](const SystemParams& p) { return ms_from_sec(p.t1_electron); },
     [](SystemParams& p, double v) { p.t1_electron = sec_from_ms(v); }},
    {"t2_electron_us", [](const SystemParams& p) { return us_from_sec(p.t2_electron); },
     [](SystemParams& p, double v) { p.t2_electron = sec_from_us(v); }},
    {"t2_star_us", [](const SystemParams& p) { return us_from_sec(p.t2_star); },
     [](SystemParams& p, double v) { p.t2_star = sec_from_us(v); }},
    {"t1_rho_us", [](const SystemParams& p) { return us_from_sec(p.t1_rho); },
     [](SystemParams& p, double v) { p.t1_rho = sec_from_us(v); }},
    {"init_fidelity", [](const SystemParams& p) { return p.init_fidelity; },
     [](SystemParams& p, double v) { p.init_fidelity = v; }},
    {"reinit_nuclear_loss", [](const SystemParams& p) { return p.reinit_nuclear_loss; },
     [](SystemParams& p, double v) { p.reinit_nuclear_loss = v; }},
};

const NumField kFluorescenceFields[] = {
    {"pump_rate_per_s", [](const SystemParams& p) { return p.fluorescence.pump_rate; },
     [](SystemParams& p, double v) { p.fluorescence.pump_rate = v; }},
    {"repump_rate_per_s", [](const SystemParams& p) { return p.fluorescence.repump_rate; },
     [](SystemParams& p, double v) { p.fluorescence.repump_rate = v; }},
    {"photon_rate_per_s", [](const SystemParams& p) { return p.fluorescence.photon_rate; },
     [](SystemParams& p, double v) { p.fluorescence.photon_rate = v; }},
    {"background_per_s", [](const SystemParams& p) { return p.fluorescence.background; },
     [](SystemParams& p, double v) { p.fluorescence.background = v; }},
    {"bin_width_us", [](const SystemParams& p) { return us_from_sec(p.fluorescence.bin_width); },
     [](SystemParams& p, double v) { p.fluorescence.bin_width = sec_from_us(v); }},
};

const NumField kWindowFields[] = {
    {"duration_us", [](const SystemParams& p) { return us_from_sec(p.windows.duration); },
     [](SystemParams& p, double v) { p.windows.duration = sec_from_us(v); }},
    {"leading_us", [](const SystemParams& p) { return us_from_sec(p.windows.leading); },
     [](SystemParams& p, double v) { p.windows.leading = sec_from_us(v); }},
    {"trailing_us", [](const SystemParams& p) { return us_from_sec(p.windows.trailing); },
     [](SystemParams& p, double v) { p.windows.trailing = sec_from_us(v); }},
};

template <std::size_t N>
void apply_fields(const json& j, const NumField (&fields)[N], SystemParams& p,
                  const std::string& context, std::set<std::string>& known) {
  for (const auto& f : fields) known.insert(f.key);
  for (const auto& f : fields) {
    if (!j.contains(f.key)) continue;
    f.set(p, number_or_inf(j.at(f.key), context + "." + f.key));
  }
}

}  // namespace

nlohmann::json params_to_json(const SystemParams& p) {
  json j;
  for (const auto& f : kParamFields) j[f.key] = inf_aware(f.get(p));
  j["omega_l_derived"] = p.omega_l_derived;
  json fl;
  for (const auto& f : kFluorescenceFields) fl[f.key] = inf_aware(f.get(p));
  fl["poisson_noise"] = p.fluorescence.poisson_noise;
  j["fluorescence"] = fl;
  json w;
  for (const auto& f : kWindowFields) w[f.key] = inf_aware(f.get(p));
  j["readout_windows"] = w;
  return j;
}

SystemParams params_from_json(const nlohmann::json& j, const SystemParams& base) {
  if (!j.is_object()) fail("params", "expected an object");
  SystemParams p = base;
  std::set<std::string> known = {"omega_l_derived", "fluorescence", "readout_windows"};
  apply_fields(j, kParamFields, p, "params", known);
  reject_unknown_keys(j, known, "params");
  if (j.contains("omega_l_derived")) {
    if (!j.at("omega_l_derived").is_boolean())
      fail("params.omega_l_derived", "expected a boolean");
    p.omega_l_derived = j.at("omega_l_derived").get<bool>();
  }
  if (j.contains("fluorescence")) {
    const json& fl = j.at("fluorescence");
    if (!fl.is_object()) fail("params.fluorescence", "expected an object");
    std::set<std::string> fl_known = {"poisson_noise"};
    apply_fields(fl, kFluorescenceFields, p, "params.fluorescence", fl_known);
    reject_unknown_keys(fl, fl_known, "params.fluorescence");
    if (fl.contains("poisson_noise")) {
      if (!fl.at("poisson_noise").is_boolean())
        fail("params.fluorescence.poisson_noise", "expected a boolean");
      p.fluorescence.poisson_noise = fl.at("poisson_noise").get<bool>();
    }
  }
  if (j.contains("readout_windows")) {
    const json& w = j.at("readout_windows");
    if (!w.is_object()) fail("params.readout_windows", "expected an object");
    std::set<std::string> w_known;
    apply_fields(w, kWindowFields, p, "params.readout_windows", w_known);
    reject_unknown_keys(w, w_known, "params.readout_windows");
  }
  return p;
}

RunConfig parse_run_config(const nlohmann::json& j) {
  if (!j.is_object()) fail("config", "expected a JSON object");
  reject_unknown_keys(
      j, {"experiment", "seed", "output_dir", "workers", "params", "knobs", "sweep", "fit"},
      "config");

  if (!j.contains("experiment") || !j.at("experiment").is_string())
    fail("config", "missing required string field 'experiment'");

  RunConfig cfg;
  cfg.tmpl = template_from_name(j.at("experiment").get<std::string>());

  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer())
      fail("config.seed", "expected an integer");
    if (s.is_number_integer() && s.get<std::int64_t>() < 0)
      fail("config.seed", "seed must be non-negative");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) fail("config.output_dir", "expected a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("workers")) {
    if (!j.at("workers").is_number_integer() || j.at("workers").get<int>() < 1)
      fail("config.workers", "expected an integer >= 1");
    cfg.workers = j.at("workers").get<int>();
  }
  if (j.contains("params")) cfg.params = params_from_json(j.at("params"));
  if (j.contains("knobs")) {
    const json& k = j.at("knobs");
    if (!k.is_object()) fail("config.knobs", "expected an object");
    for (const auto& [key, value] : k.items()) {
      if (!value.is_number()) fail("config.knobs." + key, "expected a number");
      cfg.knobs[key] = value.get<double>();
    }
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (!s.is_object()) fail("config.sweep", "expected an object");
    reject_unknown_keys(s, {"knob", "values", "first", "last", "count"}, "config.sweep");
    if (s.contains("knob")) {
      if (!s.at("knob").is_string()) fail("config.sweep.knob", "expected a string");
      cfg.swept_knob = s.at("knob").get<std::string>();
    }
    const bool has_values = s.contains("values");
    const bool has_range = s.contains("first") || s.contains("last") || s.contains("count");
    if (has_values && has_range)
      fail("config.sweep", "give either 'values' or 'first'/'last'/'count', not both");
    if (has_values) {
      const json& v = s.at("values");
      if (!v.is_array() || v.empty()) fail("config.sweep.values", "expected a non-empty array");
      for (const auto& e : v) {
        if (!e.is_number()) fail("config.sweep.values", "expected numbers");
        cfg.grid.push_back(e.get<double>());
      }
    } else if (has_range) {
      if (!s.contains("first") || !s.contains("last") || !s.contains("count"))
        fail("config.sweep", "'first', 'last' and 'count' must appear together");
      if (!s.at("first").is_number() || !s.at("last").is_number() ||
          !s.at("count").is_number_integer())
        fail("config.sweep", "'first'/'last' must be numbers and 'count' an integer");
      cfg.grid = linspace(s.at("first").get<double>(), s.at("last").get<double>(),
                          s.at("count").get<int>());
    }
  }
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    if (!f.is_object()) fail("config.fit", "expected an object");
    reject_unknown_keys(f, {"model"}, "config.fit");
    if (!f.contains("model") || !f.at("model").is_string())
      fail("config.fit", "missing required string field 'model'");
    cfg.fit_model = fit_model_from_name(f.at("model").get<std::string>());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace sivsim
