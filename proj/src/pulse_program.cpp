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

#include "sivsim/pulse_program.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "sivsim/operator_core.hpp"
#include "sivsim/readout_model.hpp"
#include "sivsim/rng.hpp"
#include "sivsim/units.hpp"

namespace sivsim {

namespace {

// ---------------------------------------------------------------------------
// knob resolution
// ---------------------------------------------------------------------------

class ResolvedKnobs {
 public:
  ResolvedKnobs(Template t, const Knobs& user) : template_(t) {
    const auto schema = template_knob_schema(t);
    for (const auto& [name, value] : user) {
      const auto it = std::find_if(schema.begin(), schema.end(),
                                   [&](const KnobSpec& s) { return s.name == name; });
      if (it == schema.end())
        throw std::invalid_argument("unknown knob '" + name + "' for template " +
                                    template_name(t));
      if (!std::isfinite(value))
        throw std::invalid_argument("knob '" + name + "' must be finite");
      values_[name] = value;
    }
    for (const auto& s : schema) {
      if (values_.count(s.name)) continue;
      if (s.required)
        throw std::invalid_argument("missing required knob '" + s.name + "' for template " +
                                    std::string(template_name(t)));
      values_[s.name] = s.default_value;
    }
  }

  double get(const std::string& name) const { return values_.at(name); }

  double positive(const std::string& name) const {
    const double v = get(name);
    if (!(v > 0.0))
      throw std::invalid_argument("knob '" + name + "' must be positive for template " +
                                  template_name(template_));
    return v;
  }

  double non_negative(const std::string& name) const {
    const double v = get(name);
    if (!(v >= 0.0))
      throw std::invalid_argument("knob '" + name + "' must be non-negative for template " +
                                  template_name(template_));
    return v;
  }

  int integer(const std::string& name, int min_value) const {
    const double v = get(name);
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < min_value)
      throw std::invalid_argument("knob '" + name + "' must be an integer >= " +
                                  std::to_string(min_value));
    return static_cast<int>(r);
  }

  bool flag(const std::string& name) const {
    const double v = get(name);
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument("knob '" + name + "' must be 0 or 1");
    return v == 1.0;
  }

  bool provided_finite(const std::string& name) const { return std::isfinite(get(name)); }

  const std::map<std::string, double>& all() const { return values_; }

 private:
  Template template_;
  std::map<std::string, double> values_;
};

// cross-check an explicitly supplied pulse duration against the one implied
// by the drive amplitude
void check_pi_duration(const ResolvedKnobs& k, const std::string& knob, double implied_us) {
  if (!k.provided_finite(knob)) return;
  const double given = k.positive(knob);
  if (std::abs(given - implied_us) > 1e-6 * implied_us) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "knob '%s' = %.6g us is inconsistent with the drive amplitude "
                  "(implied pi time %.6g us)",
                  knob.c_str(), given, implied_us);
    throw std::invalid_argument(msg);
  }
}

// ---------------------------------------------------------------------------
// segment builders
// ---------------------------------------------------------------------------

Segment make_init() {
  Segment s;
  s.kind = SegmentKind::LaserInit;
  s.label = "init";
  return s;
}

Segment make_mw(double angle, double phase, double rabi_mhz, const std::string& label) {
  Segment s;
  s.kind = SegmentKind::MwPulse;
  s.drive.kind = DriveKind::Microwave;
  s.drive.rabi = rad_from_mhz(rabi_mhz);
  s.drive.phase = phase;
  s.drive.detuning = 0.0;
  s.duration = angle / s.drive.rabi;
  s.role = PulseRole::Rotation;
  s.label = label;
  return s;
}

Segment make_lock(double duration, double rabi_mhz, double phase) {
  Segment s;
  s.kind = SegmentKind::MwPulse;
  s.drive.kind = DriveKind::Microwave;
  s.drive.rabi = rad_from_mhz(rabi_mhz);
  s.drive.phase = phase;
  s.duration = duration;
  s.role = PulseRole::Lock;
  s.label = "lock";
  return s;
}

Segment make_rf(double angle, double phase, double rabi_khz, double detuning,
                const std::string& label) {
  Segment s;
  s.kind = SegmentKind::RfPulse;
  s.drive.kind = DriveKind::Radiofrequency;
  s.drive.rabi = rad_from_khz(rabi_khz);
  s.drive.phase = phase;
  s.drive.detuning = detuning;
  s.duration = angle / s.drive.rabi;
  s.label = label;
  return s;
}

Segment make_wait(double duration, WaitFrame frame, double rf_detuning = 0.0) {
  Segment s;
  s.kind = SegmentKind::Wait;
  s.duration = duration;
  s.frame = frame;
  s.rf_frame_detuning = rf_detuning;
  s.label = "wait";
  return s;
}

Segment make_readout(const SystemParams& p) {
  Segment s;
  s.kind = SegmentKind::Readout;
  s.duration = p.windows.duration;
  s.label = "readout";
  return s;
}

// pi/2 (axis -x), lock along +y, pi/2 (axis +x): maps the surviving locked
// component back to |up> and the Hartmann-Hahn-transferred part to |dn>
void append_transfer_block(std::vector<Segment>& out, double lock_duration, double lock_rabi_mhz,
                           double pulse_rabi_mhz) {
  out.push_back(make_mw(kPi / 2.0, kPi, pulse_rabi_mhz, "pi/2"));
  if (lock_duration > 0.0) out.push_back(make_lock(lock_duration, lock_rabi_mhz, kPi / 2.0));
  out.push_back(make_mw(kPi / 2.0, 0.0, pulse_rabi_mhz, "pi/2"));
}

void append_polarize_block(std::vector<Segment>& out, int reps, double lock_duration,
                           double lock_rabi_mhz, double pulse_rabi_mhz) {
  for (int i = 0; i < reps; ++i) {
    out.push_back(make_init());
    append_transfer_block(out, lock_duration, lock_rabi_mhz, pulse_rabi_mhz);
  }
}

double resolve_lock_rabi_mhz(const ResolvedKnobs& k, const SystemParams& p) {
  // default (knob left unset): resonant with the nuclear Larmor frequency,
  // i.e. the Hartmann-Hahn matching point
  if (k.provided_finite("lock_rabi_mhz")) return k.positive("lock_rabi_mhz");
  return mhz_from_rad(p.effective_omega_l());
}

double resolve_rf_freq_mhz(const ResolvedKnobs& k, const SystemParams& p) {
  // default: the |up>-manifold nuclear resonance omega_l + a_par/2
  if (k.provided_finite("rf_freq_mhz")) return k.positive("rf_freq_mhz");
  return mhz_from_rad(p.effective_omega_l() + p.a_par / 2.0);
}

// ---------------------------------------------------------------------------
// template schemas
// ---------------------------------------------------------------------------

const double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<KnobSpec> schema_for(Template t) {
  const KnobSpec pulse_rabi{"pulse_rabi_mhz", false, 10.0, "Rabi frequency of rotation pulses"};
  const KnobSpec lock_rabi{"lock_rabi_mhz", false, kNan,
                           "lock Rabi frequency (default: nuclear Larmor, i.e. matched)"};
  const KnobSpec rf_rabi{"rf_rabi_khz", false, 10.1, "RF Rabi frequency"};
  const KnobSpec rf_freq{"rf_freq_mhz", false, kNan,
                         "RF frequency (default: the electron-up nuclear resonance)"};
  const KnobSpec reps{"polarize_reps", false, 20.0, "polarization transfer repetitions"};
  const auto shots = [](double n) {
    return KnobSpec{"shots", false, n, "quasi-static noise samples to average"};
  };
  switch (t) {
    case Template::ElectronT1:
      return {{"wait_us", true, kNan, "relaxation time between inversion and readout"},
              pulse_rabi,
              shots(1)};
    case Template::Odmr:
      return {{"detuning_mhz", true, kNan, "probe detuning from the electron resonance"},
              {"probe_rabi_mhz", false, 0.1, "weak probe Rabi frequency"},
              shots(200)};
    case Template::ElectronRabi:
      return {{"mw_duration_us", true, kNan, "resonant drive duration"},
              {"rabi_mhz", false, 10.0, "drive Rabi frequency"},
              shots(200)};
    case Template::HahnEcho:
      return {{"tau_us", true, kNan, "free evolution time of each echo half"},
              pulse_rabi,
              {"pi_duration_us", false, kNan, "optional cross-check of the pi time"},
              shots(200)};
    case Template::HhSweep:
      return {{"lock_rabi_mhz", true, kNan, "lock Rabi frequency (swept across matching)"},
              {"lock_us", false, 20.0, "lock duration"},
              pulse_rabi,
              shots(1)};
    case Template::SpinLock:
      return {{"lock_us", true, kNan, "lock duration"}, lock_rabi, pulse_rabi, shots(1)};
    case Template::NovelBuildup:
      return {{"n_reps", true, kNan, "number of polarization transfer repetitions"},
              {"lock_us", false, 4.0, "lock duration per repetition"},
              lock_rabi,
              pulse_rabi,
              {"alternate_reversal", false, 0.0, "average with the phase-reversed variant"},
              shots(1)};
    case Template::NmrSweep:
      return {{"rf_freq_mhz", true, kNan, "RF pulse frequency"},
              rf_rabi,
              reps,
              {"lock_us", false, 4.0, "lock duration per transfer"},
              lock_rabi,
              pulse_rabi,
              {"electron_down", false, 0.0, "flip the electron before the RF pulse"},
              {"rf_pi_duration_us", false, kNan, "optional cross-check of the RF pi time"},
              shots(1)};
    case Template::NuclearRabi:
      return {{"rf_duration_us", true, kNan, "RF drive duration"},
              rf_freq,
              rf_rabi,
              reps,
              {"lock_us", false, 4.0, "lock duration per transfer"},
              lock_rabi,
              pulse_rabi,
              shots(1)};
    case Template::NuclearEcho:
      return {{"tau_us", true, kNan, "free evolution time of each echo half"},
              rf_freq,
              rf_rabi,
              reps,
              {"lock_us", false, 4.0, "lock duration per transfer"},
              lock_rabi,
              pulse_rabi,
              shots(1)};
  }
  throw std::logic_error("unknown template");
}

}  // namespace

// ---------------------------------------------------------------------------
// template registry
// ---------------------------------------------------------------------------

const char* template_name(Template t) {
  switch (t) {
    case Template::ElectronT1:
      return "electron_t1";
    case Template::Odmr:
      return "odmr";
    case Template::ElectronRabi:
      return "electron_rabi";
    case Template::HahnEcho:
      return "hahn_echo";
    case Template::HhSweep:
      return "hh_sweep";
    case Template::SpinLock:
      return "spin_lock";
    case Template::NovelBuildup:
      return "novel_buildup";
    case Template::NmrSweep:
      return "nmr_sweep";
    case Template::NuclearRabi:
      return "nuclear_rabi";
    case Template::NuclearEcho:
      return "nuclear_echo";
  }
  throw std::logic_error("unknown template");
}

Template template_from_name(const std::string& name) {
  for (Template t : all_templates()) {
    if (name == template_name(t)) return t;
  }
  throw std::invalid_argument("unknown template name: " + name);
}

std::vector<Template> all_templates() {
  return {Template::ElectronT1, Template::Odmr,         Template::ElectronRabi,
          Template::HahnEcho,   Template::HhSweep,      Template::SpinLock,
          Template::NovelBuildup, Template::NmrSweep,   Template::NuclearRabi,
          Template::NuclearEcho};
}

std::vector<KnobSpec> template_knob_schema(Template t) { return schema_for(t); }

// ---------------------------------------------------------------------------
// compilation
// ---------------------------------------------------------------------------

Sequence compile_template(Template t, const SystemParams& p, const Knobs& knobs) {
  const ResolvedKnobs k(t, knobs);
  Sequence seq;
  seq.name = template_name(t);
  seq.shots = k.integer("shots", 1);
  auto& s = seq.segments;

  switch (t) {
    case Template::ElectronT1: {
      const double rabi = k.positive("pulse_rabi_mhz");
      s.push_back(make_init());
      s.push_back(make_mw(kPi, 0.0, rabi, "pi"));
      const double wait = sec_from_us(k.non_negative("wait_us"));
      if (wait > 0.0) s.push_back(make_wait(wait, WaitFrame::Electron));
      s.push_back(make_readout(p));
      break;
    }
    case Template::Odmr: {
      const double rabi = k.positive("probe_rabi_mhz");
      s.push_back(make_init());
      Segment probe = make_mw(kPi, 0.0, rabi, "probe");
      probe.drive.detuning = rad_from_mhz(k.get("detuning_mhz"));
      s.push_back(probe);
      s.push_back(make_readout(p));
      break;
    }
    case Template::ElectronRabi: {
      const double rabi = k.positive("rabi_mhz");
      s.push_back(make_init());
      Segment drive = make_mw(kPi, 0.0, rabi, "drive");
      drive.duration = sec_from_us(k.non_negative("mw_duration_us"));
      if (drive.duration > 0.0) s.push_back(drive);
      s.push_back(make_readout(p));
      break;
    }
    case Template::HahnEcho: {
      const double rabi = k.positive("pulse_rabi_mhz");
      check_pi_duration(k, "pi_duration_us", us_from_sec(kPi / rad_from_mhz(rabi)));
      const double tau = sec_from_us(k.non_negative("tau_us"));
      s.push_back(make_init());
      s.push_back(make_mw(kPi / 2.0, 0.0, rabi, "pi/2"));
      if (tau > 0.0) s.push_back(make_wait(tau, WaitFrame::Electron));
      s.push_back(make_mw(kPi, 0.0, rabi, "pi"));
      if (tau > 0.0) s.push_back(make_wait(tau, WaitFrame::Electron));
      s.push_back(make_mw(kPi / 2.0, kPi, rabi, "pi/2"));
      s.push_back(make_readout(p));
      break;
    }
    case Template::HhSweep: {
      const double pulse = k.positive("pulse_rabi_mhz");
      s.push_back(make_init());
      append_transfer_block(s, sec_from_us(k.positive("lock_us")), k.positive("lock_rabi_mhz"),
                            pulse);
      s.push_back(make_readout(p));
      seq.alternate_reversal = true;
      break;
    }
    case Template::SpinLock: {
      const double pulse = k.positive("pulse_rabi_mhz");
      s.push_back(make_init());
      append_transfer_block(s, sec_from_us(k.non_negative("lock_us")),
                            resolve_lock_rabi_mhz(k, p), pulse);
      s.push_back(make_readout(p));
      break;
    }
    case Template::NovelBuildup: {
      const double pulse = k.positive("pulse_rabi_mhz");
      const int reps = k.integer("n_reps", 1);
      append_polarize_block(s, reps, sec_from_us(k.positive("lock_us")),
                            resolve_lock_rabi_mhz(k, p), pulse);
      seq.i_z_probe_index = static_cast<int>(s.size());
      s.push_back(make_readout(p));
      seq.alternate_reversal = k.flag("alternate_reversal");
      break;
    }
    case Template::NmrSweep:
    case Template::NuclearRabi: {
      const double pulse = k.positive("pulse_rabi_mhz");
      const double lock = sec_from_us(k.positive("lock_us"));
      const double lock_rabi = resolve_lock_rabi_mhz(k, p);
      const double rf_rabi = k.positive("rf_rabi_khz");
      const double rf_freq = (t == Template::NmrSweep) ? k.positive("rf_freq_mhz")
                                                       : resolve_rf_freq_mhz(k, p);
      const double rf_detuning = p.effective_omega_l() - rad_from_mhz(rf_freq);
      append_polarize_block(s, k.integer("polarize_reps", 1), lock, lock_rabi, pulse);
      s.push_back(make_init());
      if (t == Template::NmrSweep && k.flag("electron_down"))
        s.push_back(make_mw(kPi, 0.0, pulse, "pi"));
      Segment rf = make_rf(kPi, 0.0, rf_rabi, rf_detuning, "rf");
      if (t == Template::NmrSweep) {
        check_pi_duration(k, "rf_pi_duration_us", us_from_sec(kPi / rad_from_khz(rf_rabi)));
      } else {
        rf.duration = sec_from_us(k.non_negative("rf_duration_us"));
      }
      if (rf.duration > 0.0) s.push_back(rf);
      seq.i_z_probe_index = static_cast<int>(s.size());
      s.push_back(make_init());
      append_transfer_block(s, lock, lock_rabi, pulse);
      s.push_back(make_readout(p));
      break;
    }
    case Template::NuclearEcho: {
      const double pulse = k.positive("pulse_rabi_mhz");
      const double lock = sec_from_us(k.positive("lock_us"));
      const double lock_rabi = resolve_lock_rabi_mhz(k, p);
      const double rf_rabi = k.positive("rf_rabi_khz");
      const double rf_freq = resolve_rf_freq_mhz(k, p);
      const double rf_detuning = p.effective_omega_l() - rad_from_mhz(rf_freq);
      const double tau = sec_from_us(k.non_negative("tau_us"));
      append_polarize_block(s, k.integer("polarize_reps", 1), lock, lock_rabi, pulse);
      s.push_back(make_init());
      s.push_back(make_rf(kPi / 2.0, 0.0, rf_rabi, rf_detuning, "rf_pi/2"));
      s.push_back(make_init());
      if (tau > 0.0) s.push_back(make_wait(tau, WaitFrame::RfRotating, rf_detuning));
      s.push_back(make_rf(kPi, kPi / 2.0, rf_rabi, rf_detuning, "rf_pi"));
      s.push_back(make_init());
      if (tau > 0.0) s.push_back(make_wait(tau, WaitFrame::RfRotating, rf_detuning));
      s.push_back(make_rf(kPi / 2.0, kPi, rf_rabi, rf_detuning, "rf_pi/2"));
      seq.i_z_probe_index = static_cast<int>(s.size());
      s.push_back(make_init());
      append_transfer_block(s, lock, lock_rabi, pulse);
      s.push_back(make_readout(p));
      break;
    }
  }
  return seq;
}

Knobs resolve_template_knobs(Template t, const SystemParams& p, const Knobs& knobs) {
  const ResolvedKnobs k(t, knobs);
  Knobs out = k.all();
  if (out.count("lock_rabi_mhz") && !k.provided_finite("lock_rabi_mhz"))
    out["lock_rabi_mhz"] = resolve_lock_rabi_mhz(k, p);
  if (out.count("rf_freq_mhz") && !k.provided_finite("rf_freq_mhz"))
    out["rf_freq_mhz"] = resolve_rf_freq_mhz(k, p);
  // Optional cross-check knobs (pi durations) stay NaN when unset; drop them so
  // every reported value is finite and serializable.
  for (auto it = out.begin(); it != out.end();) {
    if (!std::isfinite(it->second)) it = out.erase(it);
    else ++it;
  }
  return out;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

std::vector<Diagnostic> validate(const Sequence& seq) {
  std::vector<Diagnostic> out;
  if (seq.segments.empty()) out.push_back({-1, "sequence has no segments"});
  if (seq.shots < 1) out.push_back({-1, "shots must be >= 1"});
  if (seq.i_z_probe_index >= static_cast<int>(seq.segments.size()))
    out.push_back({-1, "i_z_probe_index is out of range"});

  bool saw_init = false;
  bool saw_readout = false;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const Segment& s = seq.segments[i];
    const int idx = static_cast<int>(i);
    if (!std::isfinite(s.duration) || s.duration < 0.0)
      out.push_back({idx, "segment duration must be finite and non-negative"});
    switch (s.kind) {
      case SegmentKind::LaserInit:
        saw_init = true;
        break;
      case SegmentKind::MwPulse:
        if (!saw_init) out.push_back({idx, "microwave pulse before any laser initialization"});
        if (s.drive.kind != DriveKind::Microwave)
          out.push_back({idx, "microwave segment carries a non-microwave drive descriptor"});
        if (!(s.drive.rabi > 0.0)) out.push_back({idx, "pulse Rabi frequency must be positive"});
        if (!(s.duration > 0.0)) out.push_back({idx, "pulse duration must be positive"});
        break;
      case SegmentKind::RfPulse:
        if (!saw_init) out.push_back({idx, "RF pulse before any laser initialization"});
        if (s.drive.kind != DriveKind::Radiofrequency)
          out.push_back({idx, "RF segment carries a non-RF drive descriptor"});
        if (!(s.drive.rabi > 0.0)) out.push_back({idx, "pulse Rabi frequency must be positive"});
        if (!(s.duration > 0.0)) out.push_back({idx, "pulse duration must be positive"});
        if (s.role == PulseRole::Lock)
          out.push_back({idx, "RF pulses cannot be spin locks"});
        break;
      case SegmentKind::Wait:
        if (s.drive.kind != DriveKind::None)
          out.push_back({idx, "wait segment carries a drive descriptor"});
        break;
      case SegmentKind::Readout:
        if (!saw_init) out.push_back({idx, "readout before any laser initialization"});
        saw_readout = true;
        break;
    }
  }
  if (!seq.segments.empty() && !saw_readout)
    out.push_back({-1, "sequence has no readout segment"});
  return out;
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

namespace {

struct Accumulators {
  Matrix4 state = Matrix4::Zero();
  std::vector<double> p_bright;
  std::vector<double> contrast;
  std::vector<TrajectoryPoint> trajectory;
  bool trajectory_ready = false;
  std::size_t trajectory_cursor = 0;
  double s_z_pre = 0.0;
  double i_z_pre = 0.0;
  double i_z_probe = 0.0;
};

// one exact-propagator application, memoized on the effective segment inputs
class PropagatorCache {
 public:
  const Matrix& get(const Matrix4& h, std::span<const Channel> channels, double duration,
                    const std::array<double, 8>& key) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<Lindblad> lindblads;
    lindblads.reserve(channels.size());
    for (const Channel& c : channels) lindblads.push_back({c.jump, c.rate});
    Matrix prop = expm_superoperator(build_liouvillian(h, lindblads), duration);
    return cache_.emplace(key, std::move(prop)).first->second;
  }

 private:
  struct KeyLess {
    bool operator()(const std::array<double, 8>& a, const std::array<double, 8>& b) const {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
  };
  std::map<std::array<double, 8>, Matrix, KeyLess> cache_;
};

DensityMatrix apply_propagator(const Matrix& prop, const DensityMatrix& rho, std::size_t seg_idx,
                               const std::string& label) {
  const Vector v = prop * vec(rho.matrix());
  try {
    return DensityMatrix(unvec(v, 4));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("segment " + std::to_string(seg_idx) + " (" + label +
                             "): " + e.what());
  }
}

struct SegmentPlan {
  Matrix4 h = Matrix4::Zero();
  std::vector<Channel> channels;
  std::array<double, 8> key{};
  double lock_phase = 0.0;  // effective, after reversal
};

SegmentPlan plan_segment(const Segment& seg, const SystemParams& p, double delta, bool reversed) {
  SegmentPlan plan;
  switch (seg.kind) {
    case SegmentKind::MwPulse: {
      DriveParams d = seg.drive;
      d.detuning += delta;
      if (seg.role == PulseRole::Lock && reversed) d.phase += kPi;
      plan.h = hamiltonian_mw(p, d);
      plan.channels = (seg.role == PulseRole::Lock) ? lock_channels(p, d.phase)
                                                    : free_evolution_channels(p);
      plan.lock_phase = d.phase;
      plan.key = {1.0, seg.role == PulseRole::Lock ? 1.0 : 0.0, seg.duration, d.rabi,
                  d.phase, d.detuning, 0.0, delta};
      break;
    }
    case SegmentKind::RfPulse: {
      plan.h = hamiltonian_rf(p, seg.drive, delta);
      plan.channels = free_evolution_channels(p);
      plan.key = {2.0, 0.0, seg.duration, seg.drive.rabi, seg.drive.phase,
                  seg.drive.detuning, 0.0, delta};
      break;
    }
    case SegmentKind::Wait: {
      if (seg.frame == WaitFrame::Electron) {
        plan.h = hamiltonian_wait(p, delta);
      } else {
        plan.h = hamiltonian_wait_rf_frame(p, seg.rf_frame_detuning, delta);
      }
      plan.channels = free_evolution_channels(p);
      plan.key = {3.0, seg.frame == WaitFrame::Electron ? 0.0 : 1.0, seg.duration, 0.0, 0.0,
                  0.0, seg.rf_frame_detuning, delta};
      break;
    }
    default:
      throw std::logic_error("plan_segment called for a non-evolution segment");
  }
  return plan;
}

void record_point(Accumulators& acc, const RunOptions& opts, double weight, double t,
                  const DensityMatrix& rho, double lock_phase, bool in_lock) {
  if (!opts.record_trajectory) return;
  TrajectoryPoint pt;
  pt.time = t;
  pt.s_z = expectation(rho, ops::Sz());
  pt.i_z = expectation(rho, ops::Iz());
  if (in_lock) {
    const Matrix2 sigma_axis =
        std::cos(lock_phase) * ops::sigma_x() + std::sin(lock_phase) * ops::sigma_y();
    const Matrix4 axis = kron(sigma_axis, ops::id2());
    pt.s_lock = expectation(rho, axis);
  }
  if (!acc.trajectory_ready) {
    TrajectoryPoint scaled = pt;
    scaled.s_z *= weight;
    scaled.i_z *= weight;
    scaled.s_lock *= weight;
    acc.trajectory.push_back(scaled);
  } else {
    if (acc.trajectory_cursor >= acc.trajectory.size())
      throw std::logic_error("trajectory grids differ between shots");
    TrajectoryPoint& dst = acc.trajectory[acc.trajectory_cursor];
    dst.s_z += weight * pt.s_z;
    dst.i_z += weight * pt.i_z;
    dst.s_lock += weight * pt.s_lock;
  }
  ++acc.trajectory_cursor;
}

void simulate_one(const Sequence& seq, const SystemParams& p, const RunOptions& opts,
                  double delta, bool reversed, double weight, std::uint64_t readout_seed,
                  int last_readout, PropagatorCache& cache, Accumulators& acc) {
  DensityMatrix state =
      opts.initial_state ? *opts.initial_state : DensityMatrix(Matrix4::Identity() * 0.25);
  double t = 0.0;
  std::size_t readout_slot = 0;
  acc.trajectory_cursor = 0;
  record_point(acc, opts, weight, t, state, 0.0, false);

  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const Segment& seg = seq.segments[i];
    if (static_cast<int>(i) == seq.i_z_probe_index)
      acc.i_z_probe += weight * expectation(state, ops::Iz());

    switch (seg.kind) {
      case SegmentKind::LaserInit:
        state = laser_reset(state, p);
        break;
      case SegmentKind::Readout: {
        if (static_cast<int>(i) == last_readout) {
          acc.s_z_pre += weight * expectation(state, ops::Sz());
          acc.i_z_pre += weight * expectation(state, ops::Iz());
        }
        const double pb = expectation(state, ops::electron_dn_projector());
        double c;
        if (p.fluorescence.poisson_noise) {
          const FluorescenceTrace trace =
              fluorescence_trace(std::clamp(pb, 0.0, 1.0), p.fluorescence, p.windows.duration,
                                 derive_seed(readout_seed, readout_slot));
          c = contrast(trace, p.windows);
        } else {
          c = expected_contrast(std::clamp(pb, 0.0, 1.0), p.fluorescence, p.windows);
        }
        acc.p_bright[readout_slot] += weight * pb;
        acc.contrast[readout_slot] += weight * c;
        ++readout_slot;
        state = laser_reset(state, p);
        t += seg.duration;
        break;
      }
      case SegmentKind::MwPulse:
      case SegmentKind::RfPulse:
      case SegmentKind::Wait: {
        if (seg.duration <= 0.0) break;
        SegmentPlan plan = plan_segment(seg, p, delta, reversed);
        const bool is_lock = seg.kind == SegmentKind::MwPulse && seg.role == PulseRole::Lock;
        if (is_lock && opts.record_trajectory && opts.trajectory_dt > 0.0 &&
            seg.duration > opts.trajectory_dt) {
          // sample the transfer dynamics inside the lock
          const int n = static_cast<int>(std::ceil(seg.duration / opts.trajectory_dt));
          const double dt = seg.duration / n;
          auto chunk_key = plan.key;
          chunk_key[2] = dt;
          const Matrix& prop = cache.get(plan.h, plan.channels, dt, chunk_key);
          for (int c = 0; c < n; ++c) {
            state = apply_propagator(prop, state, i, seg.label);
            t += dt;
            record_point(acc, opts, weight, t, state, plan.lock_phase, true);
          }
        } else {
          const Matrix& prop = cache.get(plan.h, plan.channels, seg.duration, plan.key);
          state = apply_propagator(prop, state, i, seg.label);
          t += seg.duration;
          if (is_lock) {
            record_point(acc, opts, weight, t, state, plan.lock_phase, true);
          } else {
            record_point(acc, opts, weight, t, state, 0.0, false);
          }
        }
        break;
      }
    }
    if (seg.kind == SegmentKind::LaserInit || seg.kind == SegmentKind::Readout)
      record_point(acc, opts, weight, t, state, 0.0, false);
  }
  acc.state += weight * state.matrix();
  acc.trajectory_ready = true;
}

}  // namespace

RunResult run(const Sequence& seq, const SystemParams& p, const RunOptions& opts) {
  const auto diags = validate(seq);
  if (!diags.empty()) {
    std::string msg = "invalid sequence '" + seq.name + "':";
    for (const auto& d : diags) {
      msg += " [";
      if (d.segment_index >= 0) msg += "segment " + std::to_string(d.segment_index) + ": ";
      msg += d.message + "]";
    }
    throw std::invalid_argument(msg);
  }
  if (opts.record_trajectory && !(opts.trajectory_dt > 0.0))
    throw std::invalid_argument("trajectory_dt must be positive");

  int last_readout = -1;
  int n_readouts = 0;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    if (seq.segments[i].kind == SegmentKind::Readout) {
      last_readout = static_cast<int>(i);
      ++n_readouts;
    }
  }

  Accumulators acc;
  acc.p_bright.assign(static_cast<std::size_t>(n_readouts), 0.0);
  acc.contrast.assign(static_cast<std::size_t>(n_readouts), 0.0);

  const int n_variants = seq.alternate_reversal ? 2 : 1;
  const double weight = 1.0 / (static_cast<double>(seq.shots) * n_variants);
  // t2_star describes the total inhomogeneous dephasing measured on the
  // electron, which already includes the hyperfine splitting of the one
  // nucleus simulated explicitly (an unpolarized nucleus shifts the electron
  // by +-a_par/2, contributing (a_par/2)^2 to the frequency variance).  The
  // injected per-shot offset therefore carries only the quadrature remainder,
  // so the composite simulated linewidth matches 0.53/t2_star instead of
  // double counting that nucleus.
  const double total_var = 2.0 / (p.t2_star * p.t2_star);
  const double nuclear_var = 0.25 * p.a_par * p.a_par;
  const double sigma = std::sqrt(std::max(0.0, total_var - nuclear_var));

  PropagatorCache cache;
  for (int shot = 0; shot < seq.shots; ++shot) {
    const std::uint64_t shot_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(shot));
    double delta = 0.0;
    if (seq.shots > 1) {
      SplitMix64 rng(shot_seed);
      delta = sigma * rng.next_normal();
    }
    for (int variant = 0; variant < n_variants; ++variant) {
      simulate_one(seq, p, opts, delta, variant == 1, weight,
                   derive_seed(shot_seed, 1000 + static_cast<std::uint64_t>(variant)),
                   last_readout, cache, acc);
    }
  }

  RunResult result;
  result.final_state = DensityMatrix(acc.state);
  result.records.reserve(acc.p_bright.size());
  int slot = 0;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    if (seq.segments[i].kind != SegmentKind::Readout) continue;
    ReadoutRecord rec;
    rec.segment_index = static_cast<int>(i);
    rec.p_bright = acc.p_bright[static_cast<std::size_t>(slot)];
    rec.contrast = acc.contrast[static_cast<std::size_t>(slot)];
    result.records.push_back(rec);
    ++slot;
  }
  result.trajectory = std::move(acc.trajectory);
  result.s_z_pre_readout = acc.s_z_pre;
  result.i_z_pre_readout = acc.i_z_pre;
  if (seq.i_z_probe_index >= 0) result.i_z_probe = acc.i_z_probe;
  return result;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string serialize_sequence(const Sequence& seq) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "sequence %s shots=%d alternate_reversal=%d i_z_probe=%d\n",
                seq.name.c_str(), seq.shots, seq.alternate_reversal ? 1 : 0,
                seq.i_z_probe_index);
  os << buf;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const Segment& s = seq.segments[i];
    switch (s.kind) {
      case SegmentKind::LaserInit:
        std::snprintf(buf, sizeof(buf), "%3zu: laser_init\n", i);
        break;
      case SegmentKind::MwPulse:
        std::snprintf(buf, sizeof(buf),
                      "%3zu: mw_pulse role=%s duration_us=%.9g rabi_mhz=%.9g phase_rad=%.9g "
                      "detuning_mhz=%.9g label=%s\n",
                      i, s.role == PulseRole::Lock ? "lock" : "rotation",
                      us_from_sec(s.duration), mhz_from_rad(s.drive.rabi), s.drive.phase,
                      mhz_from_rad(s.drive.detuning), s.label.c_str());
        break;
      case SegmentKind::RfPulse:
        std::snprintf(buf, sizeof(buf),
                      "%3zu: rf_pulse duration_us=%.9g rabi_khz=%.9g phase_rad=%.9g "
                      "detuning_mhz=%.9g label=%s\n",
                      i, us_from_sec(s.duration), khz_from_rad(s.drive.rabi), s.drive.phase,
                      mhz_from_rad(s.drive.detuning), s.label.c_str());
        break;
      case SegmentKind::Wait:
        if (s.frame == WaitFrame::Electron) {
          std::snprintf(buf, sizeof(buf), "%3zu: wait frame=electron duration_us=%.9g\n", i,
                        us_from_sec(s.duration));
        } else {
          std::snprintf(buf, sizeof(buf),
                        "%3zu: wait frame=rf_rotating duration_us=%.9g detuning_mhz=%.9g\n", i,
                        us_from_sec(s.duration), mhz_from_rad(s.rf_frame_detuning));
        }
        break;
      case SegmentKind::Readout:
        std::snprintf(buf, sizeof(buf), "%3zu: readout duration_us=%.9g\n", i,
                      us_from_sec(s.duration));
        break;
    }
    os << buf;
  }
  return os.str();
}

}  // namespace sivsim
