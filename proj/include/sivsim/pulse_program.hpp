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
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sivsim/dynamics.hpp"
#include "sivsim/spin_model.hpp"

namespace sivsim {

// ---------------------------------------------------------------------------
// sequence intermediate representation
// ---------------------------------------------------------------------------

enum class SegmentKind { LaserInit, MwPulse, RfPulse, Wait, Readout };

// A microwave pulse is either a coherent rotation or a spin lock.  The
// distinction selects the dissipation channels: rotations and waits carry
// {T2 dephasing, T1 flips}; locks carry {T1 flips, rotating-frame relaxation
// oriented by the lock phase} with the bare dephasing channel dropped, since
// locking decouples the noise T2 describes (see lock_channels).
enum class PulseRole { Rotation, Lock };

// Frame a Wait segment evolves in.  Electron-frame waits keep the full
// nuclear Zeeman + hyperfine Hamiltonian; RF-rotating-frame waits (used
// between RF pulses of nuclear coherence sequences) keep the secular
// detuning picture so nuclear phases compose consistently with the RF
// pulses around them.  Template sequences only ever hold nuclear coherence
// across segments of a single frame; z-diagonal nuclear states are frame
// invariant, so the remaining segments may mix frames freely.
enum class WaitFrame { Electron, RfRotating };

struct Segment {
  SegmentKind kind = SegmentKind::Wait;
  double duration = 0.0;  // seconds; LaserInit is instantaneous
  DriveParams drive;      // meaningful for MwPulse / RfPulse
  PulseRole role = PulseRole::Rotation;
  WaitFrame frame = WaitFrame::Electron;
  double rf_frame_detuning = 0.0;  // rad/s, for Wait in the RF rotating frame
  std::string label;               // human-readable tag ("pi/2", "lock", ...)
};

struct Sequence {
  std::string name;
  std::vector<Segment> segments;
  int shots = 1;
  // When set, each shot also runs the phase-reversed variant (every lock
  // phase shifted by pi, reversing the polarization transfer direction) and
  // the two results are averaged.
  bool alternate_reversal = false;
  // When >= 0, run() records <I_z> immediately before this segment.
  int i_z_probe_index = -1;
};

// ---------------------------------------------------------------------------
// protocol templates
// ---------------------------------------------------------------------------

enum class Template {
  ElectronT1,    // init - pi - wait - read: longitudinal relaxation
  Odmr,          // init - weak probe pulse at a detuning - read
  ElectronRabi,  // init - resonant drive of variable duration - read
  HahnEcho,      // init - pi/2 - tau - pi - tau - pi/2 - read
  HhSweep,       // init - transfer block at a lock amplitude - read
  SpinLock,      // init - transfer block of variable lock duration - read
  NovelBuildup,  // repeated transfer blocks, polarization accumulates
  NmrSweep,      // polarize - RF pi at a frequency - transfer readout
  NuclearRabi,   // polarize - resonant RF of variable duration - readout
  NuclearEcho,   // polarize - RF pi/2 - tau - pi - tau - pi/2 - readout
};

const char* template_name(Template t);
Template template_from_name(const std::string& name);
std::vector<Template> all_templates();

// Scalar knobs configuring a template.  Every template declares required
// knobs (typically the swept quantity) and optional ones with defaults;
// unknown names and missing required names are compile errors.
using Knobs = std::map<std::string, double>;

struct KnobSpec {
  std::string name;
  bool required = false;
  double default_value = std::numeric_limits<double>::quiet_NaN();
  std::string doc;
};

// The knob schema of a template (required first, then optional).
std::vector<KnobSpec> template_knob_schema(Template t);

// Builds the segment list for a template with the given knobs.  Durations
// are derived from Rabi frequencies (a pi pulse lasts pi/Omega); passing the
// optional `pi_duration_us` / `rf_pi_duration_us` knobs cross-checks them
// and throws if they disagree with the amplitude-derived duration.
Sequence compile_template(Template t, const SystemParams& p, const Knobs& knobs);

// The full knob map a compile would run with: user values, schema defaults,
// and model-derived values for knobs whose default is "derived" (the matched
// lock amplitude, the electron-up RF resonance).  Used to record the exact
// configuration of a sweep in its result and metadata.
Knobs resolve_template_knobs(Template t, const SystemParams& p, const Knobs& knobs);

// ---------------------------------------------------------------------------
// validation and execution
// ---------------------------------------------------------------------------

struct Diagnostic {
  int segment_index = -1;  // -1: whole-sequence problem
  std::string message;
};

// Structural checks: at least one readout, no drive before the first laser
// init, no conflicting drive assignments (a microwave segment carrying an RF
// drive descriptor or vice versa), finite nonnegative durations, positive
// shot count.  Returns every problem found; run() refuses sequences with
// diagnostics.
std::vector<Diagnostic> validate(const Sequence& seq);

struct TrajectoryPoint {
  double time = 0.0;    // seconds from sequence start
  double s_z = 0.0;     // <S_z>
  double i_z = 0.0;     // <I_z>
  double s_lock = 0.0;  // <cos(phi) sigma_x + sin(phi) sigma_y> of the active lock, else 0
};

struct ReadoutRecord {
  int segment_index = -1;
  double p_bright = 0.0;  // electron |dn> population entering the readout
  double contrast = 1.0;  // leading/trailing fluorescence ratio
};

struct RunOptions {
  std::uint64_t seed = 0;          // master seed for shot noise
  bool record_trajectory = false;  // sample (t, <S_z>, <I_z>) at segment
                                   // boundaries and inside lock pulses
  double trajectory_dt = 5e-8;     // max sample spacing inside lock pulses
  std::optional<DensityMatrix> initial_state;  // default: maximally mixed
};

struct RunResult {
  DensityMatrix final_state;            // averaged over shots and variants
  std::vector<ReadoutRecord> records;   // averaged, one per readout segment
  std::vector<TrajectoryPoint> trajectory;
  double s_z_pre_readout = 0.0;  // just before the last readout segment
  double i_z_pre_readout = 0.0;
  double i_z_probe = std::numeric_limits<double>::quiet_NaN();  // at i_z_probe_index
};

// Executes a sequence against the model.  Each shot draws a quasi-static
// electron detuning when shots > 1 (a single shot runs noise-free); the
// Gaussian width is sqrt(2)/t2_star reduced in quadrature by the hyperfine
// contribution of the explicitly simulated nucleus (see run's definition).
// Every segment propagates with the channel set of its role; readout records
// and expectation values are averaged across shots and reversal variants.
// Deterministic for a fixed (sequence, params, options) triple.
RunResult run(const Sequence& seq, const SystemParams& p, const RunOptions& opts = {});

// Stable single-string form of a sequence (one line per segment), used for
// golden tests and --dump-sequence output.
std::string serialize_sequence(const Sequence& seq);

}  // namespace sivsim
