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
#include <iosfwd>
#include <vector>

#include "sivsim/fitting.hpp"
#include "sivsim/spin_model.hpp"

namespace sivsim {

// Time-binned fluorescence during an optical readout pulse.  The laser both
// reads and repolarizes, so the bright-state population follows a two-level
// rate equation
//   d p_b / dt = -pump * p_b + repump * (1 - p_b)
//   p_b(t) = p_ss + (p_b(0) - p_ss) exp(-(pump + repump) t),
//   p_ss   = repump / (pump + repump)
// and the detected rate is photon_rate * p_b(t) + background.
struct FluorescenceTrace {
  double bin_width = 1e-6;      // seconds
  std::vector<double> counts;   // expected (or Poisson-sampled) counts per bin

  double time_of_bin(std::size_t i) const {
    return (static_cast<double>(i) + 0.5) * bin_width;
  }
};

// Expected trace for an initial bright population p_bright0 over `duration`
// seconds.  When fp.poisson_noise is set, each bin is Poisson-sampled with
// the deterministic generator seeded by `seed`.
FluorescenceTrace fluorescence_trace(double p_bright0, const FluorescenceParams& fp,
                                     double duration, std::uint64_t seed = 0);

// Readout contrast: mean count rate over the leading window divided by the
// mean rate over the trailing window.  A flat trace gives exactly 1; a trace
// that starts bright and pumps dark gives > 1.
double contrast(const FluorescenceTrace& trace, const ReadoutWindows& windows);

// Closed-form contrast for an initial bright population, i.e. what
// `contrast(fluorescence_trace(p, fp, w.duration), w)` converges to with
// noiseless traces and fine bins.  Used to map populations to the measured
// observable without building a trace.
double expected_contrast(double p_bright0, const FluorescenceParams& fp,
                         const ReadoutWindows& windows);

struct PolarizationFit {
  double p_bright0 = 0.0;   // recovered initial bright population
  double p_steady = 0.0;    // recovered steady-state population
  double total_rate = 0.0;  // recovered pump + repump (1/s)
  FitResult fit;            // underlying exponential fit of the trace
};

// Recovers the initial bright population from a trace by fitting
// counts(t) = A exp(-t/T) + C and inverting the rate-equation model.
PolarizationFit fit_polarization(const FluorescenceTrace& trace, const FluorescenceParams& fp);

// Two-column CSV (time_us, counts) with a comment header.
void write_trace_csv(const FluorescenceTrace& trace, std::ostream& os);

}  // namespace sivsim
