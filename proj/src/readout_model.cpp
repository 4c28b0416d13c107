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

#include "sivsim/readout_model.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "sivsim/rng.hpp"
#include "sivsim/units.hpp"

namespace sivsim {

namespace {

void check_fluorescence(const FluorescenceParams& fp) {
  if (!(fp.pump_rate > 0.0) || !(fp.repump_rate > 0.0))
    throw std::invalid_argument("fluorescence rates must be positive");
  if (!(fp.photon_rate > 0.0)) throw std::invalid_argument("photon_rate must be positive");
  if (fp.background < 0.0) throw std::invalid_argument("background must be non-negative");
  if (!(fp.bin_width > 0.0)) throw std::invalid_argument("bin_width must be positive");
}

void check_windows(const ReadoutWindows& w) {
  if (!(w.duration > 0.0)) throw std::invalid_argument("readout duration must be positive");
  if (!(w.leading > 0.0) || !(w.trailing > 0.0))
    throw std::invalid_argument("readout windows must be positive");
  if (w.leading + w.trailing > w.duration)
    throw std::invalid_argument("readout windows exceed the readout duration");
}

// integral of p_b over [t0, t1]
double bright_integral(double p0, double p_ss, double k, double t0, double t1) {
  return p_ss * (t1 - t0) + (p0 - p_ss) * (std::exp(-k * t0) - std::exp(-k * t1)) / k;
}

}  // namespace

FluorescenceTrace fluorescence_trace(double p_bright0, const FluorescenceParams& fp,
                                     double duration, std::uint64_t seed) {
  check_fluorescence(fp);
  if (p_bright0 < -1e-12 || p_bright0 > 1.0 + 1e-12)
    throw std::invalid_argument("p_bright0 must lie in [0, 1]");
  if (!(duration > 0.0)) throw std::invalid_argument("trace duration must be positive");

  const double k = fp.pump_rate + fp.repump_rate;
  const double p_ss = fp.repump_rate / k;
  const std::size_t n_bins = static_cast<std::size_t>(std::floor(duration / fp.bin_width + 0.5));
  if (n_bins == 0) throw std::invalid_argument("trace shorter than one bin");

  FluorescenceTrace trace;
  trace.bin_width = fp.bin_width;
  trace.counts.resize(n_bins);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double t0 = static_cast<double>(i) * fp.bin_width;
    const double t1 = t0 + fp.bin_width;
    const double expected =
        fp.photon_rate * bright_integral(p_bright0, p_ss, k, t0, t1) +
        fp.background * fp.bin_width;
    trace.counts[i] =
        fp.poisson_noise ? static_cast<double>(rng.next_poisson(expected)) : expected;
  }
  return trace;
}

double contrast(const FluorescenceTrace& trace, const ReadoutWindows& windows) {
  check_windows(windows);
  if (trace.counts.empty()) throw std::invalid_argument("empty fluorescence trace");
  const double total = static_cast<double>(trace.counts.size()) * trace.bin_width;
  if (windows.leading + windows.trailing > total + 1e-12)
    throw std::invalid_argument("readout windows exceed the trace length");

  // mean count rate over a window, delimited at bin resolution
  const auto mean_rate = [&](double t0, double t1) {
    double sum = 0.0;
    double covered = 0.0;
    for (std::size_t i = 0; i < trace.counts.size(); ++i) {
      const double b0 = static_cast<double>(i) * trace.bin_width;
      const double b1 = b0 + trace.bin_width;
      const double lo = std::max(b0, t0);
      const double hi = std::min(b1, t1);
      if (hi <= lo) continue;
      const double frac = (hi - lo) / trace.bin_width;
      sum += trace.counts[i] * frac;
      covered += hi - lo;
    }
    if (!(covered > 0.0)) throw std::invalid_argument("readout window covers no bins");
    return sum / covered;
  };

  const double lead = mean_rate(0.0, windows.leading);
  const double trail = mean_rate(total - windows.trailing, total);
  if (!(trail > 0.0)) throw std::runtime_error("trailing window has zero counts");
  return lead / trail;
}

double expected_contrast(double p_bright0, const FluorescenceParams& fp,
                         const ReadoutWindows& windows) {
  check_fluorescence(fp);
  check_windows(windows);
  const double k = fp.pump_rate + fp.repump_rate;
  const double p_ss = fp.repump_rate / k;
  const double lead =
      fp.photon_rate * bright_integral(p_bright0, p_ss, k, 0.0, windows.leading) /
          windows.leading +
      fp.background;
  const double trail = fp.photon_rate *
                           bright_integral(p_bright0, p_ss, k, windows.duration - windows.trailing,
                                           windows.duration) /
                           windows.trailing +
                       fp.background;
  return lead / trail;
}

PolarizationFit fit_polarization(const FluorescenceTrace& trace, const FluorescenceParams& fp) {
  check_fluorescence(fp);
  if (trace.counts.size() < 4)
    throw std::invalid_argument("trace too short to fit the pumping transient");

  std::vector<double> t(trace.counts.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = trace.time_of_bin(i);

  PolarizationFit out;
  out.fit = fit(FitModel::ExpDecay, t, trace.counts);

  // counts(t) = [photon_rate * (p_ss + (p0 - p_ss) e^{-kt}) + background] * bin
  const double bin = trace.bin_width;
  const double offset = out.fit.value("offset");
  const double amplitude = out.fit.value("amplitude");
  out.total_rate = 1.0 / out.fit.value("decay_time");
  out.p_steady = (offset / bin - fp.background) / fp.photon_rate;
  // Counts are bin integrals, not centre samples: integrating e^{-kt} over a
  // bin multiplies the centre value by sinh(k*bin/2)/(k*bin/2). Undo that so
  // the recovered amplitude refers to the instantaneous population at t = 0.
  const double x = 0.5 * out.total_rate * bin;
  const double sinhc = x > 1e-12 ? std::sinh(x) / x : 1.0;
  out.p_bright0 = out.p_steady + amplitude / (fp.photon_rate * bin * sinhc);
  return out;
}

void write_trace_csv(const FluorescenceTrace& trace, std::ostream& os) {
  os << "# fluorescence readout trace\n";
  os << "# bin_width_us = " << us_from_sec(trace.bin_width) << "\n";
  os << "time_us,counts\n";
  char line[64];
  for (std::size_t i = 0; i < trace.counts.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.9g,%.17g\n", us_from_sec(trace.time_of_bin(i)),
                  trace.counts[i]);
    os << line;
  }
}

}  // namespace sivsim
