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
#include <sstream>

#include "sivsim/readout_model.hpp"

using namespace sivsim;

namespace {

double steady_state(const FluorescenceParams& fp) {
  return fp.repump_rate / (fp.pump_rate + fp.repump_rate);
}

}  // namespace

TEST_CASE("trace bins integrate the rate-equation population") {
  FluorescenceParams fp;  // defaults: pump 1.15e5, repump 1e4
  const double p0 = 1.0;
  FluorescenceTrace tr = fluorescence_trace(p0, fp, 300e-6);
  REQUIRE(tr.counts.size() == 300);
  const double k = fp.pump_rate + fp.repump_rate;
  const double pss = steady_state(fp);
  // analytic expected counts of bin [t0, t1]:
  // photon_rate * (pss dt + (p0-pss)(e^{-k t0} - e^{-k t1})/k) + background dt
  for (std::size_t i : {std::size_t{0}, std::size_t{5}, std::size_t{150}}) {
    const double t0 = static_cast<double>(i) * fp.bin_width;
    const double t1 = t0 + fp.bin_width;
    const double expected =
        fp.photon_rate *
            (pss * fp.bin_width + (p0 - pss) * (std::exp(-k * t0) - std::exp(-k * t1)) / k) +
        fp.background * fp.bin_width;
    CHECK(tr.counts[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  // early bins are brighter than late ones for a bright initial state
  CHECK(tr.counts.front() > tr.counts.back());
}

TEST_CASE("a state starting at the pumping steady state gives a flat trace") {
  FluorescenceParams fp;
  ReadoutWindows w;
  FluorescenceTrace tr = fluorescence_trace(steady_state(fp), fp, w.duration);
  CHECK(contrast(tr, w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expected_contrast(steady_state(fp), fp, w) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("contrast grows monotonically with the initial bright population") {
  FluorescenceParams fp;
  ReadoutWindows w;
  double prev = 0.0;
  for (double p0 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double c = expected_contrast(p0, fp, w);
    CHECK(c > prev);
    prev = c;
  }
  // dark start reads below 1, bright start above
  CHECK(expected_contrast(0.0, fp, w) < 1.0);
  CHECK(expected_contrast(1.0, fp, w) > 1.0);
}

TEST_CASE("binned contrast matches the closed form when windows align to bins") {
  FluorescenceParams fp;
  ReadoutWindows w;  // 10 us leading/trailing over 1 us bins: exact alignment
  for (double p0 : {0.08, 0.3, 0.92}) {
    FluorescenceTrace tr = fluorescence_trace(p0, fp, w.duration);
    CHECK(contrast(tr, w) == doctest::Approx(expected_contrast(p0, fp, w)).epsilon(1e-12));
  }
}

TEST_CASE("contrast handles windows that end mid-bin") {
  FluorescenceParams fp;
  ReadoutWindows w;
  w.leading = 7.5e-6;
  w.trailing = 12.5e-6;
  FluorescenceTrace tr = fluorescence_trace(0.9, fp, w.duration);
  // fractional bins: still close to the closed form (integrand varies slowly)
  CHECK(contrast(tr, w) ==
        doctest::Approx(expected_contrast(0.9, fp, w)).epsilon(1e-3));
}

TEST_CASE("fit_polarization inverts the rate-equation trace") {
  FluorescenceParams fp;
  for (double p0 : {0.15, 0.5, 0.92}) {
    FluorescenceTrace tr = fluorescence_trace(p0, fp, 300e-6);
    PolarizationFit pf = fit_polarization(tr, fp);
    CHECK(pf.fit.converged);
    CHECK(pf.p_bright0 == doctest::Approx(p0).epsilon(1e-6));
    CHECK(pf.p_steady == doctest::Approx(steady_state(fp)).epsilon(1e-6));
    CHECK(pf.total_rate ==
          doctest::Approx(fp.pump_rate + fp.repump_rate).epsilon(1e-6));
  }
}

TEST_CASE("poisson traces are deterministic per seed and integer-valued") {
  FluorescenceParams fp;
  fp.poisson_noise = true;
  FluorescenceTrace a = fluorescence_trace(0.9, fp, 50e-6, 7);
  FluorescenceTrace b = fluorescence_trace(0.9, fp, 50e-6, 7);
  FluorescenceTrace c = fluorescence_trace(0.9, fp, 50e-6, 8);
  REQUIRE(a.counts.size() == b.counts.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    CHECK(a.counts[i] == b.counts[i]);
    CHECK(a.counts[i] == std::floor(a.counts[i]));
    CHECK(a.counts[i] >= 0.0);
    any_diff |= (a.counts[i] != c.counts[i]);
  }
  CHECK(any_diff);
}

TEST_CASE("poisson bins stay near the expected counts") {
  FluorescenceParams fp;
  FluorescenceTrace mean = fluorescence_trace(1.0, fp, 100e-6);
  fp.poisson_noise = true;
  FluorescenceTrace noisy = fluorescence_trace(1.0, fp, 100e-6, 3);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < mean.counts.size(); ++i) {
    const double var = std::max(mean.counts[i], 1.0);
    chi2 += (noisy.counts[i] - mean.counts[i]) * (noisy.counts[i] - mean.counts[i]) / var;
  }
  // 100 bins: chi2/dof should be order 1
  CHECK(chi2 / static_cast<double>(mean.counts.size()) < 2.0);
}

TEST_CASE("trace CSV has a header and one row per bin") {
  FluorescenceParams fp;
  FluorescenceTrace tr = fluorescence_trace(0.5, fp, 5e-6);
  std::ostringstream os;
  write_trace_csv(tr, os);
  const std::string text = os.str();
  CHECK(text.find("time_us") != std::string::npos);
  int rows = 0;
  for (char ch : text)
    if (ch == '\n') ++rows;
  CHECK(rows >= 5);
}

TEST_CASE("time_of_bin is the bin center") {
  FluorescenceTrace tr;
  tr.bin_width = 2e-6;
  tr.counts = {0.0, 0.0, 0.0};
  CHECK(tr.time_of_bin(0) == doctest::Approx(1e-6));
  CHECK(tr.time_of_bin(2) == doctest::Approx(5e-6));
}
