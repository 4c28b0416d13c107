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

#include <span>
#include <string>
#include <vector>

namespace sivsim {

// Least-squares models for the sweep observables:
//   ExpDecay:   y = amplitude * exp(-x / decay_time) + offset
//   DampedSine: y = amplitude * exp(-decay_rate * x)
//                     * cos(2 pi frequency x + phase) + offset
//   Lorentzian: y = offset + amplitude * hwhm^2 / ((x - center)^2 + hwhm^2)
//   Gaussian:   y = offset + amplitude * exp(-(x - center)^2 / (2 sigma^2))
//   Line:       y = slope * x + intercept
enum class FitModel { ExpDecay, DampedSine, Lorentzian, Gaussian, Line };

const char* fit_model_name(FitModel m);
FitModel fit_model_from_name(const std::string& name);

struct FitParam {
  std::string name;
  double value = 0.0;
  double stderr_est = 0.0;  // from the linearized covariance at the optimum
};

struct FitResult {
  FitModel model = FitModel::Line;
  std::vector<FitParam> params;
  double residual_norm = 0.0;  // sqrt of the (weighted) sum of squares
  bool converged = false;
  int iterations = 0;
  std::string message;

  double value(const std::string& name) const;
  double stderr_of(const std::string& name) const;
};

// Damped Gauss-Newton (Levenberg-Marquardt) fit with analytic Jacobians and
// deterministic initial guesses: peak/valley detection for centers,
// log-linear regression for decay constants, the dominant bin of a discrete
// spectrum scan for frequencies.  Optional weights w_i multiply the squared
// residuals.  Throws std::invalid_argument when the data cannot determine
// the parameters (size mismatch, fewer points than parameters).
FitResult fit(FitModel model, std::span<const double> x, std::span<const double> y,
              std::span<const double> weights = {});

// Full width at half maximum of a fitted Lorentzian (2*hwhm) or Gaussian
// (2*sqrt(2 ln 2)*sigma); other models have no line width.
double fwhm(const FitResult& r);

// Model prediction at x for a parameter vector in canonical order.
double fit_model_eval(FitModel model, std::span<const double> p, double x);

}  // namespace sivsim
