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

#include "sivsim/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sivsim/units.hpp"

namespace sivsim {

namespace {

// ---------------------------------------------------------------------------
// model tables
// ---------------------------------------------------------------------------

const std::vector<std::string>& param_names(FitModel m) {
  static const std::vector<std::string> exp_names = {"amplitude", "decay_time", "offset"};
  static const std::vector<std::string> sine_names = {"amplitude", "frequency", "phase",
                                                      "decay_rate", "offset"};
  static const std::vector<std::string> lor_names = {"amplitude", "center", "hwhm", "offset"};
  static const std::vector<std::string> gauss_names = {"amplitude", "center", "sigma", "offset"};
  static const std::vector<std::string> line_names = {"slope", "intercept"};
  switch (m) {
    case FitModel::ExpDecay:
      return exp_names;
    case FitModel::DampedSine:
      return sine_names;
    case FitModel::Lorentzian:
      return lor_names;
    case FitModel::Gaussian:
      return gauss_names;
    case FitModel::Line:
      return line_names;
  }
  throw std::logic_error("unknown fit model");
}

double eval_one(FitModel m, const Eigen::VectorXd& p, double x) {
  switch (m) {
    case FitModel::ExpDecay:
      return p[0] * std::exp(-x / p[1]) + p[2];
    case FitModel::DampedSine:
      return p[0] * std::exp(-p[3] * x) * std::cos(kTwoPi * p[1] * x + p[2]) + p[4];
    case FitModel::Lorentzian: {
      const double d = x - p[1];
      return p[3] + p[0] * p[2] * p[2] / (d * d + p[2] * p[2]);
    }
    case FitModel::Gaussian: {
      const double d = x - p[1];
      return p[3] + p[0] * std::exp(-d * d / (2.0 * p[2] * p[2]));
    }
    case FitModel::Line:
      return p[0] * x + p[1];
  }
  throw std::logic_error("unknown fit model");
}

void jacobian_row(FitModel m, const Eigen::VectorXd& p, double x, Eigen::RowVectorXd& row) {
  switch (m) {
    case FitModel::ExpDecay: {
      const double e = std::exp(-x / p[1]);
      row[0] = e;
      row[1] = p[0] * e * x / (p[1] * p[1]);
      row[2] = 1.0;
      return;
    }
    case FitModel::DampedSine: {
      const double e = std::exp(-p[3] * x);
      const double arg = kTwoPi * p[1] * x + p[2];
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      row[0] = e * c;
      row[1] = -p[0] * e * s * kTwoPi * x;
      row[2] = -p[0] * e * s;
      row[3] = -p[0] * x * e * c;
      row[4] = 1.0;
      return;
    }
    case FitModel::Lorentzian: {
      const double d = x - p[1];
      const double g = p[2];
      const double den = d * d + g * g;
      row[0] = g * g / den;
      row[1] = p[0] * g * g * 2.0 * d / (den * den);
      row[2] = p[0] * 2.0 * g * d * d / (den * den);
      row[3] = 1.0;
      return;
    }
    case FitModel::Gaussian: {
      const double d = x - p[1];
      const double s2 = p[2] * p[2];
      const double e = std::exp(-d * d / (2.0 * s2));
      row[0] = e;
      row[1] = p[0] * e * d / s2;
      row[2] = p[0] * e * d * d / (s2 * p[2]);
      row[3] = 1.0;
      return;
    }
    case FitModel::Line:
      row[0] = x;
      row[1] = 1.0;
      return;
  }
  throw std::logic_error("unknown fit model");
}

// ---------------------------------------------------------------------------
// deterministic initial guesses
// ---------------------------------------------------------------------------

Eigen::VectorXd guess_exp_decay(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  Eigen::VectorXd p(3);
  // the tail approximates the offset; average the last quarter for stability
  const std::size_t tail = std::max<std::size_t>(1, n / 4);
  double offset = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) offset += y[i];
  offset /= static_cast<double>(tail);
  const double amplitude = y[0] - offset;
  double decay = (x[n - 1] - x[0]) / 2.0;
  if (std::abs(amplitude) > 0.0) {
    // log-linear regression on points still clearly above the offset
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (y[i] - offset) / amplitude;  // normalized, should be exp(-x/T)
      if (d > 0.05) {
        const double ly = std::log(d);
        sx += x[i];
        sy += ly;
        sxx += x[i] * x[i];
        sxy += x[i] * ly;
        ++m;
      }
    }
    const double den = m * sxx - sx * sx;
    if (m >= 2 && std::abs(den) > 0.0) {
      const double slope = (m * sxy - sx * sy) / den;
      if (slope < 0.0) decay = -1.0 / slope;
    }
  }
  if (!(decay > 0.0) || !std::isfinite(decay)) decay = (x[n - 1] - x[0]) / 2.0;
  if (!(decay > 0.0)) decay = 1.0;
  p << amplitude, decay, offset;
  return p;
}

Eigen::VectorXd guess_damped_sine(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double lo = y[0], hi = y[0];
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span_x = x[n - 1] - x[0];
  // discrete spectrum scan: the candidate grid runs from half a cycle over
  // the window up to the mean Nyquist rate, finely enough to land within a
  // grid step of the true frequency
  double best_f = 1.0 / (2.0 * span_x);
  double best_power = -1.0;
  double best_c = 0.0, best_s = 0.0;
  const std::size_t n_freq = 8 * n;
  const double f_max = static_cast<double>(n - 1) / (2.0 * span_x);
  const double f_min = 0.5 / span_x;
  for (std::size_t k = 0; k <= n_freq; ++k) {
    const double f =
        f_min + (f_max - f_min) * static_cast<double>(k) / static_cast<double>(n_freq);
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = kTwoPi * f * (x[i] - x[0]);
      c += (y[i] - mean) * std::cos(arg);
      s += (y[i] - mean) * std::sin(arg);
    }
    const double power = c * c + s * s;
    if (power > best_power) {
      best_power = power;
      best_f = f;
      best_c = c;
      best_s = s;
    }
  }
  // projection phase is relative to x[0]; shift back to absolute x
  const double phase0 = std::atan2(-best_s, best_c) - kTwoPi * best_f * x[0];
  Eigen::VectorXd p(5);
  p << (hi - lo) / 2.0, best_f, phase0, 0.0, mean;
  return p;
}

Eigen::VectorXd guess_peak(std::span<const double> x, std::span<const double> y, bool gaussian) {
  const std::size_t n = x.size();
  const double offset = 0.5 * (y[0] + y[n - 1]);
  std::size_t idx = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(y[i] - offset);
    if (d > best) {
      best = d;
      idx = i;
    }
  }
  const double amplitude = y[idx] - offset;
  const double center = x[idx];
  // scan outward for the half-maximum crossings
  const double half = offset + amplitude / 2.0;
  double left = x[0], right = x[n - 1];
  for (std::size_t i = idx; i-- > 0;) {
    const bool crossed = (amplitude > 0.0) ? (y[i] < half) : (y[i] > half);
    if (crossed) {
      left = x[i];
      break;
    }
  }
  for (std::size_t i = idx + 1; i < n; ++i) {
    const bool crossed = (amplitude > 0.0) ? (y[i] < half) : (y[i] > half);
    if (crossed) {
      right = x[i];
      break;
    }
  }
  double width = (right - left) / 2.0;
  if (!(width > 0.0)) width = (x[n - 1] - x[0]) / 8.0;
  if (!(width > 0.0)) width = 1.0;
  Eigen::VectorXd p(4);
  if (gaussian) {
    // fwhm = 2 sqrt(2 ln 2) sigma
    p << amplitude, center, width / std::sqrt(2.0 * std::log(2.0)), offset;
  } else {
    p << amplitude, center, width, offset;
  }
  return p;
}

Eigen::VectorXd guess_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  Eigen::VectorXd p(2);
  if (std::abs(den) > 0.0) {
    p[0] = (n * sxy - sx * sy) / den;
    p[1] = (sy - p[0] * sx) / static_cast<double>(n);
  } else {
    p[0] = 0.0;
    p[1] = sy / static_cast<double>(n);
  }
  return p;
}

Eigen::VectorXd initial_guess(FitModel m, std::span<const double> x, std::span<const double> y) {
  switch (m) {
    case FitModel::ExpDecay:
      return guess_exp_decay(x, y);
    case FitModel::DampedSine:
      return guess_damped_sine(x, y);
    case FitModel::Lorentzian:
      return guess_peak(x, y, false);
    case FitModel::Gaussian:
      return guess_peak(x, y, true);
    case FitModel::Line:
      return guess_line(x, y);
  }
  throw std::logic_error("unknown fit model");
}

double weighted_cost(FitModel m, const Eigen::VectorXd& p, std::span<const double> x,
                     std::span<const double> y, std::span<const double> w) {
  double cost = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - eval_one(m, p, x[i]);
    const double wi = w.empty() ? 1.0 : w[i];
    cost += wi * r * r;
  }
  return cost;
}

}  // namespace

const char* fit_model_name(FitModel m) {
  switch (m) {
    case FitModel::ExpDecay:
      return "exp_decay";
    case FitModel::DampedSine:
      return "damped_sine";
    case FitModel::Lorentzian:
      return "lorentzian";
    case FitModel::Gaussian:
      return "gaussian";
    case FitModel::Line:
      return "line";
  }
  throw std::logic_error("unknown fit model");
}

FitModel fit_model_from_name(const std::string& name) {
  if (name == "exp_decay") return FitModel::ExpDecay;
  if (name == "damped_sine") return FitModel::DampedSine;
  if (name == "lorentzian") return FitModel::Lorentzian;
  if (name == "gaussian") return FitModel::Gaussian;
  if (name == "line") return FitModel::Line;
  throw std::invalid_argument("unknown fit model name: " + name);
}

double FitResult::value(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.value;
  }
  throw std::invalid_argument("fit result has no parameter named " + name);
}

double FitResult::stderr_of(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.stderr_est;
  }
  throw std::invalid_argument("fit result has no parameter named " + name);
}

double fit_model_eval(FitModel model, std::span<const double> p, double x) {
  const auto& names = param_names(model);
  if (p.size() != names.size())
    throw std::invalid_argument("fit_model_eval: wrong parameter count");
  Eigen::VectorXd pv = Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
  return eval_one(model, pv, x);
}

FitResult fit(FitModel model, std::span<const double> x, std::span<const double> y,
              std::span<const double> weights) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("fit: x and y sizes differ");
  if (!weights.empty() && weights.size() != n)
    throw std::invalid_argument("fit: weights size differs from data size");
  const auto& names = param_names(model);
  const std::size_t np = names.size();
  if (n < np)
    throw std::invalid_argument("fit: fewer data points than model parameters");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("fit: data contains non-finite values");
  }

  Eigen::VectorXd p = initial_guess(model, x, y);

  // levenberg-marquardt with multiplicative damping
  double lambda = 1e-3;
  double cost = weighted_cost(model, p, x, y, weights);
  int iter = 0;
  bool converged = false;
  std::string message;
  Eigen::MatrixXd jac(n, np);
  Eigen::VectorXd res(n);
  Eigen::RowVectorXd row(np);
  for (iter = 0; iter < 200; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      jacobian_row(model, p, x[i], row);
      const double wi = weights.empty() ? 1.0 : weights[i];
      const double sw = std::sqrt(wi);
      jac.row(static_cast<Eigen::Index>(i)) = sw * row;
      res[static_cast<Eigen::Index>(i)] = sw * (y[i] - eval_one(model, p, x[i]));
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * res;
    if (!jtr.allFinite() || !jtj.allFinite()) {
      message = "non-finite normal equations";
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::VectorXd step = damped.ldlt().solve(jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = p + step;
      const double trial_cost = weighted_cost(model, trial, x, y, weights);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double improvement = cost - trial_cost;
        const double step_scale = step.norm() / (p.norm() + 1e-30);
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (step_scale < 1e-12 || improvement < 1e-14 * (1.0 + cost)) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // no downhill step found at any damping: we are at (or numerically at)
      // a minimum
      converged = true;
    }
    if (converged) break;
  }
  if (!converged && message.empty()) message = "iteration limit reached";

  // canonicalize: cosine amplitude sign and phase wrapping are degenerate
  if (model == FitModel::DampedSine) {
    if (p[0] < 0.0) {
      p[0] = -p[0];
      p[2] += kPi;
    }
    p[2] = std::remainder(p[2], kTwoPi);
    if (p[1] < 0.0) {
      p[1] = -p[1];
      p[2] = -p[2];
    }
  }
  if ((model == FitModel::Lorentzian || model == FitModel::Gaussian) && p[2] < 0.0) {
    p[2] = -p[2];  // widths enter squared; report the positive branch
  }
  if (model == FitModel::ExpDecay && p[1] < 0.0) {
    converged = false;
    message = "decay time converged to a negative value";
  }

  // linearized covariance at the optimum: cov = s^2 (J^T J)^-1
  for (std::size_t i = 0; i < n; ++i) {
    jacobian_row(model, p, x[i], row);
    const double wi = weights.empty() ? 1.0 : weights[i];
    jac.row(static_cast<Eigen::Index>(i)) = std::sqrt(wi) * row;
  }
  Eigen::VectorXd stderrs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np));
  if (n > np) {
    const double s2 = cost / static_cast<double>(n - np);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::MatrixXd cov = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
    for (std::size_t k = 0; k < np; ++k) {
      const double v = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      stderrs[static_cast<Eigen::Index>(k)] = v > 0.0 ? std::sqrt(v) : 0.0;
    }
  }

  FitResult out;
  out.model = model;
  out.params.reserve(np);
  for (std::size_t k = 0; k < np; ++k) {
    out.params.push_back({names[k], p[static_cast<Eigen::Index>(k)],
                          stderrs[static_cast<Eigen::Index>(k)]});
  }
  out.residual_norm = std::sqrt(cost);
  out.converged = converged && message.empty();
  out.iterations = iter;
  out.message = message;
  return out;
}

double fwhm(const FitResult& r) {
  if (r.model == FitModel::Lorentzian) return 2.0 * r.value("hwhm");
  if (r.model == FitModel::Gaussian)
    return 2.0 * std::sqrt(2.0 * std::log(2.0)) * r.value("sigma");
  throw std::invalid_argument("fwhm is defined only for lorentzian and gaussian fits");
}

}  // namespace sivsim
