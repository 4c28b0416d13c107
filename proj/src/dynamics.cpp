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

#include "sivsim/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sivsim {

namespace {

double half_rate(double time_constant) {
  return std::isinf(time_constant) ? 0.0 : 1.0 / (2.0 * time_constant);
}

}  // namespace

Channel dephasing_t2(const SystemParams& p) {
  return {ChannelKind::DephasingT2, kron(ops::sigma_z(), ops::id2()),
          half_rate(p.t2_electron)};
}

Channel electron_flip_up(const SystemParams& p) {
  return {ChannelKind::ElectronFlipUp, kron(ops::sigma_plus(), ops::id2()),
          half_rate(p.t1_electron)};
}

Channel electron_flip_down(const SystemParams& p) {
  return {ChannelKind::ElectronFlipDown, kron(ops::sigma_minus(), ops::id2()),
          half_rate(p.t1_electron)};
}

Channel spinlock_t1rho(const SystemParams& p, double lock_phase) {
  const double perp = lock_phase + kPi / 2.0;
  Matrix2 axis = std::cos(perp) * ops::sigma_x() + std::sin(perp) * ops::sigma_y();
  return {ChannelKind::SpinLockT1Rho, kron(axis, ops::id2()), half_rate(p.t1_rho)};
}

std::vector<Channel> free_evolution_channels(const SystemParams& p) {
  return {dephasing_t2(p), electron_flip_up(p), electron_flip_down(p)};
}

std::vector<Channel> lock_channels(const SystemParams& p, double lock_phase) {
  // While the electron is spin-locked the static frequency noise behind the
  // bare dephasing time is decoupled (that is the point of locking), so the
  // T2 channel is dropped and the measured rotating-frame lifetime t1_rho
  // takes its place as the in-lock decay of the locked component.  Population
  // flips are not affected by the lock and stay active.
  return {electron_flip_up(p), electron_flip_down(p),
          spinlock_t1rho(p, lock_phase)};
}

namespace {

std::vector<Lindblad> to_lindblad(std::span<const Channel> channels) {
  std::vector<Lindblad> out;
  out.reserve(channels.size());
  for (const auto& ch : channels) out.push_back({ch.jump, ch.rate});
  return out;
}

DensityMatrix checked_state(const Matrix4& rho, const char* where) {
  try {
    return DensityMatrix(rho);
  } catch (const std::runtime_error& e) {
    std::ostringstream msg;
    msg << where << ": " << e.what();
    throw std::runtime_error(msg.str());
  }
}

// Lindblad right-hand side evaluated directly on the 4x4 state (cheaper than
// the superoperator for the inner RK4 loop).
Matrix4 master_rhs(const Matrix4& rho, const Matrix4& h,
                   std::span<const Channel> channels) {
  const Complex mi(0.0, -1.0);
  Matrix4 out = mi * (h * rho - rho * h);
  for (const auto& ch : channels) {
    if (ch.rate == 0.0) continue;
    const Matrix4 ldl = ch.jump.adjoint() * ch.jump;
    out += ch.rate * (ch.jump * rho * ch.jump.adjoint() -
                      0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

}  // namespace

DensityMatrix propagate_segment(const DensityMatrix& rho, const Matrix4& h,
                                std::span<const Channel> channels, double duration) {
  if (duration < 0.0) throw std::invalid_argument("propagate_segment: negative duration");
  if (duration == 0.0) return rho;
  const auto lindblad = to_lindblad(channels);
  const Matrix l = build_liouvillian(h, lindblad);
  const Matrix u = expm_superoperator(l, duration);
  const Matrix4 out = unvec(u * vec(rho.matrix()), 4);
  return checked_state(out, "propagate_segment");
}

DensityMatrix propagate_timedep(const DensityMatrix& rho,
                                const std::function<Matrix4(double)>& h_of_t,
                                double dt, double duration,
                                std::span<const Channel> channels) {
  if (duration <= 0.0) throw std::invalid_argument("propagate_timedep: nonpositive duration");
  if (dt <= 0.0) throw std::invalid_argument("propagate_timedep: nonpositive dt");
  if (dt > duration / 100.0)
    throw std::invalid_argument("propagate_timedep: dt must be <= duration/100");
  // sample ||H|| along the interval to enforce the step-size precondition
  double hmax = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = duration * i / 100.0;
    hmax = std::max(hmax, h_of_t(t).operatorNorm());
  }
  if (dt * hmax > 0.05)
    throw std::invalid_argument("propagate_timedep: dt * max||H|| exceeds 0.05");

  const auto n_steps = static_cast<long>(std::ceil(duration / dt));
  const double step = duration / static_cast<double>(n_steps);
  Matrix4 r = rho.matrix();
  double t = 0.0;
  for (long i = 0; i < n_steps; ++i) {
    const Matrix4 k1 = master_rhs(r, h_of_t(t), channels);
    const Matrix4 k2 = master_rhs(r + 0.5 * step * k1, h_of_t(t + 0.5 * step), channels);
    const Matrix4 k3 = master_rhs(r + 0.5 * step * k2, h_of_t(t + 0.5 * step), channels);
    const Matrix4 k4 = master_rhs(r + step * k3, h_of_t(t + step), channels);
    r += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += step;
  }
  return checked_state(r, "propagate_timedep");
}

double expectation(const DensityMatrix& rho, const Matrix4& op) {
  const Complex v = (op * rho.matrix()).trace();
  if (std::abs(v.imag()) > 1e-9) {
    std::ostringstream msg;
    msg << "expectation: imaginary residual " << v.imag();
    throw std::runtime_error(msg.str());
  }
  return v.real();
}

Matrix2 partial_trace(const DensityMatrix& rho, Subsystem keep) {
  const Matrix4& r = rho.matrix();
  Matrix2 out = Matrix2::Zero();
  if (keep == Subsystem::Electron) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out(i, j) = r(2 * i, 2 * j) + r(2 * i + 1, 2 * j + 1);
  } else {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out(i, j) = r(i, j) + r(i + 2, j + 2);
  }
  return out;
}

DensityMatrix laser_reset(const DensityMatrix& rho, const SystemParams& p) {
  const double f = p.init_fidelity;
  const double x = p.reinit_nuclear_loss;
  Matrix2 electron = Matrix2::Zero();
  electron(0, 0) = f;
  electron(1, 1) = 1.0 - f;
  Matrix2 nucleus = partial_trace(rho, Subsystem::Nucleus);
  nucleus = (1.0 - x) * nucleus + x * 0.5 * Matrix2::Identity();
  return checked_state(kron(electron, nucleus), "laser_reset");
}

double purity(const DensityMatrix& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

namespace {

Matrix4 psd_sqrt(const Matrix4& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4> es(m);
  Eigen::Vector4d w = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * w.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  const Matrix4 sa = psd_sqrt(a.matrix());
  const Matrix4 inner = sa * b.matrix() * sa;
  Eigen::SelfAdjointEigenSolver<Matrix4> es(inner, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  return s * s;
}

}  // namespace sivsim
