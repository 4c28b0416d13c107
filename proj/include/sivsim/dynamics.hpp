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

#include <functional>
#include <span>
#include <vector>

#include "sivsim/operator_core.hpp"
#include "sivsim/spin_model.hpp"

namespace sivsim {

enum class ChannelKind { DephasingT2, ElectronFlipUp, ElectronFlipDown, SpinLockT1Rho };

struct Channel {
  ChannelKind kind;
  Matrix4 jump;
  double rate;  // 1/s
};

// Markovian electron dephasing, jump sigma_z x 1 at rate 1/(2 T2): electron
// coherences decay as exp(-t/T2), nuclear coherences are untouched.
Channel dephasing_t2(const SystemParams& p);

// Symmetric electron spin flips, sigma_+- x 1 at 1/(2 T1) each, so the
// population difference relaxes to zero with time constant T1.
Channel electron_flip_up(const SystemParams& p);
Channel electron_flip_down(const SystemParams& p);

// Phenomenological rotating-frame relaxation during spin locking at rate
// 1/(2 t1_rho).  The jump operator is the in-plane axis perpendicular to the
// lock axis (lock_phase + pi/2); a jump along the lock axis would commute
// with the locked component and produce no decay, so the perpendicular
// choice is what makes an off-resonant locked signal decay as exp(-t/t1_rho).
Channel spinlock_t1rho(const SystemParams& p, double lock_phase);

// Free evolution: dephasing + both flip channels.
std::vector<Channel> free_evolution_channels(const SystemParams& p);

// Spin-locked evolution: both flip channels + the t1_rho lock channel.  The
// bare dephasing channel is intentionally absent: locking decouples the slow
// frequency noise that T2 describes, and t1_rho is the (separately measured)
// lifetime that replaces it while the drive is on.
std::vector<Channel> lock_channels(const SystemParams& p, double lock_phase);

// Evolve rho for `duration` under constant H with the given channels, exactly
// via exp(L t) on the vectorized state.  Throws if the result violates
// density-matrix invariants (no silent renormalization).
DensityMatrix propagate_segment(const DensityMatrix& rho, const Matrix4& h,
                                std::span<const Channel> channels, double duration);

// Fixed-step RK4 integration of the master equation with time-dependent H.
// Preconditions (throws std::invalid_argument): dt <= duration/100 and
// dt * max||H|| <= 0.05, where max||H|| is sampled along the interval.
DensityMatrix propagate_timedep(const DensityMatrix& rho,
                                const std::function<Matrix4(double)>& h_of_t,
                                double dt, double duration,
                                std::span<const Channel> channels);

// Tr(op rho); asserts the imaginary residual is below 1e-9 for Hermitian
// observables.
double expectation(const DensityMatrix& rho, const Matrix4& op);

enum class Subsystem { Electron, Nucleus };
Matrix2 partial_trace(const DensityMatrix& rho, Subsystem keep);

// Optical (re-)initialization: the electron is projected to the pumped
// mixture diag(f, 1-f) with all electron coherences destroyed, and the
// nuclear reduced state is depolarized toward maximally mixed by
// reinit_nuclear_loss.  Idempotent on the electron part.
DensityMatrix laser_reset(const DensityMatrix& rho, const SystemParams& p);

double purity(const DensityMatrix& rho);

// Uhlmann state fidelity F(a,b) = (tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace sivsim
