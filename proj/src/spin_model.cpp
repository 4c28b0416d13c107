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

#include "sivsim/spin_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sivsim {
namespace ops {

Matrix2 sigma_x() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}

Matrix2 sigma_y() {
  Matrix2 m;
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix2 sigma_z() {
  Matrix2 m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2 sigma_plus() {
  Matrix2 m = Matrix2::Zero();
  m(0, 1) = 1;  // raises |dn> to |up>
  return m;
}

Matrix2 sigma_minus() {
  Matrix2 m = Matrix2::Zero();
  m(1, 0) = 1;
  return m;
}

Matrix2 id2() { return Matrix2::Identity(); }

Matrix4 Sx() { return kron(0.5 * sigma_x(), id2()); }
Matrix4 Sy() { return kron(0.5 * sigma_y(), id2()); }
Matrix4 Sz() { return kron(0.5 * sigma_z(), id2()); }
Matrix4 Ix() { return kron(id2(), 0.5 * sigma_x()); }
Matrix4 Iy() { return kron(id2(), 0.5 * sigma_y()); }
Matrix4 Iz() { return kron(id2(), 0.5 * sigma_z()); }
Matrix4 id4() { return Matrix4::Identity(); }

Matrix4 electron_dn_projector() {
  Matrix2 p = Matrix2::Zero();
  p(1, 1) = 1;
  return kron(p, id2());
}

}  // namespace ops

namespace {

void require_finite_positive(double v, const char* name) {
  // infinity is allowed (it just zeroes the corresponding rate)
  if (std::isnan(v) || v <= 0.0) {
    std::ostringstream msg;
    msg << "parameter " << name << " must be positive, got " << v;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

std::vector<std::string> validate_params(const SystemParams& p) {
  std::vector<std::string> notes;
  const double derived_mhz = p.gamma_n_mhz_per_t * p.b_field_t;
  const double configured_mhz = mhz_from_rad(p.omega_l);
  if (!p.omega_l_derived &&
      std::abs(derived_mhz - configured_mhz) > 1e-3 * std::abs(derived_mhz)) {
    std::ostringstream msg;
    msg << "omega_l " << configured_mhz << " MHz differs from gamma_n*B = "
        << derived_mhz << " MHz; using the configured value";
    notes.push_back(msg.str());
  }
  if (p.fluorescence.pump_rate <= p.fluorescence.repump_rate)
    notes.push_back("pump_rate <= repump_rate: readout steady state is not polarized");
  const double p_ss =
      p.fluorescence.repump_rate / (p.fluorescence.pump_rate + p.fluorescence.repump_rate);
  if (std::abs((1.0 - p_ss) - p.init_fidelity) > 1e-6)
    notes.push_back("init_fidelity is not consistent with the optical pumping rates");
  return notes;
}

namespace {

void check_params(const SystemParams& p) {
  require_finite_positive(p.t1_electron, "t1_electron");
  require_finite_positive(p.t2_electron, "t2_electron");
  require_finite_positive(p.t2_star, "t2_star");
  require_finite_positive(p.t1_rho, "t1_rho");
  if (p.init_fidelity < 0.0 || p.init_fidelity > 1.0)
    throw std::invalid_argument("init_fidelity outside [0,1]");
  if (p.reinit_nuclear_loss < 0.0 || p.reinit_nuclear_loss > 1.0)
    throw std::invalid_argument("reinit_nuclear_loss outside [0,1]");
}

Matrix4 hyperfine_terms(const SystemParams& p) {
  return p.a_perp * ops::Sz() * ops::Ix() + p.a_par * ops::Sz() * ops::Iz();
}

}  // namespace

Matrix4 hamiltonian_mw(const SystemParams& p, const DriveParams& d) {
  check_params(p);
  if (d.kind != DriveKind::Microwave)
    throw std::invalid_argument("hamiltonian_mw: drive kind is not Microwave");
  if (d.rabi < 0.0) throw std::invalid_argument("hamiltonian_mw: negative Rabi frequency");
  Matrix4 h = d.detuning * ops::Sz() +
              d.rabi * (std::cos(d.phase) * ops::Sx() + std::sin(d.phase) * ops::Sy()) +
              p.effective_omega_l() * ops::Iz() + hyperfine_terms(p);
  return h;
}

Matrix4 hamiltonian_wait(const SystemParams& p, double electron_detuning) {
  check_params(p);
  return electron_detuning * ops::Sz() + p.effective_omega_l() * ops::Iz() +
         hyperfine_terms(p);
}

Matrix4 hamiltonian_rf(const SystemParams& p, const DriveParams& d,
                       double electron_detuning) {
  check_params(p);
  if (d.kind != DriveKind::Radiofrequency)
    throw std::invalid_argument("hamiltonian_rf: drive kind is not Radiofrequency");
  if (d.rabi < 0.0) throw std::invalid_argument("hamiltonian_rf: negative Rabi frequency");
  return d.detuning * ops::Iz() +
         d.rabi * (std::cos(d.phase) * ops::Ix() + std::sin(d.phase) * ops::Iy()) +
         p.a_par * ops::Sz() * ops::Iz() + electron_detuning * ops::Sz();
}

Matrix4 hamiltonian_wait_rf_frame(const SystemParams& p, double rf_detuning,
                                  double electron_detuning) {
  check_params(p);
  return rf_detuning * ops::Iz() + p.a_par * ops::Sz() * ops::Iz() +
         electron_detuning * ops::Sz();
}

Matrix4 hamiltonian_timedep(const SystemParams& p, double rf_amplitude,
                            double rf_freq_mhz, double t) {
  check_params(p);
  const double w_rf = rad_from_mhz(rf_freq_mhz);
  return p.effective_omega_l() * ops::Iz() + hyperfine_terms(p) +
         2.0 * rf_amplitude * std::cos(w_rf * t) * ops::Ix();
}

double larmor_frequency_mhz(double gamma_n_mhz_per_t, double b_field_t) {
  return gamma_n_mhz_per_t * b_field_t;
}

double hh_transfer_time(double a_perp) {
  if (a_perp <= 0.0) throw std::invalid_argument("hh_transfer_time: a_perp must be positive");
  return kTwoPi / a_perp;
}

}  // namespace sivsim
