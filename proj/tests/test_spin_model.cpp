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

#include "sivsim/spin_model.hpp"
#include "sivsim/units.hpp"

using namespace sivsim;

namespace {
constexpr Complex kI{0.0, 1.0};

double max_abs(const Matrix4& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("Pauli algebra and joint-space embeddings") {
  CHECK(max_abs(Matrix4(kron(ops::sigma_x(), ops::id2()) -
                        2.0 * Matrix(ops::Sx()))) < 1e-15);
  CHECK(max_abs(Matrix4(kron(ops::id2(), ops::sigma_z()) -
                        2.0 * Matrix(ops::Iz()))) < 1e-15);
  // commutator [Sx, Sy] = i Sz on the joint space
  Matrix4 comm = ops::Sx() * ops::Sy() - ops::Sy() * ops::Sx();
  CHECK(max_abs(Matrix4(comm - kI * Matrix(ops::Sz()))) < 1e-15);
  // sigma_plus = |up><dn| in the up-first basis
  Matrix2 sp = ops::sigma_plus();
  CHECK(std::abs(sp(0, 1) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(sp(1, 0)) < 1e-15);
  // bright-state projector selects the electron-down block
  Matrix4 pd = ops::electron_dn_projector();
  CHECK(std::abs(pd(2, 2) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(pd(3, 3) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(pd(0, 0)) < 1e-15);
  CHECK(std::abs(pd.trace() - Complex(2.0, 0.0)) < 1e-15);
}

TEST_CASE("larmor frequency is the gyromagnetic ratio times field") {
  CHECK(larmor_frequency_mhz(10.705, 0.0) == 0.0);
  CHECK(larmor_frequency_mhz(10.705, 0.1887) ==
        doctest::Approx(2.0200335).epsilon(1e-9));
  // exact linearity: slope through three fields is the ratio itself
  const double b1 = 0.10, b2 = 0.17, b3 = 0.24;
  const double f1 = larmor_frequency_mhz(10.705, b1);
  const double f3 = larmor_frequency_mhz(10.705, b3);
  CHECK((f3 - f1) / (b3 - b1) == doctest::Approx(10.705).epsilon(1e-12));
  CHECK(larmor_frequency_mhz(10.705, b2) ==
        doctest::Approx(0.5 * (f1 + f3)).epsilon(1e-12));
}

TEST_CASE("hh_transfer_time is 2 pi over the transverse coupling") {
  const double a_perp = rad_from_khz(230.0);
  const double t = hh_transfer_time(a_perp);
  CHECK(t == doctest::Approx(2.0 * M_PI / a_perp).epsilon(1e-15));
  CHECK(sec_from_us(4.35) == doctest::Approx(t).epsilon(1e-3));  // quoted value
}

TEST_CASE("microwave Hamiltonian assembles the documented terms") {
  SystemParams p;
  DriveParams d;
  d.kind = DriveKind::Microwave;
  d.rabi = rad_from_mhz(10.0);
  d.phase = 0.7;
  d.detuning = rad_from_mhz(-0.4);
  Matrix4 h = hamiltonian_mw(p, d);
  Matrix4 expected =
      d.detuning * ops::Sz() +
      d.rabi * (std::cos(d.phase) * ops::Sx() + std::sin(d.phase) * ops::Sy()) +
      p.omega_l * ops::Iz() + p.a_perp * ops::Sz() * ops::Ix() +
      p.a_par * ops::Sz() * ops::Iz();
  CHECK(max_abs(Matrix4(h - expected)) < 1e-6);  // rad/s scale ~1e7
  CHECK(hermiticity_defect(h) < 1e-9);
}

TEST_CASE("wait Hamiltonian is the microwave one with the drive off") {
  SystemParams p;
  DriveParams off;
  off.kind = DriveKind::Microwave;
  Matrix4 h_wait = hamiltonian_wait(p, rad_from_mhz(0.3));
  off.detuning = rad_from_mhz(0.3);
  CHECK(max_abs(Matrix4(h_wait - hamiltonian_mw(p, off))) < 1e-9);
}

TEST_CASE("RF Hamiltonian keeps the secular hyperfine term only") {
  SystemParams p;
  DriveParams d;
  d.kind = DriveKind::Radiofrequency;
  d.rabi = rad_from_khz(10.1);
  d.phase = M_PI / 2.0;
  d.detuning = rad_from_khz(25.0);
  const double electron_detuning = rad_from_mhz(0.15);
  Matrix4 h = hamiltonian_rf(p, d, electron_detuning);
  Matrix4 expected = d.detuning * ops::Iz() +
                     d.rabi * (std::cos(d.phase) * ops::Ix() + std::sin(d.phase) * ops::Iy()) +
                     p.a_par * ops::Sz() * ops::Iz() + electron_detuning * ops::Sz();
  CHECK(max_abs(Matrix4(h - expected)) < 1e-8);
  // no a_perp Sz Ix term: the (0,1) block must not couple nuclear x at a_perp
  Matrix4 with_aperp = expected + p.a_perp * ops::Sz() * ops::Ix();
  CHECK(max_abs(Matrix4(h - with_aperp)) > rad_from_khz(50.0));
}

TEST_CASE("RF-frame wait matches the RF Hamiltonian with zero drive") {
  SystemParams p;
  DriveParams off;
  off.kind = DriveKind::Radiofrequency;
  off.detuning = rad_from_khz(12.0);
  Matrix4 a = hamiltonian_wait_rf_frame(p, off.detuning, rad_from_mhz(0.05));
  Matrix4 b = hamiltonian_rf(p, off, rad_from_mhz(0.05));
  CHECK(max_abs(Matrix4(a - b)) < 1e-9);
}

TEST_CASE("lab-frame RF Hamiltonian oscillates at the drive frequency") {
  SystemParams p;
  const double amp = rad_from_khz(20.0);
  const double f_mhz = 2.32;
  Matrix4 h0 = hamiltonian_timedep(p, amp, f_mhz, 0.0);
  // at t=0 the drive term is 2*amp*Ix on top of the static part
  Matrix4 static_part = p.omega_l * ops::Iz() + p.a_perp * ops::Sz() * ops::Ix() +
                        p.a_par * ops::Sz() * ops::Iz();
  CHECK(max_abs(Matrix4(h0 - static_part - 2.0 * amp * Matrix(ops::Ix()))) < 1e-6);
  // half a drive period later the drive term has flipped sign
  const double half_period = 0.5 / (f_mhz * 1e6);
  Matrix4 h_half = hamiltonian_timedep(p, amp, f_mhz, half_period);
  CHECK(max_abs(Matrix4(h_half - static_part + 2.0 * amp * Matrix(ops::Ix()))) < 1e-4);
}

TEST_CASE("effective_omega_l honors the derived flag") {
  SystemParams p;
  CHECK(p.effective_omega_l() == doctest::Approx(rad_from_mhz(1.96)).epsilon(1e-12));
  p.omega_l_derived = true;
  CHECK(p.effective_omega_l() ==
        doctest::Approx(rad_from_mhz(10.705 * 0.1887)).epsilon(1e-12));
}

TEST_CASE("validate_params flags the configured-vs-derived Larmor mismatch") {
  SystemParams p;
  auto notes = validate_params(p);
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].find("omega_l") != std::string::npos);
  CHECK(notes[0].find("using the configured value") != std::string::npos);

  p.omega_l_derived = true;
  CHECK(validate_params(p).empty());

  p.omega_l_derived = false;
  p.omega_l = rad_from_mhz(10.705 * 0.1887);
  CHECK(validate_params(p).empty());
}

TEST_CASE("validate_params flags inconsistent optical pumping") {
  SystemParams p;
  p.omega_l_derived = true;  // silence the Larmor note
  p.fluorescence.pump_rate = 5e3;  // below repump
  auto notes = validate_params(p);
  REQUIRE(notes.size() == 2);
  CHECK(notes[0].find("pump_rate") != std::string::npos);
  CHECK(notes[1].find("init_fidelity") != std::string::npos);
}

TEST_CASE("unit conversions round-trip") {
  CHECK(mhz_from_rad(rad_from_mhz(1.96)) == doctest::Approx(1.96).epsilon(1e-15));
  CHECK(khz_from_rad(rad_from_khz(230.0)) == doctest::Approx(230.0).epsilon(1e-15));
  CHECK(us_from_sec(sec_from_us(4.35)) == doctest::Approx(4.35).epsilon(1e-15));
  CHECK(rad_from_mhz(1.0) == doctest::Approx(2.0 * M_PI * 1e6).epsilon(1e-15));
}
