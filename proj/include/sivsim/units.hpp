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

// Unit conventions used throughout the library:
//   - time is in seconds
//   - frequencies are angular (rad/s) everywhere inside the library
//   - external interfaces (configs, CSV, CLI) speak ordinary frequencies in
//     MHz/kHz and times in us/ms; conversion happens here and only here.

namespace sivsim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// ordinary frequency -> angular frequency
inline constexpr double rad_from_mhz(double f_mhz) { return kTwoPi * f_mhz * 1e6; }
inline constexpr double rad_from_khz(double f_khz) { return kTwoPi * f_khz * 1e3; }

// angular frequency -> ordinary frequency
inline constexpr double mhz_from_rad(double w) { return w / (kTwoPi * 1e6); }
inline constexpr double khz_from_rad(double w) { return w / (kTwoPi * 1e3); }

// time
inline constexpr double sec_from_us(double t_us) { return t_us * 1e-6; }
inline constexpr double sec_from_ms(double t_ms) { return t_ms * 1e-3; }
inline constexpr double us_from_sec(double t_s) { return t_s * 1e6; }
inline constexpr double ms_from_sec(double t_s) { return t_s * 1e3; }

}  // namespace sivsim
