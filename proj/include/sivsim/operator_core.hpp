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

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sivsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;

// Tolerances for density-matrix validity.  Freshly constructed states are
// held to the tight bounds; positivity gets a slightly looser bound so that
// rounding accumulated over long propagations does not trip hard failures.
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kHermTol = 1e-9;
inline constexpr double kEigTol = 1e-8;

// max_ij |m - m^dagger|
double hermiticity_defect(const Matrix& m);

// smallest eigenvalue of a Hermitian matrix
double min_eigenvalue(const Matrix& m);

// Validated 4x4 density matrix of the electron-nuclear pair.
// Construction checks trace == 1, Hermiticity and positivity and throws
// std::runtime_error with the offending norm otherwise; there is no silent
// renormalization anywhere.
class DensityMatrix {
 public:
  DensityMatrix() : rho_(Matrix4::Zero()) { rho_(0, 0) = 1.0; }
  explicit DensityMatrix(const Matrix4& rho, double eig_tol = kEigTol);

  const Matrix4& matrix() const { return rho_; }

  static DensityMatrix pure(const Eigen::Vector4cd& psi);

 private:
  Matrix4 rho_;
};

// Kronecker product, row-major block convention: (a kron b) has block
// a(i,j) * b at block index (i,j).
Matrix kron(const Matrix& a, const Matrix& b);

// exp(-i h t) for Hermitian h, via eigendecomposition (exactly unitary up to
// rounding; preferred over Pade for propagators).
Matrix expm_hermitian(const Matrix& h, double t);

struct Lindblad {
  Matrix jump;  // jump operator L_k
  double rate;  // nonnegative rate gamma_k (1/s)
};

// Column-stacking vectorization: vec(rho) stacks columns, so that
// vec(A rho B) = (B^T kron A) vec(rho).  This is the one place the
// convention is fixed; everything else goes through these helpers.
Vector vec(const Matrix& rho);
Matrix unvec(const Vector& v, int dim);

// Liouvillian superoperator L for d(rho)/dt = L rho with
//   L = -i(I kron H) + i(H^T kron I)
//     + sum_k rate_k [ conj(L_k) kron L_k
//                      - 1/2 (I kron L_k^dag L_k)
//                      - 1/2 ((L_k^dag L_k)^T kron I) ]
// acting on column-stacked density matrices.  For a d-dim Hilbert space the
// result is d^2 x d^2 (16x16 for the spin pair).
Matrix build_liouvillian(const Matrix& h, std::span<const Lindblad> channels);

// exp(L t) by scaling-and-squaring Pade approximation (L is not normal in
// general, so the eigendecomposition route is not safe here).
Matrix expm_superoperator(const Matrix& l, double t);

}  // namespace sivsim
