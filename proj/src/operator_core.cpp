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

#include "sivsim/operator_core.hpp"

#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace sivsim {

double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityMatrix::DensityMatrix(const Matrix4& rho, double eig_tol) : rho_(rho) {
  const double trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
  const double herm_defect = hermiticity_defect(rho);
  double min_eig = 0.0;
  bool positive = true;
  if (trace_defect <= kTraceTol && herm_defect <= kHermTol) {
    min_eig = min_eigenvalue(rho);
    positive = min_eig >= -eig_tol;
  }
  if (trace_defect > kTraceTol || herm_defect > kHermTol || !positive) {
    std::ostringstream msg;
    msg << "invalid density matrix: |tr-1|=" << trace_defect
        << " herm_defect=" << herm_defect << " min_eig=" << min_eig;
    throw std::runtime_error(msg.str());
  }
}

DensityMatrix DensityMatrix::pure(const Eigen::Vector4cd& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw std::invalid_argument("pure state from zero vector");
  Eigen::Vector4cd u = psi / n;
  return DensityMatrix(u * u.adjoint());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix expm_hermitian(const Matrix& h, double t) {
  if (h.rows() != h.cols()) throw std::invalid_argument("expm_hermitian: non-square");
  if (hermiticity_defect(h) > 1e-9 * (1.0 + h.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("expm_hermitian: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& w = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  Vector phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    phases(k) = std::exp(Complex(0.0, -w(k) * t));
  return v * phases.asDiagonal() * v.adjoint();
}

Vector vec(const Matrix& rho) {
  Vector v(rho.size());
  // column stacking: column j occupies entries [j*rows, (j+1)*rows)
  for (Eigen::Index j = 0; j < rho.cols(); ++j)
    v.segment(j * rho.rows(), rho.rows()) = rho.col(j);
  return v;
}

Matrix unvec(const Vector& v, int dim) {
  if (v.size() != Eigen::Index(dim) * dim) throw std::invalid_argument("unvec: size mismatch");
  Matrix m(dim, dim);
  for (int j = 0; j < dim; ++j) m.col(j) = v.segment(j * dim, dim);
  return m;
}

Matrix build_liouvillian(const Matrix& h, std::span<const Lindblad> channels) {
  if (h.rows() != h.cols()) throw std::invalid_argument("build_liouvillian: non-square H");
  const Eigen::Index d = h.rows();
  const Matrix id = Matrix::Identity(d, d);
  const Complex mi(0.0, -1.0);
  Matrix l = mi * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& ch : channels) {
    if (ch.rate < 0.0) throw std::invalid_argument("build_liouvillian: negative rate");
    if (ch.rate == 0.0) continue;
    if (ch.jump.rows() != d || ch.jump.cols() != d)
      throw std::invalid_argument("build_liouvillian: jump dimension mismatch");
    const Matrix ldl = ch.jump.adjoint() * ch.jump;
    l += ch.rate * (kron(ch.jump.conjugate(), ch.jump) -
                    0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id));
  }
  return l;
}

Matrix expm_superoperator(const Matrix& l, double t) {
  if (l.rows() != l.cols()) throw std::invalid_argument("expm_superoperator: non-square");
  return (l * t).exp();
}

}  // namespace sivsim
