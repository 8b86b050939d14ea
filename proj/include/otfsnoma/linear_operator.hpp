// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>

#include "otfsnoma/types.hpp"

namespace otfsnoma {

// Matrix-free A and A^H. Callbacks must be re-entrant.
template <typename Real>
struct LinearOperator {
  using Vector = CVector<Real>;

  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> apply_adjoint;
};

template <typename Derived>
LinearOperator<typename Derived::RealScalar> dense_operator(const Eigen::MatrixBase<Derived>& A) {
  using Real = typename Derived::RealScalar;
  auto mat = std::make_shared<const CMatrix<Real>>(A);
  LinearOperator<Real> op;
  op.rows = mat->rows();
  op.cols = mat->cols();
  op.apply = [mat](const CVector<Real>& v) -> CVector<Real> { return (*mat) * v; };
  op.apply_adjoint = [mat](const CVector<Real>& u) -> CVector<Real> {
    return mat->adjoint() * u;
  };
  return op;
}

// Dense copy of an operator, one application per column.
template <typename Real>
CMatrix<Real> to_dense(const LinearOperator<Real>& op) {
  CMatrix<Real> A(op.rows, op.cols);
  CVector<Real> e = CVector<Real>::Zero(op.cols);
  for (Eigen::Index j = 0; j < op.cols; ++j) {
    e.setZero();
    e[j] = Real(1);
    A.col(j) = op.apply(e);
  }
  return A;
}

// First column A e_0.
template <typename Real>
CVector<Real> first_column(const LinearOperator<Real>& op) {
  CVector<Real> e = CVector<Real>::Zero(op.cols);
  e[0] = Real(1);
  return op.apply(e);
}

}  // namespace otfsnoma
