// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "tfac/errors.hpp"
#include "tfac/types.hpp"

namespace tfac {

// Eigenvalues of a general dense complex matrix.
inline CVector spectrum(const CMatrix& a) {
  if (a.rows() != a.cols()) throw NumericsError("spectrum: matrix is not square");
  if (!a.allFinite()) throw NumericsError("spectrum: non-finite input");
  Eigen::ComplexEigenSolver<CMatrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericsError("spectrum: eigensolver did not converge");
  return es.eigenvalues();
}

// Operator (spectral) norm: largest singular value via a full SVD.
inline double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (!a.allFinite()) throw NumericsError("op_norm: non-finite input");
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

// 2-norm condition number of the eigenvector matrix; a large value flags a
// nearly defective spectrum.
inline double eigenvector_condition(const CMatrix& vectors) {
  Eigen::BDCSVD<CMatrix> svd(vectors);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

// Unitary Schur form Z = Q T Q^H with T upper triangular. Shifted resolvents
// (Z - mu)^{-1} then reduce to triangular solves reusing one decomposition.
struct SchurForm {
  CMatrix q;
  CMatrix t;
  CVector eigenvalues;  // diagonal of t
};

inline SchurForm schur_form(const CMatrix& z) {
  if (z.rows() != z.cols()) throw NumericsError("schur_form: matrix is not square");
  if (!z.allFinite()) throw NumericsError("schur_form: non-finite input");
  Eigen::ComplexSchur<CMatrix> sch(z);
  if (sch.info() != Eigen::Success) throw NumericsError("schur_form: decomposition failed");
  SchurForm f;
  f.q = sch.matrixU();
  f.t = sch.matrixT();
  f.eigenvalues = f.t.diagonal();
  return f;
}

}  // namespace tfac
