// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "qwl/errors.hpp"

namespace qwl {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerances shared by every positivity, equality and rank decision.
struct TolerancePolicy {
  double eps_psd = 1e-9;
  double eps_eq = 1e-9;
  double eps_rank = 1e-10;
  double quad_rel_err = 1e-10;

  void validate() const;

  static TolerancePolicy defaults() { return {}; }
  static TolerancePolicy strict() { return {1e-11, 1e-11, 1e-12, 1e-12}; }
  /// Profile selected by QWL_TOLERANCE_PROFILE (strict|default); unset means default.
  static TolerancePolicy from_env();
};

struct EigResult {
  RVector values;  // descending
  CMatrix vectors; // columns, unitary
};

struct PsdResult {
  bool is_psd = true;
  double min_eig = 0.0;
  double threshold = 0.0;
  CVector witness;  // empty when is_psd
};

// Hermitian spectral calculus.
double hermitian_defect(const CMatrix& a);
CMatrix hermitian_part(const CMatrix& a);
EigResult hermitian_eig(const CMatrix& a, const TolerancePolicy& tol = {});
PsdResult min_eig_psd_test(const CMatrix& a, const TolerancePolicy& tol = {});

// Norms and ranks.
double spectral_norm(const CMatrix& a);
double hermitian_norm(const CMatrix& a);
/// Singular-value floor used by every rank decision: eps_rank * max(1, sigma_max).
double rank_floor(const RVector& singular_values, double eps_rank);
int numerical_rank(const CMatrix& a, double eps_rank);
/// Orthonormal basis of ker(a) as columns.
CMatrix null_space(const CMatrix& a, double eps_rank);
/// Orthonormal basis of range(a) as columns.
CMatrix range_basis(const CMatrix& a, double eps_rank);
CMatrix polar_unitary(const CMatrix& a);
CMatrix projection_onto(const CMatrix& basis_columns);

// Matrix-unit bookkeeping. vec is row-major: v[i*cols + j] = A(i,j).
CVector vec(const CMatrix& a);
CMatrix unvec(const CVector& v, int rows, int cols);
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix matrix_unit(int d, int i, int j);
/// Normalized trace tr(A) = Tr(A)/d.
cplx ntrace(const CMatrix& a);
/// Scale a vector so its largest-magnitude entry is real and positive.
CVector fix_phase(const CVector& v);

// Special functions and quadrature.
/// Upper incomplete gamma Gamma(s, x) for s > -1, x >= 0.
double upper_incomplete_gamma(double s, double x);

/// Integral of f over [a, b]; b may be +infinity. Tanh-sinh with level doubling and
/// bisection fallback. A level is accepted once successive estimates differ by at most
/// max(rel_err |I|, abs_err); callers integrating parts of a complex value pass an abs_err
/// scaled to its modulus so that a part equal to rounding noise terminates.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double rel_err = 1e-10, double abs_err = 0.0);

}  // namespace qwl
