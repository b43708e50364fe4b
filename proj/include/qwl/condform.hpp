// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwl/superop.hpp"

namespace qwl {

struct InternalTerm {
  double lambda = 0.0;
  CMatrix x;  // traceless, tr(X^* X) = 1
};

/// L(A) = sA + YA + AY^* + sum_i lambda_i X_i A X_i^*.
struct CanonicalForm {
  int dim = 0;
  double s = 0.0;
  CMatrix y;
  std::vector<InternalTerm> internal;
};

enum class ConditionalClass { ConditionallyPositive, ConditionallyNegative, ConditionallyZero, Indefinite };

const char* to_string(ConditionalClass c);

struct ClassResult {
  ConditionalClass cls = ConditionalClass::ConditionallyZero;
  std::vector<double> eigenvalues;  // internal spectrum, descending
  double threshold = 0.0;
};

/// Orthonormal operator basis under tr(A^* B): F_0 = I and traceless F_1..F_{d^2-1}.
/// A nonzero seed rotates the traceless block by a random unitary.
std::vector<CMatrix> operator_basis(int d, std::uint64_t seed = 0);

/// Coefficient matrix c with L(A) = sum_{mu,nu} c_{mu nu} F_mu A F_nu^*.
CMatrix basis_coefficients(const SuperOperator& l, const std::vector<CMatrix>& basis);

CanonicalForm canonical_form(const SuperOperator& l, const TolerancePolicy& tol = {},
                             std::uint64_t basis_seed = 0);
SuperOperator reassemble(const CanonicalForm& cf);
ClassResult classify(const SuperOperator& l, const TolerancePolicy& tol = {});

/// Choi matrix compressed to the complement of the maximally entangled vector. Its
/// spectrum is the internal spectrum scaled by the dimension.
CMatrix perp_choi(const SuperOperator& l);

/// Vector v orthogonal to vec(I) with v^* Choi v < 0, if the internal part has a
/// negative eigenvalue below tolerance.
std::optional<CVector> conditional_negativity_witness(const SuperOperator& l, const TolerancePolicy& tol = {});

struct CpCriterionResult {
  bool is_cp = false;
  std::vector<cplx> c;       // Y = sum c_i X_i
  double residual2 = 0.0;    // tr((Y - sum c_i X_i)^*(Y - sum c_i X_i))
  double ratio_sum = 0.0;    // sum |c_i|^2 / lambda_i
  bool used_choi_fallback = false;
  std::string note;
};

CpCriterionResult cp_criterion(const CanonicalForm& cf, const TolerancePolicy& tol = {});

/// [[sI, Y^*], [Y, rho(I)]] with rho the internal part.
CMatrix block_matrix(const CanonicalForm& cf);
bool block_inequality_check(const CanonicalForm& cf, const TolerancePolicy& tol = {});

/// psi(A) = YA + AY^* - phi(A), Y = (T + phi(I))/2 + iC, so psi(I) = T and psi + phi is
/// conditionally zero.
SuperOperator complete_to_cond_zero(const SuperOperator& phi, const CMatrix& t,
                                    const std::optional<CMatrix>& c = std::nullopt,
                                    const TolerancePolicy& tol = {});

SuperOperator invert_cond_negative(const SuperOperator& phi, const TolerancePolicy& tol = {});

std::vector<bool> exp_semigroup_cp_check(const SuperOperator& l, const std::vector<double>& ts,
                                         const TolerancePolicy& tol = {});
SuperOperator exp_map(const SuperOperator& l, double t);

}  // namespace qwl
