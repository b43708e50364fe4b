// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors
//
// Completely positive contractive idempotents on B(C^p): support projection, the product
// A * B = L(AB) on the range, matrix units and the maximal support projection.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qwl/superop.hpp"

namespace qwl {

struct IdempotentReport {
  bool holds = false;
  bool cp = false;
  bool contractive = false;
  bool idempotent = false;
  double min_choi_eig = 0.0;
  double unit_norm = 0.0;          // ||L(I)||
  double idempotent_defect = 0.0;  // max entry of action(L o L - L)
};

IdempotentReport verify_idempotent(const SuperOperator& l, const TolerancePolicy& tol = {});

/// Projection onto the span of the ranges of the Kraus adjoints. Throws NotIdempotent.
CMatrix support_projection(const SuperOperator& l, const TolerancePolicy& tol = {});

/// L(AB) for A, B in the range of L. Throws OperandOutsideRange.
CMatrix star(const SuperOperator& l, const CMatrix& a, const CMatrix& b, const TolerancePolicy& tol = {});

/// Orthonormal (Frobenius) hermitian basis of the real span of the hermitian and
/// skew-hermitian parts of the given matrices.
std::vector<CMatrix> hermitian_span_basis(const std::vector<CMatrix>& mats, double eps_rank);

/// Hermitian basis of the range of a hermitian-preserving map.
std::vector<CMatrix> range_matrices(const SuperOperator& l, const TolerancePolicy& tol = {});

/// One simple summand of the range: E_ij at index i*q+j, with central projection L(z).
struct RangeFactor {
  int q = 0;
  std::vector<CMatrix> units;
  CMatrix central;

  const CMatrix& unit(int i, int j) const { return units[static_cast<size_t>(i * q + j)]; }
};

/// Matrix units of (range L, *), one family per minimal central projection, ordered by the
/// first basis index each summand occupies. Throws NotIdempotent or NumericallyDegenerateCenter.
std::vector<RangeFactor> matrix_units(const SuperOperator& l, std::uint64_t seed = 1,
                                      const TolerancePolicy& tol = {});

struct PlusMinus {
  CMatrix plus;   // support projection
  CMatrix minus;  // projection onto eigenvalues >= 1
};

/// Throws NotPositive, or NumericallyDegenerateCenter for eigenvalues in the gap just below 1.
PlusMinus plus_minus(const CMatrix& a, const TolerancePolicy& tol = {});

struct MaximalSupport {
  CMatrix p;
  std::vector<CMatrix> t;  // T_i of every factor in order
  bool dominates_support = false;
  bool commutes_with_units = false;
  bool absorbs_unit = false;  // P I_o = I_o P = P
};

MaximalSupport maximal_support_projection(const SuperOperator& l, const std::vector<RangeFactor>& factors,
                                          const TolerancePolicy& tol = {});
MaximalSupport maximal_support_projection(const SuperOperator& l, const TolerancePolicy& tol = {});

/// Hermitian basis of {X : [X, B] = 0 for every B in basis}.
std::vector<CMatrix> range_commutant(const std::vector<CMatrix>& basis, const TolerancePolicy& tol = {});

struct ChoiEffrosStructure {
  SuperOperator l;
  CMatrix f;
  CMatrix unit;  // I_o = L(I)
  std::vector<CMatrix> range;
  std::vector<RangeFactor> factors;
  MaximalSupport support;
  std::vector<CMatrix> commutant;
};

ChoiEffrosStructure choi_effros(const SuperOperator& l, std::uint64_t seed = 1, const TolerancePolicy& tol = {});

struct CompressionCheck {
  bool holds = false;
  CMatrix e;
  bool e_in_commutant = false;
  double compression_defect = 0.0;  // max |L1(A) - E L(A) E| over matrix units
};

/// For idempotent CP contractions L >= L1 with L1(I) = E a projection: verifies that E commutes
/// with the range of L and L1 = E L(.) E. Throws HypothesisViolated naming the failed premise.
CompressionCheck corner_compression_check(const SuperOperator& l, const SuperOperator& l1,
                                          const TolerancePolicy& tol = {});

}  // namespace qwl
