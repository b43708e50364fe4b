// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#pragma once

#include <functional>
#include <vector>

#include "qwl/numerics.hpp"

namespace qwl {

/// Linear map B(C^d) -> B(C^d'). The action matrix is d'^2 x d^2 with
/// vec(phi(A)) = action * vec(A) in the row-major matrix-unit basis.
class SuperOperator {
 public:
  SuperOperator() = default;
  SuperOperator(int dim_in, int dim_out, CMatrix action);

  static SuperOperator identity(int d);
  static SuperOperator zero(int dim_in, int dim_out);
  static SuperOperator from_function(int dim_in, int dim_out,
                                     const std::function<CMatrix(const CMatrix&)>& f);
  /// A -> X A Y.
  static SuperOperator sandwich(const CMatrix& x, const CMatrix& y);
  /// A -> sum_k w_k S_k A S_k^*.
  static SuperOperator from_kraus(const std::vector<CMatrix>& ops,
                                  const std::vector<double>& weights = {});
  static SuperOperator from_choi(const CMatrix& choi, int dim_in, int dim_out);

  int dim_in() const { return din_; }
  int dim_out() const { return dout_; }
  const CMatrix& action() const { return action_; }

  CMatrix apply(const CMatrix& a) const;
  CMatrix operator()(const CMatrix& a) const { return apply(a); }

  /// max |phi(A^*) - phi(A)^*| over matrix units; zero for hermitian maps.
  double hermitian_defect() const;
  bool is_hermitian(const TolerancePolicy& tol = {}) const;

  SuperOperator operator+(const SuperOperator& o) const;
  SuperOperator operator-(const SuperOperator& o) const;
  SuperOperator operator-() const;
  SuperOperator operator*(double s) const;
  SuperOperator scaled(cplx s) const;

 private:
  int din_ = 0;
  int dout_ = 0;
  CMatrix action_;
};

SuperOperator operator*(double s, const SuperOperator& phi);

/// Choi/super matrix, entry ((i,n),(j,m)) = phi(e_nm)_ij.
CMatrix choi(const SuperOperator& phi);

struct CpResult {
  bool is_cp = true;
  double min_eig = 0.0;
  CVector witness;  // Choi eigenvector for the most negative eigenvalue
  /// Family (A_n, f_n) with sum (f_n, phi(A_n^* A_m) f_m) < 0, from the witness.
  std::vector<CMatrix> family_a;
  std::vector<CVector> family_f;
};

CpResult is_completely_positive(const SuperOperator& phi, const TolerancePolicy& tol = {});

/// Kraus form of a CP map: phi(A) = sum_k w_k S_k A S_k^*.
struct KrausForm {
  std::vector<CMatrix> ops;
  std::vector<double> weights;
};

/// Kraus operators from scaled Choi eigenvectors, weights +1, pairwise orthogonal.
KrausForm kraus(const SuperOperator& phi, const TolerancePolicy& tol = {});

/// Decomposition of a hermitian map as sum_k w_k S_k A S_k^* with tr(S_j^* S_k) = delta_jk
/// under the normalized trace and real weights of either sign.
KrausForm hermitian_kraus(const SuperOperator& phi, const TolerancePolicy& tol = {});

SuperOperator kraus_to_superop(const KrausForm& k);

struct NormEstimate {
  double value = 0.0;
  bool exact = false;  // true when the CP shortcut ||phi(I)|| applied
};

/// Operator norm sup ||phi(A)|| / ||A||. Exact for CP maps; otherwise a lower estimate
/// from unitary ascent started at all clock-shift unitaries and 32 seeded random unitaries.
NormEstimate op_norm(const SuperOperator& phi, const TolerancePolicy& tol = {});
/// Exact norm of a CP map.
double cp_norm(const SuperOperator& phi);
/// ||phi||_HS = Frobenius(action) / sqrt(d d').
double hs_norm(const SuperOperator& phi);

/// psi o phi.
SuperOperator compose(const SuperOperator& psi, const SuperOperator& phi);
/// Hilbert-Schmidt adjoint under the trace: Kraus operators S -> S^*.
SuperOperator tilde_adjoint(const SuperOperator& psi);
SuperOperator inverse(const SuperOperator& phi, double eps_rank = 1e-12);

/// Coordinates of phi on span(basis): column k holds the coefficients of phi(basis[k]).
CMatrix restrict_coords(const SuperOperator& phi, const std::vector<CMatrix>& basis,
                        const TolerancePolicy& tol = {});
/// Restriction to a q^2-element basis ordered as matrix units E_ij (row-major) giving a
/// map on q x q coordinates.
SuperOperator restrict(const SuperOperator& phi, const std::vector<CMatrix>& basis,
                       const TolerancePolicy& tol = {});

/// Weyl clock-shift unitaries X^a Z^b, a,b = 0..d-1.
std::vector<CMatrix> weyl_unitaries(int d);

}  // namespace qwl
