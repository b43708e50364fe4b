// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/condform.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qwl/random.hpp"

namespace qwl {

const char* to_string(ConditionalClass c) {
  switch (c) {
    case ConditionalClass::ConditionallyPositive: return "ConditionallyPositive";
    case ConditionalClass::ConditionallyNegative: return "ConditionallyNegative";
    case ConditionalClass::ConditionallyZero: return "ConditionallyZero";
    case ConditionalClass::Indefinite: return "Indefinite";
  }
  return "Indefinite";
}

std::vector<CMatrix> operator_basis(int d, std::uint64_t seed) {
  // Gram-Schmidt of I, e_00, e_01, ... under the normalized trace inner product.
  std::vector<CMatrix> out;
  std::vector<CMatrix> candidates;
  candidates.push_back(CMatrix::Identity(d, d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) candidates.push_back(matrix_unit(d, i, j));
  for (CMatrix f : candidates) {
    for (const CMatrix& g : out) f -= ntrace(g.adjoint() * f) * g;
    const double nrm = std::sqrt(std::max(0.0, ntrace(f.adjoint() * f).real()));
    if (nrm < 1e-8) continue;
    out.push_back(f / nrm);
    if (static_cast<int>(out.size()) == d * d) break;
  }
  if (seed != 0 && d > 1) {
    Rng rng(seed);
    const CMatrix u = random_unitary(rng, d * d - 1);
    std::vector<CMatrix> rotated(out.size());
    rotated[0] = out[0];
    for (int mu = 1; mu < d * d; ++mu) {
      CMatrix acc = CMatrix::Zero(d, d);
      for (int nu = 1; nu < d * d; ++nu) acc += u(nu - 1, mu - 1) * out[nu];
      rotated[mu] = acc;
    }
    out = std::move(rotated);
  }
  return out;
}

CMatrix basis_coefficients(const SuperOperator& l, const std::vector<CMatrix>& basis) {
  const int d = l.dim_in();
  const int n = static_cast<int>(basis.size());
  CMatrix v(d * d, n);
  for (int k = 0; k < n; ++k) v.col(k) = vec(basis[k]);
  return v.adjoint() * choi(l) * v / static_cast<double>(d * d);
}

namespace {

void require_hermitian_square(const SuperOperator& l, const TolerancePolicy& tol) {
  if (l.dim_in() != l.dim_out()) throw NonHermitianMap("map must send B(C^p) into itself");
  if (!l.is_hermitian(tol)) throw NonHermitianMap("map is not hermitian");
}

struct BlockSpectrum {
  CMatrix c;
  EigResult eig;
  double scale = 1.0;
};

BlockSpectrum internal_block(const SuperOperator& l, const std::vector<CMatrix>& basis,
                             const TolerancePolicy& tol) {
  BlockSpectrum b;
  b.c = basis_coefficients(l, basis);
  const int n = static_cast<int>(basis.size());
  b.scale = std::max(1.0, hermitian_norm(b.c));
  if (n > 1) b.eig = hermitian_eig(hermitian_part(b.c.bottomRightCorner(n - 1, n - 1)), tol);
  return b;
}

}  // namespace

CanonicalForm canonical_form(const SuperOperator& l, const TolerancePolicy& tol, std::uint64_t basis_seed) {
  require_hermitian_square(l, tol);
  const int d = l.dim_in();
  const std::vector<CMatrix> basis = operator_basis(d, basis_seed);
  const BlockSpectrum b = internal_block(l, basis, tol);
  CanonicalForm cf;
  cf.dim = d;
  cf.s = b.c(0, 0).real();
  cf.y = CMatrix::Zero(d, d);
  for (int mu = 1; mu < d * d; ++mu) cf.y += b.c(mu, 0) * basis[mu];
  const double drop = 1e-14 * b.scale;
  for (int i = 0; i < b.eig.values.size(); ++i) {
    if (std::abs(b.eig.values(i)) <= drop) continue;
    CMatrix x = CMatrix::Zero(d, d);
    for (int mu = 1; mu < d * d; ++mu) x += b.eig.vectors(mu - 1, i) * basis[mu];
    cf.internal.push_back({b.eig.values(i), x});
  }
  return cf;
}

SuperOperator reassemble(const CanonicalForm& cf) {
  const int d = cf.dim;
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix m = cf.s * CMatrix::Identity(d * d, d * d);
  m += kron(cf.y, id) + kron(id, cf.y.conjugate());
  for (const InternalTerm& t : cf.internal) m += t.lambda * kron(t.x, t.x.conjugate());
  return SuperOperator(d, d, std::move(m));
}

ClassResult classify(const SuperOperator& l, const TolerancePolicy& tol) {
  require_hermitian_square(l, tol);
  const BlockSpectrum b = internal_block(l, operator_basis(l.dim_in()), tol);
  ClassResult r;
  r.threshold = tol.eps_psd * b.scale;
  for (int i = 0; i < b.eig.values.size(); ++i) r.eigenvalues.push_back(b.eig.values(i));
  if (r.eigenvalues.empty()) {
    r.cls = ConditionalClass::ConditionallyZero;
    return r;
  }
  const double top = r.eigenvalues.front();
  const double bottom = r.eigenvalues.back();
  if (top <= r.threshold && bottom >= -r.threshold)
    r.cls = ConditionalClass::ConditionallyZero;
  else if (bottom >= -r.threshold)
    r.cls = ConditionalClass::ConditionallyPositive;
  else if (top <= r.threshold)
    r.cls = ConditionalClass::ConditionallyNegative;
  else
    r.cls = ConditionalClass::Indefinite;
  return r;
}

CMatrix perp_choi(const SuperOperator& l) {
  const int d = l.dim_in();
  const CVector omega = vec(CMatrix::Identity(d, d)) / std::sqrt(static_cast<double>(d));
  const CMatrix p = CMatrix::Identity(d * d, d * d) - omega * omega.adjoint();
  return p * choi(l) * p;
}

std::optional<CVector> conditional_negativity_witness(const SuperOperator& l, const TolerancePolicy& tol) {
  const ClassResult cls = classify(l, tol);
  if (cls.eigenvalues.empty() || cls.eigenvalues.back() >= -cls.threshold) return std::nullopt;
  const EigResult e = hermitian_eig(hermitian_part(perp_choi(l)), tol);
  return e.vectors.col(e.values.size() - 1);
}

CpCriterionResult cp_criterion(const CanonicalForm& cf, const TolerancePolicy& tol) {
  CpCriterionResult r;
  const int d = cf.dim;
  bool degenerate = false;
  for (const InternalTerm& t : cf.internal)
    if (t.lambda <= tol.eps_psd) degenerate = true;
  if (degenerate) {
    r.used_choi_fallback = true;
    r.note = "internal part has an eigenvalue at or below eps_psd; decided by the Choi test";
    r.is_cp = is_completely_positive(reassemble(cf), tol).is_cp;
    return r;
  }
  CMatrix residual = cf.y;
  for (const InternalTerm& t : cf.internal) {
    const cplx ci = ntrace(t.x.adjoint() * cf.y);
    r.c.push_back(ci);
    residual -= ci * t.x;
    r.ratio_sum += std::norm(ci) / t.lambda;
  }
  r.residual2 = ntrace(residual.adjoint() * residual).real();
  const double ynorm = std::sqrt(std::max(0.0, ntrace(cf.y.adjoint() * cf.y).real()));
  const bool in_span = std::sqrt(r.residual2) <= tol.eps_rank * std::max(1.0, ynorm);
  r.is_cp = in_span && r.ratio_sum <= cf.s + tol.eps_eq * std::max(1.0, std::abs(cf.s));
  if (!in_span) r.note = "Y is not in the span of the internal operators";
  (void)d;
  return r;
}

CMatrix block_matrix(const CanonicalForm& cf) {
  const int d = cf.dim;
  CMatrix rho = CMatrix::Zero(d, d);
  for (const InternalTerm& t : cf.internal) rho += t.lambda * t.x * t.x.adjoint();
  CMatrix b(2 * d, 2 * d);
  b.topLeftCorner(d, d) = cf.s * CMatrix::Identity(d, d);
  b.topRightCorner(d, d) = cf.y.adjoint();
  b.bottomLeftCorner(d, d) = cf.y;
  b.bottomRightCorner(d, d) = rho;
  return b;
}

bool block_inequality_check(const CanonicalForm& cf, const TolerancePolicy& tol) {
  return min_eig_psd_test(block_matrix(cf), tol).is_psd;
}

SuperOperator complete_to_cond_zero(const SuperOperator& phi, const CMatrix& t,
                                    const std::optional<CMatrix>& c, const TolerancePolicy& tol) {
  const int d = phi.dim_in();
  if (phi.dim_out() != d) throw DimensionMismatch("complete_to_cond_zero: map must be square");
  if (t.rows() != d || t.cols() != d) throw DimensionMismatch("complete_to_cond_zero: T has the wrong shape");
  if (hermitian_defect(t) > tol.eps_eq * std::max(1.0, t.cwiseAbs().maxCoeff()))
    throw NonHermitianInput("complete_to_cond_zero: T is not hermitian");
  if (!is_completely_positive(phi, tol).is_cp)
    throw NotCompletelyPositive("complete_to_cond_zero: phi is not completely positive");
  CMatrix cc = c.value_or(CMatrix::Zero(d, d));
  if (hermitian_defect(cc) > tol.eps_eq * std::max(1.0, cc.cwiseAbs().maxCoeff()))
    throw NonHermitianInput("complete_to_cond_zero: C is not hermitian");
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix y = 0.5 * (hermitian_part(t) + phi.apply(id)) + cplx(0, 1) * hermitian_part(cc);
  const SuperOperator psi =
      SuperOperator(d, d, kron(y, id) + kron(id, y.conjugate())) - phi;
  const double unit_err = (psi.apply(id) - t).cwiseAbs().maxCoeff();
  if (unit_err > tol.eps_eq * std::max(1.0, t.cwiseAbs().maxCoeff()))
    throw Error("complete_to_cond_zero: psi(I) differs from T");
  if (classify(psi + phi, tol).cls != ConditionalClass::ConditionallyZero)
    throw Error("complete_to_cond_zero: psi + phi is not conditionally zero");
  return psi;
}

SuperOperator invert_cond_negative(const SuperOperator& phi, const TolerancePolicy& tol) {
  const ClassResult cls = classify(phi, tol);
  if (cls.cls != ConditionalClass::ConditionallyNegative && cls.cls != ConditionalClass::ConditionallyZero)
    throw NotConditionallyNegative(std::string("invert_cond_negative: map is ") + to_string(cls.cls));
  const int d = phi.dim_in();
  const EigResult unit = hermitian_eig(hermitian_part(phi.apply(CMatrix::Identity(d, d))), tol);
  const double lo = unit.values(d - 1);
  if (!(lo > tol.eps_psd))
    throw UnitLowerBoundViolated("invert_cond_negative: lambda_min(phi(I)) = " + std::to_string(lo));
  const SuperOperator inv = inverse(phi);
  if (!is_completely_positive(inv, tol).is_cp)
    throw NotCompletelyPositive("invert_cond_negative: inverse failed the Choi test");
  return inv;
}

SuperOperator exp_map(const SuperOperator& l, double t) {
  const CMatrix m = (t * l.action()).exp();
  return SuperOperator(l.dim_in(), l.dim_out(), m);
}

std::vector<bool> exp_semigroup_cp_check(const SuperOperator& l, const std::vector<double>& ts,
                                         const TolerancePolicy& tol) {
  require_hermitian_square(l, tol);
  std::vector<bool> out;
  for (double t : ts) out.push_back(is_completely_positive(exp_map(l, t), tol).is_cp);
  return out;
}

}  // namespace qwl
