// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/choieffros.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qwl/random.hpp"

namespace qwl {

namespace {

constexpr int kMaxDraws = 8;

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

// Eigenvalue clusters of a hermitian matrix, ascending. Returns false if two clusters are
// closer than min_gap (relative to the spectral scale).
struct Cluster {
  double value = 0.0;
  std::vector<int> cols;
};

bool cluster_spectrum(const EigResult& e, double min_gap, std::vector<Cluster>& out) {
  out.clear();
  const int n = static_cast<int>(e.values.size());
  if (n == 0) return true;
  const double scale = std::max(1.0, std::max(std::abs(e.values(0)), std::abs(e.values(n - 1))));
  const double same = 1e-7 * scale;
  for (int k = n - 1; k >= 0; --k) {
    const double v = e.values(k);
    if (!out.empty() && v - out.back().value <= same) {
      out.back().cols.push_back(k);
      continue;
    }
    if (!out.empty() && v - out.back().value < min_gap * scale) return false;
    out.push_back({v, {k}});
  }
  return true;
}

CMatrix cluster_projection(const CMatrix& frame, const EigResult& e, const Cluster& c) {
  CMatrix q(e.vectors.rows(), static_cast<Eigen::Index>(c.cols.size()));
  for (size_t k = 0; k < c.cols.size(); ++k) q.col(static_cast<Eigen::Index>(k)) = e.vectors.col(c.cols[k]);
  const CMatrix v = frame * q;
  return v * v.adjoint();
}

// Eigenvalue clusters of frame^* h frame as projections on the ambient space.
bool spectral_projections(const CMatrix& h, const CMatrix& frame, double min_gap, const TolerancePolicy& tol,
                          std::vector<CMatrix>& out) {
  const EigResult e = hermitian_eig(hermitian_part(frame.adjoint() * h * frame), tol);
  std::vector<Cluster> clusters;
  if (!cluster_spectrum(e, min_gap, clusters)) return false;
  out.clear();
  for (const Cluster& c : clusters) out.push_back(cluster_projection(frame, e, c));
  return true;
}

CMatrix random_element(Rng& rng, const std::vector<CMatrix>& basis) {
  CMatrix h = CMatrix::Zero(basis.front().rows(), basis.front().cols());
  for (const CMatrix& b : basis) h += rng.normal() * b;
  return h;
}

// Multiply by the phase that makes the first near-largest entry real and positive.
CMatrix fix_matrix_phase(const CMatrix& a) {
  const CVector v = vec(a);
  const double top = v.cwiseAbs().maxCoeff();
  Eigen::Index idx = 0;
  while (std::abs(v(idx)) < (1.0 - 1e-8) * top) ++idx;
  return a * (std::abs(v(idx)) / v(idx));
}

void require_idempotent(const SuperOperator& l, const TolerancePolicy& tol) {
  const IdempotentReport r = verify_idempotent(l, tol);
  if (!r.cp) throw NotIdempotent("map is not completely positive");
  if (!r.contractive) throw NotIdempotent("map is not contractive: ||L(I)|| = " + std::to_string(r.unit_norm));
  if (!r.idempotent) throw NotIdempotent("L o L differs from L by " + std::to_string(r.idempotent_defect));
}

// Matrix units of one simple summand z A of the compressed algebra A.
RangeFactor factor_units(const SuperOperator& l, const CMatrix& z, const std::vector<CMatrix>& algebra,
                         const CMatrix& probe, Rng& rng, const TolerancePolicy& tol) {
  std::vector<CMatrix> local;
  for (const CMatrix& a : algebra) local.push_back(z * a * z);
  const std::vector<CMatrix> basis = hermitian_span_basis(local, tol.eps_rank);
  const int dim = static_cast<int>(basis.size());
  const int q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim))));
  const CMatrix frame = range_basis(z, tol.eps_rank);
  const int rank = static_cast<int>(frame.cols());
  if (q * q != dim || q == 0 || rank % q != 0)
    throw NumericallyDegenerateCenter("summand of dimension " + std::to_string(dim) + " is not a full matrix algebra");
  const int mult = rank / q;

  std::vector<CMatrix> proj;
  bool found = false;
  CMatrix k = z * probe * z;
  for (int draw = 0; draw <= kMaxDraws && !found; ++draw) {
    if (draw > 0) k = random_element(rng, basis);
    std::vector<CMatrix> cand;
    if (!spectral_projections(k, frame, 1e-6, tol, cand) || static_cast<int>(cand.size()) != q) continue;
    found = std::all_of(cand.begin(), cand.end(), [&](const CMatrix& pr) {
      return std::lround(pr.trace().real()) == mult;
    });
    if (found) proj = cand;
  }
  if (!found) throw NumericallyDegenerateCenter("no element with simple spectrum found in a summand");

  std::vector<CMatrix> col(static_cast<size_t>(q));
  col[0] = proj[0];
  const double tr0 = proj[0].trace().real();
  for (int i = 1; i < q; ++i) {
    CMatrix best;
    double best_norm = -1.0;
    for (const CMatrix& b : basis) {
      const CMatrix x = proj[static_cast<size_t>(i)] * b * proj[0];
      if (x.norm() > best_norm) {
        best_norm = x.norm();
        best = x;
      }
    }
    const double c = (best.adjoint() * best).trace().real() / tr0;
    if (!(c > tol.eps_rank)) throw NumericallyDegenerateCenter("summand projections are not connected");
    col[static_cast<size_t>(i)] = fix_matrix_phase(best / std::sqrt(c));
  }

  RangeFactor f;
  f.q = q;
  f.central = l(z);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) f.units.push_back(l(col[static_cast<size_t>(i)] * col[static_cast<size_t>(j)].adjoint()));
  return f;
}

// Ordering key: first diagonal index carrying weight, then the weight there (larger first).
std::pair<int, double> support_key(const CMatrix& z) {
  for (int i = 0; i < z.rows(); ++i)
    if (z(i, i).real() > 1e-8) return {i, -z(i, i).real()};
  return {static_cast<int>(z.rows()), 0.0};
}

}  // namespace

IdempotentReport verify_idempotent(const SuperOperator& l, const TolerancePolicy& tol) {
  if (l.dim_in() != l.dim_out()) throw DimensionMismatch("verify_idempotent: map must act on one space");
  IdempotentReport r;
  const CpResult cp = is_completely_positive(l, tol);
  r.cp = cp.is_cp;
  r.min_choi_eig = cp.min_eig;
  r.unit_norm = spectral_norm(l(CMatrix::Identity(l.dim_in(), l.dim_in())));
  r.contractive = r.unit_norm <= 1.0 + tol.eps_eq;
  r.idempotent_defect = max_abs(compose(l, l).action() - l.action());
  r.idempotent = r.idempotent_defect <= tol.eps_eq * std::max(1.0, max_abs(l.action()));
  r.holds = r.cp && r.contractive && r.idempotent;
  return r;
}

CMatrix support_projection(const SuperOperator& l, const TolerancePolicy& tol) {
  require_idempotent(l, tol);
  const int p = l.dim_in();
  const KrausForm k = kraus(l, tol);
  CMatrix stacked(p, static_cast<Eigen::Index>(p * std::max<size_t>(k.ops.size(), 1)));
  stacked.setZero();
  for (size_t i = 0; i < k.ops.size(); ++i) stacked.middleCols(static_cast<Eigen::Index>(i) * p, p) = k.ops[i].adjoint();
  const CMatrix f = projection_onto(range_basis(stacked, tol.eps_rank));
  const double defect = max_abs(compose(l, SuperOperator::sandwich(f, f)).action() - l.action());
  if (defect > tol.eps_eq * std::max(1.0, max_abs(l.action())))
    throw NotIdempotent("support projection does not reproduce L");
  return f;
}

CMatrix star(const SuperOperator& l, const CMatrix& a, const CMatrix& b, const TolerancePolicy& tol) {
  for (const CMatrix* x : {&a, &b}) {
    if (x->rows() != l.dim_in() || x->cols() != l.dim_in()) throw DimensionMismatch("star: operand shape");
    if ((l(*x) - *x).norm() > tol.eps_eq * std::max(1.0, x->norm()))
      throw OperandOutsideRange("star: operand is not in the range of L");
  }
  return l(a * b);
}

std::vector<CMatrix> hermitian_span_basis(const std::vector<CMatrix>& mats, double eps_rank) {
  if (mats.empty()) return {};
  const Eigen::Index rows = mats.front().rows();
  const Eigen::Index cols = mats.front().cols();
  const Eigen::Index n = rows * cols;
  RMatrix stack(2 * n, static_cast<Eigen::Index>(2 * mats.size()));
  for (size_t k = 0; k < mats.size(); ++k) {
    const CMatrix& m = mats[k];
    const CVector hp = vec(0.5 * (m + m.adjoint()));
    const CVector sp = vec(cplx(0.0, -0.5) * (m - m.adjoint()));
    stack.col(static_cast<Eigen::Index>(2 * k)) << hp.real(), hp.imag();
    stack.col(static_cast<Eigen::Index>(2 * k + 1)) << sp.real(), sp.imag();
  }
  Eigen::JacobiSVD<RMatrix> svd(stack, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  const double floor = rank_floor(sv, eps_rank);
  std::vector<CMatrix> out;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (!(sv(k) > floor)) break;
    CVector v(n);
    v.real() = svd.matrixU().col(k).head(n);
    v.imag() = svd.matrixU().col(k).tail(n);
    CMatrix h = unvec(v, static_cast<int>(rows), static_cast<int>(cols));
    out.push_back(hermitian_part(h));
  }
  return out;
}

std::vector<CMatrix> range_matrices(const SuperOperator& l, const TolerancePolicy& tol) {
  const CMatrix r = range_basis(l.action(), tol.eps_rank);
  std::vector<CMatrix> mats;
  for (Eigen::Index k = 0; k < r.cols(); ++k) mats.push_back(unvec(r.col(k), l.dim_out(), l.dim_out()));
  return hermitian_span_basis(mats, tol.eps_rank);
}

std::vector<RangeFactor> matrix_units(const SuperOperator& l, std::uint64_t seed, const TolerancePolicy& tol) {
  const int p = l.dim_in();
  const CMatrix f = support_projection(l, tol);
  // FL(.)F is a *-isomorphism of (range L, *) onto an ordinary matrix algebra; L inverts it.
  const SuperOperator phi = compose(SuperOperator::sandwich(f, f), l);
  const std::vector<CMatrix> algebra = range_matrices(phi, tol);
  const CMatrix unit = phi(CMatrix::Identity(p, p));
  const int r = static_cast<int>(algebra.size());

  CMatrix system(static_cast<Eigen::Index>(r) * p * p, r);
  for (int j = 0; j < r; ++j)
    for (int a = 0; a < r; ++a) {
      const CMatrix& x = algebra[static_cast<size_t>(j)];
      const CMatrix& y = algebra[static_cast<size_t>(a)];
      system.block(static_cast<Eigen::Index>(a) * p * p, j, p * p, 1) = vec(x * y - y * x);
    }
  const CMatrix null = null_space(system, tol.eps_rank);
  std::vector<CMatrix> center_raw;
  for (Eigen::Index k = 0; k < null.cols(); ++k) {
    CMatrix z = CMatrix::Zero(p, p);
    for (int j = 0; j < r; ++j) z += null(j, k) * algebra[static_cast<size_t>(j)];
    center_raw.push_back(z);
  }
  const std::vector<CMatrix> center = hermitian_span_basis(center_raw, tol.eps_rank);
  const int nc = static_cast<int>(center.size());

  Rng rng(seed);
  const CMatrix unit_frame = range_basis(unit, tol.eps_rank);
  std::vector<CMatrix> central;
  bool found = false;
  for (int draw = 0; draw <= kMaxDraws && !found; ++draw) {
    std::vector<CMatrix> cand;
    if (!spectral_projections(random_element(rng, center), unit_frame, 1e-4, tol, cand)) continue;
    if (static_cast<int>(cand.size()) != nc) continue;
    found = true;
    central = cand;
  }
  if (!found) throw NumericallyDegenerateCenter("center spectrum did not separate the summands");
  std::sort(central.begin(), central.end(),
            [](const CMatrix& a, const CMatrix& b) { return support_key(a) < support_key(b); });

  CMatrix diag = CMatrix::Zero(p, p);
  for (int i = 0; i < p; ++i) diag(i, i) = i + 1.0;
  const CMatrix probe = phi(diag);
  std::vector<RangeFactor> out;
  for (const CMatrix& z : central) out.push_back(factor_units(l, z, algebra, probe, rng, tol));
  return out;
}

PlusMinus plus_minus(const CMatrix& a, const TolerancePolicy& tol) {
  if (a.rows() != a.cols()) throw DimensionMismatch("plus_minus: matrix must be square");
  if (hermitian_defect(a) > tol.eps_eq * std::max(1.0, max_abs(a))) throw NotPositive("plus_minus: not hermitian");
  const PsdResult psd = min_eig_psd_test(a, tol);
  if (!psd.is_psd) throw NotPositive("plus_minus: minimum eigenvalue " + std::to_string(psd.min_eig));
  const EigResult e = hermitian_eig(hermitian_part(a), tol);
  const int n = static_cast<int>(a.rows());
  const double top = n > 0 ? std::max(1.0, e.values(0)) : 1.0;
  PlusMinus out{CMatrix::Zero(n, n), CMatrix::Zero(n, n)};
  for (int k = 0; k < n; ++k) {
    const double v = e.values(k);
    const CVector u = e.vectors.col(k);
    if (v > tol.eps_psd * top) out.plus += u * u.adjoint();
    if (v >= 1.0 - tol.eps_eq)
      out.minus += u * u.adjoint();
    else if (v > 1.0 - 11.0 * tol.eps_eq)
      throw NumericallyDegenerateCenter("plus_minus: eigenvalue " + std::to_string(v) + " too close to 1");
  }
  return out;
}

MaximalSupport maximal_support_projection(const SuperOperator& l, const std::vector<RangeFactor>& factors,
                                          const TolerancePolicy& tol) {
  const int p = l.dim_in();
  MaximalSupport out;
  out.p = CMatrix::Zero(p, p);
  for (const RangeFactor& fac : factors)
    for (int i = 0; i < fac.q; ++i) {
      CMatrix avg = CMatrix::Zero(p, p);
      for (int j = 0; j < fac.q; ++j) avg += plus_minus(fac.unit(i, j) * fac.unit(j, i), tol).minus;
      const CMatrix t = plus_minus(avg / static_cast<double>(fac.q), tol).minus;
      out.t.push_back(t);
      out.p += t;
    }
  const CMatrix f = support_projection(l, tol);
  const CMatrix io = l(CMatrix::Identity(p, p));
  const double eps = tol.eps_eq * 10.0;
  out.dominates_support = min_eig_psd_test(out.p - f, tol).is_psd;
  out.commutes_with_units = true;
  for (const RangeFactor& fac : factors)
    for (const CMatrix& e : fac.units)
      if (max_abs(out.p * e - e * out.p) > eps) out.commutes_with_units = false;
  out.absorbs_unit = max_abs(out.p * io - out.p) <= eps && max_abs(io * out.p - out.p) <= eps;
  return out;
}

MaximalSupport maximal_support_projection(const SuperOperator& l, const TolerancePolicy& tol) {
  return maximal_support_projection(l, matrix_units(l, 1, tol), tol);
}

std::vector<CMatrix> range_commutant(const std::vector<CMatrix>& basis, const TolerancePolicy& tol) {
  if (basis.empty()) return {};
  const int p = static_cast<int>(basis.front().rows());
  const CMatrix id = CMatrix::Identity(p, p);
  CMatrix system(static_cast<Eigen::Index>(basis.size()) * p * p, p * p);
  for (size_t k = 0; k < basis.size(); ++k)
    system.middleRows(static_cast<Eigen::Index>(k) * p * p, p * p) =
        kron(id, basis[k].transpose()) - kron(basis[k], id);
  const CMatrix null = null_space(system, tol.eps_rank);
  std::vector<CMatrix> mats;
  for (Eigen::Index k = 0; k < null.cols(); ++k) mats.push_back(unvec(null.col(k), p, p));
  return hermitian_span_basis(mats, tol.eps_rank);
}

ChoiEffrosStructure choi_effros(const SuperOperator& l, std::uint64_t seed, const TolerancePolicy& tol) {
  ChoiEffrosStructure s;
  s.l = l;
  s.f = support_projection(l, tol);
  s.unit = l(CMatrix::Identity(l.dim_in(), l.dim_in()));
  s.range = range_matrices(l, tol);
  s.factors = matrix_units(l, seed, tol);
  s.support = maximal_support_projection(l, s.factors, tol);
  s.commutant = range_commutant(s.range, tol);
  return s;
}

CompressionCheck corner_compression_check(const SuperOperator& l, const SuperOperator& l1,
                                          const TolerancePolicy& tol) {
  if (l.dim_in() != l1.dim_in() || l.dim_out() != l1.dim_out())
    throw DimensionMismatch("corner_compression_check: maps act on different spaces");
  if (!verify_idempotent(l, tol).holds) throw HypothesisViolated("L is not an idempotent CP contraction");
  if (!verify_idempotent(l1, tol).holds) throw HypothesisViolated("L1 is not an idempotent CP contraction");
  if (!is_completely_positive(l - l1, tol).is_cp) throw HypothesisViolated("L - L1 is not completely positive");
  const int p = l.dim_in();
  CompressionCheck out;
  out.e = l1(CMatrix::Identity(p, p));
  const double scale = std::max(1.0, max_abs(out.e));
  if (hermitian_defect(out.e) > tol.eps_eq * scale || max_abs(out.e * out.e - out.e) > tol.eps_eq * scale)
    throw HypothesisViolated("L1(I) is not a projection");
  out.e_in_commutant = true;
  for (const CMatrix& b : range_matrices(l, tol))
    if (max_abs(out.e * b - b * out.e) > tol.eps_eq * 10.0) out.e_in_commutant = false;
  out.compression_defect = max_abs(compose(SuperOperator::sandwich(out.e, out.e), l).action() - l1.action());
  out.holds = out.e_in_commutant && out.compression_defect <= tol.eps_eq * 10.0;
  return out;
}

}  // namespace qwl
