// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/superop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qwl/random.hpp"

namespace qwl {

SuperOperator::SuperOperator(int dim_in, int dim_out, CMatrix action)
    : din_(dim_in), dout_(dim_out), action_(std::move(action)) {
  if (dim_in <= 0 || dim_out <= 0) throw DimensionMismatch("SuperOperator: dimensions must be positive");
  if (action_.rows() != static_cast<Eigen::Index>(dim_out) * dim_out ||
      action_.cols() != static_cast<Eigen::Index>(dim_in) * dim_in)
    throw DimensionMismatch("SuperOperator: action must be d'^2 x d^2");
}

SuperOperator SuperOperator::identity(int d) {
  return SuperOperator(d, d, CMatrix::Identity(d * d, d * d));
}

SuperOperator SuperOperator::zero(int dim_in, int dim_out) {
  return SuperOperator(dim_in, dim_out, CMatrix::Zero(dim_out * dim_out, dim_in * dim_in));
}

SuperOperator SuperOperator::from_function(int dim_in, int dim_out,
                                           const std::function<CMatrix(const CMatrix&)>& f) {
  CMatrix m(dim_out * dim_out, dim_in * dim_in);
  for (int n = 0; n < dim_in; ++n)
    for (int k = 0; k < dim_in; ++k) {
      const CMatrix out = f(matrix_unit(dim_in, n, k));
      if (out.rows() != dim_out || out.cols() != dim_out)
        throw DimensionMismatch("from_function: output has the wrong shape");
      m.col(n * dim_in + k) = vec(out);
    }
  return SuperOperator(dim_in, dim_out, std::move(m));
}

SuperOperator SuperOperator::sandwich(const CMatrix& x, const CMatrix& y) {
  if (x.cols() != y.rows() || x.rows() != y.cols())
    throw DimensionMismatch("sandwich: X must be d' x d and Y d x d'");
  return SuperOperator(static_cast<int>(x.cols()), static_cast<int>(x.rows()),
                       kron(x, y.transpose()));
}

SuperOperator SuperOperator::from_kraus(const std::vector<CMatrix>& ops,
                                        const std::vector<double>& weights) {
  if (ops.empty()) throw DimensionMismatch("from_kraus: empty operator list");
  if (!weights.empty() && weights.size() != ops.size())
    throw DimensionMismatch("from_kraus: weights and operators differ in length");
  const int din = static_cast<int>(ops[0].cols());
  const int dout = static_cast<int>(ops[0].rows());
  CMatrix m = CMatrix::Zero(dout * dout, din * din);
  for (size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].rows() != dout || ops[k].cols() != din)
      throw DimensionMismatch("from_kraus: operators differ in shape");
    const double w = weights.empty() ? 1.0 : weights[k];
    m += w * kron(ops[k], ops[k].conjugate());
  }
  return SuperOperator(din, dout, std::move(m));
}

SuperOperator SuperOperator::from_choi(const CMatrix& c, int din, int dout) {
  if (c.rows() != din * dout || c.cols() != din * dout)
    throw DimensionMismatch("from_choi: Choi matrix must be (d d') square");
  CMatrix m(dout * dout, din * din);
  for (int i = 0; i < dout; ++i)
    for (int n = 0; n < din; ++n)
      for (int j = 0; j < dout; ++j)
        for (int k = 0; k < din; ++k) m(i * dout + j, n * din + k) = c(i * din + n, j * din + k);
  return SuperOperator(din, dout, std::move(m));
}

CMatrix SuperOperator::apply(const CMatrix& a) const {
  if (a.rows() != din_ || a.cols() != din_) throw DimensionMismatch("apply: input has the wrong shape");
  return unvec(action_ * vec(a), dout_, dout_);
}

double SuperOperator::hermitian_defect() const { return qwl::hermitian_defect(choi(*this)); }

bool SuperOperator::is_hermitian(const TolerancePolicy& tol) const {
  const double scale = action_.size() ? std::max(1.0, action_.cwiseAbs().maxCoeff()) : 1.0;
  return hermitian_defect() <= tol.eps_eq * scale;
}

SuperOperator SuperOperator::operator+(const SuperOperator& o) const {
  if (din_ != o.din_ || dout_ != o.dout_) throw DimensionMismatch("operator+: dimensions differ");
  return SuperOperator(din_, dout_, action_ + o.action_);
}

SuperOperator SuperOperator::operator-(const SuperOperator& o) const {
  if (din_ != o.din_ || dout_ != o.dout_) throw DimensionMismatch("operator-: dimensions differ");
  return SuperOperator(din_, dout_, action_ - o.action_);
}

SuperOperator SuperOperator::operator-() const { return SuperOperator(din_, dout_, -action_); }

SuperOperator SuperOperator::operator*(double s) const {
  return SuperOperator(din_, dout_, s * action_);
}

SuperOperator SuperOperator::scaled(cplx s) const { return SuperOperator(din_, dout_, s * action_); }

SuperOperator operator*(double s, const SuperOperator& phi) { return phi * s; }

CMatrix choi(const SuperOperator& phi) {
  const int d = phi.dim_in();
  const int dp = phi.dim_out();
  const CMatrix& m = phi.action();
  CMatrix c(dp * d, dp * d);
  for (int i = 0; i < dp; ++i)
    for (int n = 0; n < d; ++n)
      for (int j = 0; j < dp; ++j)
        for (int k = 0; k < d; ++k) c(i * d + n, j * d + k) = m(i * dp + j, n * d + k);
  return c;
}

CpResult is_completely_positive(const SuperOperator& phi, const TolerancePolicy& tol) {
  const PsdResult r = min_eig_psd_test(choi(phi), tol);
  CpResult out;
  out.is_cp = r.is_psd;
  out.min_eig = r.min_eig;
  if (!r.is_psd) {
    out.witness = r.witness;
    const int d = phi.dim_in();
    const int dp = phi.dim_out();
    for (int n = 0; n < d; ++n) {
      out.family_a.push_back(matrix_unit(d, 0, n));
      CVector f(dp);
      for (int j = 0; j < dp; ++j) f(j) = r.witness(j * d + n);
      out.family_f.push_back(f);
    }
  }
  return out;
}

KrausForm kraus(const SuperOperator& phi, const TolerancePolicy& tol) {
  const CMatrix c = choi(phi);
  const PsdResult psd = min_eig_psd_test(c, tol);
  if (!psd.is_psd)
    throw NotCompletelyPositive("kraus: Choi matrix has eigenvalue " + std::to_string(psd.min_eig));
  const EigResult e = hermitian_eig(c, tol);
  const int d = phi.dim_in();
  const int dp = phi.dim_out();
  const double floor = tol.eps_rank * std::max(1.0, e.values(0));
  KrausForm k;
  for (int idx = 0; idx < e.values.size(); ++idx) {
    if (e.values(idx) <= floor) break;
    k.ops.push_back(std::sqrt(e.values(idx)) * unvec(fix_phase(e.vectors.col(idx)), dp, d));
    k.weights.push_back(1.0);
  }
  return k;
}

KrausForm hermitian_kraus(const SuperOperator& phi, const TolerancePolicy& tol) {
  const CMatrix c = choi(phi);
  const EigResult e = hermitian_eig(c, tol);
  const int d = phi.dim_in();
  const int dp = phi.dim_out();
  const double top = e.values.size() ? e.values.cwiseAbs().maxCoeff() : 0.0;
  const double floor = tol.eps_rank * std::max(1.0, top);
  KrausForm k;
  for (int idx = 0; idx < e.values.size(); ++idx) {
    if (std::abs(e.values(idx)) <= floor) continue;
    k.ops.push_back(std::sqrt(static_cast<double>(d)) *
                    unvec(fix_phase(e.vectors.col(idx)), dp, d));
    k.weights.push_back(e.values(idx) / d);
  }
  return k;
}

SuperOperator kraus_to_superop(const KrausForm& k) { return SuperOperator::from_kraus(k.ops, k.weights); }

double cp_norm(const SuperOperator& phi) {
  return spectral_norm(phi.apply(CMatrix::Identity(phi.dim_in(), phi.dim_in())));
}

std::vector<CMatrix> weyl_unitaries(int d) {
  const double pi = std::numbers::pi;
  CMatrix x = CMatrix::Zero(d, d);
  CMatrix z = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    x((j + 1) % d, j) = 1.0;
    z(j, j) = std::polar(1.0, 2.0 * pi * j / d);
  }
  std::vector<CMatrix> out;
  CMatrix xa = CMatrix::Identity(d, d);
  for (int a = 0; a < d; ++a) {
    CMatrix zb = CMatrix::Identity(d, d);
    for (int b = 0; b < d; ++b) {
      out.push_back(xa * zb);
      zb = zb * z;
    }
    xa = xa * x;
  }
  return out;
}

NormEstimate op_norm(const SuperOperator& phi, const TolerancePolicy& tol) {
  NormEstimate est;
  if (phi.is_hermitian(tol) && is_completely_positive(phi, tol).is_cp) {
    est.value = cp_norm(phi);
    est.exact = true;
    return est;
  }
  const SuperOperator adj = tilde_adjoint(phi);
  std::vector<CMatrix> starts = weyl_unitaries(phi.dim_in());
  Rng rng(0x5eedULL);
  for (int k = 0; k < 32; ++k) starts.push_back(random_unitary(rng, phi.dim_in()));
  double best = 0.0;
  for (const CMatrix& start : starts) {
    CMatrix a = start;
    double val = spectral_norm(phi.apply(a));
    for (int it = 0; it < 200; ++it) {
      const CMatrix b = phi.apply(a);
      Eigen::JacobiSVD<CMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const CVector u = svd.matrixU().col(0);
      const CVector v = svd.matrixV().col(0);
      const CMatrix g = adj.apply(u * v.adjoint());
      if (g.norm() == 0.0) break;
      const CMatrix next = polar_unitary(g);
      const double nv = spectral_norm(phi.apply(next));
      if (nv <= val * (1.0 + 1e-15)) {
        val = std::max(val, nv);
        break;
      }
      a = next;
      val = nv;
    }
    best = std::max(best, val);
  }
  est.value = best;
  return est;
}

double hs_norm(const SuperOperator& phi) {
  return phi.action().norm() / std::sqrt(static_cast<double>(phi.dim_in()) * phi.dim_out());
}

SuperOperator compose(const SuperOperator& psi, const SuperOperator& phi) {
  if (psi.dim_in() != phi.dim_out()) throw DimensionMismatch("compose: inner output differs from outer input");
  return SuperOperator(phi.dim_in(), psi.dim_out(), psi.action() * phi.action());
}

SuperOperator tilde_adjoint(const SuperOperator& psi) {
  return SuperOperator(psi.dim_out(), psi.dim_in(), psi.action().adjoint());
}

SuperOperator inverse(const SuperOperator& phi, double eps_rank) {
  if (phi.dim_in() != phi.dim_out()) throw DimensionMismatch("inverse: map is not square");
  Eigen::FullPivLU<CMatrix> lu(phi.action());
  lu.setThreshold(eps_rank);
  if (!lu.isInvertible()) throw DomainError("inverse: map is singular");
  return SuperOperator(phi.dim_in(), phi.dim_out(), lu.inverse());
}

CMatrix restrict_coords(const SuperOperator& phi, const std::vector<CMatrix>& basis,
                        const TolerancePolicy& tol) {
  if (phi.dim_in() != phi.dim_out()) throw DimensionMismatch("restrict: map is not square");
  const int n = static_cast<int>(basis.size());
  const int d = phi.dim_in();
  CMatrix b(d * d, n);
  for (int k = 0; k < n; ++k) {
    if (basis[k].rows() != d || basis[k].cols() != d)
      throw DimensionMismatch("restrict: basis element has the wrong shape");
    b.col(k) = vec(basis[k]);
  }
  if (numerical_rank(b, tol.eps_rank) != n)
    throw DimensionMismatch("restrict: basis is linearly dependent");
  const CMatrix images = phi.action() * b;
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(b);
  const CMatrix coords = cod.solve(images);
  for (int k = 0; k < n; ++k) {
    const double res = (b * coords.col(k) - images.col(k)).norm();
    if (res > tol.eps_rank * std::max(1.0, images.col(k).norm()) * std::sqrt(static_cast<double>(d * d)))
      throw RangeEscapesSpan("restrict: image of basis element " + std::to_string(k) +
                             " leaves the span (residual " + std::to_string(res) + ")");
  }
  return coords;
}

SuperOperator restrict(const SuperOperator& phi, const std::vector<CMatrix>& basis,
                       const TolerancePolicy& tol) {
  const int n = static_cast<int>(basis.size());
  const int q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (q * q != n) throw DimensionMismatch("restrict: basis size is not a perfect square");
  return SuperOperator(q, q, restrict_coords(phi, basis, tol));
}

}  // namespace qwl
