// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

namespace qwl {

void TolerancePolicy::validate() const {
  if (!(eps_psd > 0) || !(eps_eq > 0) || !(eps_rank > 0) || !(quad_rel_err > 0))
    throw InvalidTolerance("all tolerance fields must be strictly positive");
}

TolerancePolicy TolerancePolicy::from_env() {
  const char* v = std::getenv("QWL_TOLERANCE_PROFILE");
  if (v == nullptr || std::string(v).empty() || std::string(v) == "default") return defaults();
  if (std::string(v) == "strict") return strict();
  throw InvalidTolerance(std::string("unknown QWL_TOLERANCE_PROFILE '") + v +
                         "' (expected strict or default)");
}

double hermitian_defect(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

EigResult hermitian_eig(const CMatrix& a, const TolerancePolicy& tol) {
  if (a.rows() != a.cols()) throw NonHermitianInput("hermitian_eig: matrix is not square");
  EigResult out;
  if (a.size() == 0) return out;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double defect = hermitian_defect(a);
  if (defect > tol.eps_eq * scale)
    throw NonHermitianInput("hermitian_eig: symmetry defect " + std::to_string(defect) +
                            " exceeds tolerance");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  const int n = static_cast<int>(a.rows());
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

PsdResult min_eig_psd_test(const CMatrix& a, const TolerancePolicy& tol) {
  PsdResult r;
  if (a.size() == 0) return r;
  const EigResult e = hermitian_eig(a, tol);
  const int n = static_cast<int>(e.values.size());
  const double norm = std::max(std::abs(e.values(0)), std::abs(e.values(n - 1)));
  r.min_eig = e.values(n - 1);
  r.threshold = tol.eps_psd * std::max(1.0, norm);
  r.is_psd = r.min_eig >= -r.threshold;
  if (!r.is_psd) r.witness = e.vectors.col(n - 1);
  return r;
}

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double hermitian_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double rank_floor(const RVector& sv, double eps_rank) {
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  return eps_rank * std::max(1.0, top);
}

int numerical_rank(const CMatrix& a, double eps_rank) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const RVector& sv = svd.singularValues();
  const double floor = rank_floor(sv, eps_rank);
  int r = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > floor) ++r;
  return r;
}

CMatrix null_space(const CMatrix& a, double eps_rank) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0) return CMatrix::Identity(n, n);
  if (n == 0) return CMatrix(0, 0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double floor = rank_floor(sv, eps_rank);
  int r = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > floor) ++r;
  return svd.matrixV().rightCols(n - r);
}

CMatrix range_basis(const CMatrix& a, double eps_rank) {
  if (a.size() == 0) return CMatrix(a.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  const double floor = rank_floor(sv, eps_rank);
  int r = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > floor) ++r;
  return svd.matrixU().leftCols(r);
}

CMatrix polar_unitary(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

CMatrix projection_onto(const CMatrix& basis) { return basis * basis.adjoint(); }

CVector vec(const CMatrix& a) {
  CVector v(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) v(i * a.cols() + j) = a(i, j);
  return v;
}

CMatrix unvec(const CVector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw DimensionMismatch("unvec: vector length does not match shape");
  CMatrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = v(i * cols + j);
  return a;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix matrix_unit(int d, int i, int j) {
  CMatrix e = CMatrix::Zero(d, d);
  e(i, j) = 1.0;
  return e;
}

cplx ntrace(const CMatrix& a) { return a.trace() / static_cast<double>(a.rows()); }

CVector fix_phase(const CVector& v) {
  if (v.size() == 0) return v;
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (std::abs(v(k)) == 0.0) return v;
  return v * (std::abs(v(k)) / v(k));
}

// ---------------------------------------------------------------------------
// Upper incomplete gamma.

namespace {

constexpr double kEuler = 0.57721566490153286061;

// zeta(2..31), for the Taylor series of ln Gamma(1+s) near s = 0.
constexpr double kZeta[] = {
    1.6449340668482264365, 1.2020569031595942854, 1.0823232337111381915,
    1.0369277551433699263, 1.0173430619844491397, 1.0083492773819228268,
    1.0040773561979443394, 1.0020083928260822144, 1.0009945751278180853,
    1.0004941886041194646, 1.0002460865533080483, 1.0001227133475784891,
    1.0000612481350587048, 1.0000305882363070205, 1.0000152822594086519,
    1.0000076371976378998, 1.0000038172932649998, 1.0000019082127165539,
    1.0000009539620338728, 1.0000004769329867878, 1.0000002384505027277,
    1.0000001192199259653, 1.0000000596081890513, 1.0000000298035035147,
    1.0000000149015548284, 1.0000000074507117898, 1.0000000037253340248,
    1.0000000018626597235, 1.0000000009313274324, 1.0000000004656629065};

// ln Gamma(1+s), accurate in relative terms as s -> 0.
double lgamma1p(double s) {
  if (std::abs(s) > 0.25) return std::lgamma(1.0 + s);
  double sum = -kEuler * s;
  double pw = -s;
  for (int k = 2; k <= 31; ++k) {
    pw *= -s;
    sum += kZeta[k - 2] * pw / k;  // pw = (-s)^k
  }
  return sum;
}

// Series around x = 0 for s in (-1, 1), x <= 1.5:
// Gamma(s,x) = Gamma(s) - x^s/s - sum_{n>=1} (-1)^n x^{s+n} / (n! (s+n)).
double gamma_small_s_series(double s, double x) {
  const double lx = std::log(x);
  double head;
  if (std::abs(s) < 1e-14) {
    head = -kEuler - lx;
  } else {
    head = (std::expm1(lgamma1p(s)) - std::expm1(s * lx)) / s;
  }
  const double xs = std::abs(s) < 1e-14 ? 1.0 : std::exp(s * lx);
  double tail = 0.0;
  double pw = 1.0;  // (-x)^n / n!
  for (int n = 1; n < 200; ++n) {
    pw *= -x / n;
    const double term = xs * pw / (s + n);
    tail += term;
    if (std::abs(term) <= 1e-18 * std::abs(tail)) break;
  }
  return head - tail;
}

// Lower series gamma(s,x) = x^s e^{-x} sum_n x^n / (s (s+1) ... (s+n)), s > 0.
double lower_gamma_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int n = 1; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) {
      return sum * std::exp(-x + s * std::log(x));
    }
  }
  throw NonConvergence("lower incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for Gamma(s,x), any real s, x > 0.
double upper_gamma_cf(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return std::exp(-x + s * std::log(x)) * h;
  }
  throw NonConvergence("incomplete gamma continued fraction did not converge");
}

}  // namespace

double upper_incomplete_gamma(double s, double x) {
  if (!(s > -1.0)) throw DomainError("upper_incomplete_gamma: s must exceed -1");
  if (!(x >= 0.0)) throw DomainError("upper_incomplete_gamma: x must be non-negative");
  if (x == 0.0) {
    if (s <= 0.0) throw DomainError("upper_incomplete_gamma: divergent for s <= 0 at x = 0");
    return std::tgamma(s);
  }
  if (std::isinf(x)) return 0.0;
  if (s < 1.0) {
    if (x <= 1.5) return gamma_small_s_series(s, x);
    return upper_gamma_cf(s, x);
  }
  if (x < s + 1.0) return std::tgamma(s) - lower_gamma_series(s, x);
  return upper_gamma_cf(s, x);
}

// ---------------------------------------------------------------------------
// Tanh-sinh quadrature.

namespace {

// Integrand receiving the abscissa and its exact distances to both interval ends.
using Kernel = std::function<double(double x, double dl, double dr)>;

struct TsResult {
  double value = 0.0;
  bool converged = false;
};

TsResult tanh_sinh(const Kernel& f, double a, double b, double rel_err, double abs_err) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  constexpr double t_max = 6.5;
  constexpr int max_level = 11;
  const double h = 0.5 * (b - a);
  const double width = b - a;

  // Contribution of a single node pair at +t and -t.
  auto node = [&](double t, double& l1) {
    const double u = half_pi * std::sinh(t);
    const double e2u = std::exp(-2.0 * u);
    const double dist = width * e2u / (1.0 + e2u);  // distance to the nearer endpoint
    const double sech2 = 4.0 * e2u / ((1.0 + e2u) * (1.0 + e2u));
    const double w = half_pi * std::cosh(t) * sech2;
    if (!(dist > 0.0) || !(w > 0.0)) return 0.0;
    double s = 0.0;
    if (t == 0.0) {
      const double v = f(a + h, h, h);
      s = w * v;
      l1 += std::abs(s);
      return s;
    }
    const double vr = f(b - dist, width - dist, dist);
    const double vl = f(a + dist, dist, width - dist);
    s = w * (vr + vl);
    l1 += w * (std::abs(vr) + std::abs(vl));
    return s;
  };

  double step = 1.0;
  double sum = 0.0;
  double l1 = 0.0;
  for (double t = 0.0; t <= t_max; t += step) sum += node(t, l1);
  double prev = h * step * sum;
  TsResult r;
  for (int level = 1; level <= max_level; ++level) {
    step *= 0.5;
    for (double t = step; t <= t_max; t += 2.0 * step) sum += node(t, l1);
    const double cur = h * step * sum;
    const double scale = std::max(std::abs(cur), h * step * l1 * 1e-3);
    if (!std::isfinite(cur)) return r;
    if (level >= 3 && std::abs(cur - prev) <= std::max(rel_err * scale, abs_err)) {
      r.value = cur;
      r.converged = true;
      return r;
    }
    prev = cur;
  }
  r.value = prev;
  return r;
}

double integrate_bisect(const Kernel& f, double a, double b, double rel_err, double abs_err, int depth) {
  const TsResult r = tanh_sinh(f, a, b, rel_err, abs_err);
  if (r.converged) return r.value;
  if (depth >= 8) throw NonConvergence("adaptive_quadrature: subdivision depth exhausted");
  const double mid = 0.5 * (a + b);
  // Distances seen by the halves are re-expressed relative to the parent interval.
  Kernel left = [&](double x, double dl, double dr) { return f(x, dl, (b - mid) + dr); };
  Kernel right = [&](double x, double dl, double dr) { return f(x, (mid - a) + dl, dr); };
  return integrate_bisect(left, a, mid, rel_err, 0.5 * abs_err, depth + 1) +
         integrate_bisect(right, mid, b, rel_err, 0.5 * abs_err, depth + 1);
}

}  // namespace

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double rel_err, double abs_err) {
  if (!(rel_err > 0)) throw DomainError("adaptive_quadrature: rel_err must be positive");
  if (!(abs_err >= 0)) throw DomainError("adaptive_quadrature: abs_err must be nonnegative");
  if (std::isinf(a) || std::isnan(a) || std::isnan(b))
    throw DomainError("adaptive_quadrature: lower limit must be finite");
  if (b == a) return 0.0;
  if (b < a) return -adaptive_quadrature(f, b, a, rel_err, abs_err);
  if (std::isfinite(b)) {
    Kernel k = [&](double x, double, double) { return f(x); };
    return integrate_bisect(k, a, b, rel_err, abs_err, 0);
  }
  // [a, a+1] directly, [a+1, inf) through x = a + 1 + y/(1-y).
  const double head = adaptive_quadrature(f, a, a + 1.0, rel_err, 0.5 * abs_err);
  Kernel tail = [&](double, double dl, double dr) {
    const double one_minus_y = dr;
    const double y = dl;
    // Beyond x ~ 1e100 an integrable f contributes nothing representable.
    if (one_minus_y < 1e-100) return 0.0;
    const double x = a + 1.0 + y / one_minus_y;
    const double fx = f(x);
    if (fx == 0.0) return 0.0;
    return fx / one_minus_y / one_minus_y;
  };
  return head + integrate_bisect(tail, 0.0, 1.0, rel_err, 0.5 * abs_err, 0);
}

}  // namespace qwl
