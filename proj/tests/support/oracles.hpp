// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors
//
// Brute-force reference computations that avoid the library code paths under test.

#pragma once

#include <functional>
#include <vector>

#include "qwl/bweight.hpp"
#include "qwl/numerics.hpp"
#include "qwl/random.hpp"
#include "qwl/superop.hpp"

namespace qwl::oracle {

/// phi(A) evaluated entry by entry from phi(e_nm), without the action matrix product.
inline CMatrix apply_by_units(const SuperOperator& phi, const CMatrix& a) {
  CMatrix out = CMatrix::Zero(phi.dim_out(), phi.dim_out());
  for (int n = 0; n < phi.dim_in(); ++n)
    for (int m = 0; m < phi.dim_in(); ++m)
      if (a(n, m) != cplx(0)) out += a(n, m) * phi.apply(matrix_unit(phi.dim_in(), n, m));
  return out;
}

/// sum_{ij} (f_i, phi(A_i^* A_j) f_j).
inline cplx positivity_form(const SuperOperator& phi, const std::vector<CMatrix>& a, const std::vector<CVector>& f) {
  cplx s = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a.size(); ++j) s += f[i].dot(phi.apply(a[i].adjoint() * a[j]) * f[j]);
  return s;
}

/// Smallest value of the positivity form over `trials` random families of length d', each
/// normalized so that sum ||A_i||_F^2 ||f_i||^2 = 1.
inline double min_random_positivity_form(Rng& rng, const SuperOperator& phi, int trials) {
  const int d = phi.dim_in();
  const int dp = phi.dim_out();
  double worst = kInf;
  for (int t = 0; t < trials; ++t) {
    const int len = rng.integer(1, d * dp);
    std::vector<CMatrix> a;
    std::vector<CVector> f;
    double nrm = 0;
    for (int i = 0; i < len; ++i) {
      a.push_back(random_complex(rng, d, d));
      f.push_back(random_complex(rng, dp, 1).col(0));
      nrm += a.back().squaredNorm() * f.back().squaredNorm();
    }
    worst = std::min(worst, positivity_form(phi, a, f).real() / nrm);
  }
  return worst;
}

/// Brute-force search for a negative positivity form: `evaluations` families, alternating fresh
/// random draws with random-walk perturbations of the best family so far. Families have length
/// d d' so they can reach every Choi direction. Returns the smallest normalized value seen.
inline double search_positivity_form(Rng& rng, const SuperOperator& phi, int evaluations) {
  const int d = phi.dim_in();
  const int dp = phi.dim_out();
  const int len = d * dp;
  auto value = [&](const std::vector<CMatrix>& a, const std::vector<CVector>& f) {
    double nrm = 0;
    for (int i = 0; i < len; ++i) nrm += a[static_cast<size_t>(i)].squaredNorm() * f[static_cast<size_t>(i)].squaredNorm();
    return positivity_form(phi, a, f).real() / nrm;
  };
  std::vector<CMatrix> best_a(static_cast<size_t>(len));
  std::vector<CVector> best_f(static_cast<size_t>(len));
  for (int i = 0; i < len; ++i) {
    best_a[static_cast<size_t>(i)] = random_complex(rng, d, d);
    best_f[static_cast<size_t>(i)] = random_complex(rng, dp, 1).col(0);
  }
  double best = value(best_a, best_f);
  double step = 0.5;
  for (int e = 1; e < evaluations; ++e) {
    std::vector<CMatrix> a = best_a;
    std::vector<CVector> f = best_f;
    const bool fresh = e % 4 == 0;
    for (int i = 0; i < len; ++i) {
      const CMatrix da = random_complex(rng, d, d);
      const CVector df = random_complex(rng, dp, 1).col(0);
      a[static_cast<size_t>(i)] = fresh ? da : CMatrix(a[static_cast<size_t>(i)] + step * da);
      f[static_cast<size_t>(i)] = fresh ? df : CVector(f[static_cast<size_t>(i)] + step * df);
    }
    const double v = value(a, f);
    if (v < best) {
      best = v;
      best_a = a;
      best_f = f;
      if (!fresh) step *= 1.3;
    } else if (!fresh) {
      step = std::max(step * 0.85, 1e-3);
    }
  }
  return best;
}

/// Superoperator assembled from its values on matrix units.
inline SuperOperator from_units(int din, int dout, const std::function<CMatrix(const CMatrix&)>& f) {
  CMatrix m(dout * dout, din * din);
  for (int n = 0; n < din; ++n)
    for (int mm = 0; mm < din; ++mm) {
      const CMatrix img = f(matrix_unit(din, n, mm));
      for (int i = 0; i < dout; ++i)
        for (int j = 0; j < dout; ++j) m(i * dout + j, n * din + mm) = img(i, j);
    }
  return SuperOperator(din, dout, m);
}

/// (f, A|_t g) by direct quadrature of the pointwise integrand.
inline cplx gram_by_quadrature(const AtomList& f, const AtomList& g, const Observable& obs, double t = 0.0,
                               double rel = 1e-12) {
  cplx total = 0;
  for (const ObservableTerm& term : obs.terms) {
    const int df = static_cast<int>(term.b.rows());
    const int dg = static_cast<int>(term.b.cols());
    auto integrand = [&](double x) -> cplx {
      cplx m = 0;
      for (const ProfileTerm& pt : term.profile) m += pt.c * std::pow(x, pt.beta) * std::exp(-pt.b * x);
      return evaluate_atoms(f, df, x).dot(term.b * evaluate_atoms(g, dg, x)) * m;
    };
    const double lo = std::max(term.u, t);
    if (!(term.v > lo)) continue;
    // The modulus sets an absolute floor so a part that vanishes identically still terminates.
    const double mag = adaptive_quadrature([&](double x) { return std::abs(integrand(x)); }, lo, term.v, 1e-6);
    const double floor = 1e-14 * mag;
    const double re = adaptive_quadrature([&](double x) { return integrand(x).real(); }, lo, term.v, rel, floor);
    const double im = adaptive_quadrature([&](double x) { return integrand(x).imag(); }, lo, term.v, rel, floor);
    total += cplx(re, im);
  }
  return total;
}

}  // namespace qwl::oracle
