// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors
//
// Boundary weights over C^p (x) L^2(0, inf) built from exponential-monomial atoms.

#pragma once

#include <optional>
#include <vector>

#include "qwl/superop.hpp"

namespace qwl {

/// x -> coef * x^alpha * exp(-a x).
struct Atom {
  double alpha = 0.0;
  double a = 1.0;
  CVector coef;

  static Atom scalar(double alpha, double a, cplx c = 1.0);
  /// Square integrable on (0, inf) iff alpha > -1/2.
  bool divergent() const { return alpha <= -0.5; }
  CVector operator()(double x) const;
};

/// A finite sum of atoms, all with coefficients of the same dimension.
using AtomList = std::vector<Atom>;

CVector evaluate_atoms(const AtomList& f, int dim, double x);
/// Atoms with every coefficient multiplied by m (on the left).
AtomList transform_atoms(const AtomList& f, const CMatrix& m);
AtomList scale_atoms(const AtomList& f, cplx s);
AtomList concat_atoms(const AtomList& f, const AtomList& g);

/// c x^beta exp(-b x).
struct ProfileTerm {
  cplx c = 1.0;
  double beta = 0.0;
  double b = 0.0;
};

/// B (x) m(x) 1_[u,v](x) with m a finite sum of profile terms.
struct ObservableTerm {
  CMatrix b;
  std::vector<ProfileTerm> profile;
  double u = 0.0;
  double v = kInf;
};

/// Sum of observable terms; the multiplication operators used throughout.
struct Observable {
  std::vector<ObservableTerm> terms;

  /// Lambda(B): B e^{-x}.
  static Observable lambda(const CMatrix& b);
  /// B on the whole half line.
  static Observable constant(const CMatrix& b);
  /// B 1_[u,v].
  static Observable window(const CMatrix& b, double u, double v);
  /// I - Lambda(B) for the given identity dimension.
  static Observable one_minus_lambda(const CMatrix& b);

  Observable operator+(const Observable& o) const;
  Observable scaled(cplx s) const;
};

/// A weight value that may be infinite.
struct ExtValue {
  cplx value = 0.0;
  bool divergent = false;
};

struct ExtMatrix {
  CMatrix value;
  bool divergent = false;
};

/// int_L^U x^{s-1} e^{-c x} dx for L > 0 or s > 0, via incomplete gamma differences.
double power_exp_integral(double s, double c, double lower, double upper);

/// (f, A|_t g) for the observable A restricted to [t, inf). Pairs whose integral diverges at
/// the origin are grouped by exponent after contraction with B; an uncancelled group makes the
/// result Divergent.
ExtValue gram(const AtomList& f, const AtomList& g, const Observable& obs, double t = 0.0,
              const TolerancePolicy& tol = {});

/// Vector-valued weight value_ij(A) = sum_k (F_ik, A F_jk) with F_ik in C^p (x) L^2.
struct VectorWeight {
  int p = 0;
  int q = 0;
  std::vector<std::vector<AtomList>> f;  // f[k][i]

  ExtMatrix evaluate(const Observable& obs, double t = 0.0, const TolerancePolicy& tol = {}) const;
  /// B -> value(B (x) m 1_[max(u,t), v]) as a map B(C^p) -> M_q. Throws DivergentValue if some
  /// matrix unit gives an infinite value.
  SuperOperator superop(const std::vector<ProfileTerm>& profile, double u, double v, double t = 0.0,
                        const TolerancePolicy& tol = {}) const;
  /// B -> value(Lambda(B)|_t).
  SuperOperator lambda_superop(double t, const TolerancePolicy& tol = {}) const;
};

/// Theta_ij(A) = sum_k ((g_ik + h_ik), A (g_jk + h_jk)) with g_ik = E_i1 g_k.
struct WeightFamily {
  int m = 1;
  int q = 1;
  int p = 1;
  std::vector<CMatrix> units;              // E_ij at index i*q+j
  std::vector<AtomList> g;                 // g[k], E_11 g_k = g_k
  std::vector<std::vector<AtomList>> h;    // h[k][i]

  /// E_ij = e_ij (x) I_m placed in the leading qm coordinates of C^p.
  static std::vector<CMatrix> standard_units(int q, int m, int p);

  int size() const { return static_cast<int>(g.size()); }
  const CMatrix& unit(int i, int j) const { return units[static_cast<size_t>(i * q + j)]; }
  /// Sum of the E_ii.
  CMatrix unit_projection() const;

  /// Throws InvalidWeightFamily on any structural violation.
  void validate(const TolerancePolicy& tol = {}) const;

  VectorWeight theta() const;
  VectorWeight rho() const;
  /// Scalar weight mu(A) = sum_k (g_k, A g_k).
  VectorWeight mu() const;
};

/// Ambient map J(a) = sum_ij a_ij E_ij as a superoperator M_q -> B(C^p).
SuperOperator unit_embedding(const std::vector<CMatrix>& units, int q, int p);

/// Theta|_t Lambda J(a) = w_t a + Y_t a + a Y_t^* + R_t(a).
struct ThetaCutoff {
  double t = 0.0;
  double w = 0.0;
  CMatrix y;
  SuperOperator r;
};

ThetaCutoff theta_cutoff(const WeightFamily& w, double t, const TolerancePolicy& tol = {});

/// Evaluate Theta on an observable restricted to [t, inf) as a q x q matrix.
ExtMatrix evaluate_theta(const WeightFamily& w, const Observable& obs, double t = 0.0,
                         const TolerancePolicy& tol = {});

struct RhoMu {
  VectorWeight rho;
  VectorWeight mu;
};
RhoMu rho_and_mu(const WeightFamily& w);

/// Verdict with an optional witness vector.
struct RankCheck {
  bool holds = true;
  std::optional<CVector> witness;
};

/// True iff no nonzero combination sum c_k g_k is square integrable.
RankCheck strictly_infinite_mu(const WeightFamily& w, const TolerancePolicy& tol = {});
/// True iff every c with sum c_k g_k = 0 also has sum c_k h_ik = 0 for all i.
RankCheck h_independent_over_g(const WeightFamily& w, const TolerancePolicy& tol = {});
/// True iff mu(Lambda(u u^*)) is infinite for every unit u in the range of E_11; the witness is
/// a vector in C^p.
RankCheck full_corner_divergence(const WeightFamily& w, const TolerancePolicy& tol = {});

/// Atom list with atoms of equal (alpha, a) merged and zero coefficients removed.
AtomList merge_atoms(const AtomList& f, double eps = 1e-12);

}  // namespace qwl
