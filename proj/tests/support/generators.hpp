// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors
//
// Hand-rolled generators shared by the unit and acceptance suites.

#pragma once

#include <utility>
#include <vector>

#include "qwl/bweight.hpp"
#include "qwl/qweight.hpp"
#include "qwl/condform.hpp"
#include "qwl/random.hpp"
#include "qwl/superop.hpp"

namespace qwl::testgen {

/// Random CP map with `rank` Kraus operators.
inline SuperOperator random_cp(Rng& rng, int d, int rank = -1, double scale = 1.0) {
  if (rank < 0) rank = rng.integer(1, d * d);
  std::vector<CMatrix> ops;
  for (int k = 0; k < rank; ++k) ops.push_back(random_complex(rng, d, d) * (scale / std::sqrt(double(d * rank))));
  return SuperOperator::from_kraus(ops);
}

/// Random hermitian map: hermitian Choi matrix with gaussian entries.
inline SuperOperator random_hermitian_map(Rng& rng, int d) {
  return SuperOperator::from_choi(random_hermitian(rng, d * d), d, d);
}

inline CMatrix random_traceless(Rng& rng, int d) {
  CMatrix y = random_complex(rng, d, d);
  y -= ntrace(y) * CMatrix::Identity(d, d);
  return y;
}

/// Canonical form with prescribed internal eigenvalues and a random internal basis.
inline CanonicalForm random_canonical(Rng& rng, int d, const std::vector<double>& lambdas, double s,
                                      const CMatrix& y) {
  CanonicalForm cf;
  cf.dim = d;
  cf.s = s;
  cf.y = y;
  const std::vector<CMatrix> basis = operator_basis(d, static_cast<std::uint64_t>(rng.integer(1, 1 << 30)));
  for (size_t i = 0; i < lambdas.size(); ++i) cf.internal.push_back({lambdas[i], basis[i + 1]});
  return cf;
}

/// Random hermitian map whose internal spectrum stays at least `margin` away from zero.
/// kind: 0 = all positive, 1 = all negative, 2 = mixed signs, 3 = internal part zero.
inline SuperOperator random_classed_map(Rng& rng, int d, int kind, double margin = 0.05) {
  const int n = d * d - 1;
  std::vector<double> lam(n);
  for (int i = 0; i < n; ++i) {
    const double mag = margin + rng.uniform(0.0, 1.0);
    double sign = 1.0;
    if (kind == 1) sign = -1.0;
    if (kind == 2) sign = (i == 0) ? 1.0 : (i == 1 ? -1.0 : (rng.uniform() < 0.5 ? 1.0 : -1.0));
    lam[i] = sign * mag;
  }
  if (kind == 3) lam.clear();
  const CanonicalForm cf = random_canonical(rng, d, lam, rng.uniform(-1.0, 1.0), random_traceless(rng, d));
  return reassemble(cf);
}

/// Conditionally negative map with phi(I) >= floor * I: completion of a random CP map.
inline SuperOperator random_cond_negative(Rng& rng, int d, double floor = 0.1) {
  const SuperOperator k = random_cp(rng, d);
  const CMatrix t = random_psd(rng, d) * 0.5 + floor * CMatrix::Identity(d, d) * 1.05;
  const CMatrix c = random_hermitian(rng, d) * 0.3;
  return complete_to_cond_zero(k, t, c);
}

/// Ordered pair phi <= phi' of conditionally negative maps with unit lower bounds.
inline std::pair<SuperOperator, SuperOperator> random_ordered_cn_pair(Rng& rng, int d, double floor = 0.1) {
  const SuperOperator k1 = random_cp(rng, d);
  const SuperOperator dp = random_cp(rng, d, -1, 0.5);
  const CMatrix t = random_psd(rng, d) * 0.5 + floor * CMatrix::Identity(d, d) * 1.05;
  const SuperOperator phi = complete_to_cond_zero(k1 + dp, t);
  const double s = rng.uniform(0.0, 0.5);
  const SuperOperator phi2 = phi + SuperOperator::identity(d) * s + dp;
  return {phi, phi2};
}

/// Random atom list in C^dim; exponents drawn from `alphas`, decays from [0.3, 2].
inline AtomList random_atoms(Rng& rng, int dim, int count, const std::vector<double>& alphas) {
  AtomList out;
  for (int k = 0; k < count; ++k) {
    Atom at;
    at.alpha = alphas[static_cast<size_t>(rng.integer(0, static_cast<int>(alphas.size()) - 1))];
    at.a = rng.uniform(0.3, 2.0);
    at.coef = random_complex(rng, dim, 1).col(0);
    out.push_back(at);
  }
  return out;
}

/// Random family over standard units. g atoms use `g_alphas`; h atoms are square integrable and
/// satisfy sum_i E_1i h_ik = 0 atom-wise.
inline WeightFamily random_family(Rng& rng, int q, int m, int p, int count, const std::vector<double>& g_alphas,
                                  bool with_h = true, double h_scale = 0.3,
                                  const std::vector<double>& h_alphas = {0.0, 0.25, 1.0}) {
  WeightFamily w;
  w.q = q;
  w.m = m;
  w.p = p;
  w.units = WeightFamily::standard_units(q, m, p);
  const CMatrix e11 = w.unit(0, 0);
  for (int k = 0; k < count; ++k) {
    AtomList gk = random_atoms(rng, p, rng.integer(1, 2), g_alphas);
    for (Atom& at : gk) at.coef = e11 * at.coef;
    w.g.push_back(gk);
    if (!with_h) continue;
    const AtomList shape = random_atoms(rng, p, rng.integer(1, 2), h_alphas);
    std::vector<AtomList> hk(static_cast<size_t>(q));
    for (const Atom& base : shape) {
      std::vector<CVector> c(static_cast<size_t>(q));
      for (auto& v : c) v = random_complex(rng, p, 1).col(0) * h_scale;
      CVector corner = CVector::Zero(p);
      for (int i = 1; i < q; ++i) corner += w.unit(0, i) * c[static_cast<size_t>(i)];
      c[0] = (CMatrix::Identity(p, p) - e11) * c[0] - corner;
      for (int i = 0; i < q; ++i) hk[static_cast<size_t>(i)].push_back(Atom{base.alpha, base.a, c[static_cast<size_t>(i)]});
    }
    w.h.push_back(hk);
  }
  return w;
}

/// Summand M_q (x) I_m of a conditional expectation.
struct Block {
  int q = 1;
  int m = 1;
};

/// CP contractive idempotent A -> phi(A) + K phi(A) K^* conjugated by a unitary, where phi is a
/// conditional expectation onto the direct sum of blocks (faithful states on the I_m factors)
/// and K maps the block space into `extra` further dimensions with ||K|| = kappa.
inline SuperOperator random_idempotent(Rng& rng, const std::vector<Block>& blocks, int extra, double kappa,
                                       bool rotate = true) {
  int f = 0;
  for (const Block& b : blocks) f += b.q * b.m;
  const int p = f + extra;
  std::vector<CMatrix> states;
  for (const Block& b : blocks) {
    CMatrix rho = random_psd(rng, b.m) + 0.2 * CMatrix::Identity(b.m, b.m);
    states.push_back(rho / rho.trace().real());
  }
  CMatrix k = CMatrix::Zero(p, p);
  if (extra > 0 && kappa > 0.0) {
    const CMatrix raw = random_complex(rng, extra, f);
    k.bottomLeftCorner(extra, f) = raw * (kappa / spectral_norm(raw));
  }
  const CMatrix v = rotate ? random_unitary(rng, p) : CMatrix::Identity(p, p);
  auto expectation = [=](const CMatrix& a) {
    CMatrix out = CMatrix::Zero(p, p);
    int off = 0;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      const int q = blocks[bi].q;
      const int m = blocks[bi].m;
      const CMatrix& rho = states[bi];
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
          cplx y = 0.0;
          for (int n = 0; n < m; ++n)
            for (int n2 = 0; n2 < m; ++n2) y += rho(n2, n) * a(off + i * m + n, off + j * m + n2);
          for (int n = 0; n < m; ++n) out(off + i * m + n, off + j * m + n) = y;
        }
      off += q * m;
    }
    return out;
  };
  return SuperOperator::from_function(p, p, [=](const CMatrix& a) {
    const CMatrix e = expectation(v.adjoint() * a * v);
    return CMatrix(v * (e + k * e * k.adjoint()) * v.adjoint());
  });
}

/// A -> (id (x) omega_rho)(A) (x) I_m on C^q (x) C^m; the range is M_q (x) I_m for every state.
inline SuperOperator partial_state_idempotent(int q, const CMatrix& rho) {
  const int m = static_cast<int>(rho.rows());
  return SuperOperator::from_function(q * m, q * m, [=](const CMatrix& a) {
    CMatrix out = CMatrix::Zero(q * m, q * m);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        cplx y = 0.0;
        for (int n = 0; n < m; ++n)
          for (int n2 = 0; n2 < m; ++n2) y += rho(n2, n) * a(i * m + n, j * m + n2);
        for (int n = 0; n < m; ++n) out(i * m + n, j * m + n) = y;
      }
    return out;
  });
}

/// A -> F A F + lambda e_32 A e_23 on C^3 with F = e_11 + e_22.
inline SuperOperator corner_idempotent(double lambda) {
  const CMatrix f = matrix_unit(3, 0, 0) + matrix_unit(3, 1, 1);
  return SuperOperator::sandwich(f, f) +
         lambda * SuperOperator::sandwich(matrix_unit(3, 2, 1), matrix_unit(3, 1, 2));
}

/// p = q = m = 1 with g = x^alpha e^{-a x} and psi = mu(I - Lambda) + extra.
inline QWeightSpec scalar_spec(double alpha = -0.5, double a = 0.5, double extra = 0.0) {
  WeightFamily w;
  w.units = WeightFamily::standard_units(1, 1, 1);
  w.g = {{Atom::scalar(alpha, a)}};
  return {w, completed_psi(w, extra)};
}

/// Random factor spec with psi completed from rho Lambda~ and the unit gap `extra`.
inline QWeightSpec factor_spec(std::uint64_t seed, int q, int m, int p, int k, double alpha_g, bool with_h = true,
                               double extra = 0.0, const std::vector<double>& h_alphas = {1.0}) {
  Rng rng(seed);
  const WeightFamily w = random_family(rng, q, m, p, k, {alpha_g}, with_h, 0.3, h_alphas);
  return {w, completed_psi(w, extra)};
}

/// X = iota - D with D(A) = Tr(A) I / d: not CP, negative internal part, X(I) = 0.
inline SuperOperator depolarizing_gap(int d) {
  return SuperOperator::identity(d) -
         SuperOperator::from_function(d, d, [d](const CMatrix& a) { return a.trace() * CMatrix::Identity(d, d) / double(d); });
}

}  // namespace qwl::testgen
