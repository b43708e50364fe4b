// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/bweight.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qwl {

Atom Atom::scalar(double alpha, double a, cplx c) {
  Atom at;
  at.alpha = alpha;
  at.a = a;
  at.coef = CVector::Constant(1, c);
  return at;
}

CVector Atom::operator()(double x) const { return coef * (std::pow(x, alpha) * std::exp(-a * x)); }

CVector evaluate_atoms(const AtomList& f, int dim, double x) {
  CVector out = CVector::Zero(dim);
  for (const Atom& at : f) out += at(x);
  return out;
}

AtomList transform_atoms(const AtomList& f, const CMatrix& m) {
  AtomList out = f;
  for (Atom& at : out) at.coef = m * at.coef;
  return out;
}

AtomList scale_atoms(const AtomList& f, cplx s) {
  AtomList out = f;
  for (Atom& at : out) at.coef *= s;
  return out;
}

AtomList concat_atoms(const AtomList& f, const AtomList& g) {
  AtomList out = f;
  out.insert(out.end(), g.begin(), g.end());
  return out;
}

AtomList merge_atoms(const AtomList& f, double eps) {
  AtomList out;
  for (const Atom& at : f) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Atom& o) {
      return std::abs(o.alpha - at.alpha) <= eps && std::abs(o.a - at.a) <= eps;
    });
    if (it == out.end())
      out.push_back(at);
    else
      it->coef += at.coef;
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Atom& at) { return at.coef.norm() == 0.0; }),
            out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Observables.

Observable Observable::lambda(const CMatrix& b) {
  return Observable{{ObservableTerm{b, {ProfileTerm{1.0, 0.0, 1.0}}, 0.0, kInf}}};
}

Observable Observable::constant(const CMatrix& b) {
  return Observable{{ObservableTerm{b, {ProfileTerm{1.0, 0.0, 0.0}}, 0.0, kInf}}};
}

Observable Observable::window(const CMatrix& b, double u, double v) {
  return Observable{{ObservableTerm{b, {ProfileTerm{1.0, 0.0, 0.0}}, u, v}}};
}

Observable Observable::one_minus_lambda(const CMatrix& b) {
  const CMatrix id = CMatrix::Identity(b.rows(), b.cols());
  return constant(id) + lambda(b).scaled(-1.0);
}

Observable Observable::operator+(const Observable& o) const {
  Observable out = *this;
  out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
  return out;
}

Observable Observable::scaled(cplx s) const {
  Observable out = *this;
  for (ObservableTerm& t : out.terms) t.b *= s;
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form integrals.

double power_exp_integral(double s, double c, double lower, double upper) {
  if (!(c > 0.0)) throw InadmissiblePair("power_exp_integral: decay must be positive");
  if (!(lower > 0.0) && !(s > 0.0)) throw InadmissiblePair("power_exp_integral: divergent at the origin");
  if (!(upper > lower)) return 0.0;
  const double cs = std::pow(c, -s);
  const double head = lower > 0.0 ? upper_incomplete_gamma(s, c * lower) : std::tgamma(s);
  const double tail = std::isfinite(upper) ? upper_incomplete_gamma(s, c * upper) : 0.0;
  return cs * (head - tail);
}

namespace {

constexpr double kGroupEps = 1e-12;

// int_0^U x^{s-1} e^{-cx} dx with the constant Gamma(s) removed; finite for s > -1.
double regularized_integral(double s, double c, double upper) {
  double head;
  if (s == 0.0) {
    head = -std::log(c);
  } else {
    head = std::tgamma(1.0 + s) * std::expm1(-s * std::log(c)) / s;
  }
  const double tail = std::isfinite(upper) ? std::pow(c, -s) * upper_incomplete_gamma(s, c * upper) : 0.0;
  return head - tail;
}

// Pairs that diverge at the origin, grouped by exponent s <= 0.
struct DivGroup {
  double s = 0.0;
  CMatrix lead;   // sum of coefficient outer products; must vanish after contraction
  CMatrix reg;    // regularized value
  double scale = 0.0;
};

struct Moments {
  CMatrix finite;
  std::vector<DivGroup> groups;
};

// M_nm = int conj(f_n) g_m m(x) over [lower, upper].
Moments moments(const AtomList& f, const AtomList& g, const std::vector<ProfileTerm>& profile, double lower,
                double upper, int df, int dg) {
  Moments out;
  out.finite = CMatrix::Zero(df, dg);
  if (!(upper > lower)) return out;
  for (const Atom& fa : f) {
    if (fa.coef.size() != df) throw DimensionMismatch("gram: atom coefficient has the wrong dimension");
    for (const Atom& ga : g) {
      if (ga.coef.size() != dg) throw DimensionMismatch("gram: atom coefficient has the wrong dimension");
      for (const ProfileTerm& pt : profile) {
        const double s = fa.alpha + ga.alpha + pt.beta + 1.0;
        const double c = fa.a + ga.a + pt.b;
        if (!(s > -1.0))
          throw InadmissiblePair("gram: combined exponent " + std::to_string(s - 1.0) + " is not above -2");
        if (!(c > 0.0)) throw InadmissiblePair("gram: combined decay must be positive");
        const CMatrix outer = fa.coef.conjugate() * ga.coef.transpose() * pt.c;
        if (lower > 0.0 || s > kGroupEps) {
          out.finite += power_exp_integral(s, c, lower, upper) * outer;
          continue;
        }
        auto it = std::find_if(out.groups.begin(), out.groups.end(),
                               [s](const DivGroup& d) { return std::abs(d.s - s) <= kGroupEps; });
        if (it == out.groups.end()) {
          out.groups.push_back({s, CMatrix::Zero(df, dg), CMatrix::Zero(df, dg), 0.0});
          it = out.groups.end() - 1;
        }
        it->lead += outer;
        it->reg += regularized_integral(s, c, upper) * outer;
        it->scale += fa.coef.norm() * ga.coef.norm() * std::abs(pt.c);
      }
    }
  }
  return out;
}

cplx contract(const CMatrix& b, const CMatrix& m) { return b.cwiseProduct(m).sum(); }

struct ScalarGroup {
  double s;
  cplx lead;
  cplx reg;
  double scale;
};

}  // namespace

ExtValue gram(const AtomList& f, const AtomList& g, const Observable& obs, double t, const TolerancePolicy& tol) {
  ExtValue out;
  std::vector<ScalarGroup> groups;
  for (const ObservableTerm& term : obs.terms) {
    for (const ProfileTerm& pt : term.profile)
      if (pt.beta < 0.0 || pt.b < 0.0) throw InadmissiblePair("gram: profile exponents must be non-negative");
    const double lower = std::max(term.u, t);
    const Moments mo =
        moments(f, g, term.profile, lower, term.v, static_cast<int>(term.b.rows()), static_cast<int>(term.b.cols()));
    out.value += contract(term.b, mo.finite);
    const double bn = spectral_norm(term.b);
    for (const DivGroup& d : mo.groups) {
      auto it = std::find_if(groups.begin(), groups.end(),
                             [&](const ScalarGroup& sg) { return std::abs(sg.s - d.s) <= kGroupEps; });
      if (it == groups.end()) {
        groups.push_back({d.s, 0.0, 0.0, 0.0});
        it = groups.end() - 1;
      }
      it->lead += contract(term.b, d.lead);
      it->reg += contract(term.b, d.reg);
      it->scale += d.scale * bn;
    }
  }
  for (const ScalarGroup& sg : groups) {
    if (std::abs(sg.lead) > tol.eps_eq * sg.scale) {
      out.divergent = true;
      return out;
    }
    out.value += sg.reg;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector weights.

ExtMatrix VectorWeight::evaluate(const Observable& obs, double t, const TolerancePolicy& tol) const {
  ExtMatrix out;
  out.value = CMatrix::Zero(q, q);
  for (const auto& fk : f)
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        const ExtValue v = gram(fk[static_cast<size_t>(i)], fk[static_cast<size_t>(j)], obs, t, tol);
        if (v.divergent) out.divergent = true;
        out.value(i, j) += v.value;
      }
  return out;
}

SuperOperator VectorWeight::superop(const std::vector<ProfileTerm>& profile, double u, double v, double t,
                                    const TolerancePolicy& tol) const {
  CMatrix action = CMatrix::Zero(q * q, p * p);
  const double lower = std::max(u, t);
  for (const auto& fk : f)
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        const Moments mo = moments(fk[static_cast<size_t>(i)], fk[static_cast<size_t>(j)], profile, lower, v, p, p);
        CMatrix m = mo.finite;
        for (const DivGroup& d : mo.groups) {
          if (d.lead.cwiseAbs().maxCoeff() > tol.eps_eq * d.scale)
            throw DivergentValue("vector weight is infinite on some matrix unit");
          m += d.reg;
        }
        for (int n = 0; n < p; ++n)
          for (int mm = 0; mm < p; ++mm) action(i * q + j, n * p + mm) += m(n, mm);
      }
  return SuperOperator(p, q, std::move(action));
}

SuperOperator VectorWeight::lambda_superop(double t, const TolerancePolicy& tol) const {
  return superop({ProfileTerm{1.0, 0.0, 1.0}}, 0.0, kInf, t, tol);
}

// ---------------------------------------------------------------------------
// Weight families.

std::vector<CMatrix> WeightFamily::standard_units(int q, int m, int p) {
  if (q * m > p) throw InvalidWeightFamily("standard_units: q*m exceeds p");
  std::vector<CMatrix> out;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      CMatrix e = CMatrix::Zero(p, p);
      e.block(i * m, j * m, m, m) = CMatrix::Identity(m, m);
      out.push_back(e);
    }
  return out;
}

CMatrix WeightFamily::unit_projection() const {
  CMatrix s = CMatrix::Zero(p, p);
  for (int i = 0; i < q; ++i) s += unit(i, i);
  return s;
}

namespace {

const AtomList& empty_list() {
  static const AtomList e;
  return e;
}

const AtomList& h_at(const WeightFamily& w, int k, int i) {
  if (static_cast<int>(w.h.size()) <= k) return empty_list();
  const auto& hk = w.h[static_cast<size_t>(k)];
  if (static_cast<int>(hk.size()) <= i) return empty_list();
  return hk[static_cast<size_t>(i)];
}

void check_atoms(const AtomList& f, int p, bool square_integrable, const std::string& what) {
  for (const Atom& at : f) {
    if (!(at.alpha > -1.0)) throw InvalidWeightFamily(what + ": alpha must exceed -1");
    if (square_integrable && !(at.alpha > -0.5))
      throw InvalidWeightFamily(what + ": alpha must exceed -1/2 (square integrable)");
    if (!(at.a > 0.0)) throw InvalidWeightFamily(what + ": decay a must be positive");
    if (at.coef.size() != p) throw InvalidWeightFamily(what + ": coefficient dimension differs from p");
  }
}

}  // namespace

void WeightFamily::validate(const TolerancePolicy& tol) const {
  if (m < 1 || q < 1 || p < 1) throw InvalidWeightFamily("m, q, p must be positive");
  if (p < q * m) throw InvalidWeightFamily("p must be at least q*m");
  if (static_cast<int>(units.size()) != q * q) throw InvalidWeightFamily("expected q^2 matrix units");
  for (const CMatrix& e : units)
    if (e.rows() != p || e.cols() != p) throw InvalidWeightFamily("matrix unit has the wrong shape");
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      if ((unit(i, j).adjoint() - unit(j, i)).cwiseAbs().maxCoeff() > tol.eps_eq)
        throw InvalidWeightFamily("matrix units: E_ij^* != E_ji");
      for (int n = 0; n < q; ++n)
        for (int mm = 0; mm < q; ++mm) {
          const CMatrix expect = (j == n) ? unit(i, mm) : CMatrix::Zero(p, p);
          if ((unit(i, j) * unit(n, mm) - expect).cwiseAbs().maxCoeff() > tol.eps_eq)
            throw InvalidWeightFamily("matrix units: E_ij E_nm != delta_jn E_im");
        }
    }
  const int rank = numerical_rank(unit(0, 0), tol.eps_rank);
  if (rank != m) throw InvalidWeightFamily("E_11 has rank " + std::to_string(rank) + ", expected m");
  if (!h.empty() && static_cast<int>(h.size()) != size())
    throw InvalidWeightFamily("h must have one row per g");
  for (int k = 0; k < size(); ++k) {
    const std::string gk = "g[" + std::to_string(k) + "]";
    check_atoms(g[static_cast<size_t>(k)], p, false, gk);
    for (const Atom& at : g[static_cast<size_t>(k)])
      if ((unit(0, 0) * at.coef - at.coef).norm() > tol.eps_eq * std::max(1.0, at.coef.norm()))
        throw InvalidWeightFamily(gk + ": coefficient leaves the range of E_11");
    if (!h.empty() && !h[static_cast<size_t>(k)].empty() && static_cast<int>(h[static_cast<size_t>(k)].size()) != q)
      throw InvalidWeightFamily("h[" + std::to_string(k) + "] must have q entries");
    AtomList corner;
    for (int i = 0; i < q; ++i) {
      check_atoms(h_at(*this, k, i), p, true, "h[" + std::to_string(k) + "][" + std::to_string(i) + "]");
      corner = concat_atoms(corner, transform_atoms(h_at(*this, k, i), unit(0, i)));
    }
    double scale = 1.0;
    for (const Atom& at : corner) scale = std::max(scale, at.coef.norm());
    for (const Atom& at : merge_atoms(corner))
      if (at.coef.norm() > tol.eps_eq * scale)
        throw InvalidWeightFamily("h[" + std::to_string(k) + "]: sum_i E_1i h_ik is not zero");
  }
}

VectorWeight WeightFamily::theta() const {
  VectorWeight vw{p, q, {}};
  for (int k = 0; k < size(); ++k) {
    std::vector<AtomList> fk;
    for (int i = 0; i < q; ++i)
      fk.push_back(concat_atoms(transform_atoms(g[static_cast<size_t>(k)], unit(i, 0)), h_at(*this, k, i)));
    vw.f.push_back(std::move(fk));
  }
  return vw;
}

VectorWeight WeightFamily::rho() const {
  VectorWeight vw{p, q, {}};
  for (int k = 0; k < size(); ++k) {
    std::vector<AtomList> fk;
    for (int i = 0; i < q; ++i) fk.push_back(h_at(*this, k, i));
    vw.f.push_back(std::move(fk));
  }
  return vw;
}

VectorWeight WeightFamily::mu() const {
  VectorWeight vw{p, 1, {}};
  for (const AtomList& gk : g) vw.f.push_back({gk});
  return vw;
}

SuperOperator unit_embedding(const std::vector<CMatrix>& units, int q, int p) {
  CMatrix action(p * p, q * q);
  for (int k = 0; k < q * q; ++k) action.col(k) = vec(units[static_cast<size_t>(k)]);
  return SuperOperator(q, p, std::move(action));
}

ThetaCutoff theta_cutoff(const WeightFamily& w, double t, const TolerancePolicy& tol) {
  if (!(t > 0.0)) throw DomainError("theta_cutoff: t must be positive");
  ThetaCutoff out;
  out.t = t;
  const Observable lam = Observable::lambda(CMatrix::Identity(w.p, w.p));
  for (const AtomList& gk : w.g) out.w += gram(gk, gk, lam, t, tol).value.real();
  out.y = CMatrix::Zero(w.q, w.q);
  for (int k = 0; k < w.size(); ++k)
    for (int i = 0; i < w.q; ++i)
      for (int n = 0; n < w.q; ++n)
        out.y(i, n) += gram(h_at(w, k, i), transform_atoms(w.g[static_cast<size_t>(k)], w.unit(n, 0)), lam, t, tol).value;
  out.r = compose(w.rho().lambda_superop(t, tol), unit_embedding(w.units, w.q, w.p));
  return out;
}

ExtMatrix evaluate_theta(const WeightFamily& w, const Observable& obs, double t, const TolerancePolicy& tol) {
  return w.theta().evaluate(obs, t, tol);
}

RhoMu rho_and_mu(const WeightFamily& w) { return {w.rho(), w.mu()}; }

// ---------------------------------------------------------------------------
// Rank conditions.

namespace {

struct Key {
  double alpha;
  double a;
};

// Coefficient matrix: rows (key, n), columns k, entry = sum of coefficients of atoms in list k
// matching the key. With match_decay false, atoms are keyed by alpha only.
CMatrix grouped_coefficients(const std::vector<const AtomList*>& lists, int dim, bool match_decay,
                             bool divergent_only) {
  std::vector<Key> keys;
  auto same = [&](const Key& k, const Atom& at) {
    return std::abs(k.alpha - at.alpha) <= kGroupEps && (!match_decay || std::abs(k.a - at.a) <= kGroupEps);
  };
  for (const AtomList* l : lists)
    for (const Atom& at : *l) {
      if (divergent_only && !at.divergent()) continue;
      if (std::none_of(keys.begin(), keys.end(), [&](const Key& k) { return same(k, at); }))
        keys.push_back({at.alpha, at.a});
    }
  CMatrix out = CMatrix::Zero(static_cast<int>(keys.size()) * dim, static_cast<int>(lists.size()));
  for (size_t c = 0; c < lists.size(); ++c)
    for (const Atom& at : *lists[c]) {
      if (divergent_only && !at.divergent()) continue;
      for (size_t r = 0; r < keys.size(); ++r)
        if (same(keys[r], at)) out.block(static_cast<int>(r) * dim, static_cast<int>(c), dim, 1) += at.coef;
    }
  return out;
}

// Scale so the first entry of (near) maximal magnitude equals one.
CVector normalize_by_largest(const CVector& v) {
  const double top = v.cwiseAbs().maxCoeff();
  Eigen::Index idx = 0;
  while (std::abs(v(idx)) < (1.0 - 1e-8) * top) ++idx;
  return v / v(idx);
}

// Either every vector of null(a) is annihilated by b, or a witness c in null(a) with b c != 0.
RankCheck kernel_inclusion(const CMatrix& a, const CMatrix& b, int cols, const TolerancePolicy& tol) {
  RankCheck out;
  const CMatrix n = a.rows() == 0 ? CMatrix::Identity(cols, cols) : null_space(a, tol.eps_rank);
  if (n.cols() == 0 || b.rows() == 0) return out;
  const CMatrix bn = b * n;
  const double bscale = std::max(1.0, b.cwiseAbs().maxCoeff());
  Eigen::JacobiSVD<CMatrix> svd(bn, Eigen::ComputeFullV);
  if (svd.singularValues().size() == 0 || svd.singularValues()(0) <= tol.eps_rank * bscale) return out;
  out.holds = false;
  out.witness = normalize_by_largest(n * svd.matrixV().col(0));
  return out;
}

}  // namespace

RankCheck strictly_infinite_mu(const WeightFamily& w, const TolerancePolicy& tol) {
  std::vector<const AtomList*> lists;
  for (const AtomList& gk : w.g) lists.push_back(&gk);
  const CMatrix lead = grouped_coefficients(lists, w.p, false, true);
  const CMatrix exact = grouped_coefficients(lists, w.p, true, false);
  return kernel_inclusion(lead, exact, w.size(), tol);
}

RankCheck h_independent_over_g(const WeightFamily& w, const TolerancePolicy& tol) {
  std::vector<const AtomList*> gl;
  for (const AtomList& gk : w.g) gl.push_back(&gk);
  const CMatrix gmat = grouped_coefficients(gl, w.p, true, false);
  CMatrix hmat(0, w.size());
  for (int i = 0; i < w.q; ++i) {
    std::vector<const AtomList*> hl;
    for (int k = 0; k < w.size(); ++k) hl.push_back(&h_at(w, k, i));
    const CMatrix hi = grouped_coefficients(hl, w.p, true, false);
    CMatrix stacked(hmat.rows() + hi.rows(), w.size());
    stacked << hmat, hi;
    hmat = stacked;
  }
  return kernel_inclusion(gmat, hmat, w.size(), tol);
}

RankCheck full_corner_divergence(const WeightFamily& w, const TolerancePolicy& tol) {
  RankCheck out;
  const CMatrix v = range_basis(w.unit(0, 0), tol.eps_rank);
  std::vector<const AtomList*> lists;
  for (const AtomList& gk : w.g) lists.push_back(&gk);
  const CMatrix lead = grouped_coefficients(lists, w.p, false, true);
  // Rows l^* V for every leading coefficient vector l.
  const int blocks = static_cast<int>(lead.rows()) / w.p;
  CMatrix rows(blocks * w.size(), v.cols());
  for (int r = 0; r < blocks; ++r)
    for (int k = 0; k < w.size(); ++k)
      rows.row(r * w.size() + k) = lead.block(r * w.p, k, w.p, 1).adjoint() * v;
  const CMatrix n = rows.rows() == 0 ? CMatrix::Identity(v.cols(), v.cols()) : null_space(rows, tol.eps_rank);
  if (n.cols() == 0) return out;
  out.holds = false;
  CVector u = v * n.col(0);
  out.witness = fix_phase(u / u.norm());
  return out;
}

}  // namespace qwl
