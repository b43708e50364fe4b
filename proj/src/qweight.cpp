// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/qweight.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "qwl/errors.hpp"
#include "qwl/random.hpp"

namespace qwl {

namespace {

bool cp(const SuperOperator& m, const TolerancePolicy& tol) { return is_completely_positive(m, tol).is_cp; }

bool psd(const CMatrix& a, const TolerancePolicy& tol) { return min_eig_psd_test(hermitian_part(a), tol).is_psd; }

bool cond_negative(const SuperOperator& m, const TolerancePolicy& tol) {
  const ConditionalClass c = classify(m, tol).cls;
  return c == ConditionalClass::ConditionallyNegative || c == ConditionalClass::ConditionallyZero;
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

// Smallest singular value of the action relative to the largest.
bool invertible(const SuperOperator& m, double eps_rank) {
  Eigen::JacobiSVD<CMatrix> svd(m.action());
  const RVector& s = svd.singularValues();
  return s.size() > 0 && s(s.size() - 1) > eps_rank * std::max(1.0, s(0));
}

Observable unit_complement(const WeightFamily& w) {
  return Observable::constant(CMatrix::Identity(w.p, w.p)) + Observable::lambda(w.unit_projection()).scaled(-1.0);
}

// theta - eta as a single signed value.
ExtMatrix difference(ExtMatrix a, const std::optional<VectorWeight>& eta, const Observable& obs, double t,
                     const TolerancePolicy& tol) {
  if (!eta) return a;
  const ExtMatrix b = eta->evaluate(obs, t, tol);
  a.divergent = a.divergent || b.divergent;
  if (!a.divergent) a.value -= b.value;
  return a;
}

// Orthonormal coordinates on span{x^alpha e^{-a x}} over [t, inf), tensored with C^p.
struct Frame {
  int p = 0;
  std::vector<std::pair<double, double>> keys;
  RMatrix coord;  // L' x L with G = coord^T coord

  int dim() const { return p * static_cast<int>(coord.rows()); }

  CVector coords(const AtomList& f) const {
    const int l = static_cast<int>(keys.size());
    CMatrix c = CMatrix::Zero(p, l);
    for (const Atom& at : f) {
      const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) {
        return std::abs(k.first - at.alpha) <= 1e-12 && std::abs(k.second - at.a) <= 1e-12;
      });
      c.col(static_cast<int>(it - keys.begin())) += at.coef;
    }
    const CMatrix u = c * coord.transpose().cast<cplx>();  // p x L'
    return vec(u);
  }
};

Frame make_frame(const std::vector<const VectorWeight*>& sources, int p, double t) {
  Frame fr;
  fr.p = p;
  for (const VectorWeight* vw : sources)
    for (const auto& fk : vw->f)
      for (const AtomList& fi : fk)
        for (const Atom& at : fi)
          if (std::none_of(fr.keys.begin(), fr.keys.end(), [&](const auto& k) {
                return std::abs(k.first - at.alpha) <= 1e-12 && std::abs(k.second - at.a) <= 1e-12;
              }))
            fr.keys.emplace_back(at.alpha, at.a);
  // Sorted keys make the coordinates independent of the order of the sources.
  std::sort(fr.keys.begin(), fr.keys.end());
  const int l = static_cast<int>(fr.keys.size());
  RMatrix g(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      g(i, j) = power_exp_integral(fr.keys[i].first + fr.keys[j].first + 1.0, fr.keys[i].second + fr.keys[j].second,
                                   t, kInf);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(g);
  const RVector& d = es.eigenvalues();
  const double top = d.size() > 0 ? d(d.size() - 1) : 0.0;
  std::vector<int> kept;
  for (int i = 0; i < l; ++i)
    if (d(i) > 1e-13 * top) kept.push_back(i);
  fr.coord.resize(static_cast<int>(kept.size()), l);
  for (size_t r = 0; r < kept.size(); ++r)
    fr.coord.row(static_cast<int>(r)) = std::sqrt(d(kept[r])) * es.eigenvectors().col(kept[r]).transpose();
  return fr;
}

// A -> sum_k U_k^* A U_k with U_k = [u_1k ... u_qk].
SuperOperator compress(const VectorWeight& vw, const Frame& fr) {
  std::vector<CMatrix> ops;
  for (const auto& fk : vw.f) {
    CMatrix s(vw.q, fr.dim());
    for (int i = 0; i < vw.q; ++i) s.row(i) = fr.coords(fk[static_cast<size_t>(i)]).adjoint();
    ops.push_back(s);
  }
  if (ops.empty()) return SuperOperator::zero(fr.dim(), vw.q);
  return SuperOperator::from_kraus(ops);
}

double min_decay(const QWeightMap& w) {
  double a = kInf;
  for (const auto& fk : w.spec.w.theta().f)
    for (const AtomList& fi : fk)
      for (const Atom& at : fi) a = std::min(a, at.a);
  return std::isfinite(a) ? a : 1.0;
}

// Neville evaluation at x = 0 of the interpolant through (xs[i], ys[i]).
CMatrix neville_at_zero(const std::vector<double>& xs, std::vector<CMatrix> ys) {
  const size_t n = xs.size();
  for (size_t level = 1; level < n; ++level)
    for (size_t i = 0; i + level < n; ++i)
      ys[i] = ((0.0 - xs[i + level]) * ys[i] - (0.0 - xs[i]) * ys[i + 1]) / (xs[i] - xs[i + level]);
  return ys[0];
}

// Relative distance of x to the ray through psi, and the best scale.
std::pair<double, double> ray_distance(const CMatrix& x, const CMatrix& psi) {
  const double kappa = (psi.adjoint() * x).trace().real() / psi.squaredNorm();
  return {(x - kappa * psi).norm() / std::max(x.norm(), 1e-300), kappa};
}

Observable map_observable(const Observable& obs, const CMatrix& left, const CMatrix& right) {
  Observable out = obs;
  for (ObservableTerm& term : out.terms) term.b = left * term.b * right;
  return out;
}

QWeightMap assemble_impl(const QWeightSpec& spec, const std::optional<VectorWeight>& eta, const TolerancePolicy& tol,
                         bool subordinate) {
  tol.validate();
  spec.w.validate(tol);
  const WeightFamily& w = spec.w;
  if (spec.psi.dim_in() != w.q || spec.psi.dim_out() != w.q)
    throw SpecInvalid("psi must act on " + std::to_string(w.q) + " x " + std::to_string(w.q) + " coordinates");
  if (!spec.psi.is_hermitian(tol)) throw SpecInvalid("psi is not hermitian");
  auto fail = [&](auto err) {
    if (subordinate) throw PsiPrimeConditionFailure(err.what());
    throw err;
  };
  QWeightMap out;
  out.spec = spec;
  out.eta = eta;
  out.tol = tol;
  out.j = unit_embedding(w.units, w.q, w.p);
  if (!invertible(spec.psi, tol.eps_rank)) fail(PsiNotInvertible("psi is singular"));
  out.psi_inv = inverse(spec.psi, tol.eps_rank);
  if (!cp(out.psi_inv, tol)) fail(PsiInverseNotCP("psi^{-1} fails the Choi test"));
  out.rho_tilde = compose(w.rho().lambda_superop(0.0, tol), out.j);
  if (eta) out.rho_tilde = out.rho_tilde - compose(eta->lambda_superop(0.0, tol), out.j);
  if (!cond_negative(spec.psi + out.rho_tilde, tol))
    fail(ConditionalNegativityFailure(std::string("psi + rho Lambda~ is ") +
                                      to_string(classify(spec.psi + out.rho_tilde, tol).cls)));
  const ExtMatrix comp = difference(evaluate_theta(w, unit_complement(w), 0.0, tol), eta, unit_complement(w), 0.0, tol);
  if (comp.divergent) throw DivergentValue("theta(I - Lambda(I_o)) is infinite");
  const CMatrix unit = spec.psi.apply(CMatrix::Identity(w.q, w.q));
  out.unit_gap = unit - comp.value;
  if (!psd(out.unit_gap, tol))
    fail(UnitInequalityFailure("psi(1) - theta(I - Lambda(I_o)) has eigenvalue " +
                               std::to_string(min_eig_psd_test(hermitian_part(out.unit_gap), tol).min_eig)));
  out.unital = max_abs(out.unit_gap) <= tol.eps_eq * std::max(1.0, max_abs(comp.value));
  return out;
}

}  // namespace

TGrid dyadic_grid(int j0, int j1) {
  TGrid g;
  for (int j = j0; j <= j1; ++j) g.push_back(std::ldexp(1.0, -j));
  return g;
}

void validate_grid(const TGrid& grid) {
  if (grid.empty()) throw PreconditionError("t-grid is empty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw PreconditionError("t-grid entries must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1])) throw PreconditionError("t-grid must be strictly decreasing");
  }
}

// ---------------------------------------------------------------------------
// The handle.

ExtMatrix QWeightMap::weight(const Observable& a, double t) const {
  return difference(evaluate_theta(spec.w, a, t, tol), eta, a, t, tol);
}

CMatrix QWeightMap::omega(const Observable& a, double t) const {
  const ExtMatrix v = weight(a, t);
  if (v.divergent) throw DivergentValue("omega: value is infinite at t = " + std::to_string(t));
  return psi_inv.apply(v.value);
}

SuperOperator QWeightMap::skeleton_coords(double t) const {
  SuperOperator l = spec.w.theta().lambda_superop(t, tol);
  if (eta) l = l - eta->lambda_superop(t, tol);
  return compose(psi_inv, l);
}

SuperOperator QWeightMap::skeleton_tilde(double t) const { return compose(skeleton_coords(t), j); }

SuperOperator QWeightMap::resolvent(double t) const {
  const SuperOperator m = SuperOperator::identity(q()) + skeleton_tilde(t);
  if (!invertible(m, tol.eps_rank)) throw SingularResolvent("iota + phi_t is singular at t = " + std::to_string(t));
  return inverse(m, tol.eps_rank);
}

QWeightMap assemble(const QWeightSpec& spec, const TolerancePolicy& tol) {
  return assemble_impl(spec, std::nullopt, tol, false);
}

CMatrix boundary_rep_coords(const QWeightMap& w, double t, const Observable& a) {
  return w.resolvent(t).apply(w.omega(a, t));
}

CMatrix boundary_rep(const QWeightMap& w, double t, const Observable& a) {
  return w.j.apply(boundary_rep_coords(w, t, a));
}

CompressedBoundaryRep compressed_boundary_rep(const QWeightMap& w, double t,
                                              const std::vector<const VectorWeight*>& frame_sources) {
  if (!(t > 0.0)) throw PreconditionError("compressed_boundary_rep: t must be positive");
  const VectorWeight theta = w.spec.w.theta();
  std::vector<const VectorWeight*> sources{&theta};
  if (w.eta) sources.push_back(&*w.eta);
  sources.insert(sources.end(), frame_sources.begin(), frame_sources.end());
  const Frame fr = make_frame(sources, w.p(), t);
  SuperOperator th = compress(theta, fr);
  if (w.eta) th = th - compress(*w.eta, fr);
  return {compose(w.resolvent(t), compose(w.psi_inv, th)), fr.dim()};
}

SuperOperator skeleton(const QWeightMap& w, double t) { return compose(w.j, w.skeleton_coords(t)); }

// ---------------------------------------------------------------------------
// Skeleton conditions.

bool SkeletonReport::all() const {
  auto every = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
  const bool integ = std::all_of(integration_defect.begin(), integration_defect.end(),
                                 [&](double d) { return d <= integration_tol; });
  return every(cp) && monotone && every(resolvent_cp) && difference_cp && every(unit_bound) && complement_cp &&
         conditionally_negative && integ;
}

bool skeleton_difference_cp(const QWeightMap& w, double t, double s, double r) {
  if (!(t > 0.0 && t <= s && s <= r)) throw PreconditionError("skeleton condition needs 0 < t <= s <= r");
  return cp(compose(w.resolvent(t), w.skeleton_coords(s) - w.skeleton_coords(r)), w.tol);
}

SkeletonReport skeleton_suite(const QWeightMap& w, const TGrid& grid, double integration_tol) {
  validate_grid(grid);
  const TolerancePolicy& tol = w.tol;
  const int n = static_cast<int>(grid.size());
  const int p = w.p();
  const int q = w.q();
  const CMatrix ip = CMatrix::Identity(p, p);
  const CMatrix iq = CMatrix::Identity(q, q);
  SkeletonReport rep;
  rep.grid = grid;
  rep.integration_tol = integration_tol;
  auto note = [&](const std::string& s) {
    if (rep.first_failure.empty()) rep.first_failure = s;
  };
  std::vector<SuperOperator> phi, res;
  for (double t : grid) {
    phi.push_back(w.skeleton_coords(t));
    res.push_back(w.resolvent(t));
  }
  for (int a = 0; a < n; ++a) {
    const std::string at = " at t = " + std::to_string(grid[a]);
    rep.cp.push_back(cp(phi[a], tol));
    if (!rep.cp.back()) note("(i) phi_t not CP" + at);
    const SuperOperator x = compose(res[a], phi[a]);
    rep.resolvent_cp.push_back(cp(x, tol));
    rep.contraction.push_back(spectral_norm(x.apply(ip)));
    if (!rep.resolvent_cp.back()) note("(iii) resolvent product not CP" + at);
    if (rep.contraction.back() > 1.0 + tol.eps_psd) note("(iii) norm exceeds one" + at);
    const CMatrix u = res[a].apply(w.omega(Observable::constant(ip), grid[a]));
    rep.unit_bound.push_back(psd(iq - u, tol));
    if (!rep.unit_bound.back()) note("(v) unit bound fails" + at);
  }
  // Grid index b > a means grid[b] < grid[a].
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const SuperOperator d = phi[b] - phi[a];
      if (!cp(d, tol)) {
        rep.monotone = false;
        note("(ii) phi_t - phi_s not CP");
      }
      const SuperOperator rd = compose(res[b], d);
      if (!cp(rd, tol)) {
        rep.complement_cp = false;
        note("(vi) resolvent difference not CP");
      }
      if (!cond_negative(SuperOperator::identity(p) - compose(w.j, rd), tol)) {
        rep.conditionally_negative = false;
        note("(vii) not conditionally negative");
      }
      for (int c = b; c < n; ++c)
        if (!cp(compose(res[c], d), tol)) {
          rep.difference_cp = false;
          note("(iv) resolvent times difference not CP");
        }
    }
  // omega|_t(I) = e^t phi_t(I) + int_t^inf e^s phi_s(I) ds; the quadrature stops at s_max and the
  // neglected tail is bounded by omega|_{s_max}(I).
  std::map<double, CMatrix> memo;
  auto integrand = [&](double s) -> const CMatrix& {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const ExtMatrix v = w.weight(Observable::lambda(ip), s);
    return memo.emplace(s, std::exp(s) * v.value).first->second;
  };
  const double smax_span = 60.0 / (2.0 * min_decay(w));
  for (int a = 0; a < n; ++a) {
    const double t = grid[a];
    const double smax = std::min(t + smax_span, 600.0);
    CMatrix integral = CMatrix::Zero(q, q);
    std::vector<std::pair<double, double>> pieces;
    if (t < 1.0 && smax > 1.0) pieces = {{t, 1.0}, {1.0, smax}};
    else pieces = {{t, smax}};
    for (const auto& [lo, hi] : pieces) {
      // The trace of the positive integrand sets an absolute floor for vanishing parts.
      const double mag = adaptive_quadrature([&](double s) { return integrand(s).trace().real(); }, lo, hi, 1e-6);
      for (int i = 0; i < q; ++i)
        for (int k = 0; k < q; ++k) {
          const double re =
              adaptive_quadrature([&](double s) { return integrand(s)(i, k).real(); }, lo, hi, 1e-11, 1e-14 * mag);
          const double im =
              adaptive_quadrature([&](double s) { return integrand(s)(i, k).imag(); }, lo, hi, 1e-11, 1e-14 * mag);
          integral(i, k) += cplx(re, im);
        }
    }
    const CMatrix lhs = w.omega(Observable::constant(ip), t);
    const CMatrix rhs = w.psi_inv.apply(integrand(t) + integral);
    rep.integration_defect.push_back((lhs - rhs).norm() / std::max(lhs.norm(), 1e-300));
    rep.integration_tail.push_back(spectral_norm(w.omega(Observable::constant(ip), smax)));
    if (rep.integration_defect.back() > integration_tol) note("integration identity fails at t = " + std::to_string(t));
  }
  memo.clear();
  return rep;
}

bool BoundaryRepReport::all() const {
  for (size_t i = 0; i < grid.size(); ++i)
    if (!cp[i] || !below_unit[i]) return false;
  return true;
}

BoundaryRepReport boundary_report(const QWeightMap& w, const TGrid& grid) {
  validate_grid(grid);
  BoundaryRepReport rep;
  rep.grid = grid;
  const CMatrix ip = CMatrix::Identity(w.p(), w.p());
  for (double t : grid) {
    rep.cp.push_back(cp(compressed_boundary_rep(w, t).map, w.tol));
    const CMatrix u = boundary_rep_coords(w, t, Observable::constant(ip));
    rep.contraction.push_back(spectral_norm(u));
    rep.below_unit.push_back(psd(CMatrix::Identity(w.q(), w.q()) - u, w.tol));
  }
  return rep;
}

ThetaLimitReport theta_limit(const QWeightMap& w, const TGrid& grid, int points) {
  validate_grid(grid);
  if (points < 1) throw PreconditionError("theta_limit: need at least one extrapolation point");
  const int q = w.q();
  const CMatrix iq = CMatrix::Identity(q, q);
  const SuperOperator id = SuperOperator::identity(q);
  ThetaLimitReport rep;
  rep.grid = grid;
  std::vector<double> eps;
  std::vector<CMatrix> scaled;
  SuperOperator prev;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double wt = theta_cutoff(w.spec.w, grid[i], w.tol).w;
    const SuperOperator tilde = w.skeleton_tilde(grid[i]);
    const SuperOperator sum = id + tilde;
    const double v = ntrace(sum.apply(iq)).real();
    const SuperOperator theta = sum * (1.0 / v);
    rep.w.push_back(wt);
    rep.v.push_back(v);
    if (i > 0) rep.cauchy.push_back(hs_norm(theta - prev));
    prev = theta;
    rep.distance.push_back(ray_distance(inverse(theta, w.tol.eps_rank).action(), w.spec.psi.action()).first);
    eps.push_back(1.0 / wt);
    scaled.push_back(sum.action() / wt);
  }
  rep.cauchy_monotone = true;
  for (size_t i = 1; i < rep.cauchy.size(); ++i)
    if (rep.cauchy[i] > rep.cauchy[i - 1]) rep.cauchy_monotone = false;
  const size_t k = std::min(static_cast<size_t>(points), eps.size());
  const std::vector<double> xs(eps.end() - static_cast<long>(k), eps.end());
  const std::vector<CMatrix> ys(scaled.end() - static_cast<long>(k), scaled.end());
  const SuperOperator limit(q, q, neville_at_zero(xs, ys));
  const double trace = ntrace(limit.apply(iq)).real();
  rep.theta_inverse = inverse(limit, w.tol.eps_rank) * trace;
  const auto [dist, kappa] = ray_distance(rep.theta_inverse.action(), w.spec.psi.action());
  rep.extrapolated_distance = dist;
  rep.scale = kappa;
  return rep;
}

// ---------------------------------------------------------------------------
// Subordinates.

bool trivial_subordinate_check(const QWeightMap& w, const SuperOperator& psi_prime) {
  try {
    assemble_impl({w.spec.w, psi_prime}, w.eta, w.tol, false);
  } catch (const Error& e) {
    throw SpecInvalid(std::string("psi' does not give a q-weight map: ") + e.what());
  }
  return cp(psi_prime - w.spec.psi, w.tol);
}

std::vector<bool> subordinate_grid_check(const QWeightMap& big, const QWeightMap& small, const TGrid& grid) {
  validate_grid(grid);
  const VectorWeight tb = big.spec.w.theta();
  const VectorWeight ts = small.spec.w.theta();
  std::vector<const VectorWeight*> sources{&tb, &ts};
  if (big.eta) sources.push_back(&*big.eta);
  if (small.eta) sources.push_back(&*small.eta);
  std::vector<bool> out;
  for (double t : grid) {
    const CompressedBoundaryRep a = compressed_boundary_rep(big, t, sources);
    const CompressedBoundaryRep b = compressed_boundary_rep(small, t, sources);
    if (a.frame_dim != b.frame_dim) throw DimensionMismatch("subordinate_grid_check: frames differ");
    out.push_back(cp(a.map - b.map, big.tol));
  }
  return out;
}

SubordinateResult construct_subordinate(const QWeightMap& w, const VectorWeight& eta, const SuperOperator& psi_prime,
                                        const TGrid& grid) {
  validate_grid(grid);
  if (w.eta) throw PreconditionError("construct_subordinate: omega is already a subordinate");
  if (eta.p != w.p() || eta.q != w.q()) throw SpecInvalid("eta has the wrong dimensions");
  for (const auto& fk : eta.f) {
    if (static_cast<int>(fk.size()) != w.q()) throw SpecInvalid("eta needs q vectors per term");
    for (const AtomList& fi : fk)
      for (const Atom& at : fi)
        if (at.divergent()) throw EtaNotDominated("eta must be bounded: an atom has alpha <= -1/2");
  }
  const TolerancePolicy& tol = w.tol;
  const VectorWeight theta = w.spec.w.theta();
  for (double t : grid) {
    const Frame fr = make_frame({&theta, &eta}, w.p(), t);
    if (!cp(compress(theta, fr) - compress(eta, fr), tol))
      throw EtaNotDominated("theta - eta is not CP on [" + std::to_string(t) + ", inf)");
  }
  const SuperOperator eta_tilde = compose(eta.lambda_superop(0.0, tol), w.j);
  if (!cp(psi_prime - w.spec.psi - eta_tilde, tol))
    throw PsiPrimeConditionFailure("psi' - psi - eta Lambda~ is not CP");
  if (!cond_negative(psi_prime + w.rho_tilde - eta_tilde, tol))
    throw PsiPrimeConditionFailure("psi' + rho Lambda~ - eta Lambda~ is not conditionally negative");
  SubordinateResult out{assemble_impl({w.spec.w, psi_prime}, eta, tol, true), {}};
  out.grid_cp = subordinate_grid_check(w, out.map, grid);
  return out;
}

// ---------------------------------------------------------------------------
// Purity and the rank-one reduction.

PurityCertificate certify_q_pure(const QWeightMap& w) {
  if (w.eta) throw PreconditionError("certify_q_pure: needs a map of the form psi^{-1} theta");
  PurityCertificate c;
  const SuperOperator x = w.spec.psi + w.rho_tilde;
  c.condition_i = classify(x, w.tol).cls == ConditionalClass::ConditionallyZero;
  if (!c.condition_i) c.witness_i = conditional_negativity_witness(x, w.tol);
  const RankCheck si = strictly_infinite_mu(w.spec.w, w.tol);
  const RankCheck hi = h_independent_over_g(w.spec.w, w.tol);
  c.strictly_infinite = si.holds;
  c.h_independent = hi.holds;
  c.condition_ii = si.holds && hi.holds;
  if (!si.holds) c.witness_ii = si.witness;
  else if (!hi.holds) c.witness_ii = hi.witness;
  const RankCheck fc = full_corner_divergence(w.spec.w, w.tol);
  c.condition_iii = fc.holds;
  if (!fc.holds) c.witness_iii = fc.witness;
  c.verdict = c.condition_i && c.condition_ii && c.condition_iii;
  return c;
}

RankOneReduction reduce_to_rank_one(const QWeightMap& w, std::uint64_t seed, int sweep) {
  if (w.eta) throw PreconditionError("reduce_to_rank_one: needs a map of the form psi^{-1} theta");
  if (!w.unital) throw NotUnital("psi(1) != theta(I - Lambda(I_o))");
  const WeightFamily& fam = w.spec.w;
  const int p = fam.p, q = fam.q, m = fam.m;
  if (p != q * m) throw PreconditionError("reduce_to_rank_one: needs p = q m");
  if (max_abs(fam.unit_projection() - CMatrix::Identity(p, p)) > w.tol.eps_eq)
    throw PreconditionError("reduce_to_rank_one: the units must sum to the identity");
  if (!certify_q_pure(w).verdict) throw NotQPure("the purity certificate fails");

  RankOneReduction out;
  CornerCertificate& cc = out.certificate;
  const TolerancePolicy& tol = w.tol;
  cc.s0 = fam.mu().evaluate(Observable::one_minus_lambda(CMatrix::Identity(p, p)), 0.0, tol).value(0, 0).real();
  const CanonicalForm cf = canonical_form(w.spec.psi + w.rho_tilde, tol);
  const CMatrix iq = CMatrix::Identity(q, q);
  cc.q = 0.5 * cf.s * iq + cf.y;
  cc.b = 0.5 * (cc.q + cc.q.adjoint()) - 0.5 * cc.s0 * iq;
  cc.c = (cc.q - cc.q.adjoint()) / cplx(0.0, 2.0);
  cc.z0 = cc.q + 0.5 * cc.s0 * iq;

  // eta = s0^{-1} I_m mu over C^m.
  const CMatrix v = range_basis(fam.unit(0, 0), tol.eps_rank);
  WeightFamily ef;
  ef.m = m;
  ef.q = 1;
  ef.p = m;
  ef.units = {CMatrix::Identity(m, m)};
  for (const AtomList& gk : fam.g) ef.g.push_back(transform_atoms(gk, v.adjoint()));
  out.eta = {ef, SuperOperator::identity(1) * cc.s0};

  // Enlarged family over C^{qm} + C^m.
  const int r = q + 1;
  const int pp = r * m;
  CMatrix top = CMatrix::Zero(pp, p);
  top.topRows(p) = CMatrix::Identity(p, p);
  CMatrix bot = CMatrix::Zero(pp, m);
  bot.bottomRows(m) = CMatrix::Identity(m, m);
  WeightFamily en;
  en.m = m;
  en.q = r;
  en.p = pp;
  en.units.assign(static_cast<size_t>(r * r), CMatrix::Zero(pp, pp));
  auto eu = [&](int i, int j) -> CMatrix& { return en.units[static_cast<size_t>(i * r + j)]; };
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) eu(i, j) = top * fam.unit(i, j) * top.adjoint();
  eu(q, 0) = bot * v.adjoint() * top.adjoint();
  eu(0, q) = eu(q, 0).adjoint();
  for (int j = 1; j < q; ++j) {
    eu(q, j) = eu(q, 0) * eu(0, j);
    eu(j, q) = eu(q, j).adjoint();
  }
  eu(q, q) = eu(q, 0) * eu(0, q);
  for (int k = 0; k < fam.size(); ++k) {
    en.g.push_back(transform_atoms(fam.g[static_cast<size_t>(k)], top));
    std::vector<AtomList> hk;
    for (int i = 0; i < q; ++i) {
      const bool present = k < static_cast<int>(fam.h.size()) && i < static_cast<int>(fam.h[static_cast<size_t>(k)].size());
      hk.push_back(present ? transform_atoms(fam.h[static_cast<size_t>(k)][static_cast<size_t>(i)], top) : AtomList{});
    }
    hk.emplace_back();
    en.h.push_back(std::move(hk));
  }
  const SuperOperator jr = unit_embedding(en.units, r, pp);
  const SuperOperator r0 = compose(en.rho().lambda_superop(0.0, tol), jr);
  CMatrix qq = CMatrix::Zero(r, r);
  qq.topLeftCorner(q, q) = cc.q;
  qq(q, q) = 0.5 * cc.s0;
  const CMatrix ir = CMatrix::Identity(r, r);
  out.enlarged = {en, SuperOperator(r, r, kron(qq, ir) + kron(ir, qq.conjugate())) - r0};

  const QWeightMap eta_map = assemble(out.eta, tol);
  const QWeightMap big = assemble(out.enlarged, tol);
  cc.eta_pure = certify_q_pure(eta_map).verdict;
  cc.enlarged_pure = certify_q_pure(big).verdict && big.unital;

  Eigen::ComplexEigenSolver<CMatrix> es(cc.z0);
  cc.real_parts_positive = true;
  for (int i = 0; i < q; ++i) {
    cc.z.push_back(es.eigenvalues()(i));
    if (!(es.eigenvalues()(i).real() > 0.0)) cc.real_parts_positive = false;
  }
  std::sort(cc.z.begin(), cc.z.end(), [](cplx a, cplx b) { return a.real() < b.real(); });

  // Corner E omega' F: psi'_lambda(x e_r^T) = Z_lambda x e_r^T.
  cc.corner_matches_z = true;
  cc.corner_distinct = true;
  const CMatrix z0inv = cc.z0.inverse();
  for (double lambda : {0.0, 0.5, 2.0}) {
    const SuperOperator inv = inverse(out.enlarged.psi + SuperOperator::identity(r) * lambda, tol.eps_rank);
    const CMatrix zinv = (cc.z0 + lambda * iq).inverse();
    for (int i = 0; i < q; ++i) {
      const CMatrix y = inv.apply(matrix_unit(r, i, q));
      CMatrix expect = CMatrix::Zero(r, r);
      expect.block(0, q, q, 1) = zinv.col(i);
      if (max_abs(y - expect) > 1e-8 * std::max(1.0, max_abs(expect))) cc.corner_matches_z = false;
    }
    if (lambda > 0.0 && max_abs(zinv - z0inv) <= 1e-6 * std::max(1.0, max_abs(z0inv))) cc.corner_distinct = false;
  }

  // Shur block structure on a deterministic observable sweep.
  Rng rng(seed);
  CMatrix pe = CMatrix::Zero(pp, pp);
  pe.topLeftCorner(p, p) = CMatrix::Identity(p, p);
  const CMatrix pf = CMatrix::Identity(pp, pp) - pe;
  cc.sweep_size = sweep;
  for (int n = 0; n < sweep; ++n) {
    const CMatrix b = random_hermitian(rng, pp);
    Observable obs;
    double t = 0.0;
    switch (n % 3) {
      case 0:
        obs = Observable::constant(b) + Observable::lambda(b).scaled(-1.0);
        break;
      case 1: {
        const double u = rng.uniform(0.05, 1.0);
        obs = Observable::window(b, u, u + rng.uniform(0.1, 3.0));
        break;
      }
      default:
        obs = Observable::lambda(b);
        t = std::ldexp(1.0, -(1 + n % 6));
    }
    const CMatrix full = big.omega(obs, t);
    const CMatrix ee = big.omega(map_observable(obs, pe, pe), t);
    const CMatrix ff = big.omega(map_observable(obs, pf, pf), t);
    const CMatrix small = w.omega(map_observable(obs, top.adjoint(), top), t);
    const CMatrix eta_v = eta_map.omega(map_observable(obs, bot.adjoint(), bot), t);
    const double scale = std::max(1.0, max_abs(full));
    CMatrix ee_expect = CMatrix::Zero(r, r);
    ee_expect.topLeftCorner(q, q) = small;
    CMatrix ff_expect = CMatrix::Zero(r, r);
    ff_expect(q, q) = eta_v(0, 0);
    double d = std::max(max_abs(ee - ee_expect), max_abs(ff - ff_expect));
    d = std::max(d, max_abs(full.topLeftCorner(q, q) - small));
    d = std::max(d, std::abs(full(q, q) - eta_v(0, 0)));
    cc.shur_defect = std::max(cc.shur_defect, d / scale);
  }
  cc.hyper_maximal = cc.real_parts_positive && cc.corner_matches_z && cc.corner_distinct && cc.enlarged_pure &&
                     cc.eta_pure && cc.shur_defect <= 1e-8;
  return out;
}

bool verify_conjugacy_witness(const QWeightSpec& a, const QWeightSpec& b, const CMatrix& u, double lambda,
                              const std::vector<AtomList>& h, const TolerancePolicy& tol) {
  if (a.w.q != 1 || b.w.q != 1) throw WitnessMalformed("conjugacy witnesses compare rank-one specs");
  if (u.rows() != b.w.p || u.cols() != a.w.p)
    throw WitnessMalformed("U must map C^" + std::to_string(a.w.p) + " to C^" + std::to_string(b.w.p));
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw WitnessMalformed("lambda must be positive");
  if (a.w.size() != b.w.size() || static_cast<int>(h.size()) != a.w.size())
    throw WitnessMalformed("g and h counts differ");
  for (const AtomList& hk : h)
    for (const Atom& at : hk)
      if (at.coef.size() != b.w.p) throw WitnessMalformed("h coefficients must live in C^" + std::to_string(b.w.p));
  const CMatrix& t1 = a.w.unit(0, 0);
  const CMatrix& t2 = b.w.unit(0, 0);
  const double us = std::max(1.0, max_abs(u) * max_abs(u));
  if (max_abs(u.adjoint() * u - t1) > tol.eps_eq * us || max_abs(u * u.adjoint() - t2) > tol.eps_eq * us) return false;
  for (int k = 0; k < a.w.size(); ++k) {
    const AtomList& hk = h[static_cast<size_t>(k)];
    if (std::any_of(hk.begin(), hk.end(), [](const Atom& at) { return at.divergent(); })) return false;
    const AtomList lhs = b.w.g[static_cast<size_t>(k)];
    const AtomList rhs = concat_atoms(scale_atoms(transform_atoms(a.w.g[static_cast<size_t>(k)], u), lambda), hk);
    double scale = 1.0;
    for (const Atom& at : concat_atoms(lhs, rhs)) scale = std::max(scale, at.coef.norm());
    for (const Atom& at : merge_atoms(concat_atoms(lhs, scale_atoms(rhs, -1.0)), 0.0))
      if (at.coef.norm() > tol.eps_eq * scale) return false;
  }
  return true;
}

IndexZeroReport index_zero_diagnostic(const QWeightMap& w, double s, const TGrid& grid) {
  validate_grid(grid);
  if (!(s > grid.front())) throw PreconditionError("index_zero_diagnostic: s must exceed every grid point");
  IndexZeroReport rep;
  rep.s = s;
  rep.grid = grid;
  const Observable tail = Observable::window(CMatrix::Identity(w.p(), w.p()), s, kInf);
  std::vector<double> eps;
  for (double t : grid) {
    rep.norms.push_back(spectral_norm(boundary_rep_coords(w, t, tail)));
    eps.push_back(1.0 / theta_cutoff(w.spec.w, t, w.tol).w);
  }
  rep.monotone = true;
  for (size_t i = 1; i < rep.norms.size(); ++i)
    if (rep.norms[i] > rep.norms[i - 1] * (1.0 + w.tol.eps_eq)) rep.monotone = false;
  const size_t n = rep.norms.size();
  rep.limit = rep.norms.back();
  if (n >= 2 && eps[n - 1] != eps[n - 2])
    rep.limit = rep.norms[n - 1] - (rep.norms[n - 1] - rep.norms[n - 2]) * eps[n - 1] / (eps[n - 1] - eps[n - 2]);
  return rep;
}

QWeightSpec scaled_spec(const QWeightSpec& spec, double s) {
  if (!(s > 0.0)) throw PreconditionError("scaled_spec: scale must be positive");
  QWeightSpec out = spec;
  const double r = std::sqrt(s);
  for (AtomList& gk : out.w.g) gk = scale_atoms(gk, r);
  for (auto& hk : out.w.h)
    for (AtomList& hi : hk) hi = scale_atoms(hi, r);
  out.psi = spec.psi * s;
  return out;
}

SuperOperator completed_psi(const WeightFamily& w, double extra, const TolerancePolicy& tol) {
  w.validate(tol);
  const SuperOperator r0 = compose(w.rho().lambda_superop(0.0, tol), unit_embedding(w.units, w.q, w.p));
  const ExtMatrix comp = evaluate_theta(w, unit_complement(w), 0.0, tol);
  if (comp.divergent) throw DivergentValue("theta(I - Lambda(I_o)) is infinite");
  const CMatrix t = hermitian_part(comp.value) + extra * CMatrix::Identity(w.q, w.q);
  return complete_to_cond_zero(r0, t, std::nullopt, tol);
}

}  // namespace qwl
