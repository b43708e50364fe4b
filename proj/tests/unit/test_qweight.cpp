// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "qwl/errors.hpp"
#include "qwl/qweight.hpp"

using namespace qwl;
using namespace qwl::testgen;

namespace {

double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

// Named specs shared by several cases.
std::vector<QWeightSpec> sample_specs() {
  return {
      scalar_spec(),
      factor_spec(11, 2, 1, 2, 1, -0.75),
      factor_spec(12, 2, 1, 3, 1, -0.5, true, 0.2),
      factor_spec(13, 2, 2, 4, 2, -0.5),
      factor_spec(14, 3, 1, 3, 1, -0.75),
  };
}

const TGrid kShortGrid = dyadic_grid(0, 8);

}  // namespace

TEST_SUITE("qweight") {

TEST_CASE("grids") {
  const TGrid g = dyadic_grid(0, 3);
  REQUIRE(g.size() == 4);
  CHECK(g[3] == 0.125);
  CHECK_NOTHROW(validate_grid(g));
  CHECK_THROWS_AS(validate_grid({}), PreconditionError);
  CHECK_THROWS_AS(validate_grid({0.5, 1.0}), PreconditionError);
  CHECK_THROWS_AS(validate_grid({1.0, 0.0}), PreconditionError);
}

TEST_CASE("assemble sample specs") {
  const auto specs = sample_specs();
  for (size_t i = 0; i < specs.size(); ++i) {
    CAPTURE(i);
    const QWeightMap w = assemble(specs[i]);
    CHECK(w.unital == (i != 2));
    CHECK(max_abs(compose(w.psi_inv, w.spec.psi).action() - CMatrix::Identity(w.q() * w.q(), w.q() * w.q())) < 1e-10);
  }
}

TEST_CASE("scalar example values") {
  // g = x^{-1/2} e^{-x/2}: theta(I - Lambda) = int (1 - e^{-x}) e^{-x} / x dx = ln 2.
  const QWeightMap w = assemble(scalar_spec());
  CHECK(w.spec.psi.action()(0, 0).real() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // omega|_t(I) = E1(t) / ln 2 and pi_t^#(I) = E1(t) / (ln 2 + E1(2t)).
  const double t = 0.25;
  const double e1t = oracle::gram_by_quadrature(w.spec.w.g[0], w.spec.w.g[0], Observable::constant(CMatrix::Identity(1, 1)), t).real();
  const double e12t = oracle::gram_by_quadrature(w.spec.w.g[0], w.spec.w.g[0], Observable::lambda(CMatrix::Identity(1, 1)), t).real();
  CHECK(w.omega(Observable::constant(CMatrix::Identity(1, 1)), t)(0, 0).real() == doctest::Approx(e1t / std::log(2.0)).epsilon(1e-10));
  CHECK(boundary_rep(w, t, Observable::constant(CMatrix::Identity(1, 1)))(0, 0).real() ==
        doctest::Approx(e1t / (std::log(2.0) + e12t)).epsilon(1e-10));
}

TEST_CASE("assemble errors") {
  const QWeightSpec base = factor_spec(11, 2, 1, 2, 1, -0.75);
  QWeightSpec s = base;
  s.psi = SuperOperator::zero(2, 2);
  CHECK_THROWS_AS(assemble(s), PsiNotInvertible);
  s.psi = SuperOperator::from_function(2, 2, [](const CMatrix& a) { return CMatrix(a.transpose()); }) * 5.0;
  CHECK_THROWS_AS(assemble(s), PsiInverseNotCP);
  s.psi = SuperOperator::identity(2) * 5.0;
  CHECK_THROWS_AS(assemble(s), ConditionalNegativityFailure);
  s.psi = base.psi - SuperOperator::identity(2) * 0.05;
  CHECK_THROWS_AS(assemble(s), UnitInequalityFailure);
  s.psi = SuperOperator::identity(3);
  CHECK_THROWS_AS(assemble(s), SpecInvalid);
  s = base;
  s.w.units[1] *= 2.0;
  CHECK_THROWS_AS(assemble(s), InvalidWeightFamily);
}

TEST_CASE("skeleton conditions hold on sample specs") {
  for (const QWeightSpec& spec : sample_specs()) {
    const QWeightMap w = assemble(spec);
    const SkeletonReport r = skeleton_suite(w, kShortGrid);
    CAPTURE(r.first_failure);
    CHECK(r.all());
    for (double c : r.contraction) CHECK(c <= 1.0 + 1e-9);
    for (double d : r.integration_defect) CHECK(d < 1e-7);
    for (double tail : r.integration_tail) CHECK(tail < 1e-12);
  }
}

TEST_CASE("skeleton ordering precondition") {
  const QWeightMap w = assemble(scalar_spec());
  CHECK(skeleton_difference_cp(w, 0.1, 0.2, 0.4));
  CHECK_THROWS_AS(skeleton_difference_cp(w, 0.4, 0.2, 0.1), PreconditionError);
}

TEST_CASE("skeleton is a CP contraction family under the embedding") {
  const QWeightMap w = assemble(sample_specs()[3]);
  const SuperOperator phi = skeleton(w, 0.125);
  CHECK(is_completely_positive(phi).is_cp);
  CHECK(phi.dim_in() == 4);
  CHECK(phi.dim_out() == 4);
  // The image lies in the span of the units: img = sum x_ij E_ij with E_1i img E_j1 = x_ij E_11.
  const CMatrix img = phi.apply(CMatrix::Identity(4, 4));
  const WeightFamily& f = w.spec.w;
  CMatrix rebuilt = CMatrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const CMatrix c = f.unit(0, i) * img * f.unit(j, 0);
      const cplx x = c.trace() / double(f.m);
      CHECK(max_abs(c - x * f.unit(0, 0)) < 1e-12);
      rebuilt += x * f.unit(i, j);
    }
  CHECK(max_abs(rebuilt - img) < 1e-12);
}

TEST_CASE("boundary representations") {
  for (const QWeightSpec& spec : sample_specs()) {
    const QWeightMap w = assemble(spec);
    const BoundaryRepReport r = boundary_report(w, kShortGrid);
    CHECK(r.all());
    for (double c : r.contraction) CHECK(c <= 1.0 + 1e-9);
    // The compressed model sends the identity of the span to pi_t^#(I).
    for (double t : {1.0, 0.0625}) {
      const CompressedBoundaryRep c = compressed_boundary_rep(w, t);
      const CMatrix id = CMatrix::Identity(c.frame_dim, c.frame_dim);
      const CMatrix closed = boundary_rep_coords(w, t, Observable::constant(CMatrix::Identity(w.p(), w.p())));
      CHECK(max_abs(c.map.apply(id) - closed) < 1e-10);
    }
  }
}

TEST_CASE("boundary representation on windows matches quadrature") {
  const QWeightMap w = assemble(sample_specs()[1]);
  Rng rng(5);
  const CMatrix b = random_hermitian(rng, 2);
  const Observable obs = Observable::window(b, 0.3, 2.0);
  const double t = 0.5;
  // Oracle: theta entries by quadrature, then the resolvent and psi^{-1}.
  const VectorWeight th = w.spec.w.theta();
  CMatrix val(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      val(i, j) = 0;
      for (const auto& fk : th.f) val(i, j) += oracle::gram_by_quadrature(fk[i], fk[j], obs, t);
    }
  const CMatrix expect = w.resolvent(t).apply(w.psi_inv.apply(val));
  CHECK(max_abs(boundary_rep_coords(w, t, obs) - expect) < 1e-9);
}

TEST_CASE("theta limit on the scalar family is exact") {
  const QWeightMap w = assemble(scalar_spec());
  const ThetaLimitReport r = theta_limit(w, dyadic_grid(0, 12));
  for (double d : r.distance) CHECK(d < 1e-12);
  CHECK(r.extrapolated_distance < 1e-12);
}

TEST_CASE("theta limit converges to the ray of psi") {
  for (size_t i : {1, 3, 4}) {
    CAPTURE(i);
    const QWeightMap w = assemble(sample_specs()[i]);
    const ThetaLimitReport r = theta_limit(w, dyadic_grid(4, 13));
    CHECK(r.cauchy_monotone);
    CHECK(r.distance.back() < r.distance.front());
    CHECK(r.extrapolated_distance < 1e-4);
    CHECK(r.scale > 0.0);
  }
}

TEST_CASE("trivial subordinates") {
  for (size_t i : {1, 3}) {
    const QWeightMap w = assemble(sample_specs()[i]);
    const int q = w.q();
    const SuperOperator up = w.spec.psi + SuperOperator::identity(q) * 0.3;
    CHECK(trivial_subordinate_check(w, up));
    const QWeightMap small = assemble({w.spec.w, up});
    for (bool b : subordinate_grid_check(w, small, kShortGrid)) CHECK(b);
    // psi + X with X = iota - D: still a valid q-weight map, but X is not CP.
    const SuperOperator bad = w.spec.psi + depolarizing_gap(q) * 0.3;
    CHECK_FALSE(trivial_subordinate_check(w, bad));
    const auto grid = subordinate_grid_check(w, assemble({w.spec.w, bad}), dyadic_grid(0, 14));
    CHECK(std::any_of(grid.begin(), grid.end(), [](bool b) { return !b; }));
    CHECK_THROWS_AS(trivial_subordinate_check(w, w.spec.psi * 0.5), SpecInvalid);
  }
}

TEST_CASE("constructed subordinates") {
  // g_1 divergent and g_2 square integrable; eta takes g_2 away.
  WeightFamily f;
  f.units = WeightFamily::standard_units(1, 1, 1);
  f.g = {{Atom::scalar(-0.5, 0.5)}, {Atom::scalar(0.5, 1.0, 0.6)}};
  const QWeightMap w = assemble({f, completed_psi(f)});
  VectorWeight eta{1, 1, {{{Atom::scalar(0.5, 1.0, 0.6)}}}};
  const double eta_l = eta.lambda_superop(0.0).action()(0, 0).real();
  const SuperOperator psi_prime = w.spec.psi + SuperOperator::identity(1) * (eta_l + 0.1);
  const SubordinateResult sub = construct_subordinate(w, eta, psi_prime, kShortGrid);
  for (bool b : sub.grid_cp) CHECK(b);
  // omega' = psi'^{-1}(theta - eta) equals psi'^{-1} of the g_1 part alone.
  const Observable obs = Observable::window(CMatrix::Identity(1, 1), 0.2, 3.0);
  const double g1 = oracle::gram_by_quadrature(f.g[0], f.g[0], obs).real();
  CHECK(sub.map.omega(obs)(0, 0).real() == doctest::Approx(g1 / psi_prime.action()(0, 0).real()).epsilon(1e-9));
  CHECK(skeleton_suite(sub.map, kShortGrid).all());
  CHECK(boundary_report(sub.map, kShortGrid).all());

  VectorWeight foreign{1, 1, {{{Atom::scalar(1.0, 2.0)}}}};
  CHECK_THROWS_AS(construct_subordinate(w, foreign, psi_prime, kShortGrid), EtaNotDominated);
  VectorWeight unbounded{1, 1, {{{Atom::scalar(-0.5, 0.5)}}}};
  CHECK_THROWS_AS(construct_subordinate(w, unbounded, psi_prime, kShortGrid), EtaNotDominated);
  CHECK_THROWS_AS(construct_subordinate(w, eta, w.spec.psi, kShortGrid), PsiPrimeConditionFailure);
}

TEST_CASE("purity certificates") {
  for (const QWeightSpec& spec : sample_specs()) CHECK(certify_q_pure(assemble(spec)).verdict);

  // Condition (i): psi + rho Lambda~ strictly conditionally negative.
  QWeightSpec s1 = sample_specs()[1];
  s1.psi = s1.psi + depolarizing_gap(2) * 0.3;
  const QWeightMap w1 = assemble(s1);
  const PurityCertificate c1 = certify_q_pure(w1);
  CHECK_FALSE(c1.condition_i);
  CHECK_FALSE(c1.verdict);
  REQUIRE(c1.witness_i);
  const CVector v = *c1.witness_i;
  CHECK(std::abs(v.dot(vec(CMatrix::Identity(2, 2)))) < 1e-10);
  CHECK(v.dot(choi(w1.spec.psi + w1.rho_tilde) * v).real() < 0.0);

  // Condition (ii): a square-integrable combination of the g_k.
  WeightFamily f;
  f.units = WeightFamily::standard_units(1, 1, 1);
  f.g = {{Atom::scalar(-0.5, 0.5)}, {Atom::scalar(0.5, 1.0)}};
  const PurityCertificate c2 = certify_q_pure(assemble({f, completed_psi(f)}));
  CHECK(c2.condition_i);
  CHECK_FALSE(c2.strictly_infinite);
  REQUIRE(c2.witness_ii);
  AtomList comb;
  for (int k = 0; k < 2; ++k) comb = concat_atoms(comb, scale_atoms(f.g[k], (*c2.witness_ii)(k)));
  comb = merge_atoms(comb);
  CHECK_FALSE(gram(comb, comb, Observable::constant(CMatrix::Identity(1, 1))).divergent);

  // Condition (iii): one divergent direction in a two-dimensional corner.
  WeightFamily c;
  c.m = 2;
  c.p = 2;
  c.units = WeightFamily::standard_units(1, 2, 2);
  Atom g0;
  g0.alpha = -0.5;
  g0.a = 0.5;
  g0.coef = CVector::Zero(2);
  g0.coef(0) = 1.0;
  c.g = {{g0}};
  const PurityCertificate c3 = certify_q_pure(assemble({c, completed_psi(c)}));
  CHECK_FALSE(c3.condition_iii);
  REQUIRE(c3.witness_iii);
  const CVector u = *c3.witness_iii;
  CHECK_FALSE(gram(c.g[0], c.g[0], Observable::lambda(u * u.adjoint())).divergent);
}

TEST_CASE("rank-one reduction") {
  for (size_t i : {0, 1, 3, 4}) {
    CAPTURE(i);
    const QWeightMap w = assemble(sample_specs()[i]);
    const RankOneReduction red = reduce_to_rank_one(w, 7);
    const CornerCertificate& cc = red.certificate;
    CHECK(cc.real_parts_positive);
    CHECK(cc.corner_matches_z);
    CHECK(cc.corner_distinct);
    CHECK(cc.enlarged_pure);
    CHECK(cc.eta_pure);
    CHECK(cc.shur_defect < 1e-8);
    CHECK(cc.sweep_size == 20);
    CHECK(cc.hyper_maximal);
    CHECK(red.enlarged.w.q == w.q() + 1);
    CHECK(red.enlarged.w.p == (w.q() + 1) * w.spec.w.m);
    CHECK(max_abs(cc.b - cc.b.adjoint()) < 1e-12);
    CHECK(max_abs(cc.c - cc.c.adjoint()) < 1e-12);
  }
}

TEST_CASE("rank-one reduction preconditions") {
  CHECK_THROWS_AS(reduce_to_rank_one(assemble(factor_spec(12, 2, 1, 3, 1, -0.5))), PreconditionError);
  CHECK_THROWS_AS(reduce_to_rank_one(assemble(sample_specs()[2])), NotUnital);
  CHECK_THROWS_AS(reduce_to_rank_one(assemble(factor_spec(11, 2, 1, 2, 1, -0.75, true, 0.2))), NotUnital);
  QWeightSpec s = sample_specs()[1];
  s.psi = s.psi + depolarizing_gap(2) * 0.3;
  CHECK_THROWS_AS(reduce_to_rank_one(assemble(s)), NotQPure);
}

TEST_CASE("conjugacy witnesses") {
  const QWeightSpec a = scalar_spec();
  QWeightSpec b = a;
  b.w.g = {scale_atoms(a.w.g[0], 2.0)};
  const CMatrix u = CMatrix::Identity(1, 1);
  CHECK(verify_conjugacy_witness(a, b, u, 2.0, {AtomList{}}));
  CHECK_FALSE(verify_conjugacy_witness(a, b, u, 1.5, {AtomList{}}));
  CHECK_FALSE(verify_conjugacy_witness(a, b, u * 2.0, 1.0, {AtomList{}}));

  // g2 = 2 g1 + h with h square integrable.
  const AtomList h = {Atom::scalar(0.25, 1.5, 0.7)};
  b.w.g = {concat_atoms(scale_atoms(a.w.g[0], 2.0), h)};
  CHECK(verify_conjugacy_witness(a, b, u, 2.0, {h}));
  const AtomList rough = {Atom::scalar(-0.6, 1.5, 0.7)};
  b.w.g = {concat_atoms(scale_atoms(a.w.g[0], 2.0), rough)};
  CHECK_FALSE(verify_conjugacy_witness(a, b, u, 2.0, {rough}));

  // A unitary between two-dimensional corners.
  const QWeightSpec c = factor_spec(21, 1, 2, 2, 2, -0.5, false);
  Rng rng(3);
  const CMatrix v = random_unitary(rng, 2);
  QWeightSpec d = c;
  for (auto& gk : d.w.g) gk = transform_atoms(gk, v);
  CHECK(verify_conjugacy_witness(c, d, v, 1.0, {AtomList{}, AtomList{}}));

  CHECK_THROWS_AS(verify_conjugacy_witness(a, b, u, 2.0, {}), WitnessMalformed);
  CHECK_THROWS_AS(verify_conjugacy_witness(a, b, CMatrix::Identity(2, 2), 2.0, {h}), WitnessMalformed);
  CHECK_THROWS_AS(verify_conjugacy_witness(a, b, u, -1.0, {h}), WitnessMalformed);
}

TEST_CASE("index zero diagnostic") {
  for (size_t i : {0, 1, 3}) {
    const QWeightMap w = assemble(sample_specs()[i]);
    const IndexZeroReport r = index_zero_diagnostic(w, 2.0, dyadic_grid(0, 14));
    CHECK(r.monotone);
    CHECK(r.norms.back() < r.norms.front());
    CHECK(std::abs(r.limit) < 0.2 * r.norms.back());
    CHECK_THROWS_AS(index_zero_diagnostic(w, 0.5, dyadic_grid(0, 4)), PreconditionError);
  }
}

TEST_CASE("scaling psi and theta together changes nothing") {
  for (const QWeightSpec& spec : sample_specs()) {
    const QWeightMap w = assemble(spec);
    const QWeightMap w3 = assemble(scaled_spec(spec, 3.0));
    Rng rng(9);
    const CMatrix b = random_hermitian(rng, w.p());
    for (double t : {1.0, 0.125, 0.0078125}) {
      const Observable obs = Observable::window(b, 0.1, 4.0) + Observable::lambda(b);
      CHECK(max_abs(boundary_rep(w, t, obs) - boundary_rep(w3, t, obs)) < 1e-10);
      CHECK(max_abs(w.omega(obs, t) - w3.omega(obs, t)) < 1e-10);
    }
    CHECK(certify_q_pure(w3).verdict == certify_q_pure(w).verdict);
    CHECK(w3.unital == w.unital);
  }
}

}  // TEST_SUITE
