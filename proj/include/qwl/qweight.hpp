// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors
//
// q-weight maps omega = psi^{-1} theta over a type I_q factor in B(C^p). All resolvents act on
// the q x q range coordinates; J(a) = sum a_ij E_ij embeds them back into B(C^p).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwl/bweight.hpp"
#include "qwl/condform.hpp"

namespace qwl {

/// Strictly decreasing positive cutoffs.
using TGrid = std::vector<double>;

/// t = 2^-j for j = j0..j1.
TGrid dyadic_grid(int j0 = 0, int j1 = 14);
/// Throws PreconditionError unless the grid is positive and strictly decreasing.
void validate_grid(const TGrid& grid);

struct QWeightSpec {
  WeightFamily w;     // p, q, m, units, g, h
  SuperOperator psi;  // on q x q range coordinates
};

/// Validated q-weight map. `eta` is a bounded weight subtracted from theta (subordinates).
struct QWeightMap {
  QWeightSpec spec;
  std::optional<VectorWeight> eta;
  SuperOperator psi_inv;
  SuperOperator j;         // M_q -> B(C^p)
  SuperOperator rho_tilde; // rho Lambda restricted to the range
  CMatrix unit_gap;        // psi(1) - (theta - eta)(I - Lambda(I_o))
  bool unital = false;
  TolerancePolicy tol;

  int p() const { return spec.w.p; }
  int q() const { return spec.w.q; }

  /// (theta - eta)|_t(A) in range coordinates.
  ExtMatrix weight(const Observable& a, double t = 0.0) const;
  /// omega|_t(A) in range coordinates. Throws DivergentValue.
  CMatrix omega(const Observable& a, double t = 0.0) const;
  /// Phi_t = omega|_t Lambda as a map B(C^p) -> M_q.
  SuperOperator skeleton_coords(double t) const;
  /// Phi_t J on M_q.
  SuperOperator skeleton_tilde(double t) const;
  /// (iota + Phi_t J)^{-1} on M_q. Throws SingularResolvent.
  SuperOperator resolvent(double t) const;
};

/// Throws PsiNotInvertible, PsiInverseNotCP, ConditionalNegativityFailure or
/// UnitInequalityFailure; InvalidWeightFamily from the family check.
QWeightMap assemble(const QWeightSpec& spec, const TolerancePolicy& tol = {});

/// pi_t^#(A) as a p x p matrix.
CMatrix boundary_rep(const QWeightMap& w, double t, const Observable& a);
/// pi_t^# in range coordinates.
CMatrix boundary_rep_coords(const QWeightMap& w, double t, const Observable& a);

/// pi_t^# compressed to the span of all atom functions on [t, inf): an exact finite model of the
/// map B(C^p (x) L^2) -> M_q, returned on orthonormal coordinates of that span. Maps built from
/// the same `frame_sources` share coordinates.
struct CompressedBoundaryRep {
  SuperOperator map;  // B(C^D) -> M_q
  int frame_dim = 0;
};
CompressedBoundaryRep compressed_boundary_rep(const QWeightMap& w, double t,
                                              const std::vector<const VectorWeight*>& frame_sources = {});

/// phi_t = J Phi_t on B(C^p).
SuperOperator skeleton(const QWeightMap& w, double t);

struct SkeletonReport {
  TGrid grid;
  std::vector<bool> cp;               // (i) per t
  bool monotone = true;               // (ii) Phi_t - Phi_s CP for t < s
  std::vector<bool> resolvent_cp;     // (iii) per t
  std::vector<double> contraction;    // (iii) ||Res_t Phi_t(1)||
  bool difference_cp = true;          // (iv) Res_t (Phi_s - Phi_r) CP for t <= s <= r
  std::vector<bool> unit_bound;       // (v) Res_t omega|_t(I) <= 1 per t
  bool complement_cp = true;          // (vi)
  bool conditionally_negative = true; // (vii)
  std::vector<double> integration_defect;  // relative, per t
  std::vector<double> integration_tail;    // bound on the truncated quadrature tail, per t
  double integration_tol = 1e-7;
  std::string first_failure;

  bool all() const;
};

SkeletonReport skeleton_suite(const QWeightMap& w, const TGrid& grid, double integration_tol = 1e-7);
/// Condition (iv) at one triple. Throws PreconditionError unless t <= s <= r.
bool skeleton_difference_cp(const QWeightMap& w, double t, double s, double r);

struct BoundaryRepReport {
  TGrid grid;
  std::vector<bool> cp;
  std::vector<double> contraction;   // ||pi_t^#(I)||
  std::vector<bool> below_unit;      // pi_t^#(I) <= I_o
  bool all() const;
};

BoundaryRepReport boundary_report(const QWeightMap& w, const TGrid& grid);

struct ThetaLimitReport {
  TGrid grid;
  std::vector<double> w;             // w_t
  std::vector<double> v;             // v_t = tr(1 + Phi~_t(1))
  std::vector<double> cauchy;        // ||Theta_{t_{j+1}} - Theta_{t_j}||_HS
  bool cauchy_monotone = false;
  std::vector<double> distance;      // relative distance of Theta_t^{-1} to the ray of psi
  SuperOperator theta_inverse;       // extrapolated to 1/w_t = 0
  double scale = 0.0;                // kappa with theta_inverse ~ kappa psi
  double extrapolated_distance = 0.0;
};

/// (iota + Phi~_t)/w_t is affine in 1/w_t up to cutoff tails; Neville extrapolation over the
/// last `points` grid values gives psi^{-1} and hence Theta^{-1} up to scale.
ThetaLimitReport theta_limit(const QWeightMap& w, const TGrid& grid, int points = 2);

/// True iff psi' - psi is CP. Throws SpecInvalid if psi' does not assemble with the same theta.
bool trivial_subordinate_check(const QWeightMap& w, const SuperOperator& psi_prime);

/// pi_t^# - pi'_t^# CP at every grid point, via compressed boundary representations.
std::vector<bool> subordinate_grid_check(const QWeightMap& big, const QWeightMap& small, const TGrid& grid);

struct SubordinateResult {
  QWeightMap map;
  std::vector<bool> grid_cp;
};

/// omega' = psi'^{-1}(theta - eta). Throws EtaNotDominated (theta|_t - eta|_t not CP on the
/// compressed span at some grid t, or eta not bounded) or PsiPrimeConditionFailure.
SubordinateResult construct_subordinate(const QWeightMap& w, const VectorWeight& eta, const SuperOperator& psi_prime,
                                        const TGrid& grid);

struct PurityCertificate {
  bool condition_i = false;     // psi + rho Lambda~ conditionally zero
  bool condition_ii = false;    // strictly infinite mu and h independent over g
  bool strictly_infinite = false;
  bool h_independent = false;
  bool condition_iii = false;   // mu(Lambda(f)) infinite for every f <= E_11
  bool verdict = false;
  std::optional<CVector> witness_i;    // perp-Choi vector with negative value
  std::optional<CVector> witness_ii;   // coefficients over k
  std::optional<CVector> witness_iii;  // unit vector in the range of E_11
};

PurityCertificate certify_q_pure(const QWeightMap& w);

struct CornerCertificate {
  double s0 = 0.0;
  CMatrix q;   // psi + rho Lambda~ = Q . + . Q^*
  CMatrix b;
  CMatrix c;
  CMatrix z0;  // s0 + B + iC
  std::vector<cplx> z;
  bool real_parts_positive = false;
  bool corner_matches_z = false;   // corner of (psi' + lambda)^{-1} equals Z_lambda^{-1}
  bool corner_distinct = false;    // Z_lambda^{-1} != Z_0^{-1} for lambda > 0
  bool enlarged_pure = false;
  bool eta_pure = false;
  double shur_defect = 0.0;
  int sweep_size = 0;
  bool hyper_maximal = false;
};

struct RankOneReduction {
  QWeightSpec eta;       // over C^m, q = 1
  QWeightSpec enlarged;  // over C^{(q+1)m}
  CornerCertificate certificate;
};

/// Throws NotUnital first, then PreconditionError if p != qm, then NotQPure.
RankOneReduction reduce_to_rank_one(const QWeightMap& w, std::uint64_t seed = 1, int sweep = 20);

/// g2_k - lambda U g1_k = h_k atom by atom with every h_k square integrable, and U a partial
/// isometry from T1 to T2. Throws WitnessMalformed on shape or count mismatches.
bool verify_conjugacy_witness(const QWeightSpec& a, const QWeightSpec& b, const CMatrix& u, double lambda,
                              const std::vector<AtomList>& h, const TolerancePolicy& tol = {});

struct IndexZeroReport {
  double s = 0.0;
  TGrid grid;
  std::vector<double> norms;  // ||pi_t^#(E(s, inf))||
  bool monotone = false;
  double limit = 0.0;         // linear extrapolation in 1/w_t of the last two norms
};

/// Throws PreconditionError unless s > 0 exceeds every grid point.
IndexZeroReport index_zero_diagnostic(const QWeightMap& w, double s, const TGrid& grid);

/// (s psi, s theta): coefficients scaled by sqrt(s).
QWeightSpec scaled_spec(const QWeightSpec& spec, double s);

/// psi from complete_to_cond_zero(rho Lambda~, T) with T = theta(I - Lambda(I_o)) + extra * 1.
SuperOperator completed_psi(const WeightFamily& w, double extra = 0.0, const TolerancePolicy& tol = {});

}  // namespace qwl
