// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "dolhodge/theorem_engine.hpp"
#include "test_support.hpp"

using namespace dolhodge;

namespace {

const BasePoint kOrigin = BasePoint::Zero(1);

bool exactly_zero(const CurvatureTensor& t) {
  for (const auto& b : t.blocks)
    if (!(b.array() == Complex(0.0, 0.0)).all()) return false;
  return true;
}

double max_phi_identity_error(const CurvatureReport& rep) {
  double out = 0.0;
  const int m = int(rep.phi.rows());
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      out = std::max(out, (rep.terms.t4(k, l) - rep.phi(k, l) * Eigen::MatrixXcd::Identity(rep.rank, rep.rank))
                              .cwiseAbs()
                              .maxCoeff());
  return out;
}

}  // namespace

TEST_CASE("continuum closed form of the model family") {
  const FamilySpec spec = default_family(2, 24);
  const CurvatureTensor r0 = continuum_curvature(spec, kOrigin, 0);
  CHECK(std::abs(r0(0, 0)(0, 0) - (-kPi / 2 + 0.3)) < 1e-14);
  CHECK(std::abs(r0(0, 0)(0, 1)) == 0.0);
  const CurvatureTensor r1 = continuum_curvature(default_family(-1, 24), kOrigin, 1);
  CHECK(std::abs(r1(0, 0)(0, 0) - (kPi + 0.3)) < 1e-14);
  CHECK_THROWS_AS(continuum_curvature(default_family(0, 24), kOrigin, 0), ConfigError);
}

TEST_CASE("degree zero direct image: identity, structural zeros, symmetry") {
  const FamilySpec spec = default_family(2, 24);
  const CurvatureReport rep = verify_theorem(spec, kOrigin, 0, 1e-2);
  CHECK(rep.rank == 2);
  CHECK(exactly_zero(rep.terms.t1));
  CHECK(exactly_zero(rep.terms.t2));
  CHECK_FALSE(exactly_zero(rep.terms.t3));
  CHECK(rep.residual_rel <= 5e-3);
  CHECK(rep.hermitian_defect <= 1e-10);
  CHECK(max_phi_identity_error(rep) <= 1e-10);
  CHECK(std::abs(rep.phi(0, 0) - 0.3) < 1e-12);
  // spatial error at N = 24 is a few percent
  CHECK(rep.rhs_continuum_error < 5e-2);
  CHECK(rep.pass);
}

TEST_CASE("degree one direct image: the third summand vanishes") {
  const FamilySpec spec = default_family(-2, 24);
  const CurvatureReport rep = verify_theorem(spec, kOrigin, 1, 1e-2);
  CHECK(rep.rank == 2);
  CHECK(exactly_zero(rep.terms.t3));
  CHECK(exactly_zero(rep.terms.t2));
  CHECK(rep.terms.t1.norm() > 1.0);
  CHECK(rep.residual_rel <= 5e-3);
  CHECK(rep.hermitian_defect <= 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("theorem residual is second order in eta") {
  const FamilySpec spec = default_family(1, 16);
  std::vector<double> res;
  const std::vector<double> etas{4e-2, 2e-2, 1e-2};
  for (double eta : etas) res.push_back(verify_theorem(spec, {kOrigin}, 0, eta).residual_rel);
  CHECK(res[0] > res[1]);
  CHECK(res[1] > res[2]);
  CHECK(fitted_order(etas, res) >= 1.6);
}

TEST_CASE("rank jump is propagated from the frame") {
  CHECK_THROWS_AS(verify_theorem(default_family(0, 16), kOrigin, 0, 1e-2), RankJumpError);
  CHECK(default_q(default_family(-3, 16)) == 1);
  CHECK(default_q(default_family(0, 16)) == 0);
}

TEST_CASE("rescaling removes the scalar term and shifts the curvature") {
  const RescaleReport rep = rescale_demo(default_family(2, 24), kOrigin, 0, 1e-2);
  CHECK(rep.phi_after <= 1e-12);
  CHECK(rep.t4_after <= 1e-12);
  CHECK(rep.rescaled.residual_rel <= 5e-3);
  CHECK(rep.shift_error <= 10 * 1e-2 * 1e-2);
  CHECK(rep.pass);
}

TEST_CASE("Serre cross-check at degree one") {
  const SerreReport rep = serre_cross_check(default_family(1, 24), kOrigin, 1e-2);
  CHECK(rep.q1.q == 1);
  CHECK(rep.q0_dual.q == 0);
  CHECK(rep.mismatch_rel <= 1e-2);
  // the degree -1 side carries the negated weight
  CHECK(std::abs(rep.q0_dual.phi(0, 0) - 0.3) < 1e-12);
  CHECK(std::abs(rep.q1.phi(0, 0) + 0.3) < 1e-12);
  // trivial twist: only the scalar terms survive
  FamilySpec flat = default_family(1, 16);
  flat.twist.setZero();
  const SerreReport z = serre_cross_check(flat, kOrigin, 1e-2);
  CHECK(z.q1.terms.t1.norm() == 0.0);
  CHECK(z.q0_dual.terms.t3.norm() == 0.0);
  CHECK(std::abs(z.q1.lhs(0, 0)(0, 0) + 0.3) < 1e-3);
  CHECK(std::abs(z.q0_dual.lhs(0, 0)(0, 0) - 0.3) < 1e-3);
  CHECK_THROWS_AS(serre_cross_check(default_family(2, 16), kOrigin, 1e-2), ConfigError);
}

TEST_CASE("Weil-Petersson metric of the model family") {
  const WpReport one = wp_report(default_family(2, 16), kOrigin, 0.05);
  CHECK(one.points.size() == 25);
  CHECK(std::abs(one.values[0](0, 0) - kPi * kPi) < 1e-10);
  CHECK(one.max_deviation <= 1e-12);
  CHECK(one.constant);
  const TorusGrid g = build_grid({0, 1}, 16, 4);
  Eigen::VectorXcd c(2);
  c << kPi, 2 * kPi;
  const WpReport two = wp_report(make_family(g, 2, c, Eigen::MatrixXcd::Zero(2, 2)), BasePoint::Zero(2), 0.05);
  Eigen::MatrixXcd expected(2, 2);
  expected << kPi * kPi, 2 * kPi * kPi, 2 * kPi * kPi, 4 * kPi * kPi;
  CHECK((two.values[0] - expected).cwiseAbs().maxCoeff() < 1e-10);
  // every rho_k is a multiple of dzbar, so for m = 2 the Gram is singular
  CHECK(std::abs(two.min_eigenvalue) < 1e-9);
  CHECK(one.min_eigenvalue > 1.0);
  const WpReport flat =
      wp_report(make_family(g, 2, Eigen::VectorXcd::Zero(1), Eigen::MatrixXcd::Zero(1, 1)), kOrigin, 0.05);
  CHECK(flat.min_eigenvalue == 0.0);
}

TEST_CASE("lemma suite at degree two and minus two") {
  for (int d : {2, -2}) {
    const FamilySpec spec = default_family(d, 24);
    const int q = default_q(spec);
    const LemmaReport a = lemma_suite(spec, kOrigin, 1e-2, q);
    const LemmaReport b = lemma_suite(spec, kOrigin, 5e-3, q);
    CHECK(a.tol_fd == doctest::Approx(1e-3));
    for (const LemmaResidual& item : a.items) {
      INFO(d, " ", item.name, " ", item.value);
      CHECK(item.pass);
      if (item.structural) CHECK(item.value == 0.0);
      // above the solver floor, s-truncation errors shrink with eta
      if (item.s_dominated && item.value > 1e-8) CHECK(item.value / b.at(item.name).value >= 3.0);
    }
    CHECK(a.pass);
    CHECK(a.at("endo_trace").value <= 1e-13);
  }
}

TEST_CASE("endomorphism trace vanishes on synthetic rank-two data") {
  const Eigen::MatrixXcd r = testing::random_matrix(2, 2, 11);
  CHECK(std::abs(endo_trace_curvature(r)) <= 1e-13);
  const Eigen::MatrixXcd r3 = testing::random_matrix(3, 3, 12);
  CHECK(std::abs(endo_trace_curvature(r3)) <= 1e-13);
}

TEST_CASE("convergence study: spatial order and eta order") {
  const FamilySpec spec = default_family(2, 16);
  const ConvergenceTable t = convergence_study(spec, kOrigin, 0, {16, 20, 24}, {4e-2, 2e-2, 1e-2});
  CHECK(t.rows.size() == 9);
  CHECK(t.rows[3].n_side == 20);
  CHECK(t.rows[3].eta == 4e-2);
  CHECK(t.spatial_order >= 3.5);
  for (double o : t.eta_order) CHECK(o >= 1.6);
  CHECK_THROWS_AS(convergence_study(spec, kOrigin, 0, {16, 24}, {1e-2, 2e-2, 4e-2}), ConfigError);
}
