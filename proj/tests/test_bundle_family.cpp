// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <functional>

#include "dolhodge/bundle_family.hpp"
#include "test_support.hpp"

using namespace dolhodge;

namespace {

FamilySpec two_parameter(double a12) {
  Eigen::MatrixXcd a(2, 2);
  a << 0.3, a12, a12, 0.5;
  Eigen::VectorXcd c(2);
  c << kPi, Complex(0.5, 1.0);
  return make_family(build_grid({0, 1}, 16, 4), 2, c, a);
}

// Connection form of h = exp(-w - phi) with dbar-operator dbar + alpha dzbar, in real
// coordinates (x, y, u_1, v_1, ...), s_k = u_k + i v_k. Components of
// theta = (-d_z w - conj(alpha)) dz - d_k phi ds^k + alpha dzbar, returned as the
// coefficients on (dz, dzbar, ds^1, dsbar^1, ...).
struct Connection {
  FamilySpec spec;
  Eigen::VectorXcd coeffs(double x, double y, const Eigen::VectorXd& uv) const {
    const int m = spec.base_dim();
    BasePoint s(m);
    for (int k = 0; k < m; ++k) s[k] = {uv[2 * k], uv[2 * k + 1]};
    const double t = spec.grid.t;
    const Complex dz_w = -kI * 2.0 * kPi * double(spec.degree) * y / t;  // d_z (2 pi d y^2 / t)
    const Complex alpha = twist_value(spec, s);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(2 + 2 * m);
    out[0] = -dz_w - std::conj(alpha);
    out[1] = alpha;
    // d_k phi by central differences of phi itself, so the oracle never reads the Hessian.
    const double h = 1e-5;
    for (int k = 0; k < m; ++k) {
      BasePoint sp = s, sm = s, tp = s, tm = s;
      sp[k] += h;
      sm[k] -= h;
      tp[k] += Complex(0, h);
      tm[k] -= Complex(0, h);
      const double dx = (rescale_weight(spec, sp) - rescale_weight(spec, sm)) / (2 * h);
      const double dy = (rescale_weight(spec, tp) - rescale_weight(spec, tm)) / (2 * h);
      out[2 + 2 * k] = -0.5 * Complex(dx, -dy);
    }
    return out;
  }
};

// Wirtinger derivative of component `comp` along complex coordinate `axis` (0: z, 1 + k:
// s_k), conjugate if `bar`, by central differences with step h.
Complex wirtinger(const Connection& conn, int comp, int axis, bool bar, double x, double y,
                  const Eigen::VectorXd& uv, double h) {
  auto eval = [&](double dx, double dy) {
    double xx = x, yy = y;
    Eigen::VectorXd w = uv;
    if (axis == 0) {
      xx += dx;
      yy += dy;
    } else {
      w[2 * (axis - 1)] += dx;
      w[2 * (axis - 1) + 1] += dy;
    }
    return conn.coeffs(xx, yy, w)[comp];
  };
  const Complex ddx = (eval(h, 0) - eval(-h, 0)) / (2 * h);
  const Complex ddy = (eval(0, h) - eval(0, -h)) / (2 * h);
  return bar ? 0.5 * (ddx + kI * ddy) : 0.5 * (ddx - kI * ddy);
}

}  // namespace

TEST_CASE("curvature blocks for the default family") {
  const FamilySpec spec = make_family(build_grid({0, 1}, 16, 4), 2,
                                      Eigen::VectorXcd::Constant(1, kPi),
                                      Eigen::MatrixXcd::Zero(1, 1));
  const BasePoint s0 = BasePoint::Zero(1);
  const CurvatureBlocks b = curvature_blocks(spec, s0);
  CHECK(b.F_zzbar == doctest::Approx(2.0 * kPi));
  CHECK(std::abs(b.F_k_zbar[0] - kPi) < 1e-15);
  CHECK(std::abs(b.F_z_lbar[0] - kPi) < 1e-15);
  CHECK(b.F_klbar.norm() == 0.0);

  const FamilySpec weighted = default_family(2, 16);
  const BasePoint s = BasePoint::Constant(1, Complex(0.1, -0.2));
  CHECK(std::abs(curvature_blocks(weighted, s).F_klbar(0, 0) - 0.3) < 1e-15);
}

TEST_CASE("curvature blocks agree with differences of the connection") {
  const FamilySpec spec = two_parameter(0.1);
  Connection conn{spec};
  Eigen::VectorXd uv(4);
  uv << 0.05, -0.02, 0.01, 0.03;
  const double x = 0.3, y = 0.4;
  BasePoint s(2);
  s << Complex(0.05, -0.02), Complex(0.01, 0.03);
  const CurvatureBlocks b = curvature_blocks(spec, s);
  // Omega(e_A, e_Bbar) = d_A theta_Bbar - d_Bbar theta_A for the abelian connection.
  // Component indices: 0 dz, 1 dzbar, 2 + 2k ds^k, 3 + 2k dsbar^k (zero here).
  auto block = [&](int a_axis, int a_comp, int b_axis, int b_comp, double h) {
    return wirtinger(conn, b_comp, a_axis, false, x, y, uv, h) -
           wirtinger(conn, a_comp, b_axis, true, x, y, uv, h);
  };
  std::vector<double> hs{1e-2, 5e-3, 2.5e-3}, errs;
  for (double h : hs) {
    double err = std::abs(block(0, 0, 0, 1, h) - b.F_zzbar);
    for (int k = 0; k < 2; ++k) {
      err = std::max(err, std::abs(block(1 + k, 2 + 2 * k, 0, 1, h) - b.F_k_zbar[k]));
      // F_{z lbar}: theta_{lbar} = 0, so the block is -dbar_l theta_z.
      err = std::max(err, std::abs(-wirtinger(conn, 0, 1 + k, true, x, y, uv, h) - b.F_z_lbar[k]));
      for (int l = 0; l < 2; ++l) {
        const Complex f = -wirtinger(conn, 2 + 2 * k, 1 + l, true, x, y, uv, h);
        err = std::max(err, std::abs(f - b.F_klbar(k, l)));
      }
    }
    errs.push_back(err);
  }
  // Every block is affine or quadratic in the coordinates, so central differences are exact
  // up to the rounding floor of the nested phi differences.
  for (double e : errs) CHECK(e < 1e-5);
}

TEST_CASE("curvature blocks converge at second order for a quartic weight") {
  FamilySpec spec = default_family(1, 16);
  spec.rescale_quartic = 0.7;
  Connection conn{spec};
  Eigen::VectorXd uv(2);
  uv << 0.3, -0.2;
  const BasePoint s = BasePoint::Constant(1, Complex(0.3, -0.2));
  const Complex exact = curvature_blocks(spec, s).F_klbar(0, 0);
  std::vector<double> hs{4e-2, 2e-2, 1e-2}, errs;
  for (double h : hs) errs.push_back(std::abs(-wirtinger(conn, 2, 1, true, 0.1, 0.2, uv, h) - exact));
  CHECK(testing::fitted_order(hs, errs) >= 1.8);
}

TEST_CASE("degree, Hermite-Einstein constant and norm periodicity") {
  for (int d = -3; d <= 3; ++d) {
    for (Complex tau : {Complex(0, 1), Complex(0.5, 2.0)}) {
      const FamilySpec spec = make_family(build_grid(tau, 16, 4), d,
                                          Eigen::VectorXcd::Constant(1, 1.0),
                                          Eigen::MatrixXcd::Constant(1, 1, 0.3));
      CHECK(std::abs(degree_from_curvature(spec) - d) <= 1e-10);
      for (Complex s : {Complex(0, 0), Complex(0.1, 0.05)}) {
        const Field he = hermite_einstein_field(spec, BasePoint::Constant(1, s));
        CHECK((he.array() - 2.0 * kPi * d / tau.imag()).abs().maxCoeff() <= 1e-12);
      }
      CHECK(norm_periodicity_defect(spec) <= 1e-12);
    }
  }
}

TEST_CASE("Kodaira-Spencer and second-order data") {
  const FamilySpec spec = default_family(2, 16);
  const BasePoint s0 = BasePoint::Zero(1);
  const EndForm01 rho = kodaira_spencer(spec, s0, 0);
  CHECK(rho.rank == 1);
  CHECK((rho.values.array() + kPi).abs().maxCoeff() < 1e-15);

  const FamilySpec two = two_parameter(0.1);
  CHECK(std::abs(kodaira_spencer(two, s0, 1).values(5, 0) + Complex(0.5, 1.0)) < 1e-15);
  CHECK_THROWS_AS(kodaira_spencer(spec, s0, 1), ConfigError);

  CHECK(std::abs(rho_klbar(spec, s0, 0, 0).values(7, 0) - 0.3) < 1e-15);
  const BasePoint s2 = BasePoint::Zero(2);
  CHECK(std::abs(rho_klbar(two, s2, 0, 1).values(3, 0) - 0.1) < 1e-15);
  CHECK(std::abs(rho_klbar(two, s2, 1, 0).values(3, 0) - 0.1) < 1e-15);

  FamilySpec flat = spec;
  flat.rescale.setZero();
  CHECK(rho_klbar(flat, s0, 0, 0).values.norm() == 0.0);
  CHECK(std::abs(phi_klbar(flat, s0, 0, 0)) <= 1e-14);
  CHECK(std::abs(phi_klbar(spec, s0, 0, 0) - 0.3) <= 1e-12);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      CHECK(std::abs(phi_klbar(two, s2, k, l) - rho_klbar(two, s2, k, l).values(11, 0)) <= 1e-12);
}

TEST_CASE("a real scalar weight needs a Hermitian matrix") {
  Eigen::MatrixXcd a(2, 2);
  a << 0.3, 0.1, 0.2, 0.5;
  CHECK_THROWS_AS(make_family(build_grid({0, 1}, 16, 4), 1, Eigen::VectorXcd::Ones(2), a),
                  ConfigError);
  const FamilySpec spec = two_parameter(0.1);
  BasePoint s(2);
  s << Complex(0.2, 0.1), Complex(-0.3, 0.4);
  // phi = 0.3|s1|^2 + 0.5|s2|^2 + Re(0.2 s1 conj(s2))
  const double expected = 0.3 * std::norm(s[0]) + 0.5 * std::norm(s[1]) +
                          (0.2 * s[0] * std::conj(s[1])).real();
  CHECK(std::abs(rescale_weight(spec, s) - expected) < 1e-15);
}

TEST_CASE("rescaling removes the harmonic part of rho_klbar") {
  const FamilySpec spec = default_family(2, 16);
  const FamilySpec killed = rescale_to_kill_H(spec);
  const BasePoint s = BasePoint::Constant(1, Complex(0.02, 0.01));
  CHECK(std::abs(phi_klbar(killed, s, 0, 0)) <= 1e-12);
  CHECK(killed.degree == spec.degree);
  CHECK((killed.twist - spec.twist).norm() == 0.0);

  FamilySpec quartic = spec;
  quartic.rescale_quartic = 0.4;
  CHECK(std::abs(phi_klbar(rescale_to_kill_H(quartic), s, 0, 0)) <= 1e-12);

  FamilySpec flat = spec;
  flat.rescale.setZero();
  const FamilySpec same = rescale_to_kill_H(flat);
  CHECK(same.rescale.norm() == 0.0);
  CHECK(same.rescale_quartic == 0.0);
}

TEST_CASE("Weil-Petersson inner product of the twist directions") {
  const FamilySpec spec = default_family(2, 16);
  const BasePoint s0 = BasePoint::Zero(1);
  CHECK(std::abs(wp_inner(spec, s0, 0, 0) - kPi * kPi) <= 1e-12);

  const FamilySpec tall = make_family(build_grid({0, 2}, 16, 4), 2,
                                      Eigen::VectorXcd::Constant(1, kPi / 2),
                                      Eigen::MatrixXcd::Constant(1, 1, 0.3));
  CHECK(std::abs(wp_inner(tall, s0, 0, 0) - kPi * kPi / 2.0) <= 1e-12);

  const BasePoint s1 = BasePoint::Constant(1, Complex(0.1, 0.05));
  CHECK(std::abs(wp_inner(spec, s1, 0, 0) - wp_inner(spec, s0, 0, 0)) <= 1e-12);
}

TEST_CASE("induced End curvature is traceless") {
  const FamilySpec spec = default_family(2, 16);
  CHECK(endo_trace_curvature(spec, BasePoint::Zero(1), 0, 0) == Complex(0.0, 0.0));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Eigen::MatrixXcd a = testing::random_matrix(2, 2, seed);
    const Eigen::MatrixXcd r = a + a.adjoint();
    CHECK(std::abs(endo_trace_curvature(r)) <= 1e-13);
    CHECK(std::abs(endo_trace_curvature(r) / 4.0) <= 1e-13);  // Phi of the End family
  }
}

TEST_CASE("Serre dual family") {
  const FamilySpec spec = default_family(-2, 16);
  const FamilySpec dual = serre_dual_family(spec);
  CHECK(dual.degree == 2);
  CHECK(std::abs(dual.twist[0] + spec.twist[0]) == 0.0);
  CHECK(std::abs(dual.rescale(0, 0) + 0.3) == 0.0);
  CHECK(dual.serre_dual);
  CHECK_FALSE(serre_dual_family(dual).serre_dual);
  const Complex z = spec.grid.point(3, 5);
  CHECK(metric_weight(dual, z) == -metric_weight(spec, z));
}
