// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/bundle_family.hpp"

#include <cmath>
#include <string>

namespace dolhodge {

void validate(const FamilySpec& spec) {
  const TorusGrid& g = spec.grid;
  build_grid(g.tau, g.n_side, g.stencil_order);
  const int m = spec.base_dim();
  if (m < 1 || m > 2) throw ConfigError("twist must have 1 or 2 entries, got " + std::to_string(m));
  if (spec.rescale.rows() != m || spec.rescale.cols() != m) {
    throw ConfigError("rescale must be a " + std::to_string(m) + "x" + std::to_string(m) +
                      " matrix");
  }
  if ((spec.rescale - spec.rescale.adjoint()).cwiseAbs().maxCoeff() > 1e-14) {
    throw ConfigError("rescale must be Hermitian");
  }
  if (std::abs(spec.degree) > 8) throw ConfigError("degree out of range [-8, 8]");
}

FamilySpec make_family(const TorusGrid& grid, int degree, const Eigen::VectorXcd& twist,
                       const Eigen::MatrixXcd& rescale, double rescale_quartic) {
  FamilySpec spec;
  spec.grid = grid;
  spec.degree = degree;
  spec.twist = twist;
  spec.rescale = rescale;
  spec.rescale_quartic = rescale_quartic;
  validate(spec);
  return spec;
}

FamilySpec default_family(int degree, int n_side, int stencil_order) {
  const TorusGrid g = build_grid({0.0, 1.0}, n_side, stencil_order);
  return make_family(g, degree, Eigen::VectorXcd::Constant(1, kPi / g.t),
                     Eigen::MatrixXcd::Constant(1, 1, 0.3));
}

FamilySpec serre_dual_family(const FamilySpec& spec) {
  FamilySpec dual = spec;
  dual.degree = -spec.degree;
  dual.twist = -spec.twist;
  dual.rescale = -spec.rescale;
  dual.rescale_quartic = -spec.rescale_quartic;
  dual.serre_dual = !spec.serre_dual;
  return dual;
}

WrapRule wrap_rule(const FamilySpec& spec) {
  return WrapRule::line_bundle(spec.grid.tau, spec.degree);
}

double metric_weight(const FamilySpec& spec, Complex z) {
  return 2.0 * kPi * spec.degree * z.imag() * z.imag() / spec.grid.t;
}

Eigen::VectorXd metric_weight_field(const FamilySpec& spec) {
  Eigen::VectorXd w(spec.grid.size());
  for (Eigen::Index p = 0; p < w.size(); ++p) w[p] = metric_weight(spec, spec.grid.point(p));
  return w;
}

double rescale_weight(const FamilySpec& spec, const BasePoint& s) {
  const double norm2 = s.squaredNorm();
  const Complex quad = s.dot(spec.rescale.transpose() * s);  // sum A_kl s_k conj(s_l)
  return quad.real() + spec.rescale_quartic * norm2 * norm2;
}

Eigen::VectorXcd rescale_gradient(const FamilySpec& spec, const BasePoint& s) {
  return spec.rescale * s.conjugate() + 2.0 * spec.rescale_quartic * s.squaredNorm() * s.conjugate();
}

Eigen::MatrixXcd rescale_hessian(const FamilySpec& spec, const BasePoint& s) {
  const int m = spec.base_dim();
  Eigen::MatrixXcd h = spec.rescale;
  if (spec.rescale_quartic != 0.0) {
    h += 2.0 * spec.rescale_quartic *
         (s.conjugate() * s.transpose() + s.squaredNorm() * Eigen::MatrixXcd::Identity(m, m));
  }
  return h;
}

Complex twist_value(const FamilySpec& spec, const BasePoint& s) {
  return (spec.twist.array() * s.array()).sum();
}

CurvatureBlocks curvature_blocks(const FamilySpec& spec, const BasePoint& s) {
  CurvatureBlocks b;
  b.F_zzbar = kPi * spec.degree / spec.grid.t;
  b.F_k_zbar = spec.twist;
  b.F_z_lbar = spec.twist.conjugate();
  b.F_klbar = rescale_hessian(spec, s);
  return b;
}

EndForm01 kodaira_spencer(const FamilySpec& spec, const BasePoint&, int k) {
  if (k < 0 || k >= spec.base_dim()) throw ConfigError("base index out of range");
  return EndForm01::Scalar(Field::Constant(spec.grid.size(), -spec.twist[k]), 1);
}

EndSection rho_klbar(const FamilySpec& spec, const BasePoint& s, int k, int l) {
  const int m = spec.base_dim();
  if (k < 0 || k >= m || l < 0 || l >= m) throw ConfigError("base index out of range");
  return EndSection::Scalar(Field::Constant(spec.grid.size(), rescale_hessian(spec, s)(k, l)), 1);
}

Complex phi_klbar(const FamilySpec& spec, const BasePoint& s, int k, int l) {
  const EndSection rho = rho_klbar(spec, s, k, l);
  Field trace(rho.size());
  for (Eigen::Index p = 0; p < rho.size(); ++p) trace[p] = rho.at(p).trace() / double(rho.rank);
  const TorusGrid& g = spec.grid;
  return integrate(g, trace) / integrate(g, Field::Ones(g.size()));
}

FamilySpec rescale_to_kill_H(const FamilySpec& spec) {
  // chi = -phi; the new weight is phi + chi.
  FamilySpec out = spec;
  out.rescale = spec.rescale - spec.rescale;
  out.rescale_quartic = spec.rescale_quartic - spec.rescale_quartic;
  return out;
}

Complex wp_inner(const FamilySpec& spec, const BasePoint& s, int k, int l) {
  const EndForm01 a = kodaira_spencer(spec, s, k);
  const EndForm01 b = kodaira_spencer(spec, s, l);
  Field density(a.size());
  for (Eigen::Index p = 0; p < a.size(); ++p) {
    density[p] = (a.at(p) * b.at(p).adjoint()).trace();  // g^{zbar z} = 1
  }
  return integrate(spec.grid, density);
}

Complex endo_trace_curvature(const Eigen::MatrixXcd& r) {
  const Eigen::Index n = r.rows();
  Complex trace{0.0, 0.0};
  // ad(R) vec(X) = vec(R X - X R), whose diagonal entry for X = E_ij is R_ii - R_jj.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) trace += r(i, i) - r(j, j);
  return trace;
}

Complex endo_trace_curvature(const FamilySpec& spec, const BasePoint& s, int k, int l) {
  return endo_trace_curvature(Eigen::MatrixXcd::Constant(1, 1, rescale_hessian(spec, s)(k, l)));
}

double degree_from_curvature(const FamilySpec& spec) {
  const TorusGrid& g = spec.grid;
  const CurvatureBlocks b = curvature_blocks(spec, BasePoint::Zero(spec.base_dim()));
  const Complex int_f = integrate(g, Field::Constant(g.size(), b.F_zzbar));  // int F dx dy
  // dz ^ dzbar = -2i dx ^ dy
  return (kI / (2.0 * kPi) * int_f * Complex(0.0, -2.0)).real();
}

Field hermite_einstein_field(const FamilySpec& spec, const BasePoint& s) {
  return lambda_contract(Field::Constant(spec.grid.size(), curvature_blocks(spec, s).F_zzbar));
}

double norm_periodicity_defect(const FamilySpec& spec) {
  const TorusGrid& g = spec.grid;
  const WrapRule wrap = wrap_rule(spec);
  double worst = 0.0;
  const int n = g.n_side;
  for (int k = -3; k < n + 3; ++k) {
    for (int j = -3; j < n + 3; ++j) {
      if (j >= 0 && j < n && k >= 0 && k < n) continue;
      const CoverCell cell = cover_cell(g, wrap, j, k);
      const double lhs = 2.0 * cell.log_factor.real() - metric_weight(spec, g.point(j, k));
      const double rhs = -metric_weight(spec, g.point(cell.reduced));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

}  // namespace dolhodge
