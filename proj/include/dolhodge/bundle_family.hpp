// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dolhodge/forms.hpp"
#include "dolhodge/torus_geometry.hpp"

namespace dolhodge {

// Family of hermitian line bundles over X x S, S a disc in C^m:
//   fiber bundle: degree d, wrap multipliers (1, exp(-pi i d (2z + tau))),
//   holomorphic structure dbar + alpha(s), alpha(s) = sum_k c_k s_k dzbar,
//   metric h = exp(-w(z) - phi(s)), w = 2 pi d y^2 / t,
//   phi(s) = sum A_{k lbar} s_k conj(s_l) + beta |s|^4.
// serre_dual marks a family obtained from serre_dual_family(); its fiber operator is
// discretized as the negative transpose of the primal one.
struct FamilySpec {
  TorusGrid grid;
  int degree = 0;
  Eigen::VectorXcd twist;
  Eigen::MatrixXcd rescale;
  double rescale_quartic = 0.0;
  bool serre_dual = false;

  int base_dim() const { return int(twist.size()); }
};

// Validates and assembles a spec. Throws ConfigError on inconsistent input.
FamilySpec make_family(const TorusGrid& grid, int degree, const Eigen::VectorXcd& twist,
                       const Eigen::MatrixXcd& rescale, double rescale_quartic = 0.0);
void validate(const FamilySpec& spec);

// tau = i, c_1 = pi / t, phi = 0.3 |s|^2, m = 1.
FamilySpec default_family(int degree = 2, int n_side = 48, int stencil_order = 4);

// Degree -d, twist -c, weight -w - phi.
FamilySpec serre_dual_family(const FamilySpec& spec);

WrapRule wrap_rule(const FamilySpec& spec);
double metric_weight(const FamilySpec& spec, Complex z);
Eigen::VectorXd metric_weight_field(const FamilySpec& spec);

double rescale_weight(const FamilySpec& spec, const BasePoint& s);
Eigen::VectorXcd rescale_gradient(const FamilySpec& spec, const BasePoint& s);  // d_k phi
Eigen::MatrixXcd rescale_hessian(const FamilySpec& spec, const BasePoint& s);   // d_k d_lbar phi
Complex twist_value(const FamilySpec& spec, const BasePoint& s);                // alpha(s)

struct CurvatureBlocks {
  double F_zzbar = 0.0;
  Eigen::VectorXcd F_k_zbar;
  Eigen::VectorXcd F_z_lbar;
  Eigen::MatrixXcd F_klbar;
};

CurvatureBlocks curvature_blocks(const FamilySpec& spec, const BasePoint& s);

// rho_k = -c_k dzbar tensor id.
EndForm01 kodaira_spencer(const FamilySpec& spec, const BasePoint& s, int k);
// rho_{k lbar} = d_k d_lbar phi tensor id.
EndSection rho_klbar(const FamilySpec& spec, const BasePoint& s, int k, int l);
// Phi_{k lbar} = (1/r) int tr rho_{k lbar} / vol, by quadrature.
Complex phi_klbar(const FamilySpec& spec, const BasePoint& s, int k, int l);

// Replaces h by exp(-chi) h with chi = -phi, which removes the scalar weight.
FamilySpec rescale_to_kill_H(const FamilySpec& spec);

// <rho_k, rho_l> by quadrature of the pointwise End-metric pairing.
Complex wp_inner(const FamilySpec& spec, const BasePoint& s, int k, int l);

// Trace of the induced curvature ad(R) = R (x) id - id (x) R^T on End(F).
Complex endo_trace_curvature(const Eigen::MatrixXcd& r_klbar);
Complex endo_trace_curvature(const FamilySpec& spec, const BasePoint& s, int k, int l);

// (i / 2 pi) int F, with int dz ^ dzbar = -2 i t.
double degree_from_curvature(const FamilySpec& spec);

// sqrt(-1) Lambda_g F_{z zbar} at every grid point.
Field hermite_einstein_field(const FamilySpec& spec, const BasePoint& s);

// max over boundary-crossing stencil cells of |log(|u|^2 e^{-w}) at the covering point
// minus the value at the stored point|; zero iff the pointwise norm is doubly periodic.
double norm_periodicity_defect(const FamilySpec& spec);

}  // namespace dolhodge
