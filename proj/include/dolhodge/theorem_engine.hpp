// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "dolhodge/direct_image.hpp"

namespace dolhodge {

// The four right-hand summands of the curvature formula at one fiber, in a basis
// orthonormal at that fiber:
//   T1 = <G(rho_l* cap xi_rho), rho_k* cap xi_sigma>
//   T2 = <G(sqrt(-1) Lambda [rho_k, rho_l*]) xi_rho, xi_sigma>
//   T3 = -<G(rho_k cup xi_rho), rho_l cup xi_sigma>
//   T4 = <H(rho_{k lbar}) xi_rho, xi_sigma>
struct TheoremTerms {
  CurvatureTensor t1, t2, t3, t4;
  CurvatureTensor sum() const { return t1 + t2 + t3 + t4; }
};

// basis: columns are holomorphic-frame values of an orthonormal harmonic basis of degree q.
TheoremTerms theorem_terms(const FiberComplex& fiber, int q, const Eigen::MatrixXcd& basis);

// Continuum curvature of the model family at s0: -/+ c_k conj(c_l) t / (pi |d|) + d_k d_lbar phi
// (minus for q = 0, plus for q = 1) times the identity.
CurvatureTensor continuum_curvature(const FamilySpec& spec, const BasePoint& s0, int q);

double relative_difference(const CurvatureTensor& a, const CurvatureTensor& b);

struct EngineOptions {
  FrameOptions frame;
  double residual_tol = 5e-3;
  double symmetry_tol = 1e-10;
};

struct CurvatureReport {
  int q = 0;
  BasePoint s0;
  double eta = 0.0;
  int rank = 0;
  CurvatureTensor lhs;
  TheoremTerms terms;
  CurvatureTensor continuum;
  double residual_abs = 0.0;
  double residual_rel = 0.0;
  double lhs_continuum_error = 0.0;  // relative
  double rhs_continuum_error = 0.0;  // relative
  double hermitian_defect = 0.0;     // max over lhs and all terms
  Eigen::MatrixXcd phi;              // Phi_{k lbar}
  double holomorphy_residual = 0.0;
  double normalization_defect = 0.0;
  double node_condition = 0.0;
  bool pass = false;
};

// q = 0 for degree > 0, 1 for degree < 0; degree 0 has no locally free direct image at
// the origin and is resolved to q = 0 so that the rank check reports the jump.
int default_q(const FamilySpec& spec);

CurvatureReport verify_theorem(const FamilySpec& spec, const BasePoint& s0, int q, double eta,
                               const EngineOptions& opts = {});

// Left side only: frame over the stencil, Gram field, FD curvature in the frame
// orthonormal at s0. The orthonormal basis at s0 is returned through `basis`.
CurvatureTensor lhs_curvature(const HoloFrame& frame, Eigen::MatrixXcd* basis = nullptr);

struct LemmaResidual {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool structural = false;  // identically zero by degree counting
  bool s_dominated = false; // error is the O(eta^2) stencil truncation in s
  bool pass = false;
};

struct LemmaReport {
  int q = 0;
  double eta = 0.0;
  double tol_fd = 0.0;
  double tol_holo = 0.0;
  std::vector<LemmaResidual> items;
  bool pass = false;
  const LemmaResidual& at(const std::string& name) const;
};

// tol_fd = max(10 eta^2, 50 N^-p), tol_holo = max(10 eta^2, 1e-6).
double tolerance_fd(const FamilySpec& spec, double eta);
double tolerance_holo(double eta);

LemmaReport lemma_suite(const FamilySpec& spec, const BasePoint& s0, double eta, int q,
                        const EngineOptions& opts = {});

struct WpReport {
  std::vector<BasePoint> points;
  std::vector<Eigen::MatrixXcd> values;  // <rho_k, rho_l> per point
  double max_deviation = 0.0;            // from the value at the first point
  double min_eigenvalue = 0.0;
  bool constant = false;
};

// Weil-Petersson Gram on the side x side grid s0 + step * (a + i b), a, b centered.
WpReport wp_report(const FamilySpec& spec, const BasePoint& s0, double step, int side = 5);

struct SerreReport {
  CurvatureReport q1;       // degree -1, twist c, weight phi
  CurvatureReport q0_dual;  // degree +1, twist -c, weight -phi
  double mismatch_rel = 0.0;
  bool pass = false;
};

// Relative mismatch between R^{q=1} and the negated R^{q=0} of the dual data.
SerreReport serre_cross_check(const FamilySpec& spec, const BasePoint& s0, double eta,
                              const EngineOptions& opts = {}, double tol = 1e-2);

struct RescaleReport {
  CurvatureReport original;
  CurvatureReport rescaled;
  double phi_after = 0.0;    // max |Phi_{k lbar}| of the rescaled family
  double t4_after = 0.0;     // norm of T4 after rescaling
  double shift_error = 0.0;  // |R(phi) - R(0) - Phi id| / |Phi id|
  bool pass = false;
};

RescaleReport rescale_demo(const FamilySpec& spec, const BasePoint& s0, int q, double eta,
                           const EngineOptions& opts = {});

struct ConvergenceRow {
  int n_side = 0;
  double eta = 0.0;
  double residual_rel = 0.0;
  double lhs_continuum_error = 0.0;
  double rhs_continuum_error = 0.0;
  double order_fit = 0.0;  // spatial order of the lhs continuum error over the N list at this eta
};

struct ConvergenceTable {
  int q = 0;
  int stencil_order = 4;
  std::vector<ConvergenceRow> rows;  // N major, eta minor
  double spatial_order = 0.0;        // fitted order of the rhs continuum error over N
  std::vector<double> eta_order;     // fitted eta order of residual_rel, per N
  bool pass = false;
};

// Least-squares slope of log(err) against log(1/h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

ConvergenceTable convergence_study(const FamilySpec& spec, const BasePoint& s0, int q,
                                   const std::vector<int>& n_list, const std::vector<double>& eta_list,
                                   const EngineOptions& opts = {});

}  // namespace dolhodge
