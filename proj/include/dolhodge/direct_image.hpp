// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "dolhodge/dolbeault_hodge.hpp"

namespace dolhodge {

// Full 3^(2m) grid s0 + step * (delta_1 + i delta_2, ...) with delta in {-1, 0, 1}.
// Point index is mixed radix over the real axes (Re s_1, Im s_1, Re s_2, Im s_2) with
// digit delta + 1, first axis fastest.
struct SStencil {
  BasePoint center;
  double step = 0.0;
  std::vector<BasePoint> points;

  int base_dim() const { return int(center.size()); }
  int size() const { return int(points.size()); }
  int center_index() const;
  // Index of the point with the given real-axis offsets (each in {-1, 0, 1}).
  int index(const std::vector<int>& deltas) const;
  // Center shifted by `delta` along real axis `axis`, and along two axes.
  int shifted(int axis, int delta) const;
  int shifted(int axis1, int delta1, int axis2, int delta2) const;
};

SStencil make_stencil(const BasePoint& center, double step);

// Central differences at the stencil center for any vector-space valued samples.
// d_k = (d_x - i d_y) / 2, d_kbar = (d_x + i d_y) / 2; d_k d_lbar uses the quarter
// Laplacian on the diagonal and the four-corner mixed stencil off it.
template <typename T>
T fd_d(const SStencil& st, const std::vector<T>& v, int k) {
  const double h = st.step;
  const T dx = (v[st.shifted(2 * k, 1)] - v[st.shifted(2 * k, -1)]) * (1.0 / (2 * h));
  const T dy = (v[st.shifted(2 * k + 1, 1)] - v[st.shifted(2 * k + 1, -1)]) * (1.0 / (2 * h));
  return (dx - dy * kI) * 0.5;
}

template <typename T>
T fd_dbar(const SStencil& st, const std::vector<T>& v, int k) {
  const double h = st.step;
  const T dx = (v[st.shifted(2 * k, 1)] - v[st.shifted(2 * k, -1)]) * (1.0 / (2 * h));
  const T dy = (v[st.shifted(2 * k + 1, 1)] - v[st.shifted(2 * k + 1, -1)]) * (1.0 / (2 * h));
  return (dx + dy * kI) * 0.5;
}

template <typename T>
T fd_d_dbar(const SStencil& st, const std::vector<T>& v, int k, int l) {
  const double h2 = st.step * st.step;
  const T& c = v[st.center_index()];
  if (k == l) {
    const T lap = (v[st.shifted(2 * k, 1)] + v[st.shifted(2 * k, -1)] + v[st.shifted(2 * k + 1, 1)] +
                   v[st.shifted(2 * k + 1, -1)] - c * 4.0) *
                  (1.0 / h2);
    return lap * 0.25;
  }
  auto mixed = [&](int a, int b) {
    return (v[st.shifted(a, 1, b, 1)] - v[st.shifted(a, 1, b, -1)] - v[st.shifted(a, -1, b, 1)] +
            v[st.shifted(a, -1, b, -1)]) *
           (1.0 / (4.0 * h2));
  };
  const int xk = 2 * k, yk = 2 * k + 1, xl = 2 * l, yl = 2 * l + 1;
  return (mixed(xk, xl) + mixed(xk, yl) * kI - mixed(yk, xl) * kI + mixed(yk, yl)) * 0.25;
}

struct FrameOptions {
  HodgeOptions hodge;
  std::uint64_t seed = 0x5EED;
  int node_candidates = 32;
  double max_node_condition = 1e8;
  double min_pairing_ratio = 1e-10;
};

// Direct-image frame over a stencil: at each point, `rank` fiberwise harmonic
// representatives in the holomorphic frame of the fiber (columns of reps[i]).
struct HoloFrame {
  int q = 0;
  int rank = 0;
  SStencil stencil;
  std::vector<FiberComplex> fibers;
  std::vector<Eigen::MatrixXcd> reps;
  // q = 0: grid indices of the evaluation nodes. q = 1: nodes of the dual q = 0 frame.
  std::vector<Eigen::Index> nodes;
  double node_condition = 0.0;
  // q = 1 only: dual frame and pairing matrices P(s) = int v^T eta.
  std::vector<FiberComplex> dual_fibers;
  std::vector<Eigen::MatrixXcd> dual_reps;
  std::vector<Eigen::MatrixXcd> pairings;

  template <int Q>
  BundleForm<Q> rep(int point, int rho) const {
    return BundleForm<Q>(Eigen::MatrixXcd(reps[point].col(rho)));
  }
};

// Sections u_rho(s) in the kernel with u_rho(z_j, s) = delta_{j rho} at fixed nodes z_j.
HoloFrame holo_frame_q0(const FamilySpec& spec, const SStencil& stencil, const FrameOptions& opts = {});
// Harmonic (0,1)-forms Xi(s) = sum_a eta_a (P^-1)_{a rho}, dual to the q = 0 frame of the
// Serre dual family under the bilinear pairing.
HoloFrame holo_frame_q1(const FamilySpec& spec, const SStencil& stencil, const FrameOptions& opts = {});
HoloFrame holo_frame(const FamilySpec& spec, const SStencil& stencil, int q, const FrameOptions& opts = {});

// Complex-bilinear pairing int v_rho eta_a dz ^ dzbar-free form: (sigma' v)^T (sigma eta).
Eigen::MatrixXcd serre_pairing(const FiberComplex& dual, const Eigen::MatrixXcd& dual_sections,
                               const FiberComplex& fiber, const Eigen::MatrixXcd& forms);

using GramField = std::vector<Eigen::MatrixXcd>;

// H_{rho sigma} = <xi_rho, xi_sigma> at one stencil point.
Eigen::MatrixXcd gram(const HoloFrame& frame, int point);
GramField gram_field(const HoloFrame& frame);

// blocks[k * m + l](rho, sigma) = R_{rho sigmabar k lbar}.
struct CurvatureTensor {
  int rank = 0;
  int base_dim = 0;
  std::vector<Eigen::MatrixXcd> blocks;

  static CurvatureTensor Zero(int rank, int base_dim);
  Eigen::MatrixXcd& operator()(int k, int l) { return blocks[std::size_t(k * base_dim + l)]; }
  const Eigen::MatrixXcd& operator()(int k, int l) const { return blocks[std::size_t(k * base_dim + l)]; }
  double norm() const;
  // max |R_{rho sigmabar k lbar} - conj(R_{sigma rhobar l kbar})|
  double hermitian_defect() const;
  CurvatureTensor& operator+=(const CurvatureTensor& o);
  CurvatureTensor& operator-=(const CurvatureTensor& o);
  CurvatureTensor& operator*=(Complex a);
  friend CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b) { return a += b; }
  friend CurvatureTensor operator-(CurvatureTensor a, const CurvatureTensor& b) { return a -= b; }
  friend CurvatureTensor operator*(Complex a, CurvatureTensor b) { return b *= a; }
};

// R_{k lbar} = -d_k d_lbar H + (d_k H) H^{-1} (d_lbar H) at the stencil center.
CurvatureTensor chern_curvature_fd(const GramField& gram, const SStencil& stencil);
// L^{-1} R L^{-H} with H(center) = L L^H: components in the frame orthonormal at s0.
CurvatureTensor orthonormal_components(const CurvatureTensor& r, const Eigen::MatrixXcd& gram_center);
// Columns of A with xi' = xi A orthonormal at the center: A = L^{-T}.
Eigen::MatrixXcd orthonormalizing_transform(const Eigen::MatrixXcd& gram_center);
// Gram matrices of the frame xi g(s), g(s) = id - sum_k (s_k - s0_k) (d_k H H^{-1})^T, which
// has vanishing first derivatives at the center.
GramField normal_gauge(const GramField& gram, const SStencil& stencil);

struct RankReport {
  int q = 0;
  bool constant = false;
  int dimension = -1;             // common dimension if constant
  std::vector<int> dimensions;    // per stencil point; -1 where no admissible gap exists
  std::vector<int> offending;     // points that differ from the center
};

RankReport rank_constancy_check(const FamilySpec& spec, const SStencil& stencil, int q,
                                const HodgeOptions& opts = {});

// Fiberwise harmonic projection of a family of closed forms over the stencil, certified:
// class_defect = max |H(input - output)| / |input|, pairing_defect = max difference of the
// Serre pairing with the dual frame (q = 1; zero for q = 0).
template <int Q>
struct HarmonizeResult {
  std::vector<BundleForm<Q>> harmonic;
  double class_defect = 0.0;
  double pairing_defect = 0.0;
};

template <int Q>
HarmonizeResult<Q> harmonize_family(const FamilySpec& spec, const SStencil& stencil,
                                    const std::vector<BundleForm<Q>>& closed_family,
                                    const FrameOptions& opts = {});
extern template HarmonizeResult<0> harmonize_family<0>(const FamilySpec&, const SStencil&,
                                                       const std::vector<Section>&, const FrameOptions&);
extern template HarmonizeResult<1> harmonize_family<1>(const FamilySpec&, const SStencil&,
                                                       const std::vector<Form01>&, const FrameOptions&);

// Relative size of the antiholomorphic derivative of the frame at the center:
// q = 0: max_k |d_kbar xi| / |xi| pointwise in the fiber norm;
// q = 1: class level, max_k |H(d_kbar Xi)| / |Xi|.
double holomorphy_residual(const HoloFrame& frame);
// q = 0: max |xi_rho(z_j) - delta|; q = 1: max |P_dual(xi) - id| over all stencil points.
double normalization_defect(const HoloFrame& frame);

}  // namespace dolhodge
