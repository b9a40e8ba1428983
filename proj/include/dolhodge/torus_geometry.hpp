// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "dolhodge/common.hpp"

namespace dolhodge {

// Sample grid on X = C / (Z + tau Z) with metric g_{z zbar} = 1 and omega = dx ^ dy.
// Grid point z_{jk} = j / N + (k / N) tau is stored at flat index k * N + j.
struct TorusGrid {
  Complex tau{0.0, 1.0};
  int n_side = 0;
  double t = 1.0;
  int stencil_order = 4;

  Eigen::Index size() const { return Eigen::Index(n_side) * n_side; }
  Eigen::Index index(int j, int k) const;  // reduces j, k modulo N
  Complex point(int j, int k) const;
  Complex point(Eigen::Index p) const { return point(int(p % n_side), int(p / n_side)); }
  double weight() const { return t / double(size()); }
};

TorusGrid build_grid(Complex tau, int n_side, int stencil_order = 4);

// Transition data of a line bundle in the holomorphic frame:
//   u(z + 1)   = mult_a(z) u(z),  mult_a = exp(flat_a),
//   u(z + tau) = mult_b(z) u(z),  mult_b = exp(flat_b - pi i d (2 z + tau)).
// degree = 0 with zero flat parts gives periodic fields; imaginary flat parts give a
// unitary character.
struct WrapRule {
  Complex tau{0.0, 1.0};
  int degree = 0;
  Complex flat_a{0.0, 0.0};
  Complex flat_b{0.0, 0.0};

  static WrapRule untwisted(Complex tau) { return {tau, 0}; }
  static WrapRule line_bundle(Complex tau, int degree) { return {tau, degree}; }
  static WrapRule flat(Complex tau, double theta_a, double theta_b) {
    return {tau, 0, {0.0, 2.0 * kPi * theta_a}, {0.0, 2.0 * kPi * theta_b}};
  }

  Complex log_mult_a(Complex z) const;
  Complex log_mult_b(Complex z) const;
  Complex mult_a(Complex z) const { return std::exp(log_mult_a(z)); }
  Complex mult_b(Complex z) const { return std::exp(log_mult_b(z)); }
};

// max |1 - mult_a(z + tau) mult_b(z) / (mult_b(z + 1) mult_a(z))| over the grid.
double cocycle_defect(const TorusGrid& grid, const WrapRule& wrap);

// Grid lookup on the universal cover: value at covering index (j, k) equals
// exp(log_factor) times the value stored at flat index `reduced`.
struct CoverCell {
  Eigen::Index reduced = 0;
  Complex log_factor{0.0, 0.0};
};
CoverCell cover_cell(const TorusGrid& grid, const WrapRule& wrap, int j, int k);

// One-sided first-derivative stencil on a unit-spaced line. Order 4 uses offsets -1..3,
// order 2 uses offsets 0..2.
struct Stencil1D {
  std::vector<int> offsets;
  std::vector<double> weights;
};
const Stencil1D& derivative_stencil(int order);

enum class LatticeDirection { a, b };
enum class ComplexDirection { z, zbar };

// Sparse matrix of a derivative in the holomorphic frame, multiplier-aware. With a
// non-empty log_scale the matrix is conjugated by diag(exp(log_scale)), i.e. entries are
// multiplied by exp(log_scale[p] - log_scale[q]), evaluated in log space.
SparseMatrix lattice_derivative(const TorusGrid& grid, const WrapRule& wrap,
                                LatticeDirection dir, const Eigen::VectorXd& log_scale = {});
SparseMatrix complex_derivative(const TorusGrid& grid, const WrapRule& wrap,
                                ComplexDirection dir, const Eigen::VectorXd& log_scale = {});

Field diff_a(const TorusGrid& grid, const Field& field, const WrapRule& wrap);
Field diff_b(const TorusGrid& grid, const Field& field, const WrapRule& wrap);
// d/dz = (conj(tau) d_a - d_b) / (conj(tau) - tau)
Field diff_z(const TorusGrid& grid, const Field& field, const WrapRule& wrap);
// d/dzbar = (d_b - tau d_a) / (conj(tau) - tau)
Field diff_zbar(const TorusGrid& grid, const Field& field, const WrapRule& wrap);

// Uniform-weight quadrature, sum_p density_p * t / N^2 (pairwise summation).
Complex integrate(const TorusGrid& grid, const Field& density);
double integrate_real(const TorusGrid& grid, const Eigen::VectorXd& density);

// sqrt(-1) Lambda_g of a (1,1)-form given by its dz ^ dzbar coefficient: c -> 2c.
Field lambda_contract(const Field& coef_zzbar);

// Plane wave exp(2 pi i (m a + n b)) sampled on the grid.
Field plane_wave(const TorusGrid& grid, int m, int n);

}  // namespace dolhodge
