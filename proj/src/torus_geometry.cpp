// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/torus_geometry.hpp"

#include <cmath>
#include <string>

namespace dolhodge {

namespace {

int floor_mod(int x, int n) {
  const int r = x % n;
  return r < 0 ? r + n : r;
}

}  // namespace

Eigen::Index TorusGrid::index(int j, int k) const {
  return Eigen::Index(floor_mod(k, n_side)) * n_side + floor_mod(j, n_side);
}

Complex TorusGrid::point(int j, int k) const {
  return double(j) / n_side + (double(k) / n_side) * tau;
}

TorusGrid build_grid(Complex tau, int n_side, int stencil_order) {
  if (!(tau.imag() > 0.0)) throw ConfigError("lattice not positively oriented");
  if (n_side < 8 || n_side % 2 != 0) {
    throw ConfigError("n_side must be even and at least 8, got " + std::to_string(n_side));
  }
  if (stencil_order != 2 && stencil_order != 4) {
    throw ConfigError("stencil_order must be 2 or 4, got " + std::to_string(stencil_order));
  }
  TorusGrid g;
  g.tau = tau;
  g.n_side = n_side;
  g.t = tau.imag();
  g.stencil_order = stencil_order;
  return g;
}

Complex WrapRule::log_mult_a(Complex) const { return flat_a; }

Complex WrapRule::log_mult_b(Complex z) const {
  return flat_b - kI * kPi * double(degree) * (2.0 * z + tau);
}

double cocycle_defect(const TorusGrid& grid, const WrapRule& wrap) {
  double worst = 0.0;
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Complex z = grid.point(p);
    const Complex lhs = wrap.mult_a(z + grid.tau) * wrap.mult_b(z);
    const Complex rhs = wrap.mult_b(z + 1.0) * wrap.mult_a(z);
    worst = std::max(worst, std::abs(1.0 - lhs / rhs));
  }
  return worst;
}

CoverCell cover_cell(const TorusGrid& grid, const WrapRule& wrap, int j, int k) {
  const int n = grid.n_side;
  const int jr = floor_mod(j, n);
  const int kr = floor_mod(k, n);
  const int na = (j - jr) / n;
  const int nb = (k - kr) / n;
  Complex z = grid.point(jr, kr);
  Complex log_factor{0.0, 0.0};
  for (int i = 0; i < na; ++i, z += 1.0) log_factor += wrap.log_mult_a(z);
  for (int i = 0; i > na; --i) {
    z -= 1.0;
    log_factor -= wrap.log_mult_a(z);
  }
  for (int i = 0; i < nb; ++i, z += grid.tau) log_factor += wrap.log_mult_b(z);
  for (int i = 0; i > nb; --i) {
    z -= grid.tau;
    log_factor -= wrap.log_mult_b(z);
  }
  return {grid.index(jr, kr), log_factor};
}

const Stencil1D& derivative_stencil(int order) {
  static const Stencil1D fourth{{-1, 0, 1, 2, 3},
                                {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12}};
  static const Stencil1D second{{0, 1, 2}, {-1.5, 2.0, -0.5}};
  if (order == 4) return fourth;
  if (order == 2) return second;
  throw ConfigError("stencil_order must be 2 or 4, got " + std::to_string(order));
}

SparseMatrix lattice_derivative(const TorusGrid& grid, const WrapRule& wrap,
                                LatticeDirection dir, const Eigen::VectorXd& log_scale) {
  const Stencil1D& st = derivative_stencil(grid.stencil_order);
  const int n = grid.n_side;
  const bool scaled = log_scale.size() > 0;
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(std::size_t(grid.size()) * st.offsets.size());
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Index p = grid.index(j, k);
      for (std::size_t i = 0; i < st.offsets.size(); ++i) {
        const int o = st.offsets[i];
        const CoverCell cell = dir == LatticeDirection::a ? cover_cell(grid, wrap, j + o, k)
                                                          : cover_cell(grid, wrap, j, k + o);
        Complex log_entry = cell.log_factor;
        if (scaled) log_entry += log_scale[p] - log_scale[cell.reduced];
        triplets.emplace_back(p, cell.reduced, double(n) * st.weights[i] * std::exp(log_entry));
      }
    }
  }
  SparseMatrix m(grid.size(), grid.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseMatrix complex_derivative(const TorusGrid& grid, const WrapRule& wrap,
                                ComplexDirection dir, const Eigen::VectorXd& log_scale) {
  const Complex tau = grid.tau;
  const Complex denom = std::conj(tau) - tau;
  const SparseMatrix da = lattice_derivative(grid, wrap, LatticeDirection::a, log_scale);
  const SparseMatrix db = lattice_derivative(grid, wrap, LatticeDirection::b, log_scale);
  if (dir == ComplexDirection::z) {
    return SparseMatrix((std::conj(tau) / denom) * da - (1.0 / denom) * db);
  }
  return SparseMatrix((1.0 / denom) * db - (tau / denom) * da);
}

Field diff_a(const TorusGrid& grid, const Field& field, const WrapRule& wrap) {
  return lattice_derivative(grid, wrap, LatticeDirection::a) * field;
}

Field diff_b(const TorusGrid& grid, const Field& field, const WrapRule& wrap) {
  return lattice_derivative(grid, wrap, LatticeDirection::b) * field;
}

Field diff_z(const TorusGrid& grid, const Field& field, const WrapRule& wrap) {
  return complex_derivative(grid, wrap, ComplexDirection::z) * field;
}

Field diff_zbar(const TorusGrid& grid, const Field& field, const WrapRule& wrap) {
  return complex_derivative(grid, wrap, ComplexDirection::zbar) * field;
}

Complex integrate(const TorusGrid& grid, const Field& density) {
  return pairwise_sum(density) * grid.weight();
}

double integrate_real(const TorusGrid& grid, const Eigen::VectorXd& density) {
  return pairwise_sum(density) * grid.weight();
}

Field lambda_contract(const Field& coef_zzbar) { return 2.0 * coef_zzbar; }

Field plane_wave(const TorusGrid& grid, int m, int n) {
  Field f(grid.size());
  for (int k = 0; k < grid.n_side; ++k) {
    for (int j = 0; j < grid.n_side; ++j) {
      const double phase = 2.0 * kPi * (double(m) * j + double(n) * k) / grid.n_side;
      f[grid.index(j, k)] = std::polar(1.0, phase);
    }
  }
  return f;
}

}  // namespace dolhodge
