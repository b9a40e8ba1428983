// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/SparseCholesky>

#include "dolhodge/common.hpp"

namespace dolhodge {

// Sparse LDL^T factorization of L + shift * I for a Hermitian positive semidefinite L.
class ShiftedFactor {
 public:
  ShiftedFactor(const SparseMatrix& l, double shift);
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const;
  double shift() const { return shift_; }

 private:
  double shift_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

// Lowest eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct EigenWindow {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  int iterations = 0;
  bool converged = false;
};

struct SubspaceOptions {
  int guard = 4;
  double tol = 1e-11;        // residual bound for near-null pairs, relative to the window top
  double loose_tol = 1e-6;   // residual bound for the remaining wanted pairs
  int max_iterations = 1000;
  std::uint64_t seed = 0x5EED;
};

// Block inverse subspace iteration with Rayleigh-Ritz, using the shifted factorization.
EigenWindow lowest_eigenpairs(const SparseMatrix& l, int count, const ShiftedFactor& factor,
                              const SubspaceOptions& options = {});
// Dense Hermitian eigensolver on the full matrix; the oracle for small grids.
EigenWindow lowest_eigenpairs_dense(const SparseMatrix& l, int count);

struct PcgResult {
  Eigen::VectorXcd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

// Conjugate gradients for a Hermitian positive semidefinite operator on the orthogonal
// complement of the orthonormal columns of `deflation`. The right-hand side is projected
// onto that complement; the iterate stays in it.
PcgResult deflated_pcg(const LinearMap& apply, const LinearMap& precondition,
                       const Eigen::VectorXcd& rhs, const Eigen::MatrixXcd& deflation,
                       double tol, int max_iterations);

// Orthonormal basis of span(z) made canonical: the j-th vector maximizes the magnitude
// at the grid point of largest remaining evaluation (lowest index on ties) and is real
// positive there.
Eigen::MatrixXcd canonical_basis(const Eigen::MatrixXcd& z);

// Uniform entries in [-1, 1] + i[-1, 1] from a 64-bit Mersenne twister.
Eigen::MatrixXcd seeded_random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

}  // namespace dolhodge
