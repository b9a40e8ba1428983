// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace dolhodge {

namespace {

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& x) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(x.rows(), x.cols());
}

}  // namespace

ShiftedFactor::ShiftedFactor(const SparseMatrix& l, double shift) : shift_(shift) {
  SparseMatrix shifted = l;
  for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += shift;
  ldlt_.compute(shifted);
  if (ldlt_.info() != Eigen::Success) throw SolverError("shifted factorization failed");
}

Eigen::MatrixXcd ShiftedFactor::solve(const Eigen::MatrixXcd& rhs) const {
  Eigen::MatrixXcd x = ldlt_.solve(rhs);
  if (ldlt_.info() != Eigen::Success) throw SolverError("shifted solve failed");
  return x;
}

Eigen::MatrixXcd seeded_random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return double(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = unit();
      m(i, j) = {re, unit()};
    }
  return m;
}

EigenWindow lowest_eigenpairs(const SparseMatrix& l, int count, const ShiftedFactor& factor,
                              const SubspaceOptions& options) {
  const Eigen::Index n = l.rows();
  const int block = std::min<int>(int(n), count + options.guard);
  Eigen::MatrixXcd x = orthonormalize(seeded_random(n, block, options.seed));
  EigenWindow out;
  Eigen::VectorXd theta;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXcd y = orthonormalize(factor.solve(x));
    const Eigen::MatrixXcd ly = l * y;
    Eigen::MatrixXcd h = y.adjoint() * ly;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(h);
    theta = ritz.eigenvalues();
    x = y * ritz.eigenvectors();
    const Eigen::MatrixXcd residual = ly * ritz.eigenvectors() - x * theta.asDiagonal();
    const double scale = std::max(theta[count - 1], 1.0);
    bool done = true;
    for (int i = 0; i < count && done; ++i) {
      const double bound = (theta[i] <= 1e-3 * scale ? options.tol : options.loose_tol) * scale;
      done = residual.col(i).norm() <= bound;
    }
    out.iterations = it;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.values = theta.head(count).cwiseMax(0.0);
  out.vectors = x.leftCols(count);
  return out;
}

EigenWindow lowest_eigenpairs_dense(const SparseMatrix& l, int count) {
  Eigen::MatrixXcd dense = Eigen::MatrixXcd(l);
  dense = 0.5 * (dense + dense.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
  EigenWindow out;
  out.values = es.eigenvalues().head(count).cwiseMax(0.0);
  out.vectors = es.eigenvectors().leftCols(count);
  out.converged = true;
  return out;
}

PcgResult deflated_pcg(const LinearMap& apply, const LinearMap& precondition,
                       const Eigen::VectorXcd& rhs, const Eigen::MatrixXcd& deflation,
                       double tol, int max_iterations) {
  auto project = [&](Eigen::VectorXcd v) {
    if (deflation.cols() > 0) v -= deflation * (deflation.adjoint() * v);
    return v;
  };
  PcgResult out;
  const Eigen::VectorXcd b = project(rhs);
  out.x = Eigen::VectorXcd::Zero(rhs.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXcd r = b;
  Eigen::VectorXcd z = project(precondition(r));
  Eigen::VectorXcd p = z;
  Complex rz = r.dot(z);
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXcd ap = project(apply(p));
    const Complex pap = p.dot(ap);
    if (!(std::abs(pap) > 0.0)) break;
    const Complex alpha = rz / pap;
    out.x += alpha * p;
    r -= alpha * ap;
    out.iterations = it;
    out.relative_residual = r.norm() / bnorm;
    if (out.relative_residual <= tol) {
      out.converged = true;
      break;
    }
    z = project(precondition(r));
    const Complex rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  out.x = project(out.x);
  return out;
}

Eigen::MatrixXcd canonical_basis(const Eigen::MatrixXcd& z) {
  const Eigen::Index k = z.cols();
  Eigen::MatrixXcd result(z.rows(), k);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Identity(k, k);  // coefficients of the remaining span
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::MatrixXcd rows = z * c;
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index p = 0; p < rows.rows(); ++p) {
      const double mag = rows.row(p).norm();
      if (mag > best * (1.0 + 1e-9)) {
        best = mag;
        pivot = p;
      }
    }
    const Eigen::VectorXcd r = rows.row(pivot).adjoint() / best;  // unit, in C^{k-i}
    result.col(i) = rows * r;
    result.col(i).normalize();
    if (i + 1 < k) {
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(r);
      const Eigen::MatrixXcd q = qr.householderQ();
      c = c * q.rightCols(k - i - 1);
    }
  }
  return result;
}

}  // namespace dolhodge
