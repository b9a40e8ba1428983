// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dolhodge {

using Complex = std::complex<double>;
using Field = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using BasePoint = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Invalid user input (bad configuration or violated precondition).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Fiber cohomology dimension is not locally constant.
class RankJumpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative or dense solver failed to deliver the requested accuracy.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* library_version();

namespace detail {
template <typename Derived>
typename Derived::Scalar pairwise_sum_range(const Derived& x, Eigen::Index begin, Eigen::Index end) {
  using Scalar = typename Derived::Scalar;
  if (end - begin <= 16) {
    Scalar acc(0);
    for (Eigen::Index i = begin; i < end; ++i) acc += x.coeff(i);
    return acc;
  }
  const Eigen::Index mid = begin + (end - begin) / 2;
  return pairwise_sum_range(x, begin, mid) + pairwise_sum_range(x, mid, end);
}
}  // namespace detail

// Pairwise summation; results do not depend on how callers are scheduled.
template <typename Derived>
typename Derived::Scalar pairwise_sum(const Eigen::DenseBase<Derived>& x) {
  const typename Derived::PlainObject flat = x.derived();
  return detail::pairwise_sum_range(flat, 0, flat.size());
}

}  // namespace dolhodge
