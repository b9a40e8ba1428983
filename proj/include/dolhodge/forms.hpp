// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dolhodge/common.hpp"

namespace dolhodge {

// Grid samples of a bundle-valued (0, Degree)-form on one fiber, in the holomorphic frame
// of the fiber's wrap rule. Column r is the r-th component of F tensor C^rank; for a
// (0,1)-form the stored value is the dzbar coefficient.
template <int Degree>
struct BundleForm {
  static_assert(Degree == 0 || Degree == 1, "fiber has complex dimension one");
  Eigen::MatrixXcd values;

  BundleForm() = default;
  explicit BundleForm(Eigen::MatrixXcd v) : values(std::move(v)) {}
  static BundleForm Zero(Eigen::Index size, Eigen::Index rank = 1) {
    return BundleForm(Eigen::MatrixXcd::Zero(size, rank));
  }

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index rank() const { return values.cols(); }

  BundleForm& operator+=(const BundleForm& o) { values += o.values; return *this; }
  BundleForm& operator-=(const BundleForm& o) { values -= o.values; return *this; }
  BundleForm& operator*=(Complex a) { values *= a; return *this; }
  friend BundleForm operator+(BundleForm a, const BundleForm& b) { return a += b; }
  friend BundleForm operator-(BundleForm a, const BundleForm& b) { return a -= b; }
  friend BundleForm operator*(Complex a, BundleForm b) { return b *= a; }
};

using Section = BundleForm<0>;
using Form01 = BundleForm<1>;

// The zero space reached by degree overflow: (0,2)-forms or (0,-1)-forms on a curve.
struct ZeroForm {
  Eigen::Index size = 0;
  Eigen::Index rank = 1;
};

// End(F tensor C^rank)-valued (0, Degree)-form, one rank x rank matrix per grid point.
// Row p of `values` holds the column-major entries of the matrix at grid point p.
template <int Degree>
struct EndForm {
  static_assert(Degree == 0 || Degree == 1, "fiber has complex dimension one");
  using Storage = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Index rank = 1;
  Storage values;

  EndForm() = default;
  EndForm(Eigen::Index size, Eigen::Index r) : rank(r), values(Storage::Zero(size, r * r)) {}

  // Constant matrix a at every grid point.
  static EndForm Constant(Eigen::Index size, const Eigen::MatrixXcd& a) {
    EndForm f(size, a.rows());
    for (Eigen::Index p = 0; p < size; ++p) f.at(p) = a;
    return f;
  }
  // f(p) times the identity.
  static EndForm Scalar(const Field& f, Eigen::Index r) {
    EndForm out(f.size(), r);
    for (Eigen::Index p = 0; p < f.size(); ++p)
      out.at(p) = f[p] * Eigen::MatrixXcd::Identity(r, r);
    return out;
  }

  Eigen::Index size() const { return values.rows(); }
  Eigen::Map<Eigen::MatrixXcd> at(Eigen::Index p) {
    return {values.row(p).data(), rank, rank};
  }
  Eigen::Map<const Eigen::MatrixXcd> at(Eigen::Index p) const {
    return {values.row(p).data(), rank, rank};
  }
};

using EndSection = EndForm<0>;
using EndForm01 = EndForm<1>;

}  // namespace dolhodge
