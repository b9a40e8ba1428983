// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/dolbeault_hodge.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <optional>

#include "dolhodge/linalg.hpp"

namespace dolhodge {

namespace {

SparseMatrix primal_operator(const FamilySpec& spec, const BasePoint& s) {
  const Eigen::VectorXd half_weight = -0.5 * metric_weight_field(spec);
  SparseMatrix d = complex_derivative(spec.grid, wrap_rule(spec), ComplexDirection::zbar, half_weight);
  const Complex alpha = twist_value(spec, s);
  for (Eigen::Index i = 0; i < d.rows(); ++i) d.coeffRef(i, i) += alpha;
  d.makeCompressed();
  return d;
}

bool spurious_side(int degree, int q) { return (degree > 0 && q == 1) || (degree < 0 && q == 0); }

}  // namespace

struct FiberComplex::State {
  FamilySpec spec;
  BasePoint s;
  HodgeOptions options;
  Eigen::VectorXd sigma;
  SparseMatrix d;
  SparseMatrix d_adj;

  struct Side {
    std::once_flag operator_once;
    SparseMatrix l;
    std::optional<ShiftedFactor> factor;
    std::once_flag spectrum_once;
    std::optional<SideSpectrum> spectrum;
  };
  mutable Side sides[2];

  const SparseMatrix& side_operator(int q) const {
    Side& side = sides[q];
    std::call_once(side.operator_once, [&] {
      side.l = q == 0 ? SparseMatrix(d_adj * d) : SparseMatrix(d * d_adj);
      side.factor.emplace(side.l, options.shift);
    });
    return side.l;
  }

  const ShiftedFactor& factor(int q) const {
    side_operator(q);
    return *sides[q].factor;
  }

  const SideSpectrum& spectrum(int q) const {
    Side& side = sides[q];
    std::call_once(side.spectrum_once, [&] { side.spectrum = compute_spectrum(q); });
    return *side.spectrum;
  }

  SideSpectrum compute_spectrum(int q) const {
    const SparseMatrix& l = side_operator(q);
    const int count = std::min<int>(int(l.rows()), std::abs(spec.degree) + options.window_extra);
    EigenWindow window;
    bool dense = options.method == EigenMethod::dense;
    if (!dense) {
      SubspaceOptions so;
      so.seed = options.seed + std::uint64_t(q);
      window = lowest_eigenpairs(l, count, factor(q), so);
      if (!window.converged) {
        if (spec.grid.n_side > options.dense_fallback_side) {
          throw SolverError("eigensolver did not converge on degree " + std::to_string(q));
        }
        dense = true;
      }
    }
    if (dense) window = lowest_eigenpairs_dense(l, count);

    SideSpectrum out;
    out.q = q;
    out.eigenvalues = window.values;
    out.dense = dense;
    out.iterations = window.iterations;
    const double top = window.values[count - 1];
    const double threshold = options.zero_fraction * top;
    int k = 0;
    while (k < count && window.values[k] <= threshold) ++k;
    if (k == count) throw SolverError("null space fills the eigenvalue window");
    out.null_count = k;
    out.gap = k == 0 ? std::numeric_limits<double>::infinity()
                     : window.values[k] / std::max(window.values[k - 1], 1e-300);
    if (k > 0 && out.gap < options.gap_ratio) throw RankJumpError("not locally free here");
    if (spurious_side(spec.degree, q)) {
      out.spurious_count = std::abs(spec.degree);
      if (k != out.spurious_count) {
        throw SolverError("lattice null modes do not match the degree on degree " +
                          std::to_string(q));
      }
    }
    out.harmonic_count = k - out.spurious_count;
    out.null_space = canonical_basis(window.vectors.leftCols(k));
    return out;
  }

  Eigen::MatrixXcd spurious(int q) const {
    if (!spurious_side(spec.degree, q)) return Eigen::MatrixXcd(d.rows(), 0);
    return spectrum(q).null_space;
  }

  Eigen::MatrixXcd harmonic(int q) const {
    if (spurious_side(spec.degree, q)) return Eigen::MatrixXcd(d.rows(), 0);
    return spectrum(q).null_space;
  }

  Eigen::MatrixXcd project(int q, const Eigen::MatrixXcd& x) const {
    const Eigen::MatrixXcd z = spurious(q);
    if (z.cols() == 0) return x;
    return x - z * (z.adjoint() * x);
  }
};

FiberComplex::FiberComplex(const FamilySpec& spec, const BasePoint& s, const HodgeOptions& options)
    : state_(std::make_shared<State>()) {
  validate(spec);
  if (s.size() != spec.base_dim()) throw ConfigError("base point dimension mismatch");
  State& st = *state_;
  st.spec = spec;
  st.s = s;
  st.options = options;
  const TorusGrid& g = spec.grid;
  const double phi = rescale_weight(spec, s);
  st.sigma = (0.5 * std::log(g.weight()) - 0.5 * (metric_weight_field(spec).array() + phi)).exp();
  if (spec.serre_dual) {
    st.d = -SparseMatrix(primal_operator(serre_dual_family(spec), s).transpose());
  } else {
    st.d = primal_operator(spec, s);
  }
  st.d_adj = st.d.adjoint();
}

const FamilySpec& FiberComplex::spec() const { return state_->spec; }
const BasePoint& FiberComplex::base_point() const { return state_->s; }
const HodgeOptions& FiberComplex::options() const { return state_->options; }
Complex FiberComplex::twist() const { return twist_value(state_->spec, state_->s); }
const Eigen::VectorXd& FiberComplex::unitary_scale() const { return state_->sigma; }
const SparseMatrix& FiberComplex::unitary_operator() const { return state_->d; }
const SideSpectrum& FiberComplex::spectrum(int q) const { return state_->spectrum(q); }
Eigen::MatrixXcd FiberComplex::harmonic_space(int q) const { return state_->harmonic(q); }
Eigen::MatrixXcd FiberComplex::spurious_space(int q) const { return state_->spurious(q); }

Eigen::MatrixXcd FiberComplex::to_unitary(const Eigen::MatrixXcd& v) const {
  return state_->sigma.asDiagonal() * v;
}

Eigen::MatrixXcd FiberComplex::from_unitary(const Eigen::MatrixXcd& v) const {
  return state_->sigma.cwiseInverse().asDiagonal() * v;
}

Eigen::MatrixXcd FiberComplex::project(int q, const Eigen::MatrixXcd& x) const {
  return state_->project(q, x);
}

Eigen::MatrixXcd FiberComplex::apply_dbar(const Eigen::MatrixXcd& u) const {
  return state_->project(1, state_->d * state_->project(0, u));
}

Eigen::MatrixXcd FiberComplex::apply_dbar_star(const Eigen::MatrixXcd& xi) const {
  return state_->project(0, state_->d_adj * state_->project(1, xi));
}

Eigen::MatrixXcd FiberComplex::apply_laplacian(int q, const Eigen::MatrixXcd& x) const {
  return q == 0 ? apply_dbar_star(apply_dbar(x)) : apply_dbar(apply_dbar_star(x));
}

Eigen::MatrixXcd FiberComplex::apply_harmonic(int q, const Eigen::MatrixXcd& x) const {
  const Eigen::MatrixXcd z = state_->harmonic(q);
  if (z.cols() == 0) return Eigen::MatrixXcd::Zero(x.rows(), x.cols());
  return z * (z.adjoint() * x);
}

Eigen::MatrixXcd FiberComplex::apply_green(int q, const Eigen::MatrixXcd& x) const {
  const State& st = *state_;
  const Eigen::MatrixXcd deflation = st.spectrum(q).null_space;
  const ShiftedFactor& factor = st.factor(q);
  const Eigen::MatrixXcd rhs = project(q, x) - apply_harmonic(q, x);
  const int n = grid().n_side;
  Eigen::MatrixXcd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const PcgResult r = deflated_pcg(
        [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return apply_laplacian(q, v); },
        [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return factor.solve(v); },
        rhs.col(c), deflation, st.options.green_tol, 10 * n * n);
    if (!r.converged) throw SolverError("Green solve did not converge");
    out.col(c) = r.x;
  }
  return out;
}

FiberComplex trivial_complex(const TorusGrid& grid, const HodgeOptions& options) {
  const FamilySpec spec =
      make_family(grid, 0, Eigen::VectorXcd::Zero(1), Eigen::MatrixXcd::Zero(1, 1));
  return FiberComplex(spec, BasePoint::Zero(1), options);
}

Form01 dbar(const FiberComplex& fc, const Section& u) {
  return Form01(fc.from_unitary(fc.apply_dbar(fc.to_unitary(u.values))));
}

ZeroForm dbar(const FiberComplex& fc, const Form01& xi) { return {fc.size(), xi.rank()}; }

Section dbar_star(const FiberComplex& fc, const Form01& xi) {
  return Section(fc.from_unitary(fc.apply_dbar_star(fc.to_unitary(xi.values))));
}

ZeroForm dbar_star(const FiberComplex& fc, const Section& u) { return {fc.size(), u.rank()}; }

Section laplacian(const FiberComplex& fc, const Section& u) {
  return Section(fc.from_unitary(fc.apply_laplacian(0, fc.to_unitary(u.values))));
}

Form01 laplacian(const FiberComplex& fc, const Form01& xi) {
  return Form01(fc.from_unitary(fc.apply_laplacian(1, fc.to_unitary(xi.values))));
}

Section restrict_to_complex(const FiberComplex& fc, const Section& u) {
  return Section(fc.from_unitary(fc.project(0, fc.to_unitary(u.values))));
}

Form01 restrict_to_complex(const FiberComplex& fc, const Form01& xi) {
  return Form01(fc.from_unitary(fc.project(1, fc.to_unitary(xi.values))));
}

namespace {

Complex weighted_inner(const FiberComplex& fc, const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw ConfigError("inner: shape mismatch");
  const Eigen::MatrixXcd prod = fc.to_unitary(x).cwiseProduct(fc.to_unitary(y).conjugate());
  return pairwise_sum(prod.reshaped());
}

}  // namespace

Complex inner(const FiberComplex& fc, const Section& x, const Section& y) {
  return weighted_inner(fc, x.values, y.values);
}

Complex inner(const FiberComplex& fc, const Form01& x, const Form01& y) {
  return weighted_inner(fc, x.values, y.values);
}

double norm(const FiberComplex& fc, const Section& x) { return std::sqrt(inner(fc, x, x).real()); }
double norm(const FiberComplex& fc, const Form01& x) { return std::sqrt(inner(fc, x, x).real()); }

template <int Q>
std::vector<BundleForm<Q>> harmonic_basis(const FiberComplex& fc) {
  const Eigen::MatrixXcd z = fc.from_unitary(fc.harmonic_space(Q));
  std::vector<BundleForm<Q>> out;
  out.reserve(std::size_t(z.cols()));
  for (Eigen::Index c = 0; c < z.cols(); ++c) out.emplace_back(Eigen::MatrixXcd(z.col(c)));
  return out;
}
template std::vector<Section> harmonic_basis<0>(const FiberComplex&);
template std::vector<Form01> harmonic_basis<1>(const FiberComplex&);

Section harmonic_projection(const FiberComplex& fc, const Section& u) {
  return Section(fc.from_unitary(fc.apply_harmonic(0, fc.to_unitary(u.values))));
}

Form01 harmonic_projection(const FiberComplex& fc, const Form01& xi) {
  return Form01(fc.from_unitary(fc.apply_harmonic(1, fc.to_unitary(xi.values))));
}

Section green(const FiberComplex& fc, const Section& u) {
  return Section(fc.from_unitary(fc.apply_green(0, fc.to_unitary(u.values))));
}

Form01 green(const FiberComplex& fc, const Form01& xi) {
  return Form01(fc.from_unitary(fc.apply_green(1, fc.to_unitary(xi.values))));
}

namespace {

template <typename Out, typename In>
Out pointwise(const EndForm01& a, const In& x, bool adjoint) {
  if (a.rank != x.rank() || a.size() != x.size()) throw ConfigError("rank or grid mismatch");
  Eigen::MatrixXcd out(x.size(), x.rank());
  for (Eigen::Index p = 0; p < x.size(); ++p) {
    const Eigen::VectorXcd v = x.values.row(p).transpose();
    out.row(p) = (adjoint ? Eigen::VectorXcd(a.at(p).adjoint() * v) : Eigen::VectorXcd(a.at(p) * v)).transpose();
  }
  return Out(std::move(out));
}

}  // namespace

Form01 cup(const EndForm01& a, const Section& u) { return pointwise<Form01>(a, u, false); }
ZeroForm cup(const EndForm01& a, const Form01& xi) { return {xi.size(), a.rank}; }
Section cap(const EndForm01& a, const Form01& xi) { return pointwise<Section>(a, xi, true); }
ZeroForm cap(const EndForm01& a, const Section& u) { return {u.size(), a.rank}; }

EndSection endo_commutator_lambda(const EndForm01& a, const EndForm01& b) {
  if (a.rank != b.rank || a.size() != b.size()) throw ConfigError("rank or grid mismatch");
  EndSection out(a.size(), a.rank);
  for (Eigen::Index p = 0; p < a.size(); ++p) {
    out.at(p) = 2.0 * (b.at(p).adjoint() * a.at(p) - a.at(p) * b.at(p).adjoint());
  }
  return out;
}

namespace {

template <int Degree>
BundleForm<Degree> apply_end(const EndSection& e, const BundleForm<Degree>& x) {
  if (e.rank != x.rank() || e.size() != x.size()) throw ConfigError("rank or grid mismatch");
  Eigen::MatrixXcd out(x.size(), x.rank());
  for (Eigen::Index p = 0; p < x.size(); ++p) {
    out.row(p) = (e.at(p) * x.values.row(p).transpose()).transpose();
  }
  return BundleForm<Degree>(std::move(out));
}

EndSection entrywise(const FiberComplex& trivial, const EndSection& e, bool green_op) {
  if (trivial.spec().degree != 0 || e.size() != trivial.size()) {
    throw ConfigError("End-valued data needs the trivial complex of the same grid");
  }
  const Eigen::MatrixXcd in = trivial.to_unitary(Eigen::MatrixXcd(e.values));
  const Eigen::MatrixXcd res = green_op ? trivial.apply_green(0, in) : trivial.apply_harmonic(0, in);
  EndSection out(e.size(), e.rank);
  out.values = trivial.from_unitary(res);
  return out;
}

}  // namespace

Section apply(const EndSection& e, const Section& u) { return apply_end(e, u); }
Form01 apply(const EndSection& e, const Form01& xi) { return apply_end(e, xi); }

EndSection harmonic_projection(const FiberComplex& trivial, const EndSection& e) {
  return entrywise(trivial, e, false);
}

EndSection green(const FiberComplex& trivial, const EndSection& e) {
  return entrywise(trivial, e, true);
}

}  // namespace dolhodge
