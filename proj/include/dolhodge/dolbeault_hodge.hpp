// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dolhodge/bundle_family.hpp"
#include "dolhodge/forms.hpp"

namespace dolhodge {

enum class EigenMethod { iterative, dense };

struct HodgeOptions {
  double zero_fraction = 1e-5;  // near-null: eigenvalue <= zero_fraction * top of window
  double gap_ratio = 1e3;       // required ratio between first regular and last null value
  double shift = 1e-4;          // shift of the factorized operator
  int window_extra = 4;         // eigenpairs beyond |d| in the computed window
  int dense_fallback_side = 24; // dense solve if the iteration stalls and N <= this
  double green_tol = 1e-10;
  EigenMethod method = EigenMethod::iterative;
  std::uint64_t seed = 0x5EED;
};

// Spectral data of D^H D (q = 0) or D D^H (q = 1) near zero, D the unitary fiber operator.
struct SideSpectrum {
  int q = 0;
  Eigen::VectorXd eigenvalues;  // lowest computed eigenvalues, ascending
  int null_count = 0;           // near-null eigenvalues before the gap
  int spurious_count = 0;       // null modes that are lattice artifacts
  int harmonic_count = 0;       // null_count - spurious_count
  double gap = 0.0;             // eigenvalues[null_count] / eigenvalues[null_count - 1]
  Eigen::MatrixXcd null_space;  // unitary coordinates, canonical orthonormal columns
  bool dense = false;
  int iterations = 0;
};

// The discrete Dolbeault complex of one fiber X x {s}:
//   sections --dbar--> (0,1)-forms,  dbar = P_f (D + alpha(s)) P_s,
// in unitary coordinates u~ = sigma u, sigma^2 = (t / N^2) exp(-w - phi(s)). D is the
// multiplier-aware dzbar stencil conjugated by sigma; P_s, P_f remove the lattice-artifact
// null modes on the side where Riemann-Roch forbids cohomology. Spectral data is computed
// lazily, once per side, and the object may be shared between threads.
class FiberComplex {
 public:
  FiberComplex(const FamilySpec& spec, const BasePoint& s, const HodgeOptions& options = {});

  const FamilySpec& spec() const;
  const BasePoint& base_point() const;
  const TorusGrid& grid() const { return spec().grid; }
  const HodgeOptions& options() const;
  Eigen::Index size() const { return grid().size(); }

  Complex twist() const;                      // alpha(s)
  const Eigen::VectorXd& unitary_scale() const;  // sigma
  const SparseMatrix& unitary_operator() const;  // D + alpha(s), before projection

  const SideSpectrum& spectrum(int q) const;
  int harmonic_dimension(int q) const { return spectrum(q).harmonic_count; }
  // Harmonic (q on the Riemann-Roch side) or spurious (other side) null vectors.
  Eigen::MatrixXcd harmonic_space(int q) const;
  Eigen::MatrixXcd spurious_space(int q) const;

  Eigen::MatrixXcd to_unitary(const Eigen::MatrixXcd& holomorphic_frame_values) const;
  Eigen::MatrixXcd from_unitary(const Eigen::MatrixXcd& unitary_values) const;

  // Unitary-coordinate operators, column by column.
  Eigen::MatrixXcd project(int q, const Eigen::MatrixXcd& x) const;  // P_q
  Eigen::MatrixXcd apply_dbar(const Eigen::MatrixXcd& u) const;
  Eigen::MatrixXcd apply_dbar_star(const Eigen::MatrixXcd& xi) const;
  Eigen::MatrixXcd apply_laplacian(int q, const Eigen::MatrixXcd& x) const;
  Eigen::MatrixXcd apply_harmonic(int q, const Eigen::MatrixXcd& x) const;
  Eigen::MatrixXcd apply_green(int q, const Eigen::MatrixXcd& x) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

// Degree-0 untwisted complex with phi = 0; End(F)-valued data lives on it.
FiberComplex trivial_complex(const TorusGrid& grid, const HodgeOptions& options = {});

Form01 dbar(const FiberComplex& fc, const Section& u);
ZeroForm dbar(const FiberComplex& fc, const Form01& xi);
Section dbar_star(const FiberComplex& fc, const Form01& xi);
ZeroForm dbar_star(const FiberComplex& fc, const Section& u);
Section laplacian(const FiberComplex& fc, const Section& u);
Form01 laplacian(const FiberComplex& fc, const Form01& xi);

// Restriction of arbitrary grid data to the discrete complex (applies P_s or P_f).
Section restrict_to_complex(const FiberComplex& fc, const Section& u);
Form01 restrict_to_complex(const FiberComplex& fc, const Form01& xi);

// <x, y> = int (x, y)_h omega; conjugate-linear in the second slot. Sums over rank.
Complex inner(const FiberComplex& fc, const Section& x, const Section& y);
Complex inner(const FiberComplex& fc, const Form01& x, const Form01& y);
inline Complex inner(const FiberComplex&, const ZeroForm&, const ZeroForm&) { return {0.0, 0.0}; }
double norm(const FiberComplex& fc, const Section& x);
double norm(const FiberComplex& fc, const Form01& x);

// Orthonormal harmonic basis of degree Q; throws RankJumpError("not locally free here")
// when the spectrum has no admissible gap.
template <int Q>
std::vector<BundleForm<Q>> harmonic_basis(const FiberComplex& fc);
extern template std::vector<Section> harmonic_basis<0>(const FiberComplex&);
extern template std::vector<Form01> harmonic_basis<1>(const FiberComplex&);

Section harmonic_projection(const FiberComplex& fc, const Section& u);
Form01 harmonic_projection(const FiberComplex& fc, const Form01& xi);
// G(v): laplacian(G v) = v - H v, H(G v) = 0. Throws SolverError on stagnation.
Section green(const FiberComplex& fc, const Section& u);
Form01 green(const FiberComplex& fc, const Form01& xi);
inline ZeroForm green(const FiberComplex&, const ZeroForm& z) { return z; }

// Cup product with an End-valued (0,1)-form: (A u)(p) = A(p) u(p).
Form01 cup(const EndForm01& a, const Section& u);
ZeroForm cup(const EndForm01& a, const Form01& xi);
// Formal adjoint of cup: (A* cap xi)(p) = A(p)^H xi(p), with g^{zbar z} = 1.
Section cap(const EndForm01& a, const Form01& xi);
ZeroForm cap(const EndForm01& a, const Section& u);

// sqrt(-1) Lambda_g [A, B*] for the (1,0)-form B* = B^H dz: 2 (B^H A - A B^H).
EndSection endo_commutator_lambda(const EndForm01& a, const EndForm01& b);

// Pointwise action of End-valued sections.
Section apply(const EndSection& e, const Section& u);
Form01 apply(const EndSection& e, const Form01& xi);

// Harmonic projection and Green operator of End-valued sections, entrywise on the trivial
// complex (the End metric is flat for scalar fiber weights).
EndSection harmonic_projection(const FiberComplex& trivial, const EndSection& e);
EndSection green(const FiberComplex& trivial, const EndSection& e);

}  // namespace dolhodge
