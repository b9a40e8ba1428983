// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/theorem_engine.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>

#include <Eigen/Eigenvalues>

#include "dolhodge/parallel.hpp"

namespace dolhodge {

namespace {

template <typename X>
double norm_of(const FiberComplex& fc, const X& x) {
  if constexpr (std::is_same_v<X, ZeroForm>) {
    return 0.0;
  } else {
    return norm(fc, x);
  }
}

template <typename X>
double diff_norm(const FiberComplex& fc, const X& a, const X& b) {
  if constexpr (std::is_same_v<X, ZeroForm>) {
    return 0.0;
  } else {
    return norm(fc, a - b);
  }
}

template <typename X>
Complex inner_of(const FiberComplex& fc, const X& a, const X& b) {
  if constexpr (std::is_same_v<X, ZeroForm>) {
    return {0.0, 0.0};
  } else {
    return inner(fc, a, b);
  }
}

bool all_zero(const EndSection& e) { return (e.values.array() == Complex(0.0, 0.0)).all(); }

template <int Q>
std::vector<BundleForm<Q>> columns(const Eigen::MatrixXcd& basis) {
  std::vector<BundleForm<Q>> out;
  for (Eigen::Index c = 0; c < basis.cols(); ++c) out.emplace_back(Eigen::MatrixXcd(basis.col(c)));
  return out;
}

template <int Q>
TheoremTerms terms_impl(const FiberComplex& fc, const Eigen::MatrixXcd& basis) {
  const FamilySpec& spec = fc.spec();
  const BasePoint& s = fc.base_point();
  const int m = spec.base_dim();
  const int r = int(basis.cols());
  const std::vector<BundleForm<Q>> xi = columns<Q>(basis);
  std::vector<EndForm01> rho;
  for (int k = 0; k < m; ++k) rho.push_back(kodaira_spencer(spec, s, k));

  using CupT = decltype(cup(rho[0], xi[0]));
  using CapT = decltype(cap(rho[0], xi[0]));
  const std::size_t count = std::size_t(m * r);
  std::vector<CupT> cups(count), green_cups(count);
  std::vector<CapT> caps(count), green_caps(count);
  parallel_for(int(count), [&](int i) {
    const int k = i / r, a = i % r;
    cups[std::size_t(i)] = cup(rho[std::size_t(k)], xi[std::size_t(a)]);
    caps[std::size_t(i)] = cap(rho[std::size_t(k)], xi[std::size_t(a)]);
    green_cups[std::size_t(i)] = green(fc, cups[std::size_t(i)]);
    green_caps[std::size_t(i)] = green(fc, caps[std::size_t(i)]);
  });

  const FiberComplex trivial = trivial_complex(spec.grid, fc.options());
  TheoremTerms t;
  t.t1 = t.t2 = t.t3 = t.t4 = CurvatureTensor::Zero(r, m);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      const EndSection comm = endo_commutator_lambda(rho[std::size_t(k)], rho[std::size_t(l)]);
      const bool scalar_comm = all_zero(comm);
      const EndSection green_comm = scalar_comm ? comm : green(trivial, comm);
      const EndSection harmonic_rho = harmonic_projection(trivial, rho_klbar(spec, s, k, l));
      for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) {
          const std::size_t la = std::size_t(l * r + a), kb = std::size_t(k * r + b);
          const std::size_t ka = std::size_t(k * r + a), lb = std::size_t(l * r + b);
          t.t1(k, l)(a, b) = inner_of(fc, green_caps[la], caps[kb]);
          t.t3(k, l)(a, b) = Complex(0.0, 0.0) - inner_of(fc, green_cups[ka], cups[lb]);
          if (!scalar_comm) t.t2(k, l)(a, b) = inner(fc, apply(green_comm, xi[std::size_t(a)]), xi[std::size_t(b)]);
          t.t4(k, l)(a, b) = inner(fc, apply(harmonic_rho, xi[std::size_t(a)]), xi[std::size_t(b)]);
        }
      }
    }
  }
  return t;
}

}  // namespace

TheoremTerms theorem_terms(const FiberComplex& fiber, int q, const Eigen::MatrixXcd& basis) {
  if (q == 0) return terms_impl<0>(fiber, basis);
  if (q == 1) return terms_impl<1>(fiber, basis);
  throw ConfigError("q must be 0 or 1");
}

CurvatureTensor continuum_curvature(const FamilySpec& spec, const BasePoint& s0, int q) {
  const int d = std::abs(spec.degree), m = spec.base_dim();
  if (d == 0) throw ConfigError("continuum value needs degree != 0");
  const Eigen::MatrixXcd hess = rescale_hessian(spec, s0);
  const double sign = q == 0 ? -1.0 : 1.0;
  CurvatureTensor out = CurvatureTensor::Zero(d, m);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      const Complex v = sign * spec.twist[k] * std::conj(spec.twist[l]) * spec.grid.t / (kPi * d) + hess(k, l);
      out(k, l) = v * Eigen::MatrixXcd::Identity(d, d);
    }
  }
  return out;
}

double relative_difference(const CurvatureTensor& a, const CurvatureTensor& b) {
  return (a - b).norm() / std::max(a.norm(), 1e-300);
}

int default_q(const FamilySpec& spec) { return spec.degree < 0 ? 1 : 0; }

CurvatureTensor lhs_curvature(const HoloFrame& frame, Eigen::MatrixXcd* basis) {
  const GramField g = gram_field(frame);
  const int c = frame.stencil.center_index();
  const Eigen::MatrixXcd& h0 = g[std::size_t(c)];
  if (basis) *basis = frame.reps[std::size_t(c)] * orthonormalizing_transform(h0);
  return orthonormal_components(chern_curvature_fd(g, frame.stencil), h0);
}

namespace {

Eigen::MatrixXcd phi_matrix(const FamilySpec& spec, const BasePoint& s0) {
  const int m = spec.base_dim();
  Eigen::MatrixXcd phi(m, m);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) phi(k, l) = phi_klbar(spec, s0, k, l);
  return phi;
}

void finish_report(CurvatureReport& rep, const FamilySpec& spec, const EngineOptions& opts) {
  const CurvatureTensor rhs = rep.terms.sum();
  rep.residual_abs = (rep.lhs - rhs).norm();
  rep.residual_rel = rep.residual_abs / std::max(rep.lhs.norm(), 1e-300);
  rep.continuum = continuum_curvature(spec, rep.s0, rep.q);
  rep.lhs_continuum_error = relative_difference(rep.lhs, rep.continuum) * rep.lhs.norm() / rep.continuum.norm();
  rep.rhs_continuum_error = (rhs - rep.continuum).norm() / rep.continuum.norm();
  rep.hermitian_defect = std::max({rep.lhs.hermitian_defect(), rep.terms.t1.hermitian_defect(),
                                   rep.terms.t2.hermitian_defect(), rep.terms.t3.hermitian_defect(),
                                   rep.terms.t4.hermitian_defect()});
  rep.phi = phi_matrix(spec, rep.s0);
  rep.pass = rep.residual_rel <= opts.residual_tol && rep.hermitian_defect <= opts.symmetry_tol;
}

}  // namespace

CurvatureReport verify_theorem(const FamilySpec& spec, const BasePoint& s0, int q, double eta,
                               const EngineOptions& opts) {
  const SStencil st = make_stencil(s0, eta);
  const HoloFrame frame = holo_frame(spec, st, q, opts.frame);
  CurvatureReport rep;
  rep.q = q;
  rep.s0 = s0;
  rep.eta = eta;
  rep.rank = frame.rank;
  Eigen::MatrixXcd basis;
  rep.lhs = lhs_curvature(frame, &basis);
  rep.terms = theorem_terms(frame.fibers[std::size_t(st.center_index())], q, basis);
  rep.holomorphy_residual = holomorphy_residual(frame);
  rep.normalization_defect = normalization_defect(frame);
  rep.node_condition = frame.node_condition;
  finish_report(rep, spec, opts);
  return rep;
}

double tolerance_fd(const FamilySpec& spec, double eta) {
  return std::max(10.0 * eta * eta, 50.0 * std::pow(double(spec.grid.n_side), -spec.grid.stencil_order));
}

double tolerance_holo(double eta) { return std::max(10.0 * eta * eta, 1e-6); }

const LemmaResidual& LemmaReport::at(const std::string& name) const {
  for (const LemmaResidual& r : items)
    if (r.name == name) return r;
  throw ConfigError("no lemma residual named " + name);
}

namespace {

template <int Q>
LemmaReport lemma_impl(const FamilySpec& spec, const HoloFrame& frame, double eta) {
  const SStencil& st = frame.stencil;
  const int c = st.center_index(), m = st.base_dim(), r = frame.rank;
  const FiberComplex& fc = frame.fibers[std::size_t(c)];
  const BasePoint& s0 = st.center;
  const GramField g = gram_field(frame);
  const Eigen::MatrixXcd a = orthonormalizing_transform(g[std::size_t(c)]);

  // Frame orthonormal at s0, still holomorphic in s.
  std::vector<Eigen::MatrixXcd> f(st.points.size());
  GramField gram_on(st.points.size());
  std::vector<Eigen::VectorXcd> grad(st.points.size());
  for (int i = 0; i < st.size(); ++i) {
    const std::size_t k = std::size_t(i);
    f[k] = frame.reps[k] * a;
    gram_on[k] = a.transpose() * g[k] * a.conjugate();
    grad[k] = rescale_gradient(spec, st.points[k]);
  }
  const Eigen::VectorXcd grad0 = grad[std::size_t(c)];
  auto scaled = [&](int k) {
    std::vector<Eigen::MatrixXcd> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = grad[i][k] * f[i];
    return out;
  };
  auto form = [&](const Eigen::MatrixXcd& v, int col) { return BundleForm<Q>(Eigen::MatrixXcd(v.col(col))); };

  const std::size_t mm = static_cast<std::size_t>(m);
  std::vector<Eigen::MatrixXcd> d(mm), dbar_s(mm), nabla(mm);
  for (int k = 0; k < m; ++k) {
    d[std::size_t(k)] = fd_d(st, f, k);
    dbar_s[std::size_t(k)] = fd_dbar(st, f, k);
    nabla[std::size_t(k)] = d[std::size_t(k)] - grad0[k] * f[std::size_t(c)];
  }
  const Eigen::MatrixXcd& f0 = f[std::size_t(c)];

  double lemma3 = 0, lemma4 = 0, lemma2_closed = 0, lemma2_harm = 0, lemma6 = 0, commutation = 0, s1 = 0;
  double cor1 = 0, cor2 = 0, endo = 0;
  for (int k = 0; k < m; ++k) {
    const EndForm01 rho_k = kodaira_spencer(spec, s0, k);
    const std::vector<Eigen::MatrixXcd> phik_f = scaled(k);
    for (int rr = 0; rr < r; ++rr) {
      const BundleForm<Q> xi = form(f0, rr);
      const double xi_norm = norm(fc, xi);
      const BundleForm<Q> nk = form(nabla[std::size_t(k)], rr);
      // (a) dbar_star(nabla_k xi) = 0
      lemma3 = std::max(lemma3, norm_of(fc, dbar_star(fc, nk)) / std::max(norm(fc, nk), xi_norm));
      // (b) dbar(nabla_k xi) = rho_k cup xi
      const auto cup_k = cup(rho_k, xi);
      lemma4 = std::max(lemma4, diff_norm(fc, dbar(fc, nk), cup_k) / std::max(norm_of(fc, cup_k), xi_norm));
      // (f) |(1 - H) nabla_k xi|^2 = <G(rho_k cup xi), rho_k cup xi>
      const BundleForm<Q> perp = nk - harmonic_projection(fc, nk);
      const double lhs_s1 = inner(fc, perp, perp).real();
      const double rhs_s1 = inner_of(fc, green(fc, cup_k), cup_k).real();
      s1 = std::max(s1, std::abs(lhs_s1 - rhs_s1) / std::max(std::abs(rhs_s1), xi_norm * xi_norm));
      for (int l = 0; l < m; ++l) {
        const EndForm01 rho_l = kodaira_spencer(spec, s0, l);
        const BundleForm<Q> dl = form(dbar_s[std::size_t(l)], rr);
        const double ref = std::max(norm(fc, dl), xi_norm);
        // (c) dbar(d_lbar xi) = 0 and H(d_lbar xi) = 0
        lemma2_closed = std::max(lemma2_closed, norm_of(fc, dbar(fc, dl)) / ref);
        lemma2_harm = std::max(lemma2_harm, norm(fc, harmonic_projection(fc, dl)) / ref);
        // (d) dbar_star(d_lbar xi) = rho_l* cap xi
        const auto cap_l = cap(rho_l, xi);
        lemma6 = std::max(lemma6, diff_norm(fc, dbar_star(fc, dl), cap_l) / std::max(norm_of(fc, cap_l), xi_norm));
        // (e) (nabla_k nabla_lbar - nabla_lbar nabla_k) xi = rho_{k lbar} xi
        const Eigen::MatrixXcd dkdl = fd_d_dbar(st, f, k, l);
        const Eigen::MatrixXcd k_then_l = dkdl - grad0[k] * dbar_s[std::size_t(l)];
        const Eigen::MatrixXcd l_then_k = dkdl - fd_dbar(st, phik_f, l);
        const BundleForm<Q> commutator = form(k_then_l - l_then_k, rr);
        const BundleForm<Q> expected = apply(rho_klbar(spec, s0, k, l), xi);
        commutation = std::max(commutation, norm(fc, commutator - expected) / std::max(norm(fc, expected), xi_norm));
        // Corollary 2: d_lbar d_k <xi_rr, xi_ss> by FD against the product rule
        for (int ss = 0; ss < r; ++ss) {
          const BundleForm<Q> eta_s = form(f0, ss);
          const Complex lhs2 = fd_d_dbar(st, gram_on, k, l)(rr, ss);
          const BundleForm<Q> lbar_k = form(fd_d_dbar(st, f, k, l) - fd_dbar(st, phik_f, l), rr);
          const BundleForm<Q> nl_eta = form(nabla[std::size_t(l)], ss);
          const BundleForm<Q> dlbar_xi = form(dbar_s[std::size_t(l)], rr);
          const BundleForm<Q> dkbar_eta = form(dbar_s[std::size_t(k)], ss);
          const BundleForm<Q> l_kbar =
              form(fd_d_dbar(st, f, l, k) - grad0[l] * dbar_s[std::size_t(k)], ss);
          const Complex rhs2 = inner(fc, lbar_k, eta_s) + inner(fc, nk, nl_eta) + inner(fc, dlbar_xi, dkbar_eta) +
                               inner(fc, xi, l_kbar);
          cor2 = std::max(cor2, std::abs(lhs2 - rhs2) / std::max(std::abs(lhs2), 1.0));
        }
      }
      // Corollary 1: <mu, d_kbar xi> = 0 for harmonic mu
      for (int mu = 0; mu < r; ++mu) {
        cor1 = std::max(cor1, std::abs(inner(fc, form(dbar_s[std::size_t(k)], rr), form(f0, mu))) / xi_norm);
      }
    }
  }
  // (g) trace of the induced endomorphism curvature, on the family and on the direct image
  const CurvatureTensor lhs = orthonormal_components(chern_curvature_fd(g, st), g[std::size_t(c)]);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      endo = std::max(endo, std::abs(endo_trace_curvature(spec, s0, k, l)));
      endo = std::max(endo, std::abs(endo_trace_curvature(lhs(k, l))));
    }
  }
  double normal = 0.0;
  const GramField ng = normal_gauge(gram_on, st);
  for (int k = 0; k < m; ++k) {
    normal = std::max(normal, fd_d(st, ng, k).cwiseAbs().maxCoeff());
    normal = std::max(normal, fd_dbar(st, ng, k).cwiseAbs().maxCoeff());
  }

  LemmaReport rep;
  rep.q = Q;
  rep.eta = eta;
  rep.tol_fd = tolerance_fd(spec, eta);
  rep.tol_holo = tolerance_holo(eta);
  auto add = [&](const std::string& name, double value, double tol, bool structural) {
    LemmaResidual item;
    item.name = name;
    item.value = value;
    item.tolerance = tol;
    item.structural = structural;
    item.s_dominated = !structural;
    item.pass = value <= tol;
    rep.items.push_back(item);
  };
  add("lemma3_dbar_star_nabla", lemma3, rep.tol_fd, Q == 0);
  add("lemma4_dbar_nabla", lemma4, rep.tol_fd, Q == 1);
  add("lemma2_closed", lemma2_closed, rep.tol_fd, Q == 1);
  add("lemma2_harmonic_part", lemma2_harm, rep.tol_fd, false);
  add("lemma6_dbar_star_dbar", lemma6, rep.tol_fd, Q == 0);
  add("commutation", commutation, rep.tol_fd, false);
  add("s1_identity", s1, rep.tol_fd, false);
  add("endo_trace", endo, 1e-13, true);
  add("corollary1_holomorphic", cor1, rep.tol_holo, false);
  add("corollary2_second_derivative", cor2, 10.0 * eta * eta, false);
  add("normal_gauge_first_derivative", normal, rep.tol_fd, false);
  rep.pass = std::all_of(rep.items.begin(), rep.items.end(), [](const LemmaResidual& i) { return i.pass; });
  return rep;
}

}  // namespace

LemmaReport lemma_suite(const FamilySpec& spec, const BasePoint& s0, double eta, int q, const EngineOptions& opts) {
  const SStencil st = make_stencil(s0, eta);
  const HoloFrame frame = holo_frame(spec, st, q, opts.frame);
  return q == 0 ? lemma_impl<0>(spec, frame, eta) : lemma_impl<1>(spec, frame, eta);
}

WpReport wp_report(const FamilySpec& spec, const BasePoint& s0, double step, int side) {
  if (side < 1) throw ConfigError("wp grid side must be positive");
  WpReport rep;
  const int m = spec.base_dim();
  const double half = 0.5 * (side - 1);
  for (int b = 0; b < side; ++b) {
    for (int a = 0; a < side; ++a) {
      BasePoint s = s0;
      s[0] += step * Complex(a - half, b - half);
      Eigen::MatrixXcd v(m, m);
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) v(k, l) = wp_inner(spec, s, k, l);
      rep.points.push_back(s);
      rep.values.push_back(v);
    }
  }
  for (const Eigen::MatrixXcd& v : rep.values) {
    rep.max_deviation = std::max(rep.max_deviation, (v - rep.values.front()).cwiseAbs().maxCoeff());
  }
  const Eigen::MatrixXcd& v0 = rep.values.front();
  rep.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (v0 + v0.adjoint())).eigenvalues()[0];
  rep.constant = rep.max_deviation <= 1e-10;
  return rep;
}

SerreReport serre_cross_check(const FamilySpec& spec, const BasePoint& s0, double eta, const EngineOptions& opts,
                              double tol) {
  if (std::abs(spec.degree) != 1 || spec.serre_dual) throw ConfigError("Serre cross-check needs degree +1 or -1");
  const FamilySpec flipped =
      make_family(spec.grid, -spec.degree, -spec.twist, -spec.rescale, -spec.rescale_quartic);
  const FamilySpec& negative = spec.degree < 0 ? spec : flipped;
  const FamilySpec& positive = spec.degree < 0 ? flipped : spec;
  SerreReport rep;
  rep.q1 = verify_theorem(negative, s0, 1, eta, opts);
  rep.q0_dual = verify_theorem(positive, s0, 0, eta, opts);
  rep.mismatch_rel = (rep.q1.lhs + rep.q0_dual.lhs).norm() / std::max(rep.q1.lhs.norm(), 1e-300);
  rep.pass = rep.mismatch_rel <= tol;
  return rep;
}

RescaleReport rescale_demo(const FamilySpec& spec, const BasePoint& s0, int q, double eta, const EngineOptions& opts) {
  RescaleReport rep;
  rep.original = verify_theorem(spec, s0, q, eta, opts);
  const FamilySpec killed = rescale_to_kill_H(spec);
  rep.rescaled = verify_theorem(killed, s0, q, eta, opts);
  rep.phi_after = rep.rescaled.phi.cwiseAbs().maxCoeff();
  rep.t4_after = rep.rescaled.terms.t4.norm();
  CurvatureTensor shift = CurvatureTensor::Zero(rep.original.rank, spec.base_dim());
  for (int k = 0; k < spec.base_dim(); ++k)
    for (int l = 0; l < spec.base_dim(); ++l)
      shift(k, l) = rep.original.phi(k, l) * Eigen::MatrixXcd::Identity(rep.original.rank, rep.original.rank);
  rep.shift_error = (rep.original.lhs - rep.rescaled.lhs - shift).norm() / std::max(shift.norm(), 1e-12);
  rep.pass = rep.original.pass && rep.rescaled.pass && rep.phi_after <= 1e-12 && rep.t4_after <= 1e-12 &&
             rep.shift_error <= 10.0 * eta * eta;
  return rep;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = -std::log(h[i]);
    const double y = std::log(std::max(err[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceTable convergence_study(const FamilySpec& spec, const BasePoint& s0, int q, const std::vector<int>& n_list,
                                   const std::vector<double>& eta_list, const EngineOptions& opts) {
  if (n_list.size() < 3 || eta_list.size() < 3) throw ConfigError("convergence lists need at least 3 entries");
  ConvergenceTable table;
  table.q = q;
  table.stencil_order = spec.grid.stencil_order;
  std::vector<double> h, rhs_err;
  for (int n : n_list) {
    FamilySpec sn = spec;
    sn.grid = build_grid(spec.grid.tau, n, spec.grid.stencil_order);
    validate(sn);
    std::optional<TheoremTerms> terms;
    const CurvatureTensor continuum = continuum_curvature(sn, s0, q);
    std::vector<double> residuals;
    for (double eta : eta_list) {
      const SStencil st = make_stencil(s0, eta);
      const HoloFrame frame = holo_frame(sn, st, q, opts.frame);
      Eigen::MatrixXcd basis;
      const CurvatureTensor lhs = lhs_curvature(frame, &basis);
      // the center fiber and its normalized frame do not depend on eta
      if (!terms) terms = theorem_terms(frame.fibers[std::size_t(st.center_index())], q, basis);
      const CurvatureTensor rhs = terms->sum();
      ConvergenceRow row;
      row.n_side = n;
      row.eta = eta;
      row.residual_rel = (lhs - rhs).norm() / std::max(lhs.norm(), 1e-300);
      row.lhs_continuum_error = (lhs - continuum).norm() / continuum.norm();
      row.rhs_continuum_error = (rhs - continuum).norm() / continuum.norm();
      residuals.push_back(row.residual_rel);
      table.rows.push_back(row);
    }
    h.push_back(1.0 / n);
    rhs_err.push_back(table.rows.back().rhs_continuum_error);
    table.eta_order.push_back(fitted_order(eta_list, residuals));
  }
  table.spatial_order = fitted_order(h, rhs_err);
  const std::size_t ne = eta_list.size();
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> errs;
    for (std::size_t i = 0; i < n_list.size(); ++i) errs.push_back(table.rows[i * ne + e].lhs_continuum_error);
    const double order = fitted_order(h, errs);
    for (std::size_t i = 0; i < n_list.size(); ++i) table.rows[i * ne + e].order_fit = order;
  }
  table.pass = table.spatial_order >= spec.grid.stencil_order - 0.5 &&
               std::all_of(table.eta_order.begin(), table.eta_order.end(), [](double o) { return o >= 1.6; });
  return table;
}

}  // namespace dolhodge
