// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/direct_image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "dolhodge/parallel.hpp"

namespace dolhodge {

int SStencil::center_index() const { return index(std::vector<int>(std::size_t(2 * base_dim()), 0)); }

int SStencil::index(const std::vector<int>& deltas) const {
  int out = 0, radix = 1;
  for (int d : deltas) {
    out += (d + 1) * radix;
    radix *= 3;
  }
  return out;
}

int SStencil::shifted(int axis, int delta) const {
  std::vector<int> d(std::size_t(2 * base_dim()), 0);
  d[std::size_t(axis)] = delta;
  return index(d);
}

int SStencil::shifted(int axis1, int delta1, int axis2, int delta2) const {
  std::vector<int> d(std::size_t(2 * base_dim()), 0);
  d[std::size_t(axis1)] += delta1;
  d[std::size_t(axis2)] += delta2;
  return index(d);
}

SStencil make_stencil(const BasePoint& center, double step) {
  if (center.size() < 1 || center.size() > 2) throw ConfigError("base dimension must be 1 or 2");
  if (!(step > 0.0)) throw ConfigError("eta must be positive");
  SStencil st;
  st.center = center;
  st.step = step;
  const int axes = int(2 * center.size());
  int count = 1;
  for (int a = 0; a < axes; ++a) count *= 3;
  st.points.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i) {
    BasePoint s = center;
    int rest = i;
    for (int a = 0; a < axes; ++a) {
      const int delta = rest % 3 - 1;
      rest /= 3;
      s[a / 2] += (a % 2 == 0 ? Complex(step * delta, 0.0) : Complex(0.0, step * delta));
    }
    st.points.push_back(s);
  }
  return st;
}

namespace {

// Fibers over the stencil with the q-th harmonic dimension at each point, -1 where the
// spectrum has no admissible gap.
struct StencilFibers {
  std::vector<FiberComplex> fibers;
  std::vector<int> dims;
};

StencilFibers stencil_fibers(const FamilySpec& spec, const SStencil& st, int q, const HodgeOptions& opts) {
  StencilFibers out;
  out.fibers.reserve(st.points.size());
  for (const BasePoint& s : st.points) out.fibers.emplace_back(spec, s, opts);
  out.dims.assign(st.points.size(), -1);
  parallel_for(st.size(), [&](int i) {
    try {
      out.dims[std::size_t(i)] = out.fibers[std::size_t(i)].harmonic_dimension(q);
    } catch (const RankJumpError&) {
      out.dims[std::size_t(i)] = -1;
    }
  });
  return out;
}

RankReport rank_report(const SStencil& st, int q, const std::vector<int>& dims) {
  RankReport r;
  r.q = q;
  r.dimensions = dims;
  const int c = dims[std::size_t(st.center_index())];
  for (int i = 0; i < st.size(); ++i) {
    if (dims[std::size_t(i)] != c || c < 0) r.offending.push_back(i);
  }
  r.constant = r.offending.empty();
  r.dimension = r.constant ? c : -1;
  return r;
}

int require_constant_rank(const SStencil& st, int q, const std::vector<int>& dims) {
  const RankReport r = rank_report(st, q, dims);
  if (!r.constant) throw RankJumpError("not locally free here");
  return r.dimension;
}

std::vector<Eigen::Index> choose_nodes(const Eigen::MatrixXcd& u, const FrameOptions& opts, double& condition) {
  const Eigen::Index n = u.rows(), r = u.cols();
  std::mt19937_64 rng(opts.seed);
  std::vector<Eigen::Index> best;
  double best_smin = -1.0, best_cond = 0.0;
  for (int c = 0; c < opts.node_candidates; ++c) {
    std::vector<Eigen::Index> nodes;
    while (Eigen::Index(nodes.size()) < r) {
      const Eigen::Index j = Eigen::Index(rng() % std::uint64_t(n));
      if (std::find(nodes.begin(), nodes.end(), j) == nodes.end()) nodes.push_back(j);
    }
    std::sort(nodes.begin(), nodes.end());
    Eigen::MatrixXcd m(r, r);
    for (Eigen::Index a = 0; a < r; ++a) m.row(a) = u.row(nodes[std::size_t(a)]);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
    const double smin = sv[r - 1];
    if (smin > best_smin) {
      best_smin = smin;
      best_cond = smin > 0.0 ? sv[0] / smin : std::numeric_limits<double>::infinity();
      best = nodes;
    }
  }
  condition = best_cond;
  if (!(best_cond <= opts.max_node_condition)) throw SolverError("evaluation nodes degenerate");
  return best;
}

Eigen::MatrixXcd rows_of(const Eigen::MatrixXcd& u, const std::vector<Eigen::Index>& nodes) {
  Eigen::MatrixXcd m(Eigen::Index(nodes.size()), u.cols());
  for (std::size_t a = 0; a < nodes.size(); ++a) m.row(Eigen::Index(a)) = u.row(nodes[a]);
  return m;
}

}  // namespace

HoloFrame holo_frame_q0(const FamilySpec& spec, const SStencil& stencil, const FrameOptions& opts) {
  StencilFibers sf = stencil_fibers(spec, stencil, 0, opts.hodge);
  const int rank = require_constant_rank(stencil, 0, sf.dims);
  if (rank == 0) throw ConfigError("direct image of degree 0 vanishes for this degree");
  HoloFrame f;
  f.q = 0;
  f.rank = rank;
  f.stencil = stencil;
  f.fibers = std::move(sf.fibers);
  const int c = stencil.center_index();
  const Eigen::MatrixXcd u0 = f.fibers[std::size_t(c)].harmonic_space(0);
  f.nodes = choose_nodes(u0, opts, f.node_condition);
  f.reps.assign(stencil.points.size(), Eigen::MatrixXcd());
  parallel_for(stencil.size(), [&](int i) {
    const FiberComplex& fc = f.fibers[std::size_t(i)];
    const Eigen::MatrixXcd u = fc.from_unitary(fc.harmonic_space(0));
    const Eigen::MatrixXcd m = rows_of(u, f.nodes);
    // u m^{-1}, computed as (m^T \ u^T)^T
    f.reps[std::size_t(i)] = m.transpose().fullPivLu().solve(u.transpose()).transpose();
  });
  return f;
}

Eigen::MatrixXcd serre_pairing(const FiberComplex& dual, const Eigen::MatrixXcd& dual_sections,
                               const FiberComplex& fiber, const Eigen::MatrixXcd& forms) {
  const Eigen::MatrixXcd a = dual.to_unitary(dual_sections);
  const Eigen::MatrixXcd b = fiber.to_unitary(forms);
  Eigen::MatrixXcd out(a.cols(), b.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r) {
    for (Eigen::Index c = 0; c < b.cols(); ++c) out(r, c) = pairwise_sum(a.col(r).cwiseProduct(b.col(c)));
  }
  return out;
}

HoloFrame holo_frame_q1(const FamilySpec& spec, const SStencil& stencil, const FrameOptions& opts) {
  StencilFibers sf = stencil_fibers(spec, stencil, 1, opts.hodge);
  const int rank = require_constant_rank(stencil, 1, sf.dims);
  if (rank == 0) throw ConfigError("direct image of degree 1 vanishes for this degree");
  HoloFrame dual = holo_frame_q0(serre_dual_family(spec), stencil, opts);
  if (dual.rank != rank) throw SolverError("Serre dual rank mismatch");
  HoloFrame f;
  f.q = 1;
  f.rank = rank;
  f.stencil = stencil;
  f.fibers = std::move(sf.fibers);
  f.nodes = dual.nodes;
  f.node_condition = dual.node_condition;
  f.dual_fibers = std::move(dual.fibers);
  f.dual_reps = std::move(dual.reps);
  f.reps.assign(stencil.points.size(), Eigen::MatrixXcd());
  f.pairings.assign(stencil.points.size(), Eigen::MatrixXcd());
  parallel_for(stencil.size(), [&](int i) {
    const std::size_t k = std::size_t(i);
    const FiberComplex& fc = f.fibers[k];
    const Eigen::MatrixXcd eta = fc.from_unitary(fc.harmonic_space(1));
    const Eigen::MatrixXcd p = serre_pairing(f.dual_fibers[k], f.dual_reps[k], fc, eta);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(p).singularValues();
    if (!(sv[sv.size() - 1] > opts.min_pairing_ratio * sv[0])) throw SolverError("Serre pairing degenerate");
    f.pairings[k] = p;
    f.reps[k] = eta * p.fullPivLu().inverse();
  });
  return f;
}

HoloFrame holo_frame(const FamilySpec& spec, const SStencil& stencil, int q, const FrameOptions& opts) {
  if (q == 0) return holo_frame_q0(spec, stencil, opts);
  if (q == 1) return holo_frame_q1(spec, stencil, opts);
  throw ConfigError("q must be 0 or 1");
}

Eigen::MatrixXcd gram(const HoloFrame& frame, int point) {
  const FiberComplex& fc = frame.fibers[std::size_t(point)];
  const Eigen::MatrixXcd& x = frame.reps[std::size_t(point)];
  Eigen::MatrixXcd h(frame.rank, frame.rank);
  for (int r = 0; r < frame.rank; ++r) {
    for (int c = 0; c < frame.rank; ++c) {
      if (c < r) {
        h(r, c) = std::conj(h(c, r));
        continue;
      }
      const Eigen::MatrixXcd a = x.col(r), b = x.col(c);
      h(r, c) = frame.q == 0 ? inner(fc, Section(a), Section(b)) : inner(fc, Form01(a), Form01(b));
    }
    h(r, r) = h(r, r).real();
  }
  return h;
}

GramField gram_field(const HoloFrame& frame) {
  GramField out(frame.reps.size());
  for (int i = 0; i < int(out.size()); ++i) out[std::size_t(i)] = gram(frame, i);
  return out;
}

CurvatureTensor CurvatureTensor::Zero(int rank, int base_dim) {
  CurvatureTensor t;
  t.rank = rank;
  t.base_dim = base_dim;
  t.blocks.assign(std::size_t(base_dim * base_dim), Eigen::MatrixXcd::Zero(rank, rank));
  return t;
}

double CurvatureTensor::norm() const {
  double acc = 0.0;
  for (const auto& b : blocks) acc += b.squaredNorm();
  return std::sqrt(acc);
}

double CurvatureTensor::hermitian_defect() const {
  double out = 0.0;
  for (int k = 0; k < base_dim; ++k) {
    for (int l = 0; l < base_dim; ++l) {
      out = std::max(out, ((*this)(k, l) - (*this)(l, k).adjoint()).cwiseAbs().maxCoeff());
    }
  }
  return out;
}

CurvatureTensor& CurvatureTensor::operator+=(const CurvatureTensor& o) {
  if (o.rank != rank || o.base_dim != base_dim) throw ConfigError("curvature shape mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += o.blocks[i];
  return *this;
}

CurvatureTensor& CurvatureTensor::operator-=(const CurvatureTensor& o) {
  if (o.rank != rank || o.base_dim != base_dim) throw ConfigError("curvature shape mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] -= o.blocks[i];
  return *this;
}

CurvatureTensor& CurvatureTensor::operator*=(Complex a) {
  for (auto& b : blocks) b *= a;
  return *this;
}

CurvatureTensor chern_curvature_fd(const GramField& g, const SStencil& st) {
  const Eigen::MatrixXcd& h0 = g[std::size_t(st.center_index())];
  const int r = int(h0.rows()), m = st.base_dim();
  Eigen::MatrixXcd hinv = h0.llt().solve(Eigen::MatrixXcd::Identity(r, r));
  hinv = 0.5 * (hinv + hinv.adjoint()).eval();
  CurvatureTensor out = CurvatureTensor::Zero(r, m);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      out(k, l) = -fd_d_dbar(st, g, k, l) + fd_d(st, g, k) * hinv * fd_dbar(st, g, l);
    }
  }
  return out;
}

Eigen::MatrixXcd orthonormalizing_transform(const Eigen::MatrixXcd& h0) {
  const Eigen::LLT<Eigen::MatrixXcd> llt(h0);
  if (llt.info() != Eigen::Success) throw SolverError("Gram matrix not positive definite");
  const Eigen::MatrixXcd l = llt.matrixL();
  return l.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(h0.rows(), h0.cols()));
}

CurvatureTensor orthonormal_components(const CurvatureTensor& r, const Eigen::MatrixXcd& h0) {
  const Eigen::LLT<Eigen::MatrixXcd> llt(h0);
  if (llt.info() != Eigen::Success) throw SolverError("Gram matrix not positive definite");
  const Eigen::MatrixXcd l = llt.matrixL();
  const Eigen::MatrixXcd linv = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXcd::Identity(h0.rows(), h0.cols()));
  CurvatureTensor out = r;
  for (auto& b : out.blocks) b = linv * b * linv.adjoint();
  return out;
}

GramField normal_gauge(const GramField& g, const SStencil& st) {
  const Eigen::MatrixXcd& h0 = g[std::size_t(st.center_index())];
  const int r = int(h0.rows()), m = st.base_dim();
  const Eigen::MatrixXcd hinv = h0.llt().solve(Eigen::MatrixXcd::Identity(r, r));
  std::vector<Eigen::MatrixXcd> b(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) b[std::size_t(k)] = (fd_d(st, g, k) * hinv).transpose();
  GramField out(g.size());
  for (int i = 0; i < st.size(); ++i) {
    Eigen::MatrixXcd gi = Eigen::MatrixXcd::Identity(r, r);
    for (int k = 0; k < m; ++k) gi -= (st.points[std::size_t(i)][k] - st.center[k]) * b[std::size_t(k)];
    out[std::size_t(i)] = gi.transpose() * g[std::size_t(i)] * gi.conjugate();
  }
  return out;
}

RankReport rank_constancy_check(const FamilySpec& spec, const SStencil& stencil, int q, const HodgeOptions& opts) {
  if (q != 0 && q != 1) throw ConfigError("q must be 0 or 1");
  return rank_report(stencil, q, stencil_fibers(spec, stencil, q, opts).dims);
}

template <int Q>
HarmonizeResult<Q> harmonize_family(const FamilySpec& spec, const SStencil& stencil,
                                    const std::vector<BundleForm<Q>>& closed, const FrameOptions& opts) {
  if (int(closed.size()) != stencil.size()) throw ConfigError("one form per stencil point required");
  StencilFibers sf = stencil_fibers(spec, stencil, Q, opts.hodge);
  require_constant_rank(stencil, Q, sf.dims);
  std::optional<HoloFrame> dual;
  if (Q == 1 && sf.dims[0] > 0) dual = holo_frame_q0(serre_dual_family(spec), stencil, opts);

  HarmonizeResult<Q> out;
  out.harmonic.assign(closed.size(), BundleForm<Q>());
  std::vector<double> class_defect(closed.size(), 0.0), pairing_defect(closed.size(), 0.0);
  parallel_for(stencil.size(), [&](int i) {
    const std::size_t k = std::size_t(i);
    const FiberComplex& fc = sf.fibers[k];
    const BundleForm<Q>& x = closed[k];
    const double scale = std::max(norm(fc, x), 1e-300);
    if constexpr (Q == 0) {
      if (norm(fc, dbar(fc, x)) > 1e-8 * scale * fc.grid().n_side) {
        throw ConfigError("closedness violation: input section is not holomorphic");
      }
    }
    out.harmonic[k] = harmonic_projection(fc, x);
    class_defect[k] = norm(fc, harmonic_projection(fc, x - out.harmonic[k])) / scale;
    if (dual) {
      const Eigen::MatrixXcd a = serre_pairing(dual->fibers[k], dual->reps[k], fc, x.values);
      const Eigen::MatrixXcd b = serre_pairing(dual->fibers[k], dual->reps[k], fc, out.harmonic[k].values);
      pairing_defect[k] = (a - b).cwiseAbs().maxCoeff() / std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    }
  });
  out.class_defect = *std::max_element(class_defect.begin(), class_defect.end());
  out.pairing_defect = *std::max_element(pairing_defect.begin(), pairing_defect.end());
  return out;
}
template HarmonizeResult<0> harmonize_family<0>(const FamilySpec&, const SStencil&, const std::vector<Section>&,
                                                const FrameOptions&);
template HarmonizeResult<1> harmonize_family<1>(const FamilySpec&, const SStencil&, const std::vector<Form01>&,
                                                const FrameOptions&);

double holomorphy_residual(const HoloFrame& frame) {
  const int c = frame.stencil.center_index();
  const FiberComplex& fc = frame.fibers[std::size_t(c)];
  const Eigen::MatrixXcd& x0 = frame.reps[std::size_t(c)];
  double out = 0.0;
  for (int k = 0; k < frame.stencil.base_dim(); ++k) {
    Eigen::MatrixXcd d = fd_dbar(frame.stencil, frame.reps, k);
    if (frame.q == 1) d = fc.from_unitary(fc.apply_harmonic(1, fc.to_unitary(d)));
    for (int r = 0; r < frame.rank; ++r) {
      const double num = fc.to_unitary(d.col(r)).norm();
      const double den = fc.to_unitary(x0.col(r)).norm();
      out = std::max(out, num / den);
    }
  }
  return out;
}

double normalization_defect(const HoloFrame& frame) {
  double out = 0.0;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(frame.rank, frame.rank);
  for (int i = 0; i < frame.stencil.size(); ++i) {
    const std::size_t k = std::size_t(i);
    const Eigen::MatrixXcd m =
        frame.q == 0 ? rows_of(frame.reps[k], frame.nodes)
                     : serre_pairing(frame.dual_fibers[k], frame.dual_reps[k], frame.fibers[k], frame.reps[k]);
    out = std::max(out, (m - id).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace dolhodge
