#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fcl/complexes.hpp"
#include "fcl/generators.hpp"

namespace fcl {

/** Complex whose differentials are compressed between ranges of idempotents P_j (not necessarily Hermitian). */
struct ProjectedComplex {
  FiniteComplex ambient;
  std::vector<Matrix> projections;

  int length() const { return ambient.length(); }

  Matrix p(int j) const {
    if (j < 0 || j >= length()) return Matrix::Zero(0, 0);
    return projections[static_cast<std::size_t>(j)];
  }
};

struct ProjectedCheck {
  double idempotent = 0.0, left_compression = 0.0, right_compression = 0.0, composition = 0.0;
  bool ok(double tol = kCompositionTol) const {
    return idempotent <= tol && left_compression <= tol && right_compression <= tol && composition <= tol;
  }
};

inline ProjectedCheck check_projected(const ProjectedComplex& pc) {
  pc.ambient.check_shapes();
  if (static_cast<int>(pc.projections.size()) != pc.length())
    throw Error("shape", "need one projection per space");
  ProjectedCheck c;
  for (int j = 0; j < pc.length(); ++j) {
    const Matrix& p = pc.projections[static_cast<std::size_t>(j)];
    if (p.rows() != pc.ambient.dim(j) || p.cols() != pc.ambient.dim(j))
      throw Error("shape", "projection " + std::to_string(j) + " has the wrong shape", j);
    require_finite(p, "ProjectedComplex");
    if (p.size() > 0) c.idempotent = std::max(c.idempotent, opnorm(p * p - p) / (1.0 + opnorm(p)));
  }
  for (int j = 0; j + 1 < pc.length(); ++j) {
    Matrix a = pc.ambient.d(j);
    if (a.size() == 0) continue;
    Matrix pn = pc.p(j + 1), pj = pc.p(j);
    double scale = 1.0 + opnorm(a) * (1.0 + opnorm(pn) + opnorm(pj));
    c.left_compression = std::max(c.left_compression, opnorm(a - pn * a) / scale);
    c.right_compression = std::max(c.right_compression, opnorm(a - a * pj) / scale);
  }
  c.composition = validate(pc.ambient).max_relative_norm;
  return c;
}

inline void require_projected(const ProjectedComplex& pc, const char* who) {
  ProjectedCheck c = check_projected(pc);
  if (!c.ok())
    throw Error("not-projected", std::string(who) + ": idempotent " + std::to_string(c.idempotent) + ", compression " +
                                     std::to_string(std::max(c.left_compression, c.right_compression)) +
                                     ", composition " + std::to_string(c.composition));
}

/** P = V W with V an orthonormal basis of im P and W V = 1. */
struct RangeFactor {
  Matrix v, w;
};

inline RangeFactor range_factor(const Matrix& p, double tol = kDefaultTol) {
  RangeFactor f;
  f.v = range_basis(p, tol);
  f.w = f.v.adjoint() * p;
  return f;
}

/** The maps A_j : im P_j -> im P_{j+1} written in range bases. */
inline FiniteComplex restricted_complex(const ProjectedComplex& pc, double tol = kDefaultTol) {
  std::vector<RangeFactor> f;
  std::vector<Index> dims;
  for (int j = 0; j < pc.length(); ++j) {
    f.push_back(range_factor(pc.p(j), tol));
    dims.push_back(f.back().v.cols());
  }
  std::vector<Matrix> diffs;
  for (int j = 0; j + 1 < pc.length(); ++j) diffs.push_back(f[j + 1].w * pc.ambient.d(j) * f[j].v);
  FiniteComplex out(std::move(dims), std::move(diffs));
  out.reference_norm = pc.ambient.scale();
  return out;
}

inline CohomologyReport projected_cohomology(const ProjectedComplex& pc, double tol = kDefaultTol) {
  require_projected(pc, "projected_cohomology");
  return cohomology(restricted_complex(pc, tol), tol);
}

/**
 * Lift of a projected complex. Position j carries H_j ⊕ H_{j-1} ⊕ ... ⊕ H_0 and the
 * differential is diag(A_j, 0, ...) plus the subdiagonal (1-P_j, P_{j-1}, 1-P_{j-2}, ...).
 * The finite complex is continued by zero spaces; the lift keeps one extra trailing
 * position so that every differential leaving positions 0..K-1 is present.
 * Only positions 0..K-1 (K = number of ambient spaces) carry meaningful cohomology.
 */
struct LiftedComplex {
  FiniteComplex lift;
  std::vector<std::vector<Index>> block_offsets;  // block_offsets[j][m]: offset of H_m inside position j
  int meaningful_positions = 0;
};

inline LiftedComplex lift(const ProjectedComplex& pc) {
  require_projected(pc, "lift");
  const int k = pc.length();
  LiftedComplex out;
  out.meaningful_positions = k;
  std::vector<Index> dims;
  for (int j = 0; j <= k; ++j) {
    std::vector<Index> off(static_cast<std::size_t>(j + 1), 0);
    Index acc = 0;
    for (int m = j; m >= 0; --m) {
      off[static_cast<std::size_t>(m)] = acc;
      acc += pc.ambient.dim(m);
    }
    out.block_offsets.push_back(off);
    dims.push_back(acc);
  }
  std::vector<Matrix> diffs;
  for (int j = 0; j < k; ++j) {
    Matrix a = Matrix::Zero(dims[j + 1], dims[j]);
    const auto& src = out.block_offsets[j];
    const auto& dst = out.block_offsets[j + 1];
    a.block(dst[j + 1], src[j], pc.ambient.dim(j + 1), pc.ambient.dim(j)) = pc.ambient.d(j);
    for (int m = j; m >= 0; --m) {
      const Index n = pc.ambient.dim(m);
      Matrix p = pc.p(m);
      Matrix coef = ((j - m) % 2 == 0) ? Matrix(Matrix::Identity(n, n) - p) : p;
      a.block(dst[m], src[m], n, n) = coef;
    }
    diffs.push_back(std::move(a));
  }
  out.lift = FiniteComplex(std::move(dims), std::move(diffs));
  return out;
}

/** Cohomology dimensions of the lift at the meaningful positions. */
inline CohomologyReport lift_cohomology(const LiftedComplex& lc, double tol = kDefaultTol) {
  CohomologyReport full = cohomology(lc.lift, tol);
  CohomologyReport r;
  r.marginal = full.marginal;
  for (int j = 0; j < lc.meaningful_positions; ++j) {
    r.dims.push_back(full.dims[static_cast<std::size_t>(j)]);
    r.harmonic_projectors.push_back(full.harmonic_projectors[static_cast<std::size_t>(j)]);
    r.thresholds.push_back(full.thresholds[static_cast<std::size_t>(j)]);
  }
  r.index = euler_index(r.dims);
  return r;
}

struct ProjectedParametrix {
  std::vector<Matrix> operators;   // B_j : H_{j+1} -> H_j
  std::vector<Matrix> remainders;  // R_j = P_j - A_{j-1}B_{j-1} - B_jA_j
  std::vector<Index> remainder_ranks;
  std::vector<double> composition_norms;  // ||B_j B_{j+1}||, reported only
};

/** B_j = P_j · (upper-left block of the lift parametrix at position j) · P_{j+1}. */
inline ProjectedParametrix extract_parametrix(const ProjectedComplex& pc, const LiftedComplex& lc,
                                              const Parametrix& lift_param, double rank_tol_abs = 1e-8) {
  ProjectedParametrix out;
  const int k = pc.length();
  for (int j = 0; j + 1 < k; ++j) {
    const Matrix& big = lift_param.operators[static_cast<std::size_t>(j)];
    Matrix blk = big.block(lc.block_offsets[j][j], lc.block_offsets[j + 1][j + 1], pc.ambient.dim(j),
                           pc.ambient.dim(j + 1));
    out.operators.push_back(pc.p(j) * blk * pc.p(j + 1));
  }
  auto b = [&](int j) {
    if (j < 0 || j + 1 >= k) return Matrix(Matrix::Zero(pc.ambient.dim(j), pc.ambient.dim(j + 1)));
    return out.operators[static_cast<std::size_t>(j)];
  };
  for (int j = 0; j < k; ++j) {
    Matrix r = pc.p(j) - pc.ambient.d(j - 1) * b(j - 1) - b(j) * pc.ambient.d(j);
    // absolute threshold: an exact remainder is zero, so a relative one would count noise
    Index rank = 0;
    if (r.size() > 0) {
      Eigen::JacobiSVD<Matrix> svd(r);
      const double thr = rank_tol_abs * std::max(1.0, opnorm(pc.p(j)));
      for (Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > thr;
    }
    out.remainder_ranks.push_back(rank);
    out.remainders.push_back(std::move(r));
  }
  for (int j = 0; j + 2 < k; ++j) out.composition_norms.push_back(opnorm(b(j) * b(j + 1)));
  return out;
}

struct UpperTriangularLayout {
  std::vector<Index> leading_dims;  // dimension of the block carrying the preserved diagonal A_j
};

struct ProjectedLiftResult {
  ProjectedComplex complex;
  std::vector<double> corrections;
};

namespace detail {

inline Matrix orth_kernel_projector_via_laplacian(const Matrix& above, const Matrix& top, int position, double tol) {
  Matrix lap = above * above.adjoint() + top.adjoint() * top;
  RankDecision rd = rank_tol(lap, tol);
  Matrix proj = Matrix::Identity(above.cols(), above.cols()) - above.adjoint() * pinv(lap, tol) * above;
  double leak = above.size() == 0 ? 0.0 : opnorm(above * proj) / (1.0 + opnorm(above));
  if (rd.marginal || leak > kCompositionTol)
    throw Error("laplacian-singular",
                "Laplacian at position " + std::to_string(position) + " is rank-deficient beyond its harmonic space",
                position);
  return proj;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double offdiag_norm(const Matrix& m, Index r0, Index c0) { return max_abs(m.block(r0, 0, m.rows() - r0, c0)); }

}  // namespace detail

/**
 * Corrects a projected quasicomplex into a projected complex. The work happens in
 * range bases of the idempotents, top-down as in lift_quasicomplex. With a layout,
 * operators of the form (A_j K_j; 0 Q_j) keep their leading diagonal blocks bit for bit
 * and only the second block column is projected.
 */
inline ProjectedLiftResult lift_quasicomplex_projected(const std::vector<Matrix>& ops,
                                                       const std::vector<Matrix>& projections,
                                                       const std::optional<UpperTriangularLayout>& layout = std::nullopt,
                                                       double keep_tol = 1e-13, double tol = kDefaultTol) {
  FiniteComplex shape = FiniteComplex::from_differentials(ops);
  const int len = shape.length();
  if (static_cast<int>(projections.size()) != len) throw Error("shape", "need one projection per space");
  if (layout && static_cast<int>(layout->leading_dims.size()) != len)
    throw Error("shape", "layout needs one leading dimension per space");

  // range factors, blockwise when a layout is given
  std::vector<RangeFactor> f;
  std::vector<Index> lead_rank;  // rank of the leading block of each projection
  for (int j = 0; j < len; ++j) {
    const Matrix& p = projections[static_cast<std::size_t>(j)];
    if (!layout) {
      f.push_back(range_factor(p, tol));
      lead_rank.push_back(0);
      continue;
    }
    const Index e = layout->leading_dims[static_cast<std::size_t>(j)];
    const Index n = p.rows();
    double off = std::max(detail::max_abs(p.block(0, e, e, n - e)), detail::max_abs(p.block(e, 0, n - e, e)));
    if (off > 1e-12 * (1.0 + opnorm(p)))
      throw Error("layout", "projection " + std::to_string(j) + " is not block diagonal", j);
    RangeFactor fe = range_factor(p.topLeftCorner(e, e), tol);
    RangeFactor ff = range_factor(p.bottomRightCorner(n - e, n - e), tol);
    RangeFactor both;
    both.v = Matrix::Zero(n, fe.v.cols() + ff.v.cols());
    both.w = Matrix::Zero(fe.v.cols() + ff.v.cols(), n);
    both.v.block(0, 0, e, fe.v.cols()) = fe.v;
    both.v.block(e, fe.v.cols(), n - e, ff.v.cols()) = ff.v;
    both.w.block(0, 0, fe.v.cols(), e) = fe.w;
    both.w.block(fe.v.cols(), e, ff.v.cols(), n - e) = ff.w;
    f.push_back(both);
    lead_rank.push_back(fe.v.cols());
  }
  if (layout) {
    for (int j = 0; j + 1 < len; ++j) {
      const Matrix& a = ops[static_cast<std::size_t>(j)];
      const Index e_in = layout->leading_dims[j], e_out = layout->leading_dims[j + 1];
      if (detail::offdiag_norm(a, e_out, e_in) > 0.0)
        throw Error("layout", "operator " + std::to_string(j) + " is not block upper-triangular", j);
    }
  }

  std::vector<Matrix> small;
  for (int j = 0; j + 1 < len; ++j) small.push_back(f[j + 1].w * ops[static_cast<std::size_t>(j)] * f[j].v);
  std::vector<Matrix> out(ops);
  std::vector<Matrix> fixed(small);
  const int n = static_cast<int>(ops.size());
  for (int j = n - 1; j >= 1; --j) {
    const Matrix& above = fixed[static_cast<std::size_t>(j)];
    const Matrix& below = small[static_cast<std::size_t>(j - 1)];
    if (composition_defect(above, below) <= keep_tol) continue;
    Matrix top = j + 1 < n ? fixed[static_cast<std::size_t>(j + 1)] : Matrix::Zero(0, above.rows());
    Matrix proj = detail::orth_kernel_projector_via_laplacian(above, top, j + 1, tol);
    Matrix corrected;
    if (!layout) {
      corrected = proj * below;
      out[static_cast<std::size_t>(j - 1)] = f[j].v * corrected * f[j - 1].w;
    } else {
      const Index lc = lead_rank[j - 1];
      corrected = below;
      corrected.rightCols(below.cols() - lc) = proj * below.rightCols(below.cols() - lc);
      Matrix amb = f[j].v * corrected * f[j - 1].w;
      const Index e_in = layout->leading_dims[j - 1], e_out = layout->leading_dims[j];
      amb.topLeftCorner(e_out, e_in) = ops[static_cast<std::size_t>(j - 1)].topLeftCorner(e_out, e_in);
      amb.bottomLeftCorner(amb.rows() - e_out, e_in).setZero();
      out[static_cast<std::size_t>(j - 1)] = amb;
    }
    fixed[static_cast<std::size_t>(j - 1)] = corrected;
  }
  ProjectedLiftResult res;
  for (int j = 0; j < n; ++j)
    res.corrections.push_back(opnorm(out[static_cast<std::size_t>(j)] - ops[static_cast<std::size_t>(j)]));
  res.complex.ambient = FiniteComplex(shape.spaces, std::move(out));
  res.complex.projections = projections;
  return res;
}

// ---- generators -------------------------------------------------------------------

struct ProjectedSample {
  ProjectedComplex pc;
  std::vector<RangeFactor> factors;
  std::vector<Index> expected_dims;  // cohomology of the restricted complex, by construction
};

/** Idempotent S diag(1_r, 0) S^{-1}; Hermitian when S is unitary. */
inline RangeFactor random_idempotent(Rng& rng, Index n, Index r, bool hermitian) {
  Matrix s = hermitian ? rng.unitary(n) : rng.invertible(n, 3.0);
  Matrix sinv = hermitian ? Matrix(s.adjoint()) : Matrix(s.inverse());
  RangeFactor f;
  f.v = s.leftCols(r);
  f.w = sinv.topRows(r);
  return f;
}

inline ProjectedSample random_projected_complex(Rng& rng, int spaces, Index max_dim, bool exact, bool hermitian) {
  Index inner_max = std::max<Index>(1, max_dim - 1);
  ComplexBlueprint bp = random_blueprint(rng, spaces, inner_max, exact);
  FiniteComplex inner = complex_from_blueprint(rng, bp, false);
  ProjectedSample s;
  std::vector<Index> dims;
  for (int j = 0; j < spaces; ++j) {
    Index r = inner.dim(j);
    Index n = r + rng.uniform_int(0, static_cast<int>(max_dim - r));
    dims.push_back(n);
    s.factors.push_back(random_idempotent(rng, n, r, hermitian));
    s.pc.projections.push_back(s.factors.back().v * s.factors.back().w);
  }
  std::vector<Matrix> diffs;
  for (int j = 0; j + 1 < spaces; ++j) diffs.push_back(s.factors[j + 1].v * inner.d(j) * s.factors[j].w);
  s.pc.ambient = FiniteComplex(dims, std::move(diffs));
  s.expected_dims = bp.harmonic;
  return s;
}

}  // namespace fcl
