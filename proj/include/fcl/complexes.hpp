#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fcl/numlin.hpp"

namespace fcl {

constexpr double kCompositionTol = 1e-10;

/**
 * Finite complex 0 -> C^{n_0} -> ... -> C^{n_{K}} -> 0.
 * differentials[j] maps position j to position j+1, so there is one fewer
 * differential than spaces.
 */
struct FiniteComplex {
  std::vector<Index> spaces;
  std::vector<Matrix> differentials;
  // Norm of the operators this complex was compressed from, if any. Rank decisions
  // never use a smaller reference, so differentials that are pure round-off count as zero.
  double reference_norm = 0.0;

  FiniteComplex() = default;

  FiniteComplex(std::vector<Index> dims, std::vector<Matrix> diffs)
      : spaces(std::move(dims)), differentials(std::move(diffs)) {
    check_shapes();
  }

  /** Builds the complex from chainable differentials, inferring the spaces. */
  static FiniteComplex from_differentials(std::vector<Matrix> diffs) {
    if (diffs.empty()) throw Error("shape", "a complex needs at least one differential");
    std::vector<Index> dims;
    dims.push_back(diffs.front().cols());
    for (const Matrix& a : diffs) dims.push_back(a.rows());
    return FiniteComplex(std::move(dims), std::move(diffs));
  }

  double scale() const {
    double s = reference_norm;
    for (const Matrix& a : differentials) s = std::max(s, opnorm(a));
    return s;
  }

  static FiniteComplex zero(std::vector<Index> dims) {
    std::vector<Matrix> diffs;
    for (std::size_t j = 0; j + 1 < dims.size(); ++j) diffs.push_back(Matrix::Zero(dims[j + 1], dims[j]));
    return FiniteComplex(std::move(dims), std::move(diffs));
  }

  int length() const { return static_cast<int>(spaces.size()); }

  Index dim(int j) const {
    if (j < 0 || j >= length()) return 0;
    return spaces[static_cast<std::size_t>(j)];
  }

  /** A_j, with zero maps outside the stored range. */
  Matrix d(int j) const {
    if (j < 0 || j >= static_cast<int>(differentials.size())) return Matrix::Zero(dim(j + 1), dim(j));
    return differentials[static_cast<std::size_t>(j)];
  }

  void check_shapes() const {
    if (spaces.empty()) throw Error("shape", "a complex needs at least one space");
    if (differentials.size() + 1 != spaces.size())
      throw Error("shape", "expected " + std::to_string(spaces.size() - 1) + " differentials, got " +
                               std::to_string(differentials.size()));
    for (std::size_t j = 0; j < differentials.size(); ++j) {
      const Matrix& a = differentials[j];
      if (a.rows() != spaces[j + 1] || a.cols() != spaces[j])
        throw Error("shape",
                    "differential " + std::to_string(j) + " is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + ", expected " + std::to_string(spaces[j + 1]) + "x" +
                        std::to_string(spaces[j]),
                    static_cast<int>(j));
      require_finite(a, "FiniteComplex");
    }
  }
};

struct ValidationReport {
  std::vector<double> relative_norms;  // entry j: ||A_{j+1}A_j|| / (1 + ||A_{j+1}|| ||A_j||)
  double max_relative_norm = 0.0;
  bool ok = true;
};

inline double composition_defect(const Matrix& next, const Matrix& prev) {
  if (next.size() == 0 || prev.size() == 0) return 0.0;
  return opnorm(next * prev) / (1.0 + opnorm(next) * opnorm(prev));
}

inline ValidationReport validate(const FiniteComplex& c, double tol = kCompositionTol) {
  c.check_shapes();
  ValidationReport r;
  for (int j = 0; j + 1 < static_cast<int>(c.differentials.size()); ++j) {
    double v = composition_defect(c.d(j + 1), c.d(j));
    r.relative_norms.push_back(v);
    r.max_relative_norm = std::max(r.max_relative_norm, v);
  }
  r.ok = r.max_relative_norm <= tol;
  return r;
}

inline void require_complex(const FiniteComplex& c, const char* who) {
  ValidationReport v = validate(c);
  if (!v.ok)
    throw Error("not-a-complex", std::string(who) + ": composition defect " + std::to_string(v.max_relative_norm));
}

struct CohomologyReport {
  std::vector<Index> dims;
  std::vector<Matrix> harmonic_projectors;
  long index = 0;
  bool marginal = false;
  std::vector<double> thresholds;  // threshold used by the harmonic rank decision per position
};

inline long euler_index(const std::vector<Index>& dims) {
  long s = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) s += (j % 2 == 0 ? 1 : -1) * static_cast<long>(dims[j]);
  return s;
}

/**
 * Cohomology via the harmonic space ker A_j ∩ ker A_{j-1}^* (the kernel of the
 * Laplacian, read off from its square-root factor [A_j; A_{j-1}^*]) and, independently,
 * via dim ker A_j - rank A_{j-1}. The two counts must agree.
 */
inline CohomologyReport cohomology(const FiniteComplex& c, double tol = kDefaultTol) {
  require_complex(c, "cohomology");
  CohomologyReport rep;
  const int len = c.length();
  const double ref = c.scale();
  std::vector<RankDecision> ranks;
  for (int j = 0; j < len; ++j) ranks.push_back(rank_tol(c.d(j), tol, ref));
  for (int j = 0; j < len; ++j) {
    const Matrix stacked = vstack(c.d(j), c.d(j - 1).adjoint());
    detail::Svd s = detail::full_svd(stacked);
    RankDecision hd = detail::decide(s.s, stacked.rows(), stacked.cols(), tol, ref);
    const Index harmonic = c.dim(j) - hd.rank;
    const Index nullity = c.dim(j) - ranks[j].rank - (j > 0 ? ranks[j - 1].rank : 0);
    rep.marginal = rep.marginal || hd.marginal || ranks[j].marginal;
    if (harmonic != nullity)
      throw Error("cohomology-mismatch",
                  "position " + std::to_string(j) + ": harmonic dimension " + std::to_string(harmonic) +
                      " vs rank-nullity " + std::to_string(nullity),
                  j);
    Matrix k = s.v.rightCols(harmonic);
    rep.dims.push_back(harmonic);
    rep.harmonic_projectors.push_back(k * k.adjoint());
    rep.thresholds.push_back(hd.threshold_used);
  }
  rep.index = euler_index(rep.dims);
  return rep;
}

inline std::vector<Matrix> laplacians(const FiniteComplex& c) {
  std::vector<Matrix> out;
  for (int j = 0; j < c.length(); ++j) {
    Matrix prev = c.d(j - 1);
    Matrix next = c.d(j);
    out.push_back(prev * prev.adjoint() + next.adjoint() * next);
  }
  return out;
}

struct Parametrix {
  std::vector<Matrix> operators;   // B_j : position j+1 -> position j
  std::vector<Matrix> remainders;  // 1 - A_{j-1}B_{j-1} - B_jA_j
};

inline Matrix parametrix_op(const Parametrix& p, const FiniteComplex& c, int j) {
  if (j < 0 || j >= static_cast<int>(p.operators.size())) return Matrix::Zero(c.dim(j), c.dim(j + 1));
  return p.operators[static_cast<std::size_t>(j)];
}

inline std::vector<Matrix> parametrix_remainders(const FiniteComplex& c, const std::vector<Matrix>& b) {
  Parametrix p{b, {}};
  std::vector<Matrix> out;
  for (int j = 0; j < c.length(); ++j) {
    Matrix r = Matrix::Identity(c.dim(j), c.dim(j));
    r -= c.d(j - 1) * parametrix_op(p, c, j - 1);
    r -= parametrix_op(p, c, j) * c.d(j);
    out.push_back(std::move(r));
  }
  return out;
}

inline Parametrix hodge_parametrix(const FiniteComplex& c, double tol = kDefaultTol) {
  require_complex(c, "hodge_parametrix");
  std::vector<Matrix> lap = laplacians(c);
  Parametrix p;
  for (int j = 0; j + 1 < c.length(); ++j)
    p.operators.push_back(pinv(lap[static_cast<std::size_t>(j)], tol) * c.d(j).adjoint());
  p.remainders = parametrix_remainders(c, p.operators);
  return p;
}

struct QuasiLiftResult {
  FiniteComplex complex;
  std::vector<double> corrections;  // ||Ã_j - A_j||_2 per differential
};

/**
 * Corrects a sequence with small compositions into a complex, top-down: the last
 * map is kept, and each lower map is composed with the orthogonal projection onto
 * the kernel of the already-corrected map above it. Maps whose composition is
 * already below keep_tol are left untouched, so complexes pass through bit-identically.
 */
inline QuasiLiftResult lift_quasicomplex(const std::vector<Matrix>& ops, double keep_tol = 1e-13,
                                         double tol = kDefaultTol) {
  FiniteComplex input = FiniteComplex::from_differentials(ops);
  const int n = static_cast<int>(ops.size());
  std::vector<Matrix> out(ops);
  for (int j = n - 1; j >= 1; --j) {
    const Matrix& above = out[static_cast<std::size_t>(j)];
    const Matrix& below = ops[static_cast<std::size_t>(j - 1)];
    if (composition_defect(above, below) <= keep_tol) continue;
    Matrix top = j + 1 < n ? out[static_cast<std::size_t>(j + 1)] : Matrix::Zero(0, above.rows());
    Matrix lap = above * above.adjoint() + top.adjoint() * top;
    RankDecision rd = rank_tol(lap, tol);
    Matrix proj = Matrix::Identity(above.cols(), above.cols()) - above.adjoint() * pinv(lap, tol) * above;
    double leak = opnorm(above * proj) / (1.0 + opnorm(above));
    if (rd.marginal || leak > kCompositionTol)
      throw Error("laplacian-singular",
                  "Laplacian at position " + std::to_string(j + 1) + " is rank-deficient beyond its harmonic space",
                  j + 1);
    out[static_cast<std::size_t>(j - 1)] = proj * below;
  }
  QuasiLiftResult res;
  for (int j = 0; j < n; ++j)
    res.corrections.push_back(opnorm(out[static_cast<std::size_t>(j)] - ops[static_cast<std::size_t>(j)]));
  res.complex = FiniteComplex(input.spaces, std::move(out));
  return res;
}

/** Unitary (or invertible) change of basis in every space: A_j -> S_{j+1} A_j S_j^{-1}. */
inline FiniteComplex transport(const FiniteComplex& c, const std::vector<Matrix>& s) {
  std::vector<Matrix> diffs;
  for (int j = 0; j + 1 < c.length(); ++j)
    diffs.push_back(s[static_cast<std::size_t>(j + 1)] * c.d(j) * s[static_cast<std::size_t>(j)].inverse());
  return FiniteComplex(c.spaces, std::move(diffs));
}

// ---- discrete de Rham models -------------------------------------------------

struct CellComplexCounts {
  Index vertices = 0, edges = 0, faces = 0;
};

namespace detail {

inline FiniteComplex cochain_from_boundaries(const Matrix& d1, const Matrix& d2) {
  // coboundaries are transposes of the boundary maps
  return FiniteComplex({d1.rows(), d1.cols(), d2.cols()}, {d1.transpose(), d2.transpose()});
}

}  // namespace detail

/** Octahedral triangulation of the 2-sphere. */
inline FiniteComplex octahedron_cochains() {
  // vertices: 0:+x 1:-x 2:+y 3:-y 4:+z 5:-z
  std::vector<std::array<int, 2>> edges;
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      if (a / 2 != b / 2) edges.push_back({a, b});
  std::vector<std::array<int, 3>> faces;
  for (int x : {0, 1})
    for (int y : {2, 3})
      for (int z : {4, 5}) faces.push_back({x, y, z});
  auto edge_index = [&](int a, int b) {
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (edges[e][0] == a && edges[e][1] == b) return static_cast<Index>(e);
    throw Error("internal", "missing edge");
  };
  Matrix d1 = Matrix::Zero(6, static_cast<Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    d1(edges[e][0], static_cast<Index>(e)) = -1.0;
    d1(edges[e][1], static_cast<Index>(e)) = 1.0;
  }
  Matrix d2 = Matrix::Zero(static_cast<Index>(edges.size()), static_cast<Index>(faces.size()));
  for (std::size_t f = 0; f < faces.size(); ++f) {
    auto [a, b, c] = faces[f];
    const Index col = static_cast<Index>(f);
    d2(edge_index(b, c), col) += 1.0;
    d2(edge_index(a, c), col) -= 1.0;
    d2(edge_index(a, b), col) += 1.0;
  }
  return detail::cochain_from_boundaries(d1, d2);
}

/** Square-cell decomposition of the torus with an m x n grid of vertices. */
inline FiniteComplex torus_grid_cochains(int m = 4, int n = 4) {
  if (m < 3 || n < 3) throw Error("config", "torus grid needs at least 3x3 cells");
  auto vid = [&](int i, int j) { return static_cast<Index>(((i % m + m) % m) * n + ((j % n + n) % n)); };
  auto hid = [&](int i, int j) { return vid(i, j); };
  auto vert = [&](int i, int j) { return static_cast<Index>(m * n) + vid(i, j); };
  const Index nv = m * n, ne = 2 * m * n, nf = m * n;
  Matrix d1 = Matrix::Zero(nv, ne);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      d1(vid(i, j), hid(i, j)) -= 1.0;
      d1(vid(i + 1, j), hid(i, j)) += 1.0;
      d1(vid(i, j), vert(i, j)) -= 1.0;
      d1(vid(i, j + 1), vert(i, j)) += 1.0;
    }
  Matrix d2 = Matrix::Zero(ne, nf);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const Index f = vid(i, j);
      d2(hid(i, j), f) += 1.0;
      d2(vert(i + 1, j), f) += 1.0;
      d2(hid(i, j + 1), f) -= 1.0;
      d2(vert(i, j), f) -= 1.0;
    }
  return detail::cochain_from_boundaries(d1, d2);
}

inline FiniteComplex derham_demo(const std::string& surface) {
  if (surface == "sphere-octahedron" || surface == "sphere") return octahedron_cochains();
  if (surface == "torus-grid" || surface == "torus") return torus_grid_cochains(4, 4);
  throw Error("config", "unknown surface '" + surface + "'");
}

// ---- families ------------------------------------------------------------------

struct GridPoint {
  std::string label;
  std::vector<double> coords;
};

struct FamilyComplex {
  std::vector<GridPoint> points;
  std::vector<FiniteComplex> fibers;

  FamilyComplex() = default;
  FamilyComplex(std::vector<GridPoint> pts, std::vector<FiniteComplex> fs)
      : points(std::move(pts)), fibers(std::move(fs)) {
    check();
  }

  std::size_t size() const { return fibers.size(); }

  const std::vector<Index>& spaces() const { return fibers.front().spaces; }

  void check() const {
    if (points.size() != fibers.size()) throw Error("shape", "family needs one fiber per grid point");
    if (fibers.empty()) throw Error("shape", "family has no fibers");
    for (std::size_t i = 1; i < fibers.size(); ++i)
      if (fibers[i].spaces != fibers.front().spaces)
        throw Error("shape", "fiber " + std::to_string(i) + " has different graded dimensions",
                    static_cast<int>(i));
  }
};

}  // namespace fcl
