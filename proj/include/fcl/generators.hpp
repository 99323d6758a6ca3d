#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fcl/complexes.hpp"

namespace fcl {

/** Seeded source of random matrices for property suites and demos. */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal() { return normal_(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = cplx(normal(), normal()) / std::sqrt(2.0);
    return m;
  }

  Matrix unitary(Index n) {
    if (n == 0) return Matrix(0, 0);
    Eigen::HouseholderQR<Matrix> qr(gaussian(n, n));
    Matrix q = qr.householderQ();
    // fix the phase of each column so the distribution does not depend on QR sign conventions
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < n; ++i) {
      double a = std::abs(r(i, i));
      if (a > 0) q.col(i) *= r(i, i) / a;
    }
    return q;
  }

  /** Invertible matrix with singular values in [1/cond, 1]. */
  Matrix invertible(Index n, double cond = 4.0) {
    Matrix u = unitary(n), v = unitary(n);
    Eigen::VectorXd s(n);
    for (Index i = 0; i < n; ++i) s(i) = uniform(1.0 / cond, 1.0);
    return u * s.cast<cplx>().asDiagonal() * v.adjoint();
  }

  Matrix rank_matrix(Index rows, Index cols, Index rank) { return gaussian(rows, rank) * gaussian(rank, cols); }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
};

/** Blueprint of a complex with prescribed ranks and cohomology. */
struct ComplexBlueprint {
  std::vector<Index> ranks;     // rank A_j, j = 0..K-1
  std::vector<Index> harmonic;  // cohomology dims, j = 0..K

  std::vector<Index> spaces() const {
    std::vector<Index> n;
    for (std::size_t j = 0; j < harmonic.size(); ++j) {
      Index in = j > 0 ? ranks[j - 1] : 0;
      Index out = j < ranks.size() ? ranks[j] : 0;
      n.push_back(in + out + harmonic[j]);
    }
    return n;
  }
};

/**
 * Complex with the given blueprint in a random basis. Each space is ordered as
 * [image of the previous map | coimage of the next map | harmonic] before the
 * basis change; the nonzero singular values are drawn from [lo, hi].
 */
inline FiniteComplex complex_from_blueprint(Rng& rng, const ComplexBlueprint& bp, bool unitary_basis = true,
                                            double lo = 0.5, double hi = 2.0) {
  std::vector<Index> n = bp.spaces();
  std::vector<Matrix> basis;
  for (Index d : n) basis.push_back(unitary_basis ? rng.unitary(d) : rng.invertible(d));
  std::vector<Matrix> diffs;
  for (std::size_t j = 0; j + 1 < n.size(); ++j) {
    Matrix e = Matrix::Zero(n[j + 1], n[j]);
    Index in_j = j > 0 ? bp.ranks[j - 1] : 0;
    for (Index k = 0; k < bp.ranks[j]; ++k) e(k, in_j + k) = rng.uniform(lo, hi);
    Matrix inv = unitary_basis ? Matrix(basis[j].adjoint()) : Matrix(basis[j].inverse());
    diffs.push_back(basis[j + 1] * e * inv);
  }
  return FiniteComplex(n, std::move(diffs));
}

/** Random blueprint with at most max_dim per space and the given number of spaces. */
inline ComplexBlueprint random_blueprint(Rng& rng, int spaces, Index max_dim, bool exact = false) {
  ComplexBlueprint bp;
  bp.harmonic.assign(static_cast<std::size_t>(spaces), 0);
  Index prev = 0;
  for (int j = 0; j + 1 < spaces; ++j) {
    Index room = max_dim - prev;
    Index r = room > 0 ? rng.uniform_int(0, static_cast<int>(std::min<Index>(room, max_dim))) : 0;
    bp.ranks.push_back(r);
    prev = r;
  }
  if (!exact) {
    for (int j = 0; j < spaces; ++j) {
      Index used = (j > 0 ? bp.ranks[j - 1] : 0) + (j + 1 < spaces ? bp.ranks[j] : 0);
      Index room = max_dim - used;
      bp.harmonic[j] = room > 0 ? rng.uniform_int(0, static_cast<int>(std::min<Index>(room, 2))) : 0;
    }
  }
  return bp;
}

inline FiniteComplex random_complex(Rng& rng, int spaces, Index max_dim) {
  return complex_from_blueprint(rng, random_blueprint(rng, spaces, max_dim));
}

}  // namespace fcl
