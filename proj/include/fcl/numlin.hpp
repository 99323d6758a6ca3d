#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fcl {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

constexpr double kDefaultTol = 1e-10;

/** Error with a stable machine-readable code ("laplacian-singular", ...). */
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what, int position = -1)
      : std::runtime_error(code + ": " + what), code_(std::move(code)), position_(position) {}
  const std::string& code() const { return code_; }
  int position() const { return position_; }

 private:
  std::string code_;
  int position_;
};

struct RankDecision {
  Index rank = 0;
  std::vector<double> singular_values;  // nonincreasing
  double threshold_used = 0.0;
  bool marginal = false;
};

inline bool is_finite(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline void require_finite(const Matrix& m, const char* who) {
  if (!is_finite(m)) throw Error("non-finite", std::string(who) + ": matrix has NaN or Inf entries");
}

inline Matrix adjoint(const Matrix& m) { return m.adjoint(); }

inline double opnorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

namespace detail {

struct Svd {
  Matrix u, v;
  Eigen::VectorXd s;
};

// Full SVD with deterministic Jacobi sweeps; handles empty shapes.
inline Svd full_svd(const Matrix& m) {
  Svd out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.u = Matrix::Identity(m.rows(), m.rows());
    out.v = Matrix::Identity(m.cols(), m.cols());
    out.s.resize(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.s = svd.singularValues();
  return out;
}

// reference > 0 replaces sigma_1 when larger, for matrices that may be pure round-off
inline RankDecision decide(const Eigen::VectorXd& s, Index rows, Index cols, double tol_rel, double reference = 0.0) {
  RankDecision d;
  d.singular_values.assign(s.data(), s.data() + s.size());
  const double top = std::max(s.size() ? s(0) : 0.0, reference);
  if (s.size() == 0 || top == 0.0) return d;
  d.threshold_used = tol_rel * top * static_cast<double>(std::max(rows, cols));
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > d.threshold_used) ++d.rank;
    if (s(i) > d.threshold_used / 10.0 && s(i) < d.threshold_used * 10.0) d.marginal = true;
  }
  return d;
}

}  // namespace detail

/**
 * Rank with threshold tol_rel * sigma_1 * max(rows, cols). A positive reference norm
 * stands in for sigma_1 when it is larger, so that a matrix that should vanish (a
 * product of complementary projections, say) is not judged against its own round-off.
 */
inline RankDecision rank_tol(const Matrix& m, double tol_rel = kDefaultTol, double reference = 0.0) {
  require_finite(m, "rank_tol");
  if (m.rows() == 0 || m.cols() == 0) return {};
  // Decompose a canonical orientation so that M and M* give the same decision bit for bit.
  if (m.rows() < m.cols()) {
    Eigen::JacobiSVD<Matrix> svd(m.adjoint());
    return detail::decide(svd.singularValues(), m.rows(), m.cols(), tol_rel, reference);
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  if (m.rows() > m.cols()) return detail::decide(svd.singularValues(), m.rows(), m.cols(), tol_rel, reference);
  Eigen::JacobiSVD<Matrix> svd_adj(m.adjoint());
  Eigen::VectorXd s = 0.5 * (svd.singularValues() + svd_adj.singularValues());
  return detail::decide(s, m.rows(), m.cols(), tol_rel, reference);
}

inline Matrix pinv(const Matrix& m, double tol_rel = kDefaultTol, double reference = 0.0) {
  require_finite(m, "pinv");
  if (m.rows() == 0 || m.cols() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RankDecision d = detail::decide(svd.singularValues(), m.rows(), m.cols(), tol_rel, reference);
  const Index r = d.rank;
  Eigen::VectorXd inv = svd.singularValues().head(r).cwiseInverse();
  return svd.matrixV().leftCols(r) * inv.asDiagonal() * svd.matrixU().leftCols(r).adjoint();
}

/** Orthonormal basis of the column space. */
inline Matrix range_basis(const Matrix& m, double tol_rel = kDefaultTol, double reference = 0.0) {
  require_finite(m, "range_basis");
  detail::Svd s = detail::full_svd(m);
  Index r = detail::decide(s.s, m.rows(), m.cols(), tol_rel, reference).rank;
  return s.u.leftCols(r);
}

/** Orthonormal basis of the null space. */
inline Matrix kernel_basis(const Matrix& m, double tol_rel = kDefaultTol, double reference = 0.0) {
  require_finite(m, "kernel_basis");
  detail::Svd s = detail::full_svd(m);
  Index r = detail::decide(s.s, m.rows(), m.cols(), tol_rel, reference).rank;
  return s.v.rightCols(m.cols() - r);
}

/** Orthonormal basis of the orthogonal complement of the column space. */
inline Matrix cokernel_basis(const Matrix& m, double tol_rel = kDefaultTol, double reference = 0.0) {
  require_finite(m, "cokernel_basis");
  detail::Svd s = detail::full_svd(m);
  Index r = detail::decide(s.s, m.rows(), m.cols(), tol_rel, reference).rank;
  return s.u.rightCols(m.rows() - r);
}

inline Matrix kernel_projector(const Matrix& m, double tol_rel = kDefaultTol, double reference = 0.0) {
  Matrix k = kernel_basis(m, tol_rel, reference);
  return k * k.adjoint();
}

inline Matrix range_projector(const Matrix& m, double tol_rel = kDefaultTol, double reference = 0.0) {
  Matrix b = range_basis(m, tol_rel, reference);
  return b * b.adjoint();
}

/** Gap ||P_U - P_V||_2 between spans of orthonormal column sets. */
inline double subspace_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows()) throw Error("shape", "subspace_distance: ambient dimensions differ");
  if (u.cols() != v.cols()) return 1.0;
  if (u.cols() == 0) return 0.0;
  Matrix diff = u * u.adjoint() - v * v.adjoint();
  return std::clamp(opnorm(diff), 0.0, 1.0);
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error("shape", "hstack: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error("shape", "vstack: column counts differ");
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace fcl
