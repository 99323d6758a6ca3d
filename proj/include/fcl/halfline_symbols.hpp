#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "fcl/circle_algebra.hpp"
#include "fcl/complexes.hpp"
#include "fcl/generators.hpp"
#include "fcl/toeplitz.hpp"

namespace fcl {

namespace detail {

// Runs body(i) for i in [0, count) on the available hardware threads; each index is independent.
template <class Body>
void parallel_for(std::size_t count, Body body) {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/**
 * Orthonormal Laguerre functions l_k(r) = sqrt(2) L_k(2r) e^{-r}, k = 0..N.
 * d/dr l_k = -l_k - 2 sum_{j<k} l_j, so the derivative matrix is exact.
 */
struct LaguerreBasis {
  long n = 0;

  explicit LaguerreBasis(long n_) : n(n_) {
    if (n < 0) throw Error("domain", "Laguerre truncation must be nonnegative");
  }

  Index size() const { return static_cast<Index>(n + 1); }

  Matrix derivative() const {
    Matrix d = Matrix::Zero(size(), size());
    for (Index k = 0; k < size(); ++k) {
      d(k, k) = -1.0;
      for (Index j = 0; j < k; ++j) d(j, k) = -2.0;
    }
    return d;
  }

  /** Evaluation at r = 0. */
  Matrix boundary_functional() const { return Matrix::Constant(1, size(), cplx(std::sqrt(2.0), 0.0)); }

  /** Coefficients of e^{-beta r}: sqrt(2) (beta - 1)^k / (beta + 1)^{k+1}. */
  Vector exp_coeffs(cplx beta) const {
    if (!(beta.real() > 0.0)) throw Error("decay-violation", "e^{-beta r} needs Re beta > 0");
    Vector c(size());
    const cplx ratio = (beta - 1.0) / (beta + 1.0);
    cplx term = std::sqrt(2.0) / (beta + 1.0);
    for (Index k = 0; k < size(); ++k) {
      c(k) = term;
      term *= ratio;
    }
    return c;
  }

  /** Embeds level-N coefficients into level N+1 (the derivative commutes with this). */
  Matrix inclusion(Index blocks = 1) const {
    Matrix e = Matrix::Zero(blocks * (size() + 1), blocks * size());
    for (Index b = 0; b < blocks; ++b) e.block(b * (size() + 1), b * size(), size(), size()).setIdentity();
    return e;
  }
};

struct CrSymbolReport {
  int tau = 1;
  Matrix op;                     // -(1/2)(D + tau); the phase e^{i theta} is factored out
  std::string phase = "e^{i theta}";
  Index kernel_dim = 0;
  Matrix kernel;                 // orthonormal columns
  double kernel_gap_to_l0 = 1.0;  // subspace distance to span{l_0}; 1 if the dims differ
  bool surjective = false;       // no cokernel stable under N -> N+1
  cplx trace_of_kernel = 0.0;    // gamma_0 applied to the first kernel vector
};

/** Boundary symbol of the Cauchy-Riemann problem at tau = +-1. */
inline CrSymbolReport cr_boundary_symbol(int tau, long n, double tol = 1e-8) {
  if (tau != 1 && tau != -1) throw Error("domain", "tau must be +1 or -1");
  if (n < 1) throw Error("domain", "truncation must be at least 1");
  LaguerreBasis lb(n), lb1(n + 1);
  auto build = [tau](const LaguerreBasis& b) {
    return Matrix(-0.5 * (b.derivative() + double(tau) * Matrix::Identity(b.size(), b.size())));
  };
  CrSymbolReport r;
  r.tau = tau;
  r.op = build(lb);
  r.kernel = kernel_basis(r.op, tol);
  r.kernel_dim = r.kernel.cols();
  Matrix l0 = Matrix::Zero(lb.size(), 1);
  l0(0, 0) = 1.0;
  r.kernel_gap_to_l0 = subspace_distance(r.kernel, l0);
  if (r.kernel_dim > 0) r.trace_of_kernel = (lb.boundary_functional() * r.kernel.col(0))(0, 0);
  Matrix image = range_basis(build(lb1), tol);
  Matrix target = lb.inclusion();
  r.surjective = rank_tol(hstack(target, image), tol).rank == image.cols();
  return r;
}

/** Point (z, xi) of the cosphere bundle of the unit sphere in C^2. */
struct CospherePoint {
  Eigen::Vector2cd z, xi;

  CospherePoint(Eigen::Vector2cd z_, Eigen::Vector2cd xi_) : z(std::move(z_)), xi(std::move(xi_)) { validate(); }

  double residual() const { return std::abs(xi.dot(z).real()); }

  void validate() const {
    if (std::abs(z.norm() - 1.0) > 1e-12 || std::abs(xi.norm() - 1.0) > 1e-12)
      throw Error("domain", "z and xi must be unit vectors");
    if (residual() > 1e-12) throw Error("domain", "Re <xi, z> must vanish");
  }

  /** z . xi = sum z_j conj(xi_j); purely imaginary on the cosphere. */
  cplx dot() const { return xi.dot(z); }

  Eigen::Vector2cd xi_perp() const { return {std::conj(xi(1)), -std::conj(xi(0))}; }
  Eigen::Vector2cd z_perp() const { return {std::conj(z(1)), -std::conj(z(0))}; }

  /** |1 + i z.xi|; zero exactly on the skew diagonal z = i xi. */
  double skew_distance() const { return std::abs(1.0 + cplx(0.0, 1.0) * dot()); }

  /** z = i s xi + sqrt(1 - s^2) e^{i alpha} xi_perp, so that z . xi = i s. */
  static CospherePoint from_parameters(const Eigen::Vector2cd& xi_unit, double s, double alpha) {
    Eigen::Vector2cd xi = xi_unit.normalized();
    Eigen::Vector2cd perp{std::conj(xi(1)), -std::conj(xi(0))};
    Eigen::Vector2cd z = cplx(0.0, s) * xi + std::sqrt(std::max(0.0, 1.0 - s * s)) * std::polar(1.0, alpha) * perp;
    return CospherePoint(z.normalized(), xi);
  }
};

/** d0(z, xi) u = xi u - i z u', a 2(N+1) x (N+1) matrix. */
inline Matrix dolbeault_d0(const CospherePoint& p, long n) {
  LaguerreBasis lb(n);
  Matrix d = lb.derivative(), id = Matrix::Identity(lb.size(), lb.size());
  const cplx i(0.0, 1.0);
  return vstack(p.xi(0) * id - i * p.z(0) * d, p.xi(1) * id - i * p.z(1) * d);
}

/** d1(z, xi) (v1, v2) = (xi_2 - i z_2 d/dr) v1 - (xi_1 - i z_1 d/dr) v2. */
inline Matrix dolbeault_d1(const CospherePoint& p, long n) {
  LaguerreBasis lb(n);
  Matrix d = lb.derivative(), id = Matrix::Identity(lb.size(), lb.size());
  const cplx i(0.0, 1.0);
  return hstack(p.xi(1) * id - i * p.z(1) * d, -p.xi(0) * id + i * p.z(0) * d);
}

struct StableCohomology {
  std::vector<Index> dims;  // h0, h1, h2
  bool marginal = false;
};

/**
 * Cohomology of the truncated symbol complex that survives one refinement: a level-N
 * cocycle counts unless it becomes a coboundary at level N+1. The plain finite section
 * is not exact at the top (the derivative loses a mode), so this is what is compared
 * with the operator-level statement.
 */
inline StableCohomology dolbeault_cohomology(const CospherePoint& p, long n, double tol = 1e-8) {
  LaguerreBasis lb(n);
  StableCohomology out;
  auto decide = [&out, tol](const Eigen::JacobiSVD<Matrix>& svd, const Matrix& m) {
    RankDecision r = detail::decide(svd.singularValues(), m.rows(), m.cols(), tol);
    out.marginal = out.marginal || r.marginal;
    return r.rank;
  };
  auto range_of = [&](const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    return Matrix(svd.matrixU().leftCols(decide(svd, m)));
  };
  // a level-N cocycle survives unless it lies in the level-(N+1) image
  auto persistent = [&](const Matrix& cocycles, const Matrix& fine_incoming) {
    Matrix b = range_of(fine_incoming);
    if (cocycles.cols() == 0) return Index(0);
    Matrix both = hstack(cocycles, b);
    Eigen::JacobiSVD<Matrix> svd(both);
    return decide(svd, both) - b.cols();
  };

  Matrix d0 = dolbeault_d0(p, n);
  Eigen::JacobiSVD<Matrix> s0(d0);
  out.dims.push_back(d0.cols() - decide(s0, d0));

  Matrix d1 = dolbeault_d1(p, n);
  Eigen::JacobiSVD<Matrix> s1(d1, Eigen::ComputeFullV);
  Index r1 = decide(s1, d1);
  Matrix cocycles = s1.matrixV().rightCols(d1.cols() - r1);
  out.dims.push_back(persistent(lb.inclusion(2) * cocycles, dolbeault_d0(p, n + 1)));
  out.dims.push_back(persistent(lb.inclusion(1), dolbeault_d1(p, n + 1)));
  return out;
}

enum class FiberClass { exact, skew_diagonal, marginal, other };

inline const char* to_string(FiberClass c) {
  switch (c) {
    case FiberClass::exact: return "exact";
    case FiberClass::skew_diagonal: return "skew-diagonal";
    case FiberClass::marginal: return "marginal";
    default: return "other";
  }
}

struct ScanPoint {
  std::vector<Index> dims;
  bool marginal = false;
  double skew_distance = 0.0;
  FiberClass cls = FiberClass::other;
};

struct ScanReport {
  long n = 0;
  double tol = 1e-8, skew_radius = 0.05;
  std::vector<CospherePoint> points;
  std::vector<ScanPoint> results;
};

inline ScanReport exactness_scan(const std::vector<CospherePoint>& grid, long n = 32, double tol = 1e-8,
                                 double skew_radius = 0.05) {
  if (!(tol > 0.0) || !(skew_radius > 0.0)) throw Error("domain", "tolerances must be positive");
  ScanReport rep;
  rep.n = n;
  rep.tol = tol;
  rep.skew_radius = skew_radius;
  rep.points = grid;
  rep.results.resize(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t i) {
    StableCohomology h = dolbeault_cohomology(grid[i], n, tol);
    ScanPoint& s = rep.results[i];
    s.dims = h.dims;
    s.marginal = h.marginal;
    s.skew_distance = grid[i].skew_distance();
    const bool zero = h.dims == std::vector<Index>{0, 0, 0};
    const bool skew = h.dims == std::vector<Index>{1, 1, 0};
    if (h.marginal) s.cls = FiberClass::marginal;
    else if (zero) s.cls = FiberClass::exact;
    else if (skew && s.skew_distance < skew_radius) s.cls = FiberClass::skew_diagonal;
    else s.cls = FiberClass::other;
  });
  return rep;
}

/** Random unit vector in C^2. */
inline Eigen::Vector2cd random_unit2(Rng& rng) {
  Matrix g = rng.gaussian(2, 1);
  return Eigen::Vector2cd(g(0, 0), g(1, 0)).normalized();
}

/**
 * Seeded scan grid: a share of exact skew-diagonal points, a band near the diagonal,
 * and points spread over the rest of the cosphere bundle.
 */
inline std::vector<CospherePoint> scan_grid(Rng& rng, std::size_t count) {
  std::vector<CospherePoint> out;
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::Vector2cd xi = random_unit2(rng);
    double s;
    if (i % 20 == 0) s = 1.0;
    else if (i % 20 == 1) s = 1.0 - rng.uniform(0.0, 0.3);
    else s = rng.uniform(-1.0, 1.0);
    out.push_back(CospherePoint::from_parameters(xi, s, rng.uniform(0.0, 2.0 * std::numbers::pi)));
  }
  return out;
}

/** Plateau cutoff: 1 on |t| <= 1/4, 0 on |t| >= 1/2, smooth in between. */
inline double cutoff(double t) {
  const double a = std::abs(t);
  if (a <= 0.25) return 1.0;
  if (a >= 0.5) return 0.0;
  auto h = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double s = (0.5 - a) / 0.25;
  return h(s) / (h(s) + h(1.0 - s));
}

/** phi(z, xi) = cutoff(1 + i z.xi); the argument is real on the cosphere. */
inline double cutoff_at(const CospherePoint& p) {
  return cutoff((1.0 + cplx(0.0, 1.0) * p.dot()).real());
}

/** Laguerre coefficients of v = phi xi_perp e^{-ir/(z.xi)}, stacked as two blocks. */
inline Vector dolbeault_k0(const CospherePoint& p, long n) {
  LaguerreBasis lb(n);
  Vector out = Vector::Zero(2 * lb.size());
  const double phi = cutoff_at(p);
  if (phi == 0.0) return out;
  const cplx beta = cplx(0.0, 1.0) / p.dot();
  if (!(beta.real() > 0.0))
    throw Error("decay-violation", "Re(i / z.xi) <= 0 on the support of the cutoff");
  Vector e = lb.exp_coeffs(beta);
  Eigen::Vector2cd perp = p.xi_perp();
  out.head(lb.size()) = phi * perp(0) * e;
  out.tail(lb.size()) = phi * perp(1) * e;
  return out;
}

/** (d0 k0): L (+) C -> L^2. */
inline Matrix augmented_d0(const CospherePoint& p, long n) {
  Matrix d0 = dolbeault_d0(p, n);
  Matrix out(d0.rows(), d0.cols() + 1);
  out.leftCols(d0.cols()) = d0;
  out.col(d0.cols()) = dolbeault_k0(p, n);
  return out;
}

namespace detail {

// One-dimensional kernel of a tall matrix: the direction orthogonal to the row space.
inline Vector line_kernel(const Matrix& a, double tol = 1e-8) {
  Eigen::ColPivHouseholderQR<Matrix> qr(a.adjoint());
  qr.setThreshold(tol);
  if (qr.rank() + 1 != a.cols()) {
    Matrix k = kernel_basis(a, tol);
    if (k.cols() != 1)
      throw Error("kernel-dimension", "expected a one-dimensional kernel, found " + std::to_string(k.cols()));
    return k.col(0);
  }
  Matrix q = qr.householderQ();
  Vector v = q.col(a.cols() - 1);
  if ((a * v).norm() > 1e-8 * (1.0 + a.norm())) {
    Matrix k = kernel_basis(a, tol);
    if (k.cols() != 1) throw Error("kernel-dimension", "kernel is not one-dimensional");
    v = k.col(0);
  }
  return v;
}

// Kernel line next to a known nearby line `near`, by inverse iteration on the Gram matrix.
// The deflated Gram matrix must stay positive definite above a floor, which certifies that
// the kernel is one-dimensional; otherwise the SVD decides.
inline Vector line_kernel_near(const Matrix& a, const Vector& near, double tol = 1e-8) {
  Matrix g = a.adjoint() * a;
  const double scale = g.diagonal().real().sum();
  Matrix shifted = g;
  shifted.diagonal().array() += 1e-13 * scale;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() == Eigen::Success) {
    Vector v = llt.solve(near);
    v = llt.solve(v / v.norm());
    v /= v.norm();
    Matrix deflated = g + scale * (v * v.adjoint());
    deflated.diagonal().array() -= 1e-10 * scale;
    Eigen::LLT<Matrix> check(deflated);
    if (check.info() == Eigen::Success && (a * v).norm() <= tol * std::sqrt(scale)) return v;
  }
  return line_kernel(a, tol);
}

// Fixes the phase so the largest entry is real positive.
inline Vector canonical_phase(Vector v) {
  Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  return v * (std::abs(v(at)) / v(at));
}

// Rotates v so that <prev, v> is real positive.
inline Vector align_to(const Vector& prev, Vector v) {
  cplx ip = prev.dot(v);
  if (std::abs(ip) > 0.0) v *= std::abs(ip) / ip;
  return v;
}

inline double line_gap(const Vector& a, const Vector& b) {
  double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

}  // namespace detail

/** Point of the fiber sphere over z0 = (1, 0): xi = (i t, sqrt(1 - t^2) e^{i alpha}). */
inline CospherePoint fiber_point(double t, double alpha) {
  t = std::clamp(t, -1.0, 1.0);
  Eigen::Vector2cd xi{cplx(0.0, t), std::polar(std::sqrt(std::max(0.0, 1.0 - t * t)), alpha)};
  return CospherePoint(Eigen::Vector2cd(1.0, 0.0), xi.normalized());
}

/** Closed-form kernel sections of (d0 k0) over z0 = (1, 0). */
inline Vector north_section(long n) {
  Vector s = Vector::Zero(n + 2);
  s(n + 1) = 1.0;
  return s;
}

/** (phi conj(xi_1) e^{-ir/conj(xi_1)}, xi_2); with a leading minus this would leave the kernel. */
inline Vector south_section(const CospherePoint& p, long n) {
  LaguerreBasis lb(n);
  Vector s = Vector::Zero(lb.size() + 1);
  const double phi = cutoff_at(p);
  if (phi != 0.0) {
    const cplx c1 = std::conj(p.xi(0));
    s.head(lb.size()) = phi * c1 * lb.exp_coeffs(cplx(0.0, 1.0) / c1);
  }
  s(lb.size()) = p.xi(1);
  return s;
}

struct ClutchingReport {
  long winding = 0;
  double max_section_gap = 0.0;      // largest gap between neighbouring fibers on the paths
  double max_closed_form_gap = 0.0;  // largest gap to the closed-form sections
  double transition_defect = 0.0;    // max |g / xi_2 - g(0) / xi_2(0)|
  std::string orientation = "xi2-ccw";
  std::vector<double> angles;
  std::vector<cplx> transition;  // S = g N on the equator
  std::size_t fibers = 0;
};

/**
 * Follows the kernel line of (d0 k0) from each pole to the equator along meridians,
 * keeping consecutive vectors in phase, and reads off the transition function between
 * the two hemisphere sections. Meridian steps are halved until neighbouring fibers are
 * within max_step_gap; a gap above 0.2 at the finest step is reported as a jump.
 */
inline ClutchingReport kernel_bundle_clutching(long equator_grid = 512, long n = 32, int meridian_steps = 32,
                                               double max_step_gap = 0.04) {
  if (equator_grid < 8) throw Error("domain", "equator grid needs at least 8 points");
  ClutchingReport rep;
  const double half_pi = std::numbers::pi / 2.0;
  auto kernel_at = [n](double t, double alpha) { return detail::line_kernel(augmented_d0(fiber_point(t, alpha), n)); };

  Vector north_pole = detail::canonical_phase(kernel_at(1.0, 0.0));
  Vector south_pole = detail::canonical_phase(kernel_at(-1.0, 0.0));
  std::vector<Vector> north(static_cast<std::size_t>(equator_grid)), south(north.size());
  std::vector<double> gaps(north.size(), 0.0), closed(north.size(), 0.0);
  std::vector<std::size_t> counts(north.size(), 0);
  std::vector<int> jumps(north.size(), 0);

  detail::parallel_for(north.size(), [&](std::size_t m) {
    const double alpha = 2.0 * std::numbers::pi * double(m) / double(equator_grid);
    for (int side = 0; side < 2; ++side) {
      const double sign = side == 0 ? 1.0 : -1.0;  // t = sign * cos(theta)
      Vector prev = side == 0 ? north_pole : south_pole;
      double theta = 0.0, step = half_pi / meridian_steps;
      while (theta < half_pi) {
        double next = std::min(half_pi, theta + step);
        double t = sign * std::cos(next);
        if (next == half_pi) t = 0.0;
        Vector v = detail::align_to(prev, detail::line_kernel_near(augmented_d0(fiber_point(t, alpha), n), prev));
        ++counts[m];
        double gap = detail::line_gap(prev, v);
        if (gap > max_step_gap && step > 1e-7) {
          step /= 2.0;
          continue;
        }
        const double grow = gap > 0.0 ? std::clamp(0.7 * max_step_gap / gap, 0.5, 2.0) : 2.0;
        if (gap > 0.2) jumps[m] = 1;
        gaps[m] = std::max(gaps[m], gap);
        CospherePoint p = fiber_point(t, alpha);
        Vector ref = side == 0 && t >= 0.0 ? north_section(n) : south_section(p, n);
        closed[m] = std::max(closed[m], detail::line_gap(ref, v));
        prev = v;
        theta = next;
        step = std::min(half_pi / meridian_steps, step * grow);
      }
      (side == 0 ? north : south)[m] = prev;
    }
  });
  if (std::any_of(jumps.begin(), jumps.end(), [](int j) { return j != 0; }))
    throw Error("section-jump", "neighbouring kernel lines differ by more than 0.2");

  for (std::size_t m = 0; m < north.size(); ++m) {
    const double alpha = 2.0 * std::numbers::pi * double(m) / double(equator_grid);
    rep.angles.push_back(alpha);
    rep.transition.push_back(north[m].dot(south[m]) / north[m].squaredNorm());
    rep.max_section_gap = std::max(rep.max_section_gap, gaps[m]);
    rep.max_closed_form_gap = std::max(rep.max_closed_form_gap, closed[m]);
    rep.fibers += counts[m];
    std::size_t prev = (m + north.size() - 1) % north.size();
    double eq_gap = std::max(detail::line_gap(north[prev], north[m]), detail::line_gap(south[prev], south[m]));
    if (eq_gap > 0.2) throw Error("section-jump", "equator neighbours differ by more than 0.2");
    rep.max_section_gap = std::max(rep.max_section_gap, eq_gap);
  }
  const cplx ref = rep.transition.front();  // xi_2 = 1 at alpha = 0
  for (std::size_t m = 0; m < rep.transition.size(); ++m)
    rep.transition_defect =
        std::max(rep.transition_defect, std::abs(rep.transition[m] / std::polar(1.0, rep.angles[m]) - ref));
  rep.winding = winding_number(rep.transition);
  return rep;
}

/** Finite Dolbeault fibers 0 -> C^{N+1} -> C^{2(N+1)} -> C^{N+1} -> 0 over the given points. */
inline FamilyComplex dolbeault_family(const std::vector<CospherePoint>& pts, long n) {
  std::vector<GridPoint> gp;
  std::vector<FiniteComplex> fibers;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    gp.push_back({"p" + std::to_string(i),
                  {p.z(0).real(), p.z(0).imag(), p.z(1).real(), p.z(1).imag(), p.xi(0).real(), p.xi(0).imag(),
                   p.xi(1).real(), p.xi(1).imag()}});
    fibers.push_back(FiniteComplex::from_differentials({dolbeault_d0(p, n), dolbeault_d1(p, n)}));
  }
  return FamilyComplex(std::move(gp), std::move(fibers));
}

struct IndexElementReport {
  std::vector<Index> j0_dims;          // per fiber
  std::vector<Index> fill_ranks;       // l_1..l_n (index 0 is l_1)
  std::vector<long> euler;             // per fiber, of the input
  std::vector<long> formal_index;      // per fiber: dim J0 + sum_{j>=1} (-1)^j l_j
  bool euler_conserved = false;
  std::string verdict = "vanishing-candidate";
};

struct ComplementResult {
  FamilyComplex augmented;
  IndexElementReport report;
  std::vector<std::vector<Matrix>> projections;  // projections[fiber][j]: onto ker of the augmented map j
  std::vector<double> continuity_defects;        // per position j (1..n), max over adjacent fibers
  bool discontinuous_fill = false;
  std::vector<std::vector<Index>> augmented_cohomology;  // per fiber
};

namespace detail {

// Orthonormal basis of the complement of span(a) in C^rows.
inline Matrix orth_complement(const Matrix& a, Index rows, double tol, double ref) {
  if (a.cols() == 0) return Matrix::Identity(rows, rows);
  return cokernel_basis(a, tol, ref);
}

}  // namespace detail

/**
 * Complements every fiber to a complex exact away from position 0, top-down. The top
 * map is made surjective with the cokernel basis; then for i = n-1..1 the new columns
 * (k_i; q_i) are the kernel projection of a complement of im(a_{i-1}; 0) + im A_i^*,
 * where A_i is the already augmented map above. Fill ranks are the maximum over the
 * grid; fibers needing fewer columns are zero-padded.
 */
inline ComplementResult complement_family(const FamilyComplex& fc, double tol = kDefaultTol) {
  fc.check();
  const std::vector<Index> n = fc.spaces();
  const int top = static_cast<int>(n.size()) - 1;  // positions 0..top
  const std::size_t count = fc.size();
  ComplementResult out;
  // l[j] for j = 1..top is the rank of the trivial summand added at position j-1
  std::vector<Index> l(static_cast<std::size_t>(top + 2), 0);
  std::vector<std::vector<Matrix>> maps(count);  // augmented maps, position j -> j+1
  std::vector<std::vector<Matrix>> fills(count);
  out.projections.assign(count, std::vector<Matrix>(static_cast<std::size_t>(std::max(top, 0))));
  for (std::size_t f = 0; f < count; ++f) maps[f] = fc.fibers[f].differentials;

  if (top >= 1) {
    std::vector<Matrix> cok(count);
    for (std::size_t f = 0; f < count; ++f) {
      const Matrix& a = maps[f][static_cast<std::size_t>(top - 1)];
      cok[f] = cokernel_basis(a, tol, fc.fibers[f].scale());
      l[static_cast<std::size_t>(top)] = std::max(l[static_cast<std::size_t>(top)], cok[f].cols());
    }
    for (std::size_t f = 0; f < count; ++f) {
      Matrix k = Matrix::Zero(n[static_cast<std::size_t>(top)], l[static_cast<std::size_t>(top)]);
      k.leftCols(cok[f].cols()) = cok[f];
      Matrix& a = maps[f][static_cast<std::size_t>(top - 1)];
      a = hstack(a, k);
      fills[f].push_back(k);
    }
  }

  for (int i = top - 1; i >= 1; --i) {
    // maps[f][i] : W_i -> W_{i+1} is final; extend maps[f][i-1] : V_{i-1} -> V_i to W_{i-1} -> W_i
    std::vector<Matrix> cols(count);
    Index width = 0;
    for (std::size_t f = 0; f < count; ++f) {
      const Matrix& above = maps[f][static_cast<std::size_t>(i)];
      const Matrix top_map = i + 1 < top ? maps[f][static_cast<std::size_t>(i + 1)] : Matrix::Zero(0, above.rows());
      const double ref = std::max(fc.fibers[f].scale(), std::max(opnorm(above), 1.0));
      Matrix pi = detail::orth_kernel_projector_via_laplacian(above, top_map, i + 1, tol);
      out.projections[f][static_cast<std::size_t>(i)] = pi;
      const Matrix& a_low = maps[f][static_cast<std::size_t>(i - 1)];
      const Index wi = above.cols();
      Matrix low = Matrix::Zero(wi, a_low.cols());
      low.topRows(a_low.rows()) = a_low;
      Matrix b = detail::orth_complement(hstack(low, above.adjoint()), wi, tol, ref);
      cols[f] = b.cols() ? range_basis(pi * b, tol, 1.0) : Matrix::Zero(wi, 0);
      width = std::max(width, cols[f].cols());
    }
    l[static_cast<std::size_t>(i)] = width;
    for (std::size_t f = 0; f < count; ++f) {
      Matrix& a_low = maps[f][static_cast<std::size_t>(i - 1)];
      const Index wi = maps[f][static_cast<std::size_t>(i)].cols();
      Matrix ext = Matrix::Zero(wi, a_low.cols() + width);
      ext.block(0, 0, a_low.rows(), a_low.cols()) = a_low;
      ext.block(0, a_low.cols(), wi, cols[f].cols()) = cols[f];
      a_low = ext;
      fills[f].push_back(ext.rightCols(width));
    }
  }

  // projections at position 0 for completeness
  for (std::size_t f = 0; f < count && top >= 1; ++f) {
    const Matrix& a0 = maps[f][0];
    out.projections[f][0] = kernel_projector(a0, tol, fc.fibers[f].scale());
  }

  std::vector<FiniteComplex> fibers;
  for (std::size_t f = 0; f < count; ++f) {
    FiniteComplex c = FiniteComplex::from_differentials(maps[f]);
    if (maps[f].empty()) c = fc.fibers[f];
    c.reference_norm = fc.fibers[f].scale();
    fibers.push_back(std::move(c));
  }
  out.augmented = FamilyComplex(fc.points, std::move(fibers));

  IndexElementReport& rep = out.report;
  for (int j = 1; j <= top; ++j) rep.fill_ranks.push_back(l[static_cast<std::size_t>(j)]);
  rep.euler_conserved = true;
  for (std::size_t f = 0; f < count; ++f) {
    CohomologyReport in = cohomology(fc.fibers[f], tol);
    CohomologyReport aug = cohomology(out.augmented.fibers[f], tol);
    out.augmented_cohomology.push_back(aug.dims);
    rep.j0_dims.push_back(aug.dims.empty() ? 0 : aug.dims[0]);
    long formal = static_cast<long>(rep.j0_dims.back());
    for (int j = 1; j <= top; ++j) formal += (j % 2 ? -1L : 1L) * static_cast<long>(l[static_cast<std::size_t>(j)]);
    rep.euler.push_back(in.index);
    rep.formal_index.push_back(formal);
    rep.euler_conserved = rep.euler_conserved && formal == in.index;
  }

  // continuity of the fill columns between neighbouring fibers
  const std::size_t nfill = count ? fills[0].size() : 0;
  out.continuity_defects.assign(nfill, 0.0);
  for (std::size_t f = 1; f < count; ++f)
    for (std::size_t s = 0; s < nfill; ++s) {
      Matrix a = range_basis(fills[f - 1][s], tol, 1.0), b = range_basis(fills[f][s], tol, 1.0);
      out.continuity_defects[s] = std::max(out.continuity_defects[s], subspace_distance(a, b));
    }
  out.discontinuous_fill =
      std::any_of(out.continuity_defects.begin(), out.continuity_defects.end(), [](double d) { return d > 0.2; });
  return out;
}

/** Verdict from the clutching winding over one fiber sphere, when one was measured. */
inline std::string index_element_verdict(std::optional<long> winding) {
  if (winding && *winding != 0) return "nonvanishing(winding " + std::to_string(*winding) + ")";
  return "vanishing-candidate";
}

/**
 * Random family on up to max_points grid points with fixed graded dimensions. Half of
 * the draws rotate one complex smoothly along the grid; the rest draw an independent
 * blueprint per fiber, so ranks and cohomology can jump between neighbours.
 */
inline FamilyComplex random_family(Rng& rng, int max_spaces = 5, Index max_dim = 6, int max_points = 16) {
  const int spaces = rng.uniform_int(2, max_spaces);
  const int points = rng.uniform_int(1, max_points);
  std::vector<Index> dims;
  for (int j = 0; j < spaces; ++j) dims.push_back(rng.uniform_int(0, static_cast<int>(max_dim)));
  auto blueprint = [&]() {
    ComplexBlueprint bp;
    Index prev = 0;
    for (int j = 0; j + 1 < spaces; ++j) {
      Index room = std::min(dims[j] - prev, dims[j + 1]);
      Index r = rng.uniform_int(0, static_cast<int>(std::max<Index>(room, 0)));
      bp.ranks.push_back(r);
      prev = r;
    }
    for (int j = 0; j < spaces; ++j)
      bp.harmonic.push_back(dims[j] - (j > 0 ? bp.ranks[j - 1] : 0) - (j + 1 < spaces ? bp.ranks[j] : 0));
    return bp;
  };
  const bool smooth = rng.uniform_int(0, 1) == 0;
  std::vector<GridPoint> gp;
  std::vector<FiniteComplex> fibers;
  FiniteComplex base = complex_from_blueprint(rng, blueprint());
  std::vector<Matrix> gens;
  for (Index d : dims) {
    Matrix h = rng.gaussian(d, d);
    gens.push_back(cplx(0.0, 0.5) * (h + h.adjoint()));
  }
  for (int x = 0; x < points; ++x) {
    const double s = points > 1 ? double(x) / double(points - 1) : 0.0;
    gp.push_back({"x" + std::to_string(x), {s}});
    if (smooth) {
      std::vector<Matrix> u;
      for (const Matrix& g : gens) u.push_back(g.size() ? Matrix((s * g).exp()) : g);
      fibers.push_back(transport(base, u));
    } else {
      fibers.push_back(complex_from_blueprint(rng, blueprint()));
    }
  }
  return FamilyComplex(std::move(gp), std::move(fibers));
}

}  // namespace fcl
