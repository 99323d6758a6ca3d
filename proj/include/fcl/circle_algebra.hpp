#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "fcl/numlin.hpp"

namespace fcl {

// Operators on trigonometric polynomials with modes -N..N; mode m sits at row/column m + N.

enum class CircleKind { multiplier, multiplication, general };

struct CircleOperator {
  long n = 0;
  Matrix m;
  CircleKind kind = CircleKind::general;

  Index slot(long mode) const { return static_cast<Index>(mode + n); }
};

using ModeSymbol = std::function<cplx(long)>;
using CircleFunction = std::function<cplx(double)>;

inline CircleOperator multiplier(const ModeSymbol& symbol, long n) {
  if (n < 1) throw Error("domain", "multiplier needs N >= 1");
  CircleOperator op{n, Matrix::Zero(2 * n + 1, 2 * n + 1), CircleKind::multiplier};
  for (long k = -n; k <= n; ++k) op.m(op.slot(k), op.slot(k)) = symbol(k);
  return op;
}

/** Order reduction (1 + n^2)^{s/2}. */
inline CircleOperator order_reduction(double s, long n) {
  return multiplier([s](long k) { return cplx(std::pow(1.0 + double(k) * double(k), s / 2.0), 0.0); }, n);
}

/** Projection onto the nonnegative (Hardy) modes. */
inline CircleOperator calderon_projector(long n) {
  return multiplier([](long k) { return cplx(k >= 0 ? 1.0 : 0.0, 0.0); }, n);
}

/** Uniform grid theta_j = 2 pi j / (2N + 1), j = 0..2N. */
inline std::vector<double> circle_grid(long n) {
  std::vector<double> t(static_cast<std::size_t>(2 * n + 1));
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = 2.0 * std::numbers::pi * double(j) / double(t.size());
  return t;
}

inline std::vector<cplx> sample(const CircleFunction& f, long n) {
  std::vector<cplx> out;
  for (double t : circle_grid(n)) out.push_back(f(t));
  return out;
}

/** Fourier coefficients f^(k), k = -N..N (index k + N), from 2N+1 samples. */
inline std::vector<cplx> fourier_coefficients(const std::vector<cplx>& samples) {
  const std::size_t len = samples.size();
  if (len % 2 == 0 || len < 3) throw Error("domain", "need an odd number (2N+1 >= 3) of samples");
  for (const cplx& v : samples)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error("non-finite", "symbol sample is not finite");
  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, samples);
  const long n = static_cast<long>(len / 2);
  std::vector<cplx> out(len);
  for (long k = -n; k <= n; ++k) {
    long idx = k >= 0 ? k : static_cast<long>(len) + k;
    out[static_cast<std::size_t>(k + n)] = spec[static_cast<std::size_t>(idx)] / double(len);
  }
  return out;
}

/** Resolution check: relative size of the outermost Fourier coefficients. */
inline bool aliasing_suspected(const std::vector<cplx>& coeffs, double rel = 1e-8) {
  double total = 0.0;
  for (const cplx& c : coeffs) total += std::norm(c);
  total = std::sqrt(total);
  double edge = std::max(std::abs(coeffs.front()), std::abs(coeffs.back()));
  return total > 0.0 && edge > rel * total;
}

/** Multiplication by f on modes -N..N: entry (m, n) is f^(m - n), taken as zero beyond |k| > N. */
inline CircleOperator multiplication(const std::vector<cplx>& samples) {
  std::vector<cplx> c = fourier_coefficients(samples);
  const long n = static_cast<long>(samples.size() / 2);
  CircleOperator op{n, Matrix::Zero(2 * n + 1, 2 * n + 1), CircleKind::multiplication};
  for (long r = -n; r <= n; ++r)
    for (long s = -n; s <= n; ++s) {
      long k = r - s;
      if (k >= -n && k <= n) op.m(op.slot(r), op.slot(s)) = c[static_cast<std::size_t>(k + n)];
    }
  return op;
}

inline CircleOperator multiplication(const CircleFunction& f, long n) { return multiplication(sample(f, n)); }

inline std::vector<long> selected_modes(const CircleOperator& p) {
  if (p.kind != CircleKind::multiplier) throw Error("domain", "expected a diagonal 0/1 multiplier");
  std::vector<long> modes;
  for (long k = -p.n; k <= p.n; ++k) {
    cplx v = p.m(p.slot(k), p.slot(k));
    if (v == cplx(1.0, 0.0)) modes.push_back(k);
    else if (v != cplx(0.0, 0.0)) throw Error("domain", "multiplier is not a 0/1 projection");
  }
  return modes;
}

struct Compression {
  Matrix matrix;  // rows: modes of P1, columns: modes of P0
  std::vector<long> row_modes, col_modes;
  bool aliasing_warning = false;
};

/** P1 M_f P0 restricted to the ranges of two diagonal projections. */
inline Compression toeplitz_compress(const std::vector<cplx>& samples, const CircleOperator& p0,
                                     const CircleOperator& p1) {
  const long n = static_cast<long>(samples.size() / 2);
  if (p0.n != n || p1.n != n) throw Error("shape", "projections and samples use different truncations");
  CircleOperator mf = multiplication(samples);
  Compression out;
  out.aliasing_warning = aliasing_suspected(fourier_coefficients(samples));
  out.col_modes = selected_modes(p0);
  out.row_modes = selected_modes(p1);
  out.matrix.resize(static_cast<Index>(out.row_modes.size()), static_cast<Index>(out.col_modes.size()));
  for (std::size_t i = 0; i < out.row_modes.size(); ++i)
    for (std::size_t j = 0; j < out.col_modes.size(); ++j)
      out.matrix(static_cast<Index>(i), static_cast<Index>(j)) = mf.m(mf.slot(out.row_modes[i]), mf.slot(out.col_modes[j]));
  return out;
}

/** Toeplitz matrix (f^(r - s)) for rows 0..rows-1 and columns 0..cols-1 of the Hardy space. */
inline Matrix hardy_section(const CircleFunction& f, long rows, long cols) {
  const long n = std::max(rows, cols);
  std::vector<cplx> c = fourier_coefficients(sample(f, n));
  Matrix t = Matrix::Zero(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long s = 0; s < cols; ++s) t(r, s) = c[static_cast<std::size_t>(r - s + n)];
  return t;
}

struct TruncatedIndex {
  long n = 0;
  Index kernel = 0, cokernel = 0;
  bool marginal = false;
  std::vector<double> singular_values;       // of the section of T_f
  std::vector<double> adjoint_singular_values;  // of the section of T_{conj f}
  long index() const { return static_cast<long>(kernel) - static_cast<long>(cokernel); }
};

/**
 * Kernel of T_f and of its adjoint T_{conj f}, each read off from a tall section
 * (rows 0..N, columns 0..N/2). Square sections always have index 0, so the extra
 * rows are what lets a shift show its defect.
 */
inline TruncatedIndex truncated_index(const CircleFunction& f, long n, double tol = 1e-8) {
  if (n < 4) throw Error("domain", "truncation must be at least 4");
  CircleFunction fc = [&f](double t) { return std::conj(f(t)); };
  Matrix a = hardy_section(f, n + 1, n / 2 + 1);
  Matrix b = hardy_section(fc, n + 1, n / 2 + 1);
  RankDecision ra = rank_tol(a, tol), rb = rank_tol(b, tol);
  TruncatedIndex out;
  out.n = n;
  out.kernel = a.cols() - ra.rank;
  out.cokernel = b.cols() - rb.rank;
  out.marginal = ra.marginal || rb.marginal;
  out.singular_values = ra.singular_values;
  out.adjoint_singular_values = rb.singular_values;
  return out;
}

struct IndexReport {
  long index = 0;
  TruncatedIndex coarse, fine;
};

/** Index of the Hardy-space Toeplitz operator, required to agree at both truncations. */
inline IndexReport fredholm_index(const CircleFunction& f, long n1 = 128, long n2 = 256, double tol = 1e-8) {
  if (!(n1 < n2)) throw Error("domain", "need two increasing truncations");
  IndexReport r{0, truncated_index(f, n1, tol), truncated_index(f, n2, tol)};
  if (r.coarse.kernel != r.fine.kernel || r.coarse.cokernel != r.fine.cokernel)
    throw Error("unstable-index", "kernel/cokernel dims (" + std::to_string(r.coarse.kernel) + "," +
                                      std::to_string(r.coarse.cokernel) + ") at N=" + std::to_string(n1) + " vs (" +
                                      std::to_string(r.fine.kernel) + "," + std::to_string(r.fine.cokernel) +
                                      ") at N=" + std::to_string(n2));
  r.index = r.fine.index();
  return r;
}

/** Argument increment of f around the sampled circle, in turns. */
inline long winding_number(const std::vector<cplx>& samples) {
  if (samples.size() < 3) throw Error("domain", "winding needs at least three samples");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const cplx& v : samples) {
    lo = std::min(lo, std::abs(v));
    hi = std::max(hi, std::abs(v));
  }
  if (!(lo >= 1e-8 * hi) || hi == 0.0) throw Error("symbol-vanishes", "min |f| is below 1e-8 max |f|");
  double total = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) total += std::arg(samples[(j + 1) % samples.size()] / samples[j]);
  double turns = total / (2.0 * std::numbers::pi);
  long w = std::lround(turns);
  if (std::abs(turns - double(w)) > 0.1) throw Error("symbol-vanishes", "argument increment is not close to an integer");
  return w;
}

inline long winding_number(const CircleFunction& f, long samples = 1024) {
  std::vector<cplx> s;
  for (long j = 0; j < samples; ++j) s.push_back(f(2.0 * std::numbers::pi * double(j) / double(samples)));
  return winding_number(s);
}

struct CrReduction {
  bool elliptic = false;
  std::optional<long> index;   // empty when the truncations disagree
  std::optional<long> winding;  // empty when the symbol vanishes
  bool agree = false;
  std::string verdict;
};

/** Compares the index of C M_phi C on the Hardy space with the winding prediction -wind(phi). */
inline CrReduction cr_problem_reduction(const CircleFunction& phi, long n1 = 128, long n2 = 256) {
  CrReduction r;
  try {
    r.winding = winding_number(phi);
  } catch (const Error& e) {
    if (e.code() != "symbol-vanishes") throw;
  }
  try {
    r.index = fredholm_index(phi, n1, n2).index;
  } catch (const Error& e) {
    if (e.code() != "unstable-index") throw;
  }
  r.elliptic = r.winding.has_value();
  r.agree = r.winding && r.index && *r.index == -*r.winding;
  r.verdict = r.elliptic ? "elliptic" : "non-elliptic";
  return r;
}

// Decay diagnostics. Entries are read on the Hardy block (rows and columns 0..N).

/** Largest |entry| on the shell max(row, col) = k, k = 0..n-1. */
inline std::vector<double> shell_maxima(const Matrix& m) {
  const Index n = std::min(m.rows(), m.cols());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) {
      auto& slot = out[static_cast<std::size_t>(std::max(r, c))];
      slot = std::max(slot, std::abs(m(r, c)));
    }
  return out;
}

/** Tail maxima: max |entry| over all shells >= k. */
inline std::vector<double> decay_profile(const Matrix& m) {
  std::vector<double> s = shell_maxima(m);
  for (std::size_t k = s.size(); k-- > 1;) s[k - 1] = std::max(s[k - 1], s[k]);
  return s;
}

struct DecayFit {
  double exponent = 0.0;  // p in |entry| ~ C k^{-p}
  double residual = 0.0;  // RMS residual of the log10 fit
  std::size_t points = 0;
  bool at_floor = false;  // entries fell to round-off before the tail window
  bool smoothing = false;
};

/**
 * Least-squares fit of log10(shell max) against log10(k) over the tail half of the
 * shells that sit above the round-off floor. Smoothing means exponent >= 4 with
 * residual < 0.5, or decay all the way to the floor.
 */
inline DecayFit fit_decay(const Matrix& m, double floor_rel = 1e-13) {
  std::vector<double> s = decay_profile(m);
  DecayFit fit;
  double top = 0.0;
  for (double v : s) top = std::max(top, v);
  if (top == 0.0) {
    fit.at_floor = fit.smoothing = true;
    fit.exponent = std::numeric_limits<double>::infinity();
    return fit;
  }
  std::size_t last = 0;
  for (std::size_t k = 1; k < s.size(); ++k)
    if (s[k] > floor_rel * top) last = k;
  fit.at_floor = last + 1 < s.size() / 2;
  std::size_t first = std::max<std::size_t>(1, (last + 1) / 2);
  std::vector<double> x, y;
  for (std::size_t k = first; k <= last; ++k) {
    x.push_back(std::log10(double(k)));
    y.push_back(std::log10(s[k]));
  }
  fit.points = x.size();
  if (fit.points < 3) {
    fit.exponent = std::numeric_limits<double>::infinity();
    fit.smoothing = fit.at_floor;
    return fit;
  }
  Eigen::MatrixXd a(static_cast<Index>(x.size()), 2);
  Eigen::VectorXd b(static_cast<Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(static_cast<Index>(i), 0) = 1.0;
    a(static_cast<Index>(i), 1) = x[i];
    b(static_cast<Index>(i)) = y[i];
  }
  Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  fit.exponent = -coef(1);
  fit.residual = std::sqrt((a * coef - b).squaredNorm() / double(x.size()));
  fit.smoothing = fit.at_floor || (fit.exponent >= 4.0 && fit.residual < 0.5);
  return fit;
}

/**
 * C M_f C M_g C - C M_{fg} C on the Hardy block of modes 0..N. The product runs over
 * intermediate modes up to 2N so the block is not polluted by the truncation edge.
 */
inline Matrix semicommutator(const CircleFunction& f, const CircleFunction& g, long n) {
  CircleFunction fg = [&](double t) { return f(t) * g(t); };
  const long inner = 2 * n + 1;
  Matrix tf = hardy_section(f, n + 1, inner);
  Matrix tg = hardy_section(g, inner, n + 1);
  Matrix tfg = hardy_section(fg, n + 1, n + 1);
  return tf * tg - tfg;
}

}  // namespace fcl
