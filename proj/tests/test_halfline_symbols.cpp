#include <catch_amalgamated.hpp>

#include "fcl/halfline_symbols.hpp"

using namespace fcl;

using Dims = std::vector<Index>;

namespace {

const cplx I(0.0, 1.0);

// l_k(r) = sqrt(2) L_k(2r) e^{-r} through the three-term recurrence.
double laguerre_fn(int k, double r) {
  double x = 2.0 * r, a = 1.0, b = 1.0 - x;
  if (k == 0) b = a;
  for (int m = 1; m < k; ++m) {
    double c = ((2.0 * m + 1.0 - x) * b - m * a) / (m + 1.0);
    a = b;
    b = c;
  }
  return std::sqrt(2.0) * b * std::exp(-r);
}

// Composite Simpson on [0, 60] for <e^{-beta r}, l_k>.
cplx quadrature_coeff(cplx beta, int k) {
  const int steps = 60000;
  const double h = 60.0 / steps;
  cplx s = 0.0;
  for (int i = 0; i <= steps; ++i) {
    double r = i * h, w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(-beta * r) * laguerre_fn(k, r);
  }
  return s * h / 3.0;
}

FamilyComplex single(const FiniteComplex& c) { return FamilyComplex({{"x0", {0.0}}}, {c}); }

Eigen::Vector2cd e2() { return {0.0, 1.0}; }

}  // namespace

TEST_CASE("Laguerre derivative matrix") {
  LaguerreBasis lb(4);
  Matrix d = lb.derivative();
  for (Index j = 0; j < 5; ++j)
    for (Index k = 0; k < 5; ++k) {
      cplx want = j == k ? -1.0 : (j < k ? -2.0 : 0.0);
      CHECK(d(j, k) == want);
    }
  // inclusion commutes with the derivative
  LaguerreBasis up(5);
  CHECK((up.derivative() * lb.inclusion() - lb.inclusion() * d).norm() == 0.0);
}

TEST_CASE("exponential coefficients against quadrature") {
  LaguerreBasis lb(5);
  for (cplx beta : {cplx(1.0, 0.0), cplx(1.0, 0.3), cplx(1.0, -0.3), cplx(1.7, 0.0)}) {
    Vector c = lb.exp_coeffs(beta);
    for (int k = 0; k <= 5; ++k) CHECK(std::abs(c(k) - quadrature_coeff(beta, k)) < 1e-9);
  }
  Vector one = lb.exp_coeffs(1.0);
  CHECK(std::abs(one(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(one.tail(5).norm() == 0.0);
  try {
    lb.exp_coeffs(cplx(0.0, 1.0));
    FAIL("expected decay-violation");
  } catch (const Error& e) {
    CHECK(e.code() == "decay-violation");
  }
}

TEST_CASE("Cauchy-Riemann boundary symbol at tau = +1 and -1") {
  CrSymbolReport plus = cr_boundary_symbol(1, 16);
  CHECK(plus.kernel_dim == 1);
  CHECK(plus.kernel_gap_to_l0 < 1e-12);
  CHECK(plus.surjective);
  CHECK(std::abs(std::abs(plus.trace_of_kernel) - std::sqrt(2.0)) < 1e-12);
  CrSymbolReport minus = cr_boundary_symbol(-1, 16);
  CHECK(minus.kernel_dim == 0);
  CHECK(minus.surjective);
}

TEST_CASE("Dolbeault symbol maps compose to zero") {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    CospherePoint p = CospherePoint::from_parameters(random_unit2(rng), rng.uniform(-1.0, 1.0), rng.uniform(0.0, 6.0));
    CHECK(p.residual() < 1e-12);
    CHECK((dolbeault_d1(p, 12) * dolbeault_d0(p, 12)).norm() < 1e-12);
  }
}

TEST_CASE("cosphere points are validated") {
  CHECK_THROWS_AS(CospherePoint(Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(1.0, 0.0)), Error);
  CHECK_THROWS_AS(CospherePoint(Eigen::Vector2cd(2.0, 0.0), Eigen::Vector2cd(0.0, 1.0)), Error);
}

TEST_CASE("stable cohomology on and off the skew diagonal") {
  CospherePoint skew(Eigen::Vector2cd(0.0, I), e2());
  CHECK(skew.skew_distance() < 1e-15);
  StableCohomology h = dolbeault_cohomology(skew, 32);
  CHECK(h.dims == Dims{1, 1, 0});
  CHECK_FALSE(h.marginal);
  StableCohomology g = dolbeault_cohomology(CospherePoint(Eigen::Vector2cd(1.0, 0.0), e2()), 32);
  CHECK(g.dims == Dims{0, 0, 0});
  CHECK_FALSE(g.marginal);
}

TEST_CASE("exactness scan on a small seeded grid") {
  Rng rng(11);
  ScanReport rep = exactness_scan(scan_grid(rng, 60), 24);
  for (const ScanPoint& s : rep.results) {
    CHECK(s.cls != FiberClass::other);
    CHECK_FALSE(s.marginal);
    CHECK(s.dims[2] == 0);
    if (s.skew_distance < 1e-12) CHECK(s.cls == FiberClass::skew_diagonal);
  }
}

TEST_CASE("cohomology is locally constant along a path avoiding the diagonal") {
  Eigen::Vector2cd xi = Eigen::Vector2cd(1.0, I).normalized();
  for (int i = 0; i <= 40; ++i) {
    double s = -1.0 + 1.9 * i / 40.0;
    StableCohomology h = dolbeault_cohomology(CospherePoint::from_parameters(xi, s, 0.3 * i), 24);
    CHECK(h.dims == Dims{0, 0, 0});
  }
}

TEST_CASE("kernel correction k0") {
  Eigen::Vector2cd xi = Eigen::Vector2cd(2.0, I).normalized();
  CospherePoint skew(cplx(0.0, 1.0) * xi, xi);
  CHECK(cutoff_at(skew) == 1.0);
  const long n = 10;
  Vector k = dolbeault_k0(skew, n);
  Eigen::Vector2cd perp = skew.xi_perp();
  Vector want = Vector::Zero(2 * (n + 1));
  want(0) = perp(0) / std::sqrt(2.0);
  want(n + 1) = perp(1) / std::sqrt(2.0);
  CHECK((k - want).norm() < 1e-15);
  CHECK((dolbeault_d1(skew, n) * k).norm() < 1e-12);

  CospherePoint far(Eigen::Vector2cd(1.0, 0.0), e2());
  CHECK(dolbeault_k0(far, n).norm() == 0.0);

  // inside the cutoff support the correction is still a d1-cocycle up to truncation
  CospherePoint near = CospherePoint::from_parameters(xi, 0.7, 1.1);
  CHECK(cutoff_at(near) > 0.0);
  CHECK((dolbeault_d1(near, 32) * dolbeault_k0(near, 32)).norm() <= 1e-10);
}

TEST_CASE("kernel bundle clutching on a coarse equator") {
  ClutchingReport r = kernel_bundle_clutching(16, 16, 16);
  CHECK(r.winding == 1);
  CHECK(r.max_section_gap < 0.2);
  CHECK(r.max_closed_form_gap < 1e-6);
  CHECK(r.transition_defect < 1e-8);
  CHECK(index_element_verdict(r.winding) == "nonvanishing(winding 1)");
  CHECK(index_element_verdict(std::nullopt) == "vanishing-candidate");
}

TEST_CASE("complement of 0 -> C^2 -> C -> 0 with the surjection (1 0)") {
  Matrix a(1, 2);
  a << 1, 0;
  ComplementResult r = complement_family(single(FiniteComplex({2, 1}, {a})));
  CHECK(r.report.fill_ranks == Dims{0});
  CHECK(r.report.j0_dims == Dims{1});
  CHECK(r.report.euler_conserved);
}

TEST_CASE("complement of 0 -> C -> C -> 0 with the zero map") {
  ComplementResult r = complement_family(single(FiniteComplex({1, 1}, {Matrix::Zero(1, 1)})));
  CHECK(r.report.fill_ranks == Dims{1});
  CHECK(r.report.j0_dims == Dims{1});
  CHECK(r.report.formal_index == std::vector<long>{0});
  CHECK(r.augmented_cohomology[0] == Dims{1, 0});
}

TEST_CASE("property: complements are exact above position 0 and conserve the Euler index") {
  Rng rng(555);
  for (int i = 0; i < 50; ++i) {
    FamilyComplex fc = random_family(rng, 5, 6, 16);
    ComplementResult r = complement_family(fc);
    CHECK(r.report.euler_conserved);
    for (std::size_t f = 0; f < fc.size(); ++f) {
      const FiniteComplex& c = r.augmented.fibers[f];
      CHECK(validate(c).ok);
      for (std::size_t j = 1; j < r.augmented_cohomology[f].size(); ++j) CHECK(r.augmented_cohomology[f][j] == 0);
      for (int j = 0; j < c.length() - 1; ++j) {
        const Matrix& p = r.projections[f][static_cast<std::size_t>(j)];
        CHECK((p * p - p).norm() < 1e-8);
        CHECK((p - p.adjoint()).norm() < 1e-8);
        CHECK((c.d(j) * p).norm() < 1e-8 * (1.0 + c.d(j).norm()));
      }
    }
  }
}
