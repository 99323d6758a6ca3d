#include <catch_amalgamated.hpp>

#include "fcl/complexes.hpp"
#include "fcl/generators.hpp"

using namespace fcl;

namespace {

long alternating_dims(const FiniteComplex& c) {
  long s = 0;
  for (int j = 0; j < c.length(); ++j) s += (j % 2 ? -1 : 1) * static_cast<long>(c.dim(j));
  return s;
}

}  // namespace

TEST_CASE("octahedron cochains") {
  FiniteComplex c = octahedron_cochains();
  CHECK(c.spaces == std::vector<Index>{6, 12, 8});
  CHECK(validate(c).ok);
  CohomologyReport h = cohomology(c);
  CHECK(h.dims == std::vector<Index>{1, 0, 1});
  CHECK(h.index == 2);
  CHECK_FALSE(h.marginal);
}

TEST_CASE("torus grid cochains") {
  FiniteComplex c = torus_grid_cochains(4, 4);
  CHECK(c.spaces == std::vector<Index>{16, 32, 16});
  CohomologyReport h = cohomology(c);
  CHECK(h.dims == std::vector<Index>{1, 2, 1});
  CHECK(h.index == 0);
  CohomologyReport h35 = cohomology(torus_grid_cochains(3, 5));
  CHECK(h35.dims == std::vector<Index>{1, 2, 1});
}

TEST_CASE("derham demo names") {
  CHECK(cohomology(derham_demo("sphere")).index == 2);
  CHECK(cohomology(derham_demo("torus-grid")).index == 0);
  CHECK_THROWS_AS(derham_demo("klein"), Error);
}

TEST_CASE("hand-sized complexes") {
  // 0 -> C --0--> C -> 0
  FiniteComplex z({1, 1}, {Matrix::Zero(1, 1)});
  CHECK(cohomology(z).dims == std::vector<Index>{1, 1});
  // 0 -> C^2 --(1 0)--> C -> 0
  Matrix a(1, 2);
  a << 1, 0;
  FiniteComplex s({2, 1}, {a});
  CHECK(cohomology(s).dims == std::vector<Index>{1, 0});
  CHECK(cohomology(s).index == 1);
  // empty spaces are allowed
  FiniteComplex e({0, 2, 0}, {Matrix::Zero(2, 0), Matrix::Zero(0, 2)});
  CHECK(cohomology(e).dims == std::vector<Index>{0, 2, 0});
}

TEST_CASE("shape errors name the offending position") {
  try {
    FiniteComplex({2, 3}, {Matrix::Zero(2, 2)});
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.code() == "shape");
    CHECK(e.position() == 0);
  }
}

TEST_CASE("non-complexes are rejected by cohomology") {
  Matrix a = Matrix::Identity(1, 1);
  FiniteComplex c({1, 1, 1}, {a, a});
  CHECK_FALSE(validate(c).ok);
  CHECK_THROWS_AS(cohomology(c), Error);
}

TEST_CASE("property: cohomology matches the blueprint and is basis independent") {
  Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    ComplexBlueprint bp = random_blueprint(rng, rng.uniform_int(1, 5), 6);
    FiniteComplex c = complex_from_blueprint(rng, bp, i % 2 == 0);
    CohomologyReport h = cohomology(c);
    REQUIRE(h.dims == bp.harmonic);
    CHECK(h.index == alternating_dims(c));
    std::vector<Matrix> basis;
    for (Index d : c.spaces) basis.push_back(rng.invertible(d));
    CHECK(cohomology(transport(c, basis)).dims == bp.harmonic);
  }
}

TEST_CASE("property: Hodge parametrix identities") {
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    FiniteComplex c = random_complex(rng, rng.uniform_int(2, 5), 6);
    Parametrix p = hodge_parametrix(c);
    CohomologyReport h = cohomology(c);
    for (int j = 0; j < c.length(); ++j) {
      // the remainder is the harmonic projector
      CHECK((p.remainders[static_cast<std::size_t>(j)] - h.harmonic_projectors[static_cast<std::size_t>(j)]).norm() <=
            1e-10);
    }
    for (std::size_t j = 0; j + 1 < p.operators.size(); ++j)
      CHECK((p.operators[j] * p.operators[j + 1]).norm() <= 1e-10);
  }
}

TEST_CASE("harmonic projectors are orthogonal projections onto ker A_j ∩ ker A_{j-1}*") {
  Rng rng(3);
  FiniteComplex c = random_complex(rng, 4, 6);
  CohomologyReport h = cohomology(c);
  for (int j = 0; j < c.length(); ++j) {
    const Matrix& p = h.harmonic_projectors[static_cast<std::size_t>(j)];
    CHECK((p * p - p).norm() < 1e-10);
    CHECK((p - p.adjoint()).norm() < 1e-12);
    CHECK((c.d(j) * p).norm() < 1e-10);
    CHECK((c.d(j - 1).adjoint() * p).norm() < 1e-10);
  }
}

TEST_CASE("quasicomplex lift: small perturbation of 0 -> C2 -> C2 -> C -> 0") {
  Rng rng(3);
  FiniteComplex c = complex_from_blueprint(rng, ComplexBlueprint{{1, 1}, {1, 0, 0}});
  std::vector<Matrix> ops = c.differentials;
  ops[0] += 1e-3 * rng.gaussian(2, 2);
  CHECK(composition_defect(ops[1], ops[0]) > 1e-6);
  QuasiLiftResult r = lift_quasicomplex(ops);
  CHECK(opnorm(r.complex.d(1) * r.complex.d(0)) <= 1e-12);
  CHECK(r.corrections[0] < 1e-2);
  CHECK(r.complex.differentials[1] == ops[1]);  // the top map is kept
  QuasiLiftResult again = lift_quasicomplex(r.complex.differentials);
  for (std::size_t j = 0; j < ops.size(); ++j) CHECK(again.complex.differentials[j] == r.complex.differentials[j]);
}

TEST_CASE("property: complexes pass through the quasicomplex lift unchanged") {
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    FiniteComplex c = random_complex(rng, rng.uniform_int(2, 5), 6);
    QuasiLiftResult r = lift_quasicomplex(c.differentials);
    for (std::size_t j = 0; j < c.differentials.size(); ++j)
      CHECK(r.complex.differentials[j] == c.differentials[j]);
  }
}

TEST_CASE("property: lifted quasicomplexes are complexes") {
  Rng rng(43);
  for (int i = 0; i < 50; ++i) {
    FiniteComplex c = random_complex(rng, rng.uniform_int(3, 5), 6);
    // rank-preserving perturbation (1 + eX) A (1 + eY); additive noise would change ranks
    std::vector<Matrix> ops = c.differentials;
    for (Matrix& a : ops)
      a = (Matrix::Identity(a.rows(), a.rows()) + 1e-7 * rng.gaussian(a.rows(), a.rows())) * a *
          (Matrix::Identity(a.cols(), a.cols()) + 1e-7 * rng.gaussian(a.cols(), a.cols()));
    QuasiLiftResult r = lift_quasicomplex(ops);
    CHECK(validate(r.complex).ok);
    for (double x : r.corrections) CHECK(x < 1e-4);
  }
}

TEST_CASE("family complexes need constant graded dimensions") {
  FiniteComplex a = FiniteComplex::zero({1, 2});
  FiniteComplex b = FiniteComplex::zero({2, 2});
  CHECK_THROWS_AS(FamilyComplex({{"a", {0.0}}, {"b", {1.0}}}, {a, b}), Error);
  CHECK_NOTHROW(FamilyComplex({{"a", {0.0}}, {"b", {1.0}}}, {a, a}));
}
