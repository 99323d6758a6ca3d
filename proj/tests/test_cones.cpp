#include <catch_amalgamated.hpp>

#include "fcl/cones.hpp"

using namespace fcl;

using Dims = std::vector<Index>;

TEST_CASE("counterexample with T1 = 1") {
  ConeDecompositionReport r = verify_cone_decomposition(counterexample_instance(Matrix::Identity(1, 1)));
  CHECK(r.cone_dims == Dims{0, 0, 0, 0});
  CHECK(r.ker_dims == Dims{0, 0, 1});
  CHECK(r.coker_dims == Dims{1, 0, 0});
  CHECK(r.assumption_dims == Dims{1, 0, 0});
  CHECK_FALSE(r.hypothesis_holds);
  CHECK_FALSE(r.decomposition_holds);
  CHECK(r.cone_index == 0);
  CHECK(r.ker_index == 1);
  CHECK(r.coker_index == 1);
}

TEST_CASE("counterexample with a random invertible T1 of size 3") {
  ConeDecompositionReport r = verify_cone_decomposition(counterexample_instance(Rng(7).invertible(3)));
  CHECK(r.cone_dims == Dims{0, 0, 0, 0});
  CHECK(r.ker_dims == Dims{0, 0, 3});
  CHECK(r.coker_dims == Dims{3, 0, 0});
  CHECK(r.assumption_dims == Dims{3, 0, 0});
  CHECK_FALSE(r.decomposition_holds);
}

TEST_CASE("counterexample with T1 = 0 satisfies the hypothesis") {
  ConeDecompositionReport r = verify_cone_decomposition(counterexample_instance(Matrix::Zero(2, 2)));
  CHECK(r.cone_dims == Dims{0, 0, 0, 0});
  CHECK(r.ker_dims == Dims{0, 0, 0});
  CHECK(r.coker_dims == Dims{0, 0, 0});
  CHECK(r.assumption_dims == Dims{0, 0, 0});
  CHECK(r.decomposition_holds);
}

TEST_CASE("cone of the identity is exact") {
  Rng rng(8);
  FiniteComplex c = random_complex(rng, 4, 5);
  CohomologyReport h = cohomology(mapping_cone(identity_morphism(c)));
  for (Index d : h.dims) CHECK(d == 0);
}

TEST_CASE("cone of the zero morphism is the sum of shifted complexes") {
  Rng rng(12);
  FiniteComplex s = random_complex(rng, 3, 4), t = random_complex(rng, 3, 4);
  CohomologyReport cs = cohomology(s), ct = cohomology(t);
  CohomologyReport cone = cohomology(mapping_cone(zero_morphism(s, t)));
  for (int j = 0; j < 4; ++j) {
    Index want = (j < 3 ? cs.dims[j] : 0) + (j >= 1 ? ct.dims[j - 1] : 0);
    CHECK(cone.dims[j] == want);
  }
}

TEST_CASE("non-commuting squares are rejected with their position") {
  FiniteComplex c({1, 1}, {Matrix::Identity(1, 1)});
  ComplexMorphism m{c, c, {Matrix::Identity(1, 1), 2.0 * Matrix::Identity(1, 1)}};
  try {
    mapping_cone(m);
    FAIL("expected non-commuting");
  } catch (const Error& e) {
    CHECK(e.code() == "non-commuting");
    CHECK(e.position() == 0);
  }
}

TEST_CASE("cone differential squares to zero") {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    ComplexMorphism m = random_surjective_morphism(rng, rng.uniform_int(2, 5), 6);
    CHECK(validate(mapping_cone(m)).ok);
  }
}

TEST_CASE("property: cone decomposition for surjective verticals") {
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    ComplexMorphism m = random_surjective_morphism(rng, rng.uniform_int(2, 5), 6);
    for (const Matrix& t : m.verticals) CHECK(rank_tol(t).rank == t.rows());
    ConeDecompositionReport r = verify_cone_decomposition(m);
    CHECK(r.hypothesis_holds);
    CHECK(r.decomposition_holds);
    CHECK(r.cone_index == r.ker_index - r.coker_index);
    for (Index c : r.coker_dims) CHECK(c == 0);
  }
}
