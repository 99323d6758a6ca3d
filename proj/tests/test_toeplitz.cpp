#include <catch_amalgamated.hpp>

#include "fcl/toeplitz.hpp"

using namespace fcl;

using Dims = std::vector<Index>;

namespace {

ProjectedComplex two_space(const Matrix& p0, const Matrix& p1, const Matrix& a) {
  ProjectedComplex pc;
  pc.ambient = FiniteComplex({p0.rows(), p1.rows()}, {a});
  pc.projections = {p0, p1};
  return pc;
}

}  // namespace

TEST_CASE("hand example with a non-Hermitian idempotent") {
  Matrix p0(2, 2);
  p0 << 1, 1, 0, 0;
  Matrix a(1, 2);
  a << 1, 1;
  ProjectedComplex pc = two_space(p0, Matrix::Identity(1, 1), a);
  CHECK(check_projected(pc).ok());
  CHECK(projected_cohomology(pc).dims == Dims{0, 0});
  CHECK(lift_cohomology(lift(pc)).dims == Dims{0, 0});
}

TEST_CASE("zero map between rank-one projections") {
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1;
  ProjectedComplex pc = two_space(p, p, Matrix::Zero(2, 2));
  CHECK(projected_cohomology(pc).dims == Dims{1, 1});
  LiftedComplex lc = lift(pc);
  CHECK(lc.lift.length() == 3);  // one trailing truncation position
  CHECK(lc.meaningful_positions == 2);
  CHECK(lift_cohomology(lc).dims == Dims{1, 1});
}

TEST_CASE("lift of the identity projections is the complex itself up to zero blocks") {
  Rng rng(5);
  FiniteComplex c = random_complex(rng, 3, 4);
  ProjectedComplex pc;
  pc.ambient = c;
  for (Index d : c.spaces) pc.projections.push_back(Matrix::Identity(d, d));
  CHECK(lift_cohomology(lift(pc)).dims == cohomology(c).dims);
}

TEST_CASE("operators not compressed by the projections are rejected") {
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1;
  ProjectedComplex pc = two_space(p, p, Matrix::Identity(2, 2));
  try {
    lift(pc);
    FAIL("expected not-projected");
  } catch (const Error& e) {
    CHECK(e.code() == "not-projected");
  }
}

TEST_CASE("property: lift preserves cohomology, Hermitian and not") {
  Rng rng(1000);
  for (int i = 0; i < 100; ++i) {
    ProjectedSample s = random_projected_complex(rng, rng.uniform_int(2, 5), 6, i % 5 == 0, i % 2 == 0);
    CohomologyReport pcr = projected_cohomology(s.pc);
    LiftedComplex lc = lift(s.pc);
    CHECK(validate(lc.lift).ok);
    CHECK(pcr.dims == s.expected_dims);
    CHECK(lift_cohomology(lc).dims == pcr.dims);
  }
}

TEST_CASE("property: extracted parametrix remainders") {
  Rng rng(2000);
  for (int i = 0; i < 50; ++i) {
    const bool exact = i % 3 == 0;
    ProjectedSample s = random_projected_complex(rng, rng.uniform_int(2, 5), 6, exact, i % 2 == 1);
    CohomologyReport pcr = projected_cohomology(s.pc);
    LiftedComplex lc = lift(s.pc);
    ProjectedParametrix ep = extract_parametrix(s.pc, lc, hodge_parametrix(lc.lift));
    for (std::size_t j = 0; j < pcr.dims.size(); ++j) {
      CHECK(ep.remainder_ranks[j] <= pcr.dims[j]);
      if (exact) CHECK(opnorm(ep.remainders[j]) <= 1e-8);
      // remainders live inside the projected space
      const Matrix& p = s.pc.projections[j];
      CHECK((p * ep.remainders[j] * p - ep.remainders[j]).norm() <= 1e-8 * (1 + ep.remainders[j].norm()));
    }
  }
}

TEST_CASE("property: projected quasicomplex lift in upper-triangular form") {
  Rng rng(3000);
  for (int s = 0; s < 20; ++s) {
    ProjectedSample e = random_projected_complex(rng, 4, 3, false, false);
    std::vector<Matrix> ops, projs;
    std::vector<Index> lead;
    for (int j = 0; j < 4; ++j) {
      Index ne = e.pc.ambient.dim(j), nf = rng.uniform_int(1, 3), rf = rng.uniform_int(0, static_cast<int>(nf));
      RangeFactor ff = random_idempotent(rng, nf, rf, false);
      Matrix p = Matrix::Zero(ne + nf, ne + nf);
      p.topLeftCorner(ne, ne) = e.pc.p(j);
      p.bottomRightCorner(nf, nf) = ff.v * ff.w;
      projs.push_back(p);
      lead.push_back(ne);
    }
    for (int j = 0; j < 3; ++j) {
      Index ne0 = lead[j], ne1 = lead[j + 1], nf0 = projs[j].rows() - ne0, nf1 = projs[j + 1].rows() - ne1;
      Matrix x = rng.gaussian(ne1 + nf1, ne0 + nf0);
      x.leftCols(ne0).setZero();
      Matrix a = projs[j + 1] * x * projs[j];
      a.topLeftCorner(ne1, ne0) = e.pc.ambient.d(j);
      ops.push_back(a);
    }
    ProjectedLiftResult r = lift_quasicomplex_projected(ops, projs, UpperTriangularLayout{lead});
    CHECK(check_projected(r.complex).ok());
    for (int j = 0; j < 3; ++j) {
      const Matrix& got = r.complex.ambient.differentials[static_cast<std::size_t>(j)];
      CHECK((got.topLeftCorner(lead[j + 1], lead[j]).array() == ops[j].topLeftCorner(lead[j + 1], lead[j]).array()).all());
      CHECK(got.bottomLeftCorner(got.rows() - lead[j + 1], lead[j]).isZero(0.0));
    }
  }
}

TEST_CASE("upper-triangular layout requires a zero lower-left block") {
  Matrix p = Matrix::Identity(2, 2);
  Matrix a = Matrix::Identity(2, 2);
  a(1, 0) = 1.0;
  std::vector<Matrix> ops = {a}, projs = {p, p};
  try {
    lift_quasicomplex_projected(ops, projs, UpperTriangularLayout{{1, 1}});
    FAIL("expected layout error");
  } catch (const Error& e) {
    CHECK(e.code() == "layout");
  }
}

TEST_CASE("projected complexes pass through the projected lift unchanged") {
  Rng rng(4000);
  for (int i = 0; i < 20; ++i) {
    ProjectedSample s = random_projected_complex(rng, rng.uniform_int(2, 5), 6, false, false);
    ProjectedLiftResult r = lift_quasicomplex_projected(s.pc.ambient.differentials, s.pc.projections);
    for (std::size_t j = 0; j < s.pc.ambient.differentials.size(); ++j)
      CHECK(r.complex.ambient.differentials[j] == s.pc.ambient.differentials[j]);
  }
}
