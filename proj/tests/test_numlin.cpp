#include <catch_amalgamated.hpp>

#include "fcl/generators.hpp"
#include "fcl/numlin.hpp"

using namespace fcl;

TEST_CASE("rank of simple matrices") {
  CHECK(rank_tol(Matrix::Identity(3, 3)).rank == 3);
  CHECK(rank_tol(Matrix::Zero(3, 2)).rank == 0);
  CHECK(rank_tol(Matrix(0, 4)).rank == 0);
  Matrix m(2, 3);
  m << 1, 2, 3, 2, 4, 6;
  CHECK(rank_tol(m).rank == 1);
}

TEST_CASE("rank of a matrix and its adjoint agree") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Index r = rng.uniform_int(0, 4), rows = rng.uniform_int(1, 7), cols = rng.uniform_int(1, 7);
    r = std::min({r, rows, cols});
    Matrix m = rng.rank_matrix(rows, cols, r);
    RankDecision a = rank_tol(m), b = rank_tol(m.adjoint());
    CHECK(a.rank == r);
    CHECK(a.rank == b.rank);
    CHECK(a.marginal == b.marginal);
  }
}

TEST_CASE("reference norm keeps round-off matrices at rank zero") {
  Matrix noise = Matrix::Constant(3, 3, cplx(1e-17, 0.0));
  CHECK(rank_tol(noise).rank == 1);
  CHECK(rank_tol(noise, kDefaultTol, 1.0).rank == 0);
}

TEST_CASE("marginal flag near the threshold") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2e-10;  // threshold is 1e-10 * 1 * 2
  RankDecision r = rank_tol(d);
  CHECK(r.marginal);
  d(1, 1) = 1e-3;
  CHECK_FALSE(rank_tol(d).marginal);
}

TEST_CASE("pseudoinverse satisfies the Penrose identities") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    Matrix m = rng.rank_matrix(5, 4, rng.uniform_int(0, 4));
    Matrix p = pinv(m);
    CHECK((m * p * m - m).norm() <= 1e-10 * (1 + m.norm()));
    CHECK((p * m * p - p).norm() <= 1e-10 * (1 + p.norm()));
    CHECK((m * p - (m * p).adjoint()).norm() <= 1e-10);
    CHECK((p * m - (p * m).adjoint()).norm() <= 1e-10);
  }
}

TEST_CASE("bases are orthonormal and complementary") {
  Rng rng(9);
  Matrix m = rng.rank_matrix(6, 5, 3);
  Matrix r = range_basis(m), k = kernel_basis(m), c = cokernel_basis(m);
  CHECK(r.cols() == 3);
  CHECK(k.cols() == 2);
  CHECK(c.cols() == 3);
  CHECK((r.adjoint() * r - Matrix::Identity(3, 3)).norm() < 1e-12);
  CHECK((m * k).norm() < 1e-10);
  CHECK((c.adjoint() * m).norm() < 1e-10);
  CHECK((range_projector(m) + c * c.adjoint() - Matrix::Identity(6, 6)).norm() < 1e-10);
  CHECK((kernel_projector(m) * kernel_projector(m) - kernel_projector(m)).norm() < 1e-12);
}

TEST_CASE("subspace distance") {
  Matrix e1 = Matrix::Zero(2, 1), e2 = Matrix::Zero(2, 1);
  e1(0, 0) = 1;
  e2(1, 0) = 1;
  CHECK(subspace_distance(e1, e1) == Catch::Approx(0.0).margin(1e-15));
  CHECK(subspace_distance(e1, e2) == Catch::Approx(1.0));
  CHECK(subspace_distance(e1, Matrix(2, 0)) == 1.0);
  CHECK(subspace_distance(Matrix(2, 0), Matrix(2, 0)) == 0.0);
  Matrix d(2, 1);
  d << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  CHECK(subspace_distance(e1, d) == Catch::Approx(std::sqrt(0.5)));
}

TEST_CASE("non-finite input is rejected") {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(rank_tol(m), Error);
  try {
    pinv(m);
  } catch (const Error& e) {
    CHECK(e.code() == "non-finite");
  }
}

TEST_CASE("stacking") {
  Matrix a = Matrix::Identity(2, 2), b = Matrix::Zero(2, 0);
  CHECK(hstack(a, b) == a);
  CHECK(vstack(a, Matrix::Zero(0, 2)) == a);
  CHECK(hstack(a, a).cols() == 4);
  CHECK_THROWS_AS(hstack(a, Matrix::Zero(3, 1)), Error);
}
