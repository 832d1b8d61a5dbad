#include "wlra/matrix.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace wlra;
using wlra::testing::factorization_oracle;
using wlra::testing::randn;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("matrix");

TEST_CASE("svd of the identity has unit singular values") {
  const SvdTriple dec = svd(Matrix::Identity(3, 3));
  REQUIRE(dec.singular_values.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(dec.singular_values(i) == doctest::Approx(1.0));
}

TEST_CASE("svd of a diagonal matrix recovers the diagonal") {
  const SvdTriple dec = svd(diag2(3.0, 1.0));
  CHECK(dec.singular_values(0) == doctest::Approx(3.0));
  CHECK(dec.singular_values(1) == doctest::Approx(1.0));
  // Factors are the identity up to sign.
  CHECK((dec.u.cwiseAbs() - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((dec.v.cwiseAbs() - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("svd invariants on a random matrix") {
  std::mt19937_64 rng(11);
  const Matrix a = randn(5, 4, rng);
  const SvdTriple dec = svd(a);
  REQUIRE(dec.singular_values.size() == 4);
  CHECK((dec.u.transpose() * dec.u - Matrix::Identity(4, 4)).norm() < 1e-10);
  CHECK((dec.v.transpose() * dec.v - Matrix::Identity(4, 4)).norm() < 1e-10);
  for (Index i = 0; i + 1 < 4; ++i) {
    CHECK(dec.singular_values(i) >= dec.singular_values(i + 1));
    CHECK(dec.singular_values(i) >= 0.0);
  }
  const Matrix recon = dec.u * dec.singular_values.asDiagonal() * dec.v.transpose();
  CHECK((recon - a).norm() / a.norm() < 1e-10);
}

TEST_CASE("svd rejects empty and non-finite input") {
  CHECK_THROWS_AS(svd(Matrix()), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(bad), std::invalid_argument);
}

TEST_CASE("hard_threshold keeps the largest singular values") {
  CHECK((hard_threshold(diag2(3.0, 1.0), 1) - diag2(3.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("hard_threshold at full rank is the identity operation") {
  std::mt19937_64 rng(7);
  const Matrix a = randn(4, 6, rng);
  CHECK((hard_threshold(a, 4) - a).norm() / a.norm() < 1e-10);
}

TEST_CASE("hard_threshold corner ranks") {
  std::mt19937_64 rng(3);
  const Matrix a = randn(3, 5, rng);
  CHECK(hard_threshold(a, 0).norm() == 0.0);
  CHECK_THROWS_AS(hard_threshold(a, 4), std::invalid_argument);
  CHECK_THROWS_AS(hard_threshold(a, -1), std::invalid_argument);
}

TEST_CASE("hard_threshold matches the restart factorization oracle") {
  std::mt19937_64 rng(19);
  // Random rank-3 4x4 matrix, truncated to rank 2.
  const Matrix a = randn(4, 3, rng) * randn(3, 4, rng);
  const double mine = (a - hard_threshold(a, 2)).squaredNorm();
  const double oracle = factorization_oracle(a, 2, 100, 99);
  CHECK(mine <= oracle + 1e-8);
  CHECK(mine == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("orthonormal_basis handles already-orthonormal and scaled input") {
  Matrix e1 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  CHECK((orthonormal_basis(e1) - e1).cwiseAbs().maxCoeff() < 1e-12);
  Matrix scaled = 2.0 * e1;
  const Matrix q = orthonormal_basis(scaled);
  CHECK((q.cwiseAbs() - e1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("orthonormal_basis yields orthonormal columns spanning the input") {
  std::mt19937_64 rng(23);
  const Matrix a1 = randn(6, 2, rng);
  const Matrix q = orthonormal_basis(a1);
  CHECK((q.transpose() * q - Matrix::Identity(2, 2)).norm() < 1e-10);
  // Same column space: projecting a1 onto span(q) changes nothing.
  CHECK((q * (q.transpose() * a1) - a1).norm() < 1e-10);
}

TEST_CASE("orthonormal_basis reports the numerical rank of degenerate input") {
  Matrix a1(3, 2);
  a1 << 1, 2, 1, 2, 1, 2;  // second column is a multiple of the first
  try {
    orthonormal_basis(a1);
    FAIL("expected DegeneracyError");
  } catch (const DegeneracyError& e) {
    CHECK(e.numerical_rank == 1);
  }
}

TEST_CASE("projection splits a2 into span and complement") {
  std::mt19937_64 rng(31);
  const Matrix a1 = randn(5, 2, rng);
  const Matrix q = orthonormal_basis(a1);

  SUBCASE("a2 inside the span projects to itself") {
    const Matrix a2 = a1 * randn(2, 3, rng);
    CHECK((project(q, a2) - a2).norm() < 1e-10 * a2.norm());
    CHECK(project_orth(q, a2).norm() < 1e-10 * a2.norm());
  }
  SUBCASE("a2 orthogonal to the span projects to zero") {
    const Matrix a2 = project_orth(q, randn(5, 3, rng));
    CHECK(project(q, a2).norm() < 1e-10 * a2.norm());
  }
  SUBCASE("parts are orthogonal, sum back, and re-project to themselves") {
    const Matrix a2 = randn(5, 3, rng);
    const Matrix p = project(q, a2);
    const Matrix o = project_orth(q, a2);
    CHECK(std::abs((p.cwiseProduct(o)).sum()) < 1e-10 * a2.squaredNorm());
    CHECK((p + o - a2).cwiseAbs().maxCoeff() < 1e-13 * a2.norm());
    CHECK((project(q, p) - p).norm() < 1e-10 * a2.norm());
    CHECK(project(q, o).norm() < 1e-10 * a2.norm());
  }
  SUBCASE("row mismatch is rejected") {
    CHECK_THROWS_AS(project(q, randn(4, 2, rng)), std::invalid_argument);
  }
}

TEST_CASE("hadamard and frob_norm_sq basics") {
  std::mt19937_64 rng(41);
  const Matrix a = randn(3, 4, rng);
  CHECK((hadamard(a, Matrix::Ones(3, 4)) - a).norm() == 0.0);
  CHECK(frob_norm_sq(diag2(3.0, 4.0)) == doctest::Approx(25.0));
  CHECK_THROWS_AS(hadamard(a, Matrix::Ones(4, 3)), std::invalid_argument);

  // Independent entrywise summation, |a . w|_F^2.
  const Matrix w = randn(3, 4, rng);
  double by_hand = 0.0;
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 4; ++j) by_hand += a(i, j) * w(i, j) * a(i, j) * w(i, j);
  }
  CHECK(frob_norm_sq(hadamard(a, w)) == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("numerical_rank uses the relative cutoff") {
  std::mt19937_64 rng(43);
  const Matrix a = randn(5, 2, rng) * randn(2, 5, rng);
  CHECK(numerical_rank(a) == 2);
  CHECK(numerical_rank(Matrix::Zero(3, 3)) == 0);
}

TEST_SUITE_END();
