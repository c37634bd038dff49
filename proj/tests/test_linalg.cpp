#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "rogsure/linalg.hpp"

using namespace rogsure;

TEST_CASE("shrink: formula examples") {
  Matrix b(1, 3);
  b << 0.5, -0.1, -0.7;
  const Matrix s = shrink(b, 0.2);
  CHECK(s(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s(0, 1) == 0.0);
  CHECK(s(0, 2) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(shrink(b, 0.0) == b);
  CHECK_THROWS_AS(shrink(b, -1e-12), InvalidArgument);
}

TEST_CASE("shrink: odd and 1-Lipschitz") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = oracle::random_matrix(4, 5, rng);
    const Matrix c = oracle::random_matrix(4, 5, rng);
    const double tau = rng.uniform();
    CHECK(shrink(-a, tau) == -shrink(a, tau));
    const Matrix d = (shrink(a, tau) - shrink(c, tau)).cwiseAbs();
    CHECK(((a - c).cwiseAbs() - d).minCoeff() >= -1e-15);
  }
}

TEST_CASE("group_shrink: examples") {
  Matrix a(1, 1), b(1, 1);
  a << 3.0;
  b << 4.0;
  auto out = group_shrink(MatrixStack({a, b}), 1.0);
  CHECK(out[0](0, 0) == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(out[1](0, 0) == doctest::Approx(3.2).epsilon(1e-15));

  a << 0.3;
  b << 0.4;
  out = group_shrink(MatrixStack({a, b}), 1.0);
  CHECK(out[0](0, 0) == 0.0);
  CHECK(out[1](0, 0) == 0.0);

  a << 0.5;
  out = group_shrink(MatrixStack({a}), 0.2);
  CHECK(out[0](0, 0) == doctest::Approx(0.3).epsilon(1e-15));

  // g = 0 maps to zero everywhere, never 0/0.
  a << 0.0;
  b << 0.0;
  out = group_shrink(MatrixStack({a, b}), 0.0);
  CHECK(out[0](0, 0) == 0.0);
  CHECK(std::isfinite(out[1](0, 0)));
}

TEST_CASE("group_shrink: single layer equals shrink bitwise") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_matrix(6, 6, rng);
    const double beta = rng.uniform();
    CHECK(group_shrink(MatrixStack({a}), beta)[0] == shrink(a, beta));
  }
}

TEST_CASE("group_shrink: rejects mismatched shapes and negative beta") {
  CHECK_THROWS_AS(group_shrink(MatrixStack({Matrix::Zero(2, 2), Matrix::Zero(3, 2)}), 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(group_shrink(MatrixStack({Matrix::Zero(2, 2)}), -1.0), InvalidArgument);
}

TEST_CASE("group_shrink: minimizes the group prox objective against grid search") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> a{2.0 * rng.normal(), 2.0 * rng.normal()};
    const double beta = 2.0 * rng.uniform();
    Matrix a0(1, 1), a1(1, 1);
    a0 << a[0];
    a1 << a[1];
    const auto z = group_shrink(MatrixStack({a0, a1}), beta);
    const std::vector<double> mine{z[0](0, 0), z[1](0, 0)};
    const auto grid = oracle::grid_prox(a, beta);
    CHECK(oracle::prox_objective(mine, a, beta) <= oracle::prox_objective(grid, a, beta) + 1e-4);
    CHECK(std::abs(mine[0] - grid[0]) <= 1e-4);
    CHECK(std::abs(mine[1] - grid[1]) <= 1e-4);
  }
}

TEST_CASE("MatrixStack: construction invariants") {
  CHECK_THROWS_AS(MatrixStack(std::vector<Matrix>{}), InvalidArgument);
  CHECK_THROWS_AS(MatrixStack({Matrix::Zero(2, 3), Matrix::Zero(2, 4)}), InvalidArgument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(MatrixStack({bad}), InvalidArgument);
  CHECK_THROWS_AS(MatrixStack({Matrix(0, 3)}), InvalidArgument);
  const MatrixStack s({Matrix::Zero(2, 3), Matrix::Zero(5, 3)});
  CHECK(s.size() == 2);
  CHECK(s.cols() == 3);
}

TEST_CASE("top_eigenpairs: examples") {
  auto e = top_eigenpairs(Matrix::Identity(3, 3), 2);
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(1.0));

  Matrix d = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();
  e = top_eigenpairs(d, 1);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK((e.vectors.col(0) - Vector::Unit(3, 0)).norm() < 1e-12);

  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 1e-3;
  CHECK_THROWS_AS(top_eigenpairs(asym, 1), InvalidArgument);
  CHECK_THROWS_AS(top_eigenpairs(Matrix::Identity(3, 3), 0), InvalidArgument);
  CHECK_THROWS_AS(top_eigenpairs(Matrix::Identity(3, 3), 4), InvalidArgument);
}

TEST_CASE("top_eigenpairs: matches a Jacobi oracle on random symmetric matrices") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = oracle::random_matrix(6, 6, rng);
    const Matrix m = g + g.transpose();
    const auto mine = top_eigenpairs(m, 6);
    const auto [values, vectors] = oracle::jacobi_eigen(m);
    const double scale = spectral_norm(m);
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(mine.values(i) - values(i)) <= 1e-8);
      const Vector v = mine.vectors.col(i);
      CHECK((m * v - mine.values(i) * v).norm() <= 1e-8 * scale);
      // Same eigenvector up to sign (eigenvalues of random matrices are simple).
      CHECK(std::abs(std::abs(v.dot(vectors.col(i))) - 1.0) <= 1e-8);
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      CHECK(v(arg) > 0.0);
    }
    const Matrix gram = mine.vectors.transpose() * mine.vectors;
    CHECK((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("pca_basis: examples") {
  Rng rng(23);
  Matrix line(2, 40);
  for (int j = 0; j < 40; ++j) line.col(j) = Vector::Constant(2, rng.normal() / std::sqrt(2.0));
  const Matrix b = pca_basis(line, 1);
  CHECK(std::abs(std::abs(b(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(b(0, 0) - b(1, 0)) < 1e-10);

  const Matrix cloud = oracle::random_matrix(2, 200, rng);
  const Matrix full = pca_basis(cloud, 2);
  CHECK((full * full.transpose() - Matrix::Identity(2, 2)).norm() < 1e-10);

  CHECK_THROWS_AS(pca_basis(cloud, 0), InvalidArgument);
  CHECK_THROWS_AS(pca_basis(cloud, 3), InvalidArgument);
}

TEST_CASE("pca_basis: reconstruction error equals the discarded eigenvalues") {
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = oracle::random_matrix(5, 20, rng);
    const Matrix b = pca_basis(x, 3);
    CHECK((b.transpose() * b - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
    const Matrix xc = x.colwise() - x.rowwise().mean();
    const Matrix cov = xc * xc.transpose() / 20.0;
    const auto [values, vectors] = oracle::jacobi_eigen(cov);
    const double discarded = values(3) + values(4);
    const double err = (xc - b * (b.transpose() * xc)).squaredNorm() / 20.0;
    CHECK(std::abs(err - discarded) <= 1e-8);
  }
}

TEST_CASE("pca_project: no mean subtraction") {
  Matrix b(3, 1);
  b << 1.0, 0.0, 0.0;
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const Matrix p = pca_project(b, x);
  CHECK(p(0, 0) == 1.0);
  CHECK(p(0, 1) == 2.0);
}

TEST_CASE("spectral_norm: examples and oracle") {
  CHECK(spectral_norm(Matrix::Identity(4, 4)) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = -5.0;
  CHECK(spectral_norm(d) == doctest::Approx(5.0).epsilon(1e-12));
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = oracle::random_matrix(4, 7, rng);
    const double ref = std::sqrt(top_eigenpairs(m.transpose() * m, 1).values(0));
    CHECK(std::abs(spectral_norm(m) - ref) <= 1e-8 * ref);
  }
}

TEST_CASE("principal cosine and column space") {
  Matrix a(2, 1), b(2, 1);
  a << 1, 0;
  b << 1, 1;
  b /= std::sqrt(2.0);
  CHECK(max_principal_cosine(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)));
  Matrix x(3, 3);
  x << 1, 2, 3, 0, 0, 0, 1, 2, 3;
  CHECK(column_space_basis(x).cols() == 1);
}
