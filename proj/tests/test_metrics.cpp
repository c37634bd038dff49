#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rogsure/metrics.hpp"

using namespace rogsure;

TEST_CASE("clustering_accuracy: identity and relabeling") {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2, 2};
  CHECK(clustering_accuracy(truth, truth).accuracy == 1.0);
  const std::vector<int> renamed{2, 2, 0, 0, 1, 1, 1};
  const auto r = clustering_accuracy(renamed, truth);
  CHECK(r.accuracy == 1.0);
  CHECK(r.mapping[2] == 0);
  CHECK(r.mapping[0] == 1);
  CHECK_THROWS_AS(clustering_accuracy({0, 1}, {0}), InvalidArgument);
}

TEST_CASE("clustering_accuracy: factorial brute-force oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> pred(8), truth(8);
    for (int i = 0; i < 8; ++i) {
      pred[i] = static_cast<int>(rng.below(3));
      truth[i] = static_cast<int>(rng.below(3));
    }
    // Force ids 0..2 to appear in pred so the oracle's id space matches.
    pred[0] = 0;
    pred[1] = 1;
    pred[2] = 2;
    const double acc = clustering_accuracy(pred, truth).accuracy;
    CHECK(acc == doctest::Approx(oracle::permutation_accuracy(pred, truth, 3)));
    CHECK(acc == doctest::Approx(clustering_accuracy(truth, pred).accuracy));
  }
}

TEST_CASE("clustering_accuracy: unequal cluster counts are padded") {
  const std::vector<int> truth{0, 0, 0, 1, 1, 1};
  const std::vector<int> pred{0, 0, 1, 2, 2, 2};
  const auto r = clustering_accuracy(pred, truth);
  CHECK(r.accuracy == doctest::Approx(5.0 / 6.0));
  CHECK(r.confusion.rows() == 3);
}

TEST_CASE("random predictions sit near 1/k") {
  Rng rng(2);
  const int n = 600, k = 3;
  std::vector<int> truth(n), pred(n);
  for (int i = 0; i < n; ++i) {
    truth[i] = i % k;
    pred[i] = static_cast<int>(rng.below(k));
  }
  const double acc = clustering_accuracy(pred, truth).accuracy;
  // Each matching's accuracy is ~ Binomial(n, 1/k) / n. The best of k! = 6
  // matchings is at least any one of them and exceeds the mean by about
  // sqrt(2 ln 6) < 2 sigma on average; allow 3 sigma on top.
  const double sigma = std::sqrt(n * (1.0 / k) * (1.0 - 1.0 / k)) / n;
  CHECK(acc >= 1.0 / k - 3 * sigma);
  CHECK(acc <= 1.0 / k + 5 * sigma);
}

TEST_CASE("confusion_matrix") {
  const std::vector<int> truth{0, 0, 1, 1, 1, 2};
  CountMatrix c = confusion_matrix(truth, truth);
  CHECK(c(0, 0) == 2);
  CHECK(c(1, 1) == 3);
  CHECK(c(2, 2) == 1);
  CHECK(c.sum() == c.trace());

  c = confusion_matrix(std::vector<int>(6, 1), truth);
  CHECK(c.col(1).sum() == 6);
  CHECK(c.col(0).sum() == 0);

  Rng rng(3);
  std::vector<int> pred(6);
  for (int& p : pred) p = static_cast<int>(rng.below(3));
  c = confusion_matrix(pred, truth);
  CHECK(c.row(0).sum() == 2);
  CHECK(c.row(1).sum() == 3);
  CHECK(c.row(2).sum() == 1);

  const auto r = clustering_accuracy(pred, truth);
  const CountMatrix mapped = confusion_matrix(pred, truth, r.mapping);
  CHECK(static_cast<double>(mapped.trace()) / 6.0 == doctest::Approx(r.accuracy));
  CHECK(mapped_accuracy(pred, truth, r.mapping) == doctest::Approx(r.accuracy));
}

TEST_CASE("solve_assignment: small exhaustive check") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd cost(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) cost(i, j) = rng.uniform();
    const auto a = solve_assignment(cost);
    double mine = 0.0;
    for (int i = 0; i < 4; ++i) mine += cost(i, a[static_cast<std::size_t>(i)]);
    std::vector<int> perm{0, 1, 2, 3};
    double best = 1e9;
    do {
      double v = 0.0;
      for (int i = 0; i < 4; ++i) v += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(mine == doctest::Approx(best).epsilon(1e-12));
  }
}
