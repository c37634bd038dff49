#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rogsure/solver.hpp"
#include "rogsure/synth.hpp"
#include "rogsure/theory.hpp"

using namespace rogsure;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

PolytopeSpec spec_of(std::vector<Matrix> points) {
  PolytopeSpec p;
  p.anchor = 0;
  for (Eigen::Index q = 0; q < points.front().cols(); ++q) p.members.push_back(static_cast<int>(q) + 1);
  p.points = std::move(points);
  return p;
}

/// Dense-sampling estimate of min over unit u of max_q ||(x_q(t)^T u_t)_t||.
double monte_carlo_inradius(const std::vector<Matrix>& pts, int samples, std::uint64_t seed) {
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    std::vector<Vector> u;
    double sq = 0.0;
    for (const auto& x : pts) {
      Vector b(x.rows());
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
      sq += b.squaredNorm();
      u.push_back(b);
    }
    double h = 0.0;
    for (Eigen::Index q = 0; q < pts.front().cols(); ++q) {
      double v = 0.0;
      for (std::size_t t = 0; t < pts.size(); ++t) {
        const double a = pts[t].col(q).dot(u[t]);
        v += a * a;
      }
      h = std::max(h, v);
    }
    best = std::min(best, std::sqrt(h / sq));
  }
  return best;
}

UoSSpec theorem_spec(std::uint64_t seed) {
  UoSSpec spec;
  spec.subspaces = 3;
  spec.ambient_dims = {20, 15};
  spec.intrinsic_dims = {2, 2};
  spec.points_per_cluster = {15, 15, 15};
  spec.min_angle = std::numbers::pi / 3;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("min_subspace_angle: analytic examples") {
  const Matrix e1 = col({1, 0}), e2 = col({0, 1}), d = col({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
  auto r = min_subspace_angle({{e1}, {e2}});
  CHECK(r.theta[0] == doctest::Approx(std::numbers::pi / 2));
  CHECK(r.cos_sq[0] == doctest::Approx(0.0));
  r = min_subspace_angle({{e1}, {e1}});
  CHECK(r.theta[0] == doctest::Approx(0.0));
  r = min_subspace_angle({{e1}, {d}});
  CHECK(r.theta[0] == doctest::Approx(std::numbers::pi / 4));
  CHECK(r.cos_sq[0] == doctest::Approx(0.5));
  CHECK(r.pair[0] == std::make_pair(0, 1));

  Matrix deficient(3, 2);
  deficient << 1, 2, 0, 0, 0, 0;
  CHECK_THROWS_AS(min_subspace_angle({{deficient}, {Matrix::Identity(3, 2)}}), InvalidArgument);
  CHECK_THROWS_AS(min_subspace_angle({{e1}}), InvalidArgument);
}

TEST_CASE("inradius_bounds: cross-polytope brackets 1/sqrt(2)") {
  const auto p = spec_of({Matrix::Identity(2, 2)});
  const auto b = inradius_bounds(p, {10000, 32, 1});
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(b.lower <= r + 1e-12);
  CHECK(b.upper >= r - 1e-12);
  CHECK(b.upper - b.lower <= 1e-3);
  CHECK(b.dimension == 2);
}

TEST_CASE("inradius_bounds: single point segment has r = 1") {
  const auto b = inradius_bounds(spec_of({col({0.6, 0.8, 0.0})}), {500, 4, 2});
  CHECK(b.lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inradius_bounds: duplicated modality against dense sampling") {
  // Cross-polytope: the duplicated instance keeps the single-modality value.
  {
    const auto single = inradius_bounds(spec_of({Matrix::Identity(2, 2)}), {4000, 32, 3});
    const auto dup = inradius_bounds(spec_of({Matrix::Identity(2, 2), Matrix::Identity(2, 2)}),
                                     {4000, 32, 3});
    CHECK(dup.lower == doctest::Approx(single.lower).epsilon(1e-6));
    CHECK(dup.upper - dup.lower <= 1e-3);
  }
  // Three directions 60 degrees apart. Alone they span a regular hexagon of
  // inradius sqrt(3)/2, which the upper bound finds; the certified lower bound
  // is a relaxation and only reaches 1/sqrt(2) there. Duplicated, the inradius
  // is exactly 1/sqrt(2): the tight frame makes both bounds meet, and a
  // 10^6-sample estimate agrees.
  Matrix x(2, 3);
  for (int q = 0; q < 3; ++q) {
    const double a = q * std::numbers::pi / 3;
    x(0, q) = std::cos(a);
    x(1, q) = std::sin(a);
  }
  const auto single = inradius_bounds(spec_of({x}), {4000, 32, 4});
  const auto dup = inradius_bounds(spec_of({x, x}), {4000, 32, 4});
  const double mc = monte_carlo_inradius({x, x}, 1000000, 5);
  CHECK(dup.lower <= mc + 1e-12);
  CHECK(dup.upper <= mc + 1e-9);
  CHECK(mc - dup.lower <= 5e-3);
  CHECK(single.upper == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-3));
  CHECK(single.lower <= std::sqrt(3.0) / 2 + 1e-12);
  CHECK(single.lower >= 1.0 / std::sqrt(2.0) - 1e-3);
  CHECK(dup.upper <= single.upper - 0.1);
  CHECK(dup.lower == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("inradius_bounds: ordering, r <= 1, monotone in budget, validation") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = normalize_columns(oracle::random_matrix(4, 6, rng));
    const Matrix b = normalize_columns(oracle::random_matrix(3, 6, rng));
    const auto p = spec_of({a, b});
    double prev_width = 2.0;
    for (int budget : {100, 400, 1600}) {
      const auto bd = inradius_bounds(p, {budget, 8, 11});
      CHECK(bd.lower <= bd.upper);
      CHECK(bd.upper <= 1.0);
      CHECK(bd.upper - bd.lower <= prev_width + 1e-15);
      prev_width = bd.upper - bd.lower;
    }
  }
  CHECK_THROWS_AS(inradius_bounds(spec_of({Matrix::Identity(2, 2)}), {0, 4, 1}), InvalidArgument);
  CHECK_THROWS_AS(inradius_bounds(spec_of({2.0 * Matrix::Identity(2, 2)}), {10, 4, 1}),
                  InvalidArgument);
}

TEST_CASE("evaluate_theorem: orthogonal and near-identical subspaces") {
  // Two orthogonal planes in R^4, points spread around each plane.
  Matrix x(4, 16);
  std::vector<int> labels;
  for (int j = 0; j < 16; ++j) {
    const int c = j < 8 ? 0 : 1;
    const double a = (j % 8) * std::numbers::pi / 8;
    x.col(j).setZero();
    x(2 * c, j) = std::cos(a);
    x(2 * c + 1, j) = std::sin(a);
    labels.push_back(c);
  }
  UoSGroundTruth gt;
  gt.labels = labels;
  gt.clean = MatrixStack({x});
  gt.observed = gt.clean;
  gt.corruption_mask = {Matrix::Zero(4, 16)};
  gt.bases = {{Matrix::Identity(4, 4).leftCols(2)}, {Matrix::Identity(4, 4).rightCols(2)}};
  auto rep = evaluate_theorem(gt, {500, 8, 1});
  CHECK(rep.max_cos_sq == doctest::Approx(0.0));
  CHECK(rep.feasible);
  CHECK(rep.condition_holds);
  CHECK(rep.margin > 0.0);

  // Nearly identical subspaces.
  UoSSpec spec;
  spec.subspaces = 2;
  spec.ambient_dims = {3};
  spec.intrinsic_dims = {2};
  spec.points_per_cluster = {10, 10};
  spec.seed = 4;
  auto near = generate_uos(spec);
  near.bases[1][0] = near.bases[0][0];
  near.bases[1][0].col(0) = (near.bases[0][0].col(0) + 1e-3 * near.bases[1][0].col(1)).normalized();
  rep = evaluate_theorem(near, {300, 4, 1});
  CHECK(rep.max_cos_sq > 0.99);
  CHECK_FALSE(rep.condition_holds);

  spec.corruption_fraction = 0.1;
  spec.corruption_amplitude = 1.0;
  CHECK_THROWS_AS(evaluate_theorem(generate_uos(spec), {100, 4, 1}), InvalidArgument);
}

TEST_CASE("evaluate_theorem: theta_min = 60 degree instances, verdict monotone in budget") {
  int holds = 0;
  for (int s = 0; s < 20; ++s) {
    const auto gt = generate_uos(theorem_spec(500 + static_cast<std::uint64_t>(s)));
    const auto rep = evaluate_theorem(gt, {1000, 16, 9});
    MESSAGE("instance " << s << " margin " << rep.margin);
    CHECK(rep.min_r_sq_lower <= rep.min_r_sq_upper);
    if (rep.condition_holds) {
      ++holds;
      if (s < 3) CHECK(evaluate_theorem(gt, {3000, 16, 9}).condition_holds);
    }
  }
  CHECK(holds >= 18);
}

TEST_CASE("check_detection_property") {
  const std::vector<int> labels{0, 0, 1, 1};
  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = w(1, 0) = 1.0;
  w(2, 3) = w(3, 2) = 0.5;
  auto rep = check_detection_property(MatrixStack({w}), labels, 1e-5);
  CHECK(rep.holds);
  CHECK(rep.worst_violation == 0.0);

  w(0, 2) = 0.5;
  rep = check_detection_property(MatrixStack({w}), labels, 1e-5);
  CHECK_FALSE(rep.holds);
  CHECK(rep.worst_violation == 0.5);
  CHECK(rep.row == 0);
  CHECK(rep.col == 2);

  // Simultaneous permutation of Omega and labels preserves the verdict.
  const std::vector<int> perm{2, 0, 3, 1};
  Matrix pw(4, 4);
  std::vector<int> pl(4);
  for (int i = 0; i < 4; ++i) {
    pl[i] = labels[perm[i]];
    for (int j = 0; j < 4; ++j) pw(i, j) = w(perm[i], perm[j]);
  }
  const auto prep = check_detection_property(MatrixStack({pw}), pl, 1e-5);
  CHECK(prep.holds == rep.holds);
  CHECK(prep.worst_violation == rep.worst_violation);
}

TEST_CASE("fit_clean on certified instances satisfies the detection property") {
  for (int s = 0; s < 3; ++s) {
    const auto gt = generate_uos(theorem_spec(700 + static_cast<std::uint64_t>(s)));
    const auto rep = evaluate_theorem(gt, {1000, 16, 3});
    if (!rep.condition_holds) continue;
    SolverConfig cfg;
    cfg.rho = 0.0;
    const auto res = fit_clean(gt.clean, cfg);
    CHECK(check_detection_property(res.W, gt.labels, 1e-5).holds);
  }
}
