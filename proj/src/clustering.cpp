#include "rogsure/clustering.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rogsure/rng.hpp"

namespace rogsure {
namespace {

constexpr int kMaxLloydIterations = 300;
constexpr double kGapTolerance = 1e-10;

void require_square(const Matrix& m, const std::string& what) {
  require_valid(m, what);
  if (m.rows() != m.cols()) {
    throw InvalidArgument(what + ": matrix must be square");
  }
}

int nearest(const Matrix& centroids, const Eigen::RowVectorXd& p, double& dist_sq) {
  int best = 0;
  dist_sq = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - p).squaredNorm();
    if (d < dist_sq) {
      dist_sq = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Matrix seed_centroids(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i) = (points.row(i) - centroids.row(0)).squaredNorm();
  }
  for (int c = 1; c < k; ++c) {
    const double total = dist.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist(i);
        if (acc > target && dist(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist(i) = std::min(dist(i), (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& points, Matrix centroids) {
  const Eigen::Index n = points.rows();
  const auto k = static_cast<int>(centroids.rows());
  KMeansResult out;
  out.labels.assign(static_cast<std::size_t>(n), -1);

  auto assign = [&]() {
    bool changed = false;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = 0.0;
      const int c = nearest(centroids, points.row(i), d);
      total += d;
      if (out.labels[static_cast<std::size_t>(i)] != c) {
        out.labels[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    return std::pair{changed, total};
  };

  auto [changed, total] = assign();
  out.wcss_trace.push_back(total);
  for (int it = 0; it < kMaxLloydIterations && changed; ++it) {
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = out.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      // Empty clusters keep their previous centroid.
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
    std::tie(changed, total) = assign();
    out.wcss_trace.push_back(total);
  }
  out.centroids = std::move(centroids);
  out.wcss = wcss(points, out.labels, k);
  return out;
}

}  // namespace

Matrix affinity(const Matrix& w, AffinityRule rule) {
  require_square(w, "affinity");
  if (rule == AffinityRule::kRaw) {
    return w + w.transpose();
  }
  const Matrix mag = w.cwiseAbs();
  return mag + mag.transpose();
}

Matrix normalized_laplacian_similarity(const Matrix& a) {
  require_square(a, "normalized_laplacian_similarity");
  if ((a.array() < 0.0).any()) {
    throw InvalidArgument("normalized_laplacian_similarity: affinity has negative entries");
  }
  const Vector degree = a.rowwise().sum();
  Vector inv_sqrt(degree.size());
  for (Eigen::Index i = 0; i < degree.size(); ++i) {
    inv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
  }
  Matrix g = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
  // Exact symmetry for the eigen solver.
  return 0.5 * (g + g.transpose());
}

double wcss(const Matrix& points, const std::vector<int>& labels, int k) {
  Matrix sums = Matrix::Zero(k, points.cols());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    total += (points.row(i) - sums.row(c) / counts[static_cast<std::size_t>(c)]).squaredNorm();
  }
  return total;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts) {
  require_valid(points, "kmeans");
  if (k < 1 || k > points.rows()) {
    throw InvalidArgument("kmeans: k must lie in [1, number of points]");
  }
  if (restarts < 1) {
    throw InvalidArgument("kmeans: restarts must be at least 1");
  }
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, "kmeans/restart/" + std::to_string(r)));
    KMeansResult run = lloyd(points, seed_centroids(points, k, rng));
    if (run.wcss < best.wcss) {
      best = std::move(run);
      best.restart_used = r;
    }
  }
  return best;
}

ClusterAssignment spectral_cluster(const Matrix& w, int k, std::uint64_t seed,
                                   const SpectralOptions& options) {
  require_square(w, "spectral_cluster");
  const Eigen::Index n = w.rows();
  if (k < 1 || k > n) {
    throw InvalidArgument("spectral_cluster: k must lie in [1, n]");
  }
  const Matrix g = normalized_laplacian_similarity(affinity(w, options.affinity));

  ClusterAssignment out;
  out.k = k;
  const Eigen::Index want = std::min<Eigen::Index>(k + 1, n);
  EigenPairs eig;
  if (options.convention == EmbeddingConvention::kSimilarityLargest) {
    eig = top_eigenpairs(g, want);
  } else {
    // Smallest eigenvalues of I - G are the largest of G - I.
    const Matrix neg_laplacian = g - Matrix::Identity(n, n);
    eig = top_eigenpairs(neg_laplacian, want);
    eig.values = -eig.values;
  }
  out.eigenvalues = eig.values.head(k);
  if (want > k) {
    out.degenerate_gap = std::abs(eig.values(k - 1) - eig.values(k)) <= kGapTolerance;
  }
  out.embedding = eig.vectors.leftCols(k);

  Matrix points = out.embedding;
  if (options.normalize_rows) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double nrm = points.row(i).norm();
      if (nrm > 0.0) points.row(i) /= nrm;
    }
  }
  KMeansResult km = kmeans(points, k, derive_seed(seed, "spectral/kmeans"), options.restarts);
  out.labels = std::move(km.labels);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int l : out.labels) ++counts[static_cast<std::size_t>(l)];
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) out.empty_clusters.push_back(c);
  }
  return out;
}

}  // namespace rogsure
