#pragma once

#include <cstdint>
#include <vector>

#include "rogsure/linalg.hpp"

namespace rogsure {

enum class AffinityRule {
  kMagnitude,  // |W| + |W|^T
  kRaw,        // W + W^T, requires the result to be nonnegative downstream
};

enum class EmbeddingConvention {
  kSimilarityLargest,  // largest eigenvalues of D^-1/2 A D^-1/2
  kLaplacianSmallest,  // smallest eigenvalues of I - D^-1/2 A D^-1/2
};

struct SpectralOptions {
  AffinityRule affinity = AffinityRule::kMagnitude;
  EmbeddingConvention convention = EmbeddingConvention::kSimilarityLargest;
  bool normalize_rows = false;
  int restarts = 20;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;  // k x dim
  double wcss = 0.0;
  int restart_used = 0;
  /// WCSS after initialization and after every Lloyd iteration of the chosen restart.
  std::vector<double> wcss_trace;
};

struct ClusterAssignment {
  std::vector<int> labels;
  int k = 0;
  Matrix embedding;       // n x k, rows of S
  Vector eigenvalues;     // the k selected eigenvalues
  bool degenerate_gap = false;  // k-th and (k+1)-th eigenvalues coincide
  std::vector<int> empty_clusters;
};

Matrix affinity(const Matrix& w, AffinityRule rule = AffinityRule::kMagnitude);

/// D^-1/2 A D^-1/2 with D the row sums of A. Rows of degree zero map to zero.
Matrix normalized_laplacian_similarity(const Matrix& a);

/// Best of `restarts` k-means runs (k-means++ seeding, Lloyd iterations) on the
/// rows of `points`. Nearest-centroid ties go to the lowest centroid index and
/// WCSS ties between restarts to the lowest restart index.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts = 20);

/// Within-cluster sum of squares of `labels` with centroids at cluster means.
double wcss(const Matrix& points, const std::vector<int>& labels, int k);

ClusterAssignment spectral_cluster(const Matrix& w, int k, std::uint64_t seed,
                                   const SpectralOptions& options = {});

}  // namespace rogsure
