#pragma once

#include <string>
#include <vector>

#include "rogsure/linalg.hpp"

namespace rogsure {

/// Per-cluster, per-modality subspace bases learned from training columns.
struct ClusterModel {
  int k = 0;
  /// bases[c][t]: orthonormal m(t) x d basis of cluster c in modality t.
  std::vector<std::vector<Matrix>> bases;
  std::vector<int> dims;             // requested d(t)
  std::vector<int> used_dims;        // d(t) after clipping
  bool normalize = true;             // test points are unit-normalized like training
  std::vector<std::string> diagnostics;

  std::size_t modalities() const { return dims.size(); }
};

struct Classification {
  int cluster = -1;
  Vector scores;  // one per cluster
};

/// PCA basis of every cluster's training columns in every modality.
///
/// d(t) larger than min(m(t), smallest cluster size - 1) is clipped and the
/// clipping is recorded in `diagnostics`. `train` is used as given; set
/// `normalize` to mirror the solver's column normalization on test points.
ClusterModel build_cluster_model(const ModalityStack& train, const std::vector<int>& labels,
                                 const std::vector<int>& dims, bool normalize = true,
                                 bool center = true);

/// score(c) = sum_t ||B_{c,t}^T x(t)||^2; the argmax wins, ties to the lowest id.
/// `x` holds one column per modality.
Classification classify_point(const ClusterModel& model, const std::vector<Vector>& x);

/// classify_point for every column of `data`.
std::vector<Classification> classify_batch(const ClusterModel& model, const ModalityStack& data);

std::vector<int> predicted_labels(const std::vector<Classification>& results);

}  // namespace rogsure
