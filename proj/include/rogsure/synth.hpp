#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rogsure/linalg.hpp"

namespace rogsure {

/// Recipe for a multimodal union-of-subspaces dataset.
struct UoSSpec {
  int subspaces = 2;                     // P
  std::vector<int> ambient_dims;         // m(t), one entry per modality
  std::vector<int> intrinsic_dims;       // d(t), shared by every subspace of modality t
  std::vector<int> points_per_cluster;   // n_I, one entry per subspace
  double corruption_fraction = 0.0;      // phi
  double corruption_amplitude = 0.0;     // a
  std::optional<double> min_angle;       // theta_min in radians
  std::uint64_t seed = 0;

  std::size_t modalities() const { return ambient_dims.size(); }
  void validate() const;
};

struct UoSGroundTruth {
  std::vector<int> labels;
  /// bases[I][t]: orthonormal m(t) x d(t) basis of subspace I in modality t.
  std::vector<std::vector<Matrix>> bases;
  /// Per modality, 1.0 where a corruption was planted, else 0.0.
  std::vector<Matrix> corruption_mask;
  ModalityStack clean;
  ModalityStack observed;
};

/// Draws a dataset. Clean columns are unit length; corruption entries are
/// +-a on a Bernoulli(phi) mask. Labels are shared across modalities and
/// laid out in contiguous blocks. Throws std::runtime_error when the angle
/// target is not met within 1000 redraws.
UoSGroundTruth generate_uos(const UoSSpec& spec);

struct DataPartition {
  std::vector<int> indices;  // columns of the source dataset, ascending
  std::vector<int> labels;
  ModalityStack observed;
  ModalityStack clean;
};

struct TrainTestSplit {
  DataPartition train;
  DataPartition test;
};

/// Stratified column split: `train_per_cluster` random members of every label
/// go to the first list, the rest to the second. Both lists are sorted.
std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& labels,
                                                              int train_per_cluster,
                                                              std::uint64_t seed);

/// Stratified split taking `train_per_cluster` random columns of every cluster
/// for training and the rest for testing.
TrainTestSplit split_train_test(const UoSGroundTruth& gt, int train_per_cluster,
                                std::uint64_t seed);

/// Columns `indices` of every layer.
ModalityStack select_columns(const ModalityStack& data, const std::vector<int>& indices);

}  // namespace rogsure
