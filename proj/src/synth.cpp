#include "rogsure/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rogsure/rng.hpp"

namespace rogsure {
namespace {

constexpr int kMaxRedraws = 1000;

Matrix random_orthonormal(Eigen::Index m, Eigen::Index d, Rng& rng) {
  Matrix g(m, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      g(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(m, d);
}

DataPartition make_partition(const UoSGroundTruth& gt, std::vector<int> indices) {
  std::sort(indices.begin(), indices.end());
  DataPartition part;
  for (int idx : indices) {
    part.labels.push_back(gt.labels[static_cast<std::size_t>(idx)]);
  }
  part.observed = select_columns(gt.observed, indices);
  part.clean = select_columns(gt.clean, indices);
  part.indices = std::move(indices);
  return part;
}

}  // namespace

void UoSSpec::validate() const {
  if (subspaces < 1) throw InvalidArgument("synth: at least one subspace is required");
  const std::size_t T = ambient_dims.size();
  if (T < 1) throw InvalidArgument("synth: at least one modality is required");
  if (intrinsic_dims.size() != T) {
    throw InvalidArgument("synth: intrinsic_dims must have one entry per modality");
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (intrinsic_dims[t] < 1 || intrinsic_dims[t] >= ambient_dims[t]) {
      throw InvalidArgument("synth: need 1 <= d(t) < m(t) for modality " + std::to_string(t));
    }
  }
  if (points_per_cluster.size() != static_cast<std::size_t>(subspaces)) {
    throw InvalidArgument("synth: points_per_cluster must have one entry per subspace");
  }
  for (int c : points_per_cluster) {
    if (c < 1) throw InvalidArgument("synth: every cluster needs at least one point");
  }
  if (!(corruption_fraction >= 0.0 && corruption_fraction <= 1.0)) {
    throw InvalidArgument("synth: corruption fraction must lie in [0, 1]");
  }
  if (!(corruption_amplitude >= 0.0)) {
    throw InvalidArgument("synth: corruption amplitude must be nonnegative");
  }
  if (min_angle && !(*min_angle >= 0.0 && *min_angle <= std::numbers::pi / 2)) {
    throw InvalidArgument("synth: min_angle must lie in [0, pi/2]");
  }
}

UoSGroundTruth generate_uos(const UoSSpec& spec) {
  spec.validate();
  const std::size_t T = spec.modalities();
  const auto P = static_cast<std::size_t>(spec.subspaces);
  Rng basis_rng(derive_seed(spec.seed, "synth/bases"));
  Rng point_rng(derive_seed(spec.seed, "synth/points"));
  Rng noise_rng(derive_seed(spec.seed, "synth/corruption"));

  UoSGroundTruth gt;
  gt.bases.assign(P, std::vector<Matrix>(T));
  for (std::size_t t = 0; t < T; ++t) {
    const double max_cos = spec.min_angle ? std::cos(*spec.min_angle) : 1.0;
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRedraws && !accepted; ++attempt) {
      for (std::size_t I = 0; I < P; ++I) {
        gt.bases[I][t] = random_orthonormal(spec.ambient_dims[t], spec.intrinsic_dims[t], basis_rng);
      }
      accepted = true;
      if (!spec.min_angle) break;
      for (std::size_t a = 0; a < P && accepted; ++a) {
        for (std::size_t b = a + 1; b < P && accepted; ++b) {
          // Cosine comparison: a larger cosine means a smaller angle.
          accepted = max_principal_cosine(gt.bases[a][t], gt.bases[b][t]) <= max_cos;
        }
      }
    }
    if (!accepted) {
      throw std::runtime_error("synth: could not meet the minimum principal angle in modality " +
                               std::to_string(t) + " after " + std::to_string(kMaxRedraws) +
                               " redraws");
    }
  }

  int n = 0;
  for (int c : spec.points_per_cluster) n += c;
  for (std::size_t I = 0; I < P; ++I) {
    gt.labels.insert(gt.labels.end(), static_cast<std::size_t>(spec.points_per_cluster[I]),
                     static_cast<int>(I));
  }

  std::vector<Matrix> clean(T), observed(T);
  for (std::size_t t = 0; t < T; ++t) {
    const int m = spec.ambient_dims[t];
    const int d = spec.intrinsic_dims[t];
    clean[t].resize(m, n);
    for (int j = 0; j < n; ++j) {
      Vector coeff(d);
      for (int i = 0; i < d; ++i) coeff(i) = point_rng.normal();
      Vector x = gt.bases[static_cast<std::size_t>(gt.labels[j])][t] * coeff;
      clean[t].col(j) = x / x.norm();
    }
    Matrix mask = Matrix::Zero(m, n);
    observed[t] = clean[t];
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) {
        if (noise_rng.bernoulli(spec.corruption_fraction)) {
          mask(i, j) = 1.0;
          observed[t](i, j) += spec.corruption_amplitude * noise_rng.sign();
        }
      }
    }
    gt.corruption_mask.push_back(std::move(mask));
  }
  gt.clean = ModalityStack(std::move(clean));
  gt.observed = ModalityStack(std::move(observed));
  return gt;
}

ModalityStack select_columns(const ModalityStack& data, const std::vector<int>& indices) {
  std::vector<Matrix> out;
  for (const auto& layer : data) {
    Matrix sub(layer.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (indices[k] < 0 || indices[k] >= layer.cols()) {
        throw InvalidArgument("select_columns: index out of range");
      }
      sub.col(static_cast<Eigen::Index>(k)) = layer.col(indices[k]);
    }
    out.push_back(std::move(sub));
  }
  return ModalityStack(std::move(out));
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& labels,
                                                              int train_per_cluster,
                                                              std::uint64_t seed) {
  if (train_per_cluster < 1) {
    throw InvalidArgument("split_train_test: train_per_cluster must be positive");
  }
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument("split_train_test: negative label");
    k = std::max(k, l + 1);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  Rng rng(derive_seed(seed, "split"));
  std::vector<int> train, test;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& idx = members[c];
    if (static_cast<int>(idx.size()) <= train_per_cluster) {
      throw InvalidArgument("split_train_test: cluster " + std::to_string(c) + " has " +
                            std::to_string(idx.size()) + " points, need more than " +
                            std::to_string(train_per_cluster));
    }
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::swap(idx[i], idx[rng.below(i + 1)]);
    }
    train.insert(train.end(), idx.begin(), idx.begin() + train_per_cluster);
    test.insert(test.end(), idx.begin() + train_per_cluster, idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

TrainTestSplit split_train_test(const UoSGroundTruth& gt, int train_per_cluster,
                                std::uint64_t seed) {
  auto [train, test] = stratified_split(gt.labels, train_per_cluster, seed);
  return {make_partition(gt, std::move(train)), make_partition(gt, std::move(test))};
}

}  // namespace rogsure
