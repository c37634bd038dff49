#include "rogsure/classify.hpp"

#include <algorithm>

namespace rogsure {

ClusterModel build_cluster_model(const ModalityStack& train, const std::vector<int>& labels,
                                 const std::vector<int>& dims, bool normalize, bool center) {
  if (static_cast<Eigen::Index>(labels.size()) != train.cols()) {
    throw InvalidArgument("build_cluster_model: label count does not match the training data");
  }
  if (dims.size() != train.size()) {
    throw InvalidArgument("build_cluster_model: one dimension per modality is required");
  }
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument("build_cluster_model: negative cluster id");
    k = std::max(k, l + 1);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  std::size_t smallest = labels.size();
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) {
      throw InvalidArgument("build_cluster_model: cluster " + std::to_string(c) +
                            " has no training points");
    }
    smallest = std::min(smallest, members[c].size());
  }

  ClusterModel model;
  model.k = k;
  model.dims = dims;
  model.normalize = normalize;
  for (std::size_t t = 0; t < train.size(); ++t) {
    if (dims[t] < 1) throw InvalidArgument("build_cluster_model: dimensions must be positive");
    // A centered cluster of s points spans at most s - 1 directions.
    const int room = center ? static_cast<int>(smallest) - 1 : static_cast<int>(smallest);
    const int cap = std::max(1, std::min(static_cast<int>(train[t].rows()), room));
    const int d = std::min(dims[t], cap);
    if (d < dims[t]) {
      model.diagnostics.push_back("modality " + std::to_string(t) + ": d clipped from " +
                                  std::to_string(dims[t]) + " to " + std::to_string(d));
    }
    model.used_dims.push_back(d);
  }

  std::vector<Matrix> data;
  for (const auto& x : train) data.push_back(normalize ? normalize_columns(x) : x);
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::vector<Matrix> per_modality;
    for (std::size_t t = 0; t < data.size(); ++t) {
      Matrix cols(data[t].rows(), static_cast<Eigen::Index>(members[c].size()));
      for (std::size_t i = 0; i < members[c].size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = data[t].col(members[c][i]);
      }
      per_modality.push_back(pca_basis(cols, model.used_dims[t], center));
    }
    model.bases.push_back(std::move(per_modality));
  }
  return model;
}

Classification classify_point(const ClusterModel& model, const std::vector<Vector>& x) {
  if (x.size() != model.modalities()) {
    throw InvalidArgument("classify_point: expected " + std::to_string(model.modalities()) +
                          " modalities, got " + std::to_string(x.size()));
  }
  Classification out;
  out.scores = Vector::Zero(model.k);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const Eigen::Index m = model.bases.front()[t].rows();
    if (x[t].size() != m) {
      throw InvalidArgument("classify_point: modality " + std::to_string(t) + " has dimension " +
                            std::to_string(x[t].size()) + ", model expects " + std::to_string(m));
    }
    Vector v = x[t];
    if (model.normalize && v.norm() > 0.0) v.normalize();
    for (int c = 0; c < model.k; ++c) {
      out.scores(c) += (model.bases[static_cast<std::size_t>(c)][t].transpose() * v).squaredNorm();
    }
  }
  out.cluster = 0;
  for (int c = 1; c < model.k; ++c) {
    if (out.scores(c) > out.scores(out.cluster)) out.cluster = c;
  }
  return out;
}

std::vector<Classification> classify_batch(const ClusterModel& model, const ModalityStack& data) {
  std::vector<Classification> out;
  out.reserve(static_cast<std::size_t>(data.cols()));
  std::vector<Vector> x(data.size());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (std::size_t t = 0; t < data.size(); ++t) x[t] = data[t].col(j);
    out.push_back(classify_point(model, x));
  }
  return out;
}

std::vector<int> predicted_labels(const std::vector<Classification>& results) {
  std::vector<int> labels;
  labels.reserve(results.size());
  for (const auto& r : results) labels.push_back(r.cluster);
  return labels;
}

}  // namespace rogsure
