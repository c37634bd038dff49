#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rogsure {

using CountMatrix = Eigen::MatrixXi;

struct EvalReport {
  double accuracy = 0.0;
  /// mapping[p] is the true id assigned to predicted id p (padded ids included).
  std::vector<int> mapping;
  /// counts[true][mapped pred], square of size max(k, k').
  CountMatrix confusion;
  std::vector<double> recall;  // per true class; 0 for classes with no members
};

/// Optimal one-to-one assignment for a square cost matrix (Hungarian method).
/// Returns assignment[row] = column, minimizing total cost.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Accuracy under the best one-to-one matching of predicted to true ids.
EvalReport clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// counts[true][mapping[pred]]. An empty mapping means identity.
CountMatrix confusion_matrix(const std::vector<int>& pred, const std::vector<int>& truth,
                             const std::vector<int>& mapping = {});

/// Fraction of points with mapping[pred] == truth.
double mapped_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                       const std::vector<int>& mapping);

}  // namespace rogsure
