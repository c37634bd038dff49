#include "rogsure/metrics.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "rogsure/linalg.hpp"

namespace rogsure {
namespace {

int label_count(const std::vector<int>& labels, const std::string& what) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument(what + ": negative label");
    k = std::max(k, l + 1);
  }
  return k;
}

void require_same_length(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument("metrics: " + std::to_string(pred.size()) + " predictions for " +
                          std::to_string(truth.size()) + " true labels");
  }
}

}  // namespace

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path formulation with potentials, 1-based internally.
  const auto n = static_cast<int>(cost.rows());
  if (cost.cols() != n) {
    throw InvalidArgument("solve_assignment: cost matrix must be square");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return assignment;
}

CountMatrix confusion_matrix(const std::vector<int>& pred, const std::vector<int>& truth,
                             const std::vector<int>& mapping) {
  require_same_length(pred, truth);
  const int kp = label_count(pred, "confusion_matrix");
  const int kt = label_count(truth, "confusion_matrix");
  int size = std::max(kp, kt);
  for (int m : mapping) size = std::max(size, m + 1);
  if (!mapping.empty() && static_cast<int>(mapping.size()) < kp) {
    throw InvalidArgument("confusion_matrix: mapping does not cover every predicted id");
  }
  CountMatrix counts = CountMatrix::Zero(size, size);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int mapped = mapping.empty() ? pred[i] : mapping[static_cast<std::size_t>(pred[i])];
    ++counts(truth[i], mapped);
  }
  return counts;
}

double mapped_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                       const std::vector<int>& mapping) {
  require_same_length(pred, truth);
  if (pred.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = static_cast<std::size_t>(pred[i]);
    if (p < mapping.size() && mapping[p] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

EvalReport clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  require_same_length(pred, truth);
  const int kp = label_count(pred, "clustering_accuracy");
  const int kt = label_count(truth, "clustering_accuracy");
  const int size = std::max({kp, kt, 1});

  // overlap(p, t): points predicted p with true label t
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    overlap(pred[i], truth[i]) += 1.0;
  }
  const double top = overlap.maxCoeff();
  const Eigen::MatrixXd cost = (Eigen::MatrixXd::Constant(size, size, top) - overlap).eval();

  EvalReport report;
  report.mapping = solve_assignment(cost);
  report.confusion = confusion_matrix(pred, truth, report.mapping);
  if (report.confusion.rows() < size) {
    CountMatrix padded = CountMatrix::Zero(size, size);
    padded.topLeftCorner(report.confusion.rows(), report.confusion.cols()) = report.confusion;
    report.confusion = padded;
  }
  report.accuracy = pred.empty() ? 0.0
                                 : static_cast<double>(report.confusion.trace()) /
                                       static_cast<double>(pred.size());
  for (int t = 0; t < size; ++t) {
    const int members = report.confusion.row(t).sum();
    report.recall.push_back(members > 0 ? static_cast<double>(report.confusion(t, t)) / members
                                        : 0.0);
  }
  return report;
}

}  // namespace rogsure
