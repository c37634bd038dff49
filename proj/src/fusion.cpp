#include "rogsure/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rogsure {
namespace {

void require_square(const Matrix& w, const std::string& what) {
  require_valid(w, what);
  if (w.rows() != w.cols()) {
    throw InvalidArgument(what + ": matrix must be square");
  }
}

void require_fusable(const std::vector<Matrix>& ws, const std::string& what) {
  if (ws.size() < 2) {
    throw InvalidArgument(what + ": fusion needs at least two matrices");
  }
  for (std::size_t t = 0; t < ws.size(); ++t) {
    require_square(ws[t], what);
    if (ws[t].rows() != ws.front().rows()) {
      throw InvalidArgument(what + ": matrix " + std::to_string(t) + " has a different size");
    }
  }
}

}  // namespace

double median_magnitude(const Matrix& w, MedianDomain domain) {
  require_square(w, "median_magnitude");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(w.size()));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const double mag = std::abs(w(i, j));
      if (domain != MedianDomain::kAll && i == j) continue;
      if (domain == MedianDomain::kNonzero && mag == 0.0) continue;
      values.push_back(mag);
    }
  }
  if (values.empty()) {
    return 0.0;
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Matrix binarize_by_median(const Matrix& w, MedianDomain domain) {
  const double threshold = median_magnitude(w, domain);
  Matrix out = (w.array().abs() > threshold).cast<double>().matrix();
  out.diagonal().setZero();
  return out;
}

FusedCoefficients fuse_product(const std::vector<Matrix>& ws) {
  require_fusable(ws, "fuse_product");
  for (std::size_t t = 0; t < ws.size(); ++t) {
    if (!(ws[t].array() == 0.0 || ws[t].array() == 1.0).all()) {
      throw InvalidArgument("fuse_product: matrix " + std::to_string(t) +
                            " is not binary; binarize it first");
    }
  }
  FusedCoefficients out;
  out.total = ws.front();
  for (std::size_t t = 1; t < ws.size(); ++t) {
    out.total = out.total.cwiseProduct(ws[t]);
  }
  out.total.diagonal().setZero();
  out.method = FusionMethod::kProduct;
  out.source_count = ws.size();
  return out;
}

FusedCoefficients fuse_sum(const std::vector<Matrix>& ws,
                           const std::optional<std::vector<double>>& weights) {
  require_fusable(ws, "fuse_sum");
  if (weights && weights->size() != ws.size()) {
    throw InvalidArgument("fuse_sum: " + std::to_string(weights->size()) + " weights for " +
                          std::to_string(ws.size()) + " matrices");
  }
  FusedCoefficients out;
  out.total = Matrix::Zero(ws.front().rows(), ws.front().cols());
  for (std::size_t t = 0; t < ws.size(); ++t) {
    out.total += (weights ? (*weights)[t] : 1.0) * ws[t];
  }
  out.total.diagonal().setZero();
  out.method = FusionMethod::kSum;
  out.source_count = ws.size();
  return out;
}

}  // namespace rogsure
