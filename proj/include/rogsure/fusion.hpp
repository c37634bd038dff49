#pragma once

#include <optional>
#include <vector>

#include "rogsure/linalg.hpp"

namespace rogsure {

enum class FusionMethod { kSum, kProduct };

/// Which entries enter the median used by binarize_by_median.
enum class MedianDomain {
  kAll,          // all n^2 magnitudes
  kOffDiagonal,  // the n(n-1) off-diagonal magnitudes, zeros included
  kNonzero,      // off-diagonal magnitudes that are nonzero
};

struct FusedCoefficients {
  Matrix total;  // n x n, zero diagonal
  FusionMethod method = FusionMethod::kSum;
  std::size_t source_count = 0;
};

/// Median of |W| over the chosen domain (mean of the two middle values for
/// even counts).
double median_magnitude(const Matrix& w, MedianDomain domain = MedianDomain::kOffDiagonal);

/// 1 where |w_ij| is strictly greater than the median magnitude, else 0. The
/// diagonal is always 0.
Matrix binarize_by_median(const Matrix& w, MedianDomain domain = MedianDomain::kOffDiagonal);

/// Entrywise product of binary matrices (support intersection), diagonal zeroed.
FusedCoefficients fuse_product(const std::vector<Matrix>& ws);

/// sum_t weight(t) * W(t), diagonal zeroed. Weights default to all ones.
FusedCoefficients fuse_sum(const std::vector<Matrix>& ws,
                           const std::optional<std::vector<double>>& weights = std::nullopt);

}  // namespace rogsure
