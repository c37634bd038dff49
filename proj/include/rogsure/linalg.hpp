#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rogsure {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a precondition on an input value or shape is violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rejects empty or non-finite matrices. `what` names the argument in the message.
void require_valid(const Matrix& m, const std::string& what);

/// An ordered collection of matrices sharing a column count, one per modality.
///
/// Data stacks hold X(t) with possibly different row counts m(t); coefficient
/// stacks hold square n x n layers.
class MatrixStack {
 public:
  MatrixStack() = default;
  explicit MatrixStack(std::vector<Matrix> layers);

  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Eigen::Index cols() const { return layers_.empty() ? 0 : layers_.front().cols(); }

  const Matrix& operator[](std::size_t t) const { return layers_[t]; }
  Matrix& operator[](std::size_t t) { return layers_[t]; }

  const std::vector<Matrix>& layers() const { return layers_; }
  std::vector<Matrix>& layers() { return layers_; }

  auto begin() const { return layers_.begin(); }
  auto end() const { return layers_.end(); }

  /// Throws unless every layer is square with the shared column count.
  void require_square(const std::string& what) const;

 private:
  std::vector<Matrix> layers_;
};

using ModalityStack = MatrixStack;

/// Entrywise soft threshold: sign(b) * max(|b| - tau, 0).
Matrix shrink(const Matrix& b, double tau);

/// Group soft threshold across the layers of a stack, one group per (i, j).
///
/// With g = sqrt(sum_t A_ij(t)^2) every layer entry is scaled by (g - beta) / g
/// when g > beta and set to zero otherwise. For a single layer the result is
/// exactly shrink(A, beta).
MatrixStack group_shrink(const MatrixStack& a, double beta);

struct EigenPairs {
  Vector values;   // descending
  Matrix vectors;  // one eigenvector per column
};

/// The k largest eigenpairs of a symmetric matrix.
///
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive. The input must be symmetric to 1e-10 relative to its largest
/// entry; callers symmetrize explicitly.
EigenPairs top_eigenpairs(const Matrix& m, Eigen::Index k);

/// Flips the sign of each column so its largest-magnitude entry is positive.
/// Ties on magnitude resolve to the lowest row index.
void fix_column_signs(Matrix& vectors);

struct PcaResult {
  Matrix basis;        // m x d, orthonormal columns
  Vector eigenvalues;  // all m covariance eigenvalues, descending
  Vector mean;         // column mean used for centering (zero if not centered)
};

/// PCA of the columns of `x` (columns are observations).
///
/// The covariance is (1/n) * Xc * Xc^T with Xc the column-centered data when
/// `center` is set.
PcaResult pca(const Matrix& x, Eigen::Index d, bool center = true);

/// Orthonormal basis of the top-d principal directions.
Matrix pca_basis(const Matrix& x, Eigen::Index d, bool center = true);

/// Principal-component scores B^T x for every column. No mean is subtracted,
/// so data on linear subspaces stays on linear subspaces.
Matrix pca_project(const Matrix& basis, const Matrix& x);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Scales each column to unit Euclidean length. Zero columns are left as is.
Matrix normalize_columns(const Matrix& x);

/// Cosine of the smallest principal angle between span(a) and span(b), both
/// given by orthonormal bases: the largest singular value of a^T b.
double max_principal_cosine(const Matrix& a, const Matrix& b);

/// Orthonormal basis of the column space, rank decided at `rel_tol` times the
/// largest singular value.
Matrix column_space_basis(const Matrix& x, double rel_tol = 1e-10);

}  // namespace rogsure
