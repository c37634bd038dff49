#include "rogsure/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace rogsure {

void require_valid(const Matrix& m, const std::string& what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InvalidArgument(what + ": matrix must have at least one row and column");
  }
  if (!m.allFinite()) {
    throw InvalidArgument(what + ": matrix contains non-finite entries");
  }
}

MatrixStack::MatrixStack(std::vector<Matrix> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw InvalidArgument("MatrixStack: at least one layer is required");
  }
  const Eigen::Index n = layers_.front().cols();
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    require_valid(layers_[t], "MatrixStack layer " + std::to_string(t));
    if (layers_[t].cols() != n) {
      throw InvalidArgument("MatrixStack: layer " + std::to_string(t) + " has " +
                            std::to_string(layers_[t].cols()) + " columns, expected " +
                            std::to_string(n));
    }
  }
}

void MatrixStack::require_square(const std::string& what) const {
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    if (layers_[t].rows() != layers_[t].cols() || layers_[t].cols() != cols()) {
      throw InvalidArgument(what + ": layer " + std::to_string(t) + " is not n x n");
    }
  }
}

Matrix shrink(const Matrix& b, double tau) {
  if (!(tau >= 0.0)) {
    throw InvalidArgument("shrink: threshold must be nonnegative");
  }
  Matrix out(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      const double v = b(i, j);
      const double mag = std::abs(v) - tau;
      out(i, j) = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    }
  }
  return out;
}

MatrixStack group_shrink(const MatrixStack& a, double beta) {
  if (!(beta >= 0.0)) {
    throw InvalidArgument("group_shrink: threshold must be nonnegative");
  }
  if (a.empty()) {
    throw InvalidArgument("group_shrink: empty stack");
  }
  const Eigen::Index rows = a[0].rows();
  const Eigen::Index cols = a[0].cols();
  for (const auto& layer : a) {
    if (layer.rows() != rows || layer.cols() != cols) {
      throw InvalidArgument("group_shrink: layers have mismatched shapes");
    }
  }
  if (a.size() == 1) {
    return MatrixStack({shrink(a[0], beta)});
  }

  std::vector<Matrix> out(a.size(), Matrix(rows, cols));
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      double sq = 0.0;
      for (const auto& layer : a) {
        sq += layer(i, j) * layer(i, j);
      }
      const double g = std::sqrt(sq);
      const double factor = g > beta ? (g - beta) / g : 0.0;
      for (std::size_t t = 0; t < a.size(); ++t) {
        out[t](i, j) = factor * a[t](i, j);
      }
    }
  }
  return MatrixStack(std::move(out));
}

void fix_column_signs(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double mag = std::abs(vectors(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) {
      vectors.col(c) = -vectors.col(c);
    }
  }
}

EigenPairs top_eigenpairs(const Matrix& m, Eigen::Index k) {
  require_valid(m, "top_eigenpairs");
  if (m.rows() != m.cols()) {
    throw InvalidArgument("top_eigenpairs: matrix must be square");
  }
  const Eigen::Index n = m.rows();
  if (k < 1 || k > n) {
    throw InvalidArgument("top_eigenpairs: k must lie in [1, n]");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw InvalidArgument("top_eigenpairs: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("top_eigenpairs: eigen decomposition failed");
  }
  // Eigen returns ascending order.
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  fix_column_signs(out.vectors);
  return out;
}

PcaResult pca(const Matrix& x, Eigen::Index d, bool center) {
  require_valid(x, "pca");
  const Eigen::Index m = x.rows();
  const Eigen::Index n = x.cols();
  if (d < 1 || d > std::min(m, n)) {
    throw InvalidArgument("pca: dimension must lie in [1, min(rows, cols)]");
  }
  PcaResult out;
  out.mean = center ? Vector(x.rowwise().mean()) : Vector::Zero(m);
  const Matrix xc = x.colwise() - out.mean;
  Matrix cov = xc * xc.transpose() / static_cast<double>(n);
  cov = 0.5 * (cov + cov.transpose());
  EigenPairs eig = top_eigenpairs(cov, m);
  out.eigenvalues = eig.values;
  out.basis = eig.vectors.leftCols(d);
  return out;
}

Matrix pca_basis(const Matrix& x, Eigen::Index d, bool center) {
  return pca(x, d, center).basis;
}

Matrix pca_project(const Matrix& basis, const Matrix& x) {
  if (basis.rows() != x.rows()) {
    throw InvalidArgument("pca_project: basis and data row counts differ");
  }
  return basis.transpose() * x;
}

double spectral_norm(const Matrix& m) {
  require_valid(m, "spectral_norm");
  const Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose())
                                           : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

Matrix normalize_columns(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double nrm = out.col(j).norm();
    if (nrm > 0.0) {
      out.col(j) /= nrm;
    }
  }
  return out;
}

double max_principal_cosine(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw InvalidArgument("max_principal_cosine: ambient dimensions differ");
  }
  const Matrix cross = a.transpose() * b;
  Eigen::JacobiSVD<Matrix> svd(cross);
  return std::min(1.0, svd.singularValues()(0));
}

Matrix column_space_basis(const Matrix& x, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) {
    return Matrix(x.rows(), 0);
  }
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) {
    ++rank;
  }
  Matrix basis = svd.matrixU().leftCols(rank);
  fix_column_signs(basis);
  return basis;
}

}  // namespace rogsure
