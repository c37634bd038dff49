#include "rogsure/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rogsure/rng.hpp"

namespace rogsure {
namespace {

constexpr double kUnitTolerance = 1e-8;
constexpr double kSpanTolerance = 1e-8;
constexpr double kDescentStep = 0.3;
constexpr double kMirrorStep = 1.0;

/// P_{-j} expressed in orthonormal coordinates of the span of its points.
struct ReducedPolytope {
  std::vector<Matrix> coords;  // per modality, r(t) x Q
  Eigen::Index members = 0;
  int dimension = 0;
};

ReducedPolytope reduce(const PolytopeSpec& p) {
  ReducedPolytope out;
  out.members = p.points.front().cols();
  for (const auto& x : p.points) {
    const Matrix u = column_space_basis(x);
    out.coords.push_back(u.transpose() * x);
    out.dimension += static_cast<int>(u.cols());
  }
  return out;
}

/// A unit vector of the product space, stored per modality.
using Direction = std::vector<Vector>;

void normalize(Direction& u) {
  double sq = 0.0;
  for (const auto& block : u) sq += block.squaredNorm();
  const double nrm = std::sqrt(sq);
  for (auto& block : u) block /= nrm;
}

Direction random_direction(const ReducedPolytope& poly, Rng& rng) {
  Direction u;
  for (const auto& c : poly.coords) {
    Vector block(c.rows());
    for (Eigen::Index i = 0; i < block.size(); ++i) block(i) = rng.normal();
    u.push_back(std::move(block));
  }
  normalize(u);
  return u;
}

/// h(u) = max_q sqrt(sum_t (c_q(t)^T u_t)^2); `active` receives the argmax q.
double support(const ReducedPolytope& poly, const Direction& u, Eigen::Index& active) {
  double best = -1.0;
  active = 0;
  for (Eigen::Index q = 0; q < poly.members; ++q) {
    double sq = 0.0;
    for (std::size_t t = 0; t < poly.coords.size(); ++t) {
      const double a = poly.coords[t].col(q).dot(u[t]);
      sq += a * a;
    }
    if (sq > best) {
      best = sq;
      active = q;
    }
  }
  return std::sqrt(best);
}

/// Projected subgradient step on the sphere, decreasing h.
void descend(const ReducedPolytope& poly, Direction& u, double step) {
  Eigen::Index q = 0;
  const double h = support(poly, u, q);
  if (h <= 0.0) return;
  Direction g;
  double radial = 0.0;
  for (std::size_t t = 0; t < poly.coords.size(); ++t) {
    const Vector& c = poly.coords[t].col(q);
    g.push_back(c * (c.dot(u[t]) / h));
    radial += g.back().dot(u[t]);
  }
  double gsq = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    g[t] -= radial * u[t];
    gsq += g[t].squaredNorm();
  }
  if (gsq <= 0.0) return;
  const double scale = step / std::sqrt(gsq);
  for (std::size_t t = 0; t < g.size(); ++t) u[t] -= scale * g[t];
  normalize(u);
}

/// min_t lambda_min(C_t diag(w) C_t^T); `block` and `vec` receive the minimizer.
double certified_value(const ReducedPolytope& poly, const Vector& w, std::size_t& block,
                       Vector& vec) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < poly.coords.size(); ++t) {
    const Matrix& c = poly.coords[t];
    if (c.rows() == 0) {
      // An empty span contributes no constraint in the product space.
      continue;
    }
    Matrix m = c * w.asDiagonal() * c.transpose();
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const double value = eig.eigenvalues()(0);
    if (value < best) {
      best = value;
      block = t;
      vec = eig.eigenvectors().col(0);
    }
  }
  return best;
}

}  // namespace

double AngleReport::max_cos_sq() const {
  return cos_sq.empty() ? 0.0 : *std::max_element(cos_sq.begin(), cos_sq.end());
}

void PolytopeSpec::validate() const {
  if (points.empty()) {
    throw InvalidArgument("polytope: no modalities");
  }
  const Eigen::Index q = points.front().cols();
  if (q < 1) {
    throw InvalidArgument("polytope: at least one point q != j is required");
  }
  for (const auto& x : points) {
    require_valid(x, "polytope");
    if (x.cols() != q) {
      throw InvalidArgument("polytope: modalities disagree on the number of points");
    }
    for (Eigen::Index c = 0; c < q; ++c) {
      if (std::abs(x.col(c).norm() - 1.0) > kUnitTolerance) {
        throw InvalidArgument("polytope: defining points must have unit length");
      }
    }
  }
}

AngleReport min_subspace_angle(const std::vector<std::vector<Matrix>>& bases) {
  if (bases.size() < 2) {
    throw InvalidArgument("min_subspace_angle: at least two subspaces are required");
  }
  const std::size_t T = bases.front().size();
  std::vector<std::vector<Matrix>> ortho(bases.size());
  for (std::size_t I = 0; I < bases.size(); ++I) {
    if (bases[I].size() != T) {
      throw InvalidArgument("min_subspace_angle: subspaces disagree on the modality count");
    }
    for (const auto& b : bases[I]) {
      require_valid(b, "min_subspace_angle");
      Matrix q = column_space_basis(b);
      if (q.cols() < b.cols()) {
        throw InvalidArgument("min_subspace_angle: basis of subspace " + std::to_string(I) +
                              " is rank deficient");
      }
      ortho[I].push_back(std::move(q));
    }
  }

  AngleReport report;
  for (std::size_t t = 0; t < T; ++t) {
    double best_cos = -1.0;
    std::pair<int, int> arg{0, 1};
    for (std::size_t a = 0; a < ortho.size(); ++a) {
      for (std::size_t b = a + 1; b < ortho.size(); ++b) {
        const double c = max_principal_cosine(ortho[a][t], ortho[b][t]);
        if (c > best_cos) {
          best_cos = c;
          arg = {static_cast<int>(a), static_cast<int>(b)};
        }
      }
    }
    best_cos = std::clamp(best_cos, 0.0, 1.0);
    report.theta.push_back(std::acos(best_cos));
    report.cos_sq.push_back(best_cos * best_cos);
    report.pair.push_back(arg);
  }
  return report;
}

PolytopeSpec build_polytope(const ModalityStack& data, const std::vector<int>& labels, int j) {
  if (static_cast<Eigen::Index>(labels.size()) != data.cols()) {
    throw InvalidArgument("build_polytope: label count does not match the data");
  }
  if (j < 0 || j >= data.cols()) {
    throw InvalidArgument("build_polytope: anchor index out of range");
  }
  PolytopeSpec spec;
  spec.anchor = j;
  for (std::size_t q = 0; q < labels.size(); ++q) {
    if (static_cast<int>(q) != j && labels[q] == labels[static_cast<std::size_t>(j)]) {
      spec.members.push_back(static_cast<int>(q));
    }
  }
  for (const auto& x : data) {
    Matrix pts(x.rows(), static_cast<Eigen::Index>(spec.members.size()));
    for (std::size_t k = 0; k < spec.members.size(); ++k) {
      pts.col(static_cast<Eigen::Index>(k)) = x.col(spec.members[k]);
    }
    spec.points.push_back(std::move(pts));
  }
  return spec;
}

InradiusBounds inradius_bounds(const PolytopeSpec& p, const InradiusOptions& options) {
  p.validate();
  if (options.budget < 1) {
    throw InvalidArgument("inradius_bounds: budget must be positive");
  }
  if (options.starts < 1) {
    throw InvalidArgument("inradius_bounds: at least one start is required");
  }
  const ReducedPolytope poly = reduce(p);
  InradiusBounds out;
  out.dimension = poly.dimension;
  if (poly.dimension == 0) {
    out.lower = 0.0;
    out.upper = 0.0;
    return out;
  }

  // Upper side: sampled directions interleaved round-robin with descent runs,
  // so a larger budget only extends the same sequence.
  Rng sample_rng(derive_seed(options.seed, "inradius/samples"));
  Rng start_rng(derive_seed(options.seed, "inradius/starts"));
  std::vector<Direction> runs;
  for (int s = 0; s < options.starts; ++s) runs.push_back(random_direction(poly, start_rng));
  Eigen::Index active = 0;
  double upper = std::numeric_limits<double>::infinity();
  for (int i = 0; i < options.budget; ++i) {
    double h = 0.0;
    if (i % 2 == 0) {
      h = support(poly, random_direction(poly, sample_rng), active);
    } else {
      const int s = (i / 2) % options.starts;
      const int k = (i / 2) / options.starts;
      descend(poly, runs[static_cast<std::size_t>(s)], kDescentStep / std::sqrt(k + 1.0));
      h = support(poly, runs[static_cast<std::size_t>(s)], active);
    }
    upper = std::min(upper, h);
  }

  // Lower side: mirror ascent of the certified value over the simplex.
  const Eigen::Index q = poly.members;
  Vector w = Vector::Constant(q, 1.0 / static_cast<double>(q));
  double lower_sq = 0.0;
  std::size_t block = 0;
  Vector vec;
  for (int k = 0; k < options.budget; ++k) {
    const double value = certified_value(poly, w, block, vec);
    lower_sq = std::max(lower_sq, value);
    const Matrix& c = poly.coords[block];
    const Vector grad = (c.transpose() * vec).array().square().matrix();
    const double step = kMirrorStep / std::sqrt(k + 1.0);
    Vector logw = w.array().log().matrix() + step * grad;
    logw.array() -= logw.maxCoeff();
    w = logw.array().exp().matrix();
    w /= w.sum();
  }

  out.upper = std::min(1.0, upper);
  out.lower = std::min(std::sqrt(std::max(0.0, lower_sq)), out.upper);
  return out;
}

TheoremReport evaluate_theorem(const UoSGroundTruth& gt, const InradiusOptions& options) {
  for (const auto& mask : gt.corruption_mask) {
    if (mask.size() > 0 && mask.cwiseAbs().maxCoeff() > 0.0) {
      throw InvalidArgument(
          "evaluate_theorem: the dataset carries planted corruption; the condition applies to "
          "clean data, so generate it with corruption_fraction = 0");
    }
  }
  TheoremReport report;
  report.angles = min_subspace_angle(gt.bases);
  report.max_cos_sq = report.angles.max_cos_sq();

  const ModalityStack& x = gt.clean;
  report.feasible = true;
  report.min_r_sq_lower = std::numeric_limits<double>::infinity();
  report.min_r_sq_upper = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const PolytopeSpec poly = build_polytope(x, gt.labels, static_cast<int>(j));
    if (poly.members.empty()) {
      report.feasible = false;
      report.per_anchor.push_back({});
      report.min_r_sq_lower = 0.0;
      continue;
    }
    for (std::size_t t = 0; t < x.size(); ++t) {
      const Matrix u = column_space_basis(poly.points[t]);
      const Vector xj = x[t].col(j);
      if ((xj - u * (u.transpose() * xj)).norm() > kSpanTolerance) {
        report.feasible = false;
      }
    }
    InradiusOptions local = options;
    local.seed = derive_seed(options.seed, "theorem/anchor/" + std::to_string(j));
    const InradiusBounds b = inradius_bounds(poly, local);
    report.per_anchor.push_back(b);
    if (b.lower * b.lower < report.min_r_sq_lower) {
      report.min_r_sq_lower = b.lower * b.lower;
      report.worst_anchor = static_cast<int>(j);
    }
    report.min_r_sq_upper = std::min(report.min_r_sq_upper, b.upper * b.upper);
  }
  report.margin = report.min_r_sq_lower - report.max_cos_sq;
  report.condition_holds = report.feasible && report.margin > 0.0;
  return report;
}

DetectionReport check_detection_property(const MatrixStack& omega, const std::vector<int>& labels,
                                         double tol_rel) {
  omega.require_square("check_detection_property");
  if (static_cast<Eigen::Index>(labels.size()) != omega.cols()) {
    throw InvalidArgument("check_detection_property: label count does not match Omega");
  }
  DetectionReport report;
  for (const auto& w : omega) {
    report.max_magnitude = std::max(report.max_magnitude, w.cwiseAbs().maxCoeff());
  }
  for (std::size_t t = 0; t < omega.size(); ++t) {
    const Matrix& w = omega[t];
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index k = 0; k < w.rows(); ++k) {
        if (labels[static_cast<std::size_t>(k)] == labels[static_cast<std::size_t>(j)]) continue;
        const double mag = std::abs(w(k, j));
        if (mag > report.worst_violation) {
          report.worst_violation = mag;
          report.modality = static_cast<int>(t);
          report.row = static_cast<int>(k);
          report.col = static_cast<int>(j);
        }
      }
    }
  }
  report.holds = report.worst_violation <= tol_rel * report.max_magnitude;
  return report;
}

}  // namespace rogsure
