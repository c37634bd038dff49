#pragma once

#include <cstdint>
#include <vector>

#include "rogsure/linalg.hpp"
#include "rogsure/synth.hpp"

namespace rogsure {

/// Smallest principal angle between distinct subspaces, per modality.
struct AngleReport {
  std::vector<double> theta;       // radians, in [0, pi/2]
  std::vector<double> cos_sq;      // cos^2(theta(t))
  std::vector<std::pair<int, int>> pair;  // subspace ids achieving theta(t)

  double max_cos_sq() const;
};

/// Points defining P_{-j}: the symmetric convex hull, over same-subspace
/// columns q != j, of the discs {(xi(t) x_q(t))_t : sum_t xi(t)^2 <= 1}.
struct PolytopeSpec {
  int anchor = -1;                 // j
  std::vector<int> members;        // q, column ids in the source data
  std::vector<Matrix> points;      // per modality, m(t) x |q|, unit columns

  void validate() const;
};

/// Bounds on the inradius r(P_{-j}) measured inside the span of the defining
/// points.
///
/// `lower` is certified by multipliers w on the simplex:
///   r^2 >= min_t lambda_min(sum_q w_q c_q(t) c_q(t)^T),
/// which bounds the polar circumradius from above. `upper` is the support
/// value h(u) = max_q ||(c_q(t)^T u_t)_t|| of the best unit direction u found,
/// i.e. 1 / ||y|| for the best feasible polar point y = u / h(u).
struct InradiusBounds {
  double lower = 0.0;
  double upper = 1.0;
  int dimension = 0;  // sum_t rank of the defining points
};

struct InradiusOptions {
  int budget = 2000;
  int starts = 32;
  std::uint64_t seed = 0;
};

struct TheoremReport {
  double max_cos_sq = 0.0;
  double min_r_sq_lower = 0.0;     // certified
  double min_r_sq_upper = 0.0;
  bool feasible = false;           // every column lies in the span of its cluster mates
  bool condition_holds = false;    // feasible && max_cos_sq < min_r_sq_lower
  double margin = 0.0;             // min_r_sq_lower - max_cos_sq
  int worst_anchor = -1;
  AngleReport angles;
  std::vector<InradiusBounds> per_anchor;
};

struct DetectionReport {
  bool holds = true;
  double worst_violation = 0.0;    // largest cross-subspace |w_kj(t)|
  double max_magnitude = 0.0;      // largest |w| overall
  int modality = -1;
  int row = -1;
  int col = -1;
};

/// theta(t) = min over subspace pairs of the smallest principal angle.
/// bases[I][t] spans subspace I in modality t.
AngleReport min_subspace_angle(const std::vector<std::vector<Matrix>>& bases);

/// P_{-j} for column j of `data`, from the columns sharing its label.
PolytopeSpec build_polytope(const ModalityStack& data, const std::vector<int>& labels, int j);

InradiusBounds inradius_bounds(const PolytopeSpec& p, const InradiusOptions& options);

/// Evaluates max_t cos^2 theta(t) < min_j r^2(P_{-j}) on clean data, using the
/// certified lower side of each inradius so a positive verdict is conservative.
TheoremReport evaluate_theorem(const UoSGroundTruth& gt, const InradiusOptions& options);

/// Cross-subspace entries must satisfy |w_kj(t)| <= tol_rel * max |w|.
DetectionReport check_detection_property(const MatrixStack& omega, const std::vector<int>& labels,
                                         double tol_rel);

}  // namespace rogsure
