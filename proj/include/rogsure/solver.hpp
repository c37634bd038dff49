#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rogsure/linalg.hpp"

namespace rogsure {

/// Parameters of the group-sparse self-representation solver.
///
/// The penalty is ||Omega||_{1,2} + rho * sum_t ||W(t)||_1 + lambda * sum_t ||E(t)||_1
/// subject to L(t) = X(t) - E(t) and L(t) = L(t) W(t) with zero diagonals.
struct SolverConfig {
  double rho = 0.1;
  /// Defaults to 10 / sqrt(max_t m(t)) when unset.
  std::optional<double> lambda;
  double mu0 = 0.1;
  /// Penalty growth factor, mu <- min(growth * mu, mu_max) after every iteration.
  double growth = 1.1;
  /// Cap on the penalty. Bounded mu keeps the shrink thresholds from vanishing,
  /// which would otherwise leave dense numerical dust in W.
  double mu_max = 1e3;
  /// Linearization constants; unset means recomputed every iteration as
  /// 1.02 * ||L(t)||_2^2 and 1.02 * ||I - W(t)||_2^2.
  std::optional<double> eta1;
  std::optional<double> eta2;
  int max_iters = 500;
  double tol_residual = 1e-6;
  double tol_change = 1e-4;
  /// Scale every input column to unit length before solving.
  bool normalize = true;

  void validate() const;
  double resolved_lambda(const ModalityStack& data) const;
};

struct IterationRecord {
  std::vector<double> residuals;  // relative constraint residual per modality
  double objective = 0.0;
  double mu = 0.0;                // penalty used during this iteration
  double w_change = 0.0;          // relative Frobenius change of W
  double eta1 = 0.0;
  std::vector<double> eta2;       // empty for the clean program
};

struct SolverState {
  MatrixStack W;
  MatrixStack E;
  MatrixStack L;
  MatrixStack Y;
  double mu = 0.0;
  int iter = 0;
  bool diverged = false;
  std::vector<IterationRecord> history;
};

struct SolverResult {
  MatrixStack W;
  MatrixStack E;
  MatrixStack L;
  bool converged = false;
  bool diverged = false;
  int iters_used = 0;
  std::vector<double> final_residuals;
  double objective = 0.0;
  std::vector<IterationRecord> history;
};

enum class Program {
  kRobust,  // joint recovery of W and sparse errors E
  kClean,   // E pinned to zero, L = X throughout
};

/// Validates the data stack and applies the column normalization flag.
ModalityStack prepare_data(const ModalityStack& data, const SolverConfig& cfg);

/// Cold start: W = 0, E = 0, Y = 0, L = X, mu = mu0.
SolverState initial_state(const ModalityStack& data, const SolverConfig& cfg);

/// One pass of the linearized ADMM body in its fixed order: L update, group
/// prox, scalar shrink, zero diagonal, E update, multiplier update, penalty
/// growth. `data` is used as given (fit_* normalizes before iterating).
void iterate_once(SolverState& state, const ModalityStack& data, const SolverConfig& cfg,
                  Program program = Program::kRobust);

/// Robust group subspace recovery. With a single modality this is the
/// unimodal bi-sparse recovery.
SolverResult fit_rogsure(const ModalityStack& data, const SolverConfig& cfg);

/// The noiseless group-sparse program (E = 0, L = X). rho = 0 is allowed.
SolverResult fit_clean(const ModalityStack& data, const SolverConfig& cfg);

/// ||Omega||_{1,2} + rho * sum ||W(t)||_1 + lambda * sum ||E(t)||_1.
double objective(const SolverState& state, const SolverConfig& cfg);

/// sum over (k, j) of sqrt(sum_t w_kj(t)^2).
double group_norm(const MatrixStack& omega);

/// ||L W - L||_F / max(1, ||L||_F).
double relative_residual(const Matrix& l, const Matrix& w);

}  // namespace rogsure
