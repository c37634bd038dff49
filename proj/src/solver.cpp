#include "rogsure/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rogsure {
namespace {

constexpr double kEtaMargin = 1.02;

double lambda_for_rows(const SolverConfig& cfg, Eigen::Index max_rows) {
  if (cfg.lambda) {
    return *cfg.lambda;
  }
  return 10.0 / std::sqrt(static_cast<double>(max_rows));
}

Eigen::Index max_rows(const MatrixStack& s) {
  Eigen::Index m = 0;
  for (const auto& layer : s) {
    m = std::max(m, layer.rows());
  }
  return m;
}

void check_matching_shapes(const SolverState& state, const ModalityStack& data) {
  if (state.W.size() != data.size() || state.E.size() != data.size() ||
      state.Y.size() != data.size()) {
    throw InvalidArgument("iterate_once: state and data modality counts differ");
  }
  const Eigen::Index n = data.cols();
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (state.W[t].rows() != n || state.W[t].cols() != n ||
        state.E[t].rows() != data[t].rows() || state.E[t].cols() != n ||
        state.Y[t].rows() != data[t].rows() || state.Y[t].cols() != n) {
      throw InvalidArgument("iterate_once: state shapes do not match data");
    }
  }
}

SolverResult run(const ModalityStack& data, const SolverConfig& cfg, Program program) {
  cfg.validate();
  const ModalityStack x = prepare_data(data, cfg);
  SolverState state = initial_state(x, cfg);

  SolverResult result;
  while (state.iter < cfg.max_iters) {
    iterate_once(state, x, cfg, program);
    if (state.diverged) {
      break;
    }
    const IterationRecord& rec = state.history.back();
    const double worst = *std::max_element(rec.residuals.begin(), rec.residuals.end());
    if (worst <= cfg.tol_residual && rec.w_change <= cfg.tol_change) {
      result.converged = true;
      break;
    }
  }

  result.W = std::move(state.W);
  result.E = std::move(state.E);
  result.L = std::move(state.L);
  result.diverged = state.diverged;
  result.iters_used = state.iter;
  if (!state.history.empty()) {
    result.final_residuals = state.history.back().residuals;
    result.objective = state.history.back().objective;
  }
  result.history = std::move(state.history);
  return result;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(rho >= 0.0)) throw InvalidArgument("solver: rho must be nonnegative");
  if (lambda && !(*lambda > 0.0)) throw InvalidArgument("solver: lambda must be positive");
  if (!(mu0 > 0.0)) throw InvalidArgument("solver: mu0 must be positive");
  if (!(growth > 1.0)) throw InvalidArgument("solver: growth factor must exceed 1");
  if (!(mu_max >= mu0)) throw InvalidArgument("solver: mu_max must be at least mu0");
  if (eta1 && !(*eta1 > 0.0)) throw InvalidArgument("solver: eta1 must be positive");
  if (eta2 && !(*eta2 > 0.0)) throw InvalidArgument("solver: eta2 must be positive");
  if (max_iters < 1) throw InvalidArgument("solver: max_iters must be at least 1");
  if (!(tol_residual > 0.0)) throw InvalidArgument("solver: tol_residual must be positive");
  if (!(tol_change > 0.0)) throw InvalidArgument("solver: tol_change must be positive");
}

double SolverConfig::resolved_lambda(const ModalityStack& data) const {
  return lambda_for_rows(*this, max_rows(data));
}

ModalityStack prepare_data(const ModalityStack& data, const SolverConfig& cfg) {
  if (data.empty()) {
    throw InvalidArgument("solver: no modalities supplied");
  }
  // Re-validates column agreement and finiteness.
  ModalityStack checked(data.layers());
  if (checked.cols() < 2) {
    throw InvalidArgument("solver: at least two observations are required");
  }
  if (cfg.normalize) {
    for (auto& layer : checked.layers()) {
      layer = normalize_columns(layer);
    }
  }
  return checked;
}

SolverState initial_state(const ModalityStack& data, const SolverConfig& cfg) {
  const Eigen::Index n = data.cols();
  std::vector<Matrix> w, e, y;
  for (const auto& x : data) {
    w.push_back(Matrix::Zero(n, n));
    e.push_back(Matrix::Zero(x.rows(), n));
    y.push_back(Matrix::Zero(x.rows(), n));
  }
  SolverState state;
  state.W = MatrixStack(std::move(w));
  state.E = MatrixStack(std::move(e));
  state.Y = MatrixStack(std::move(y));
  state.L = data;
  state.mu = cfg.mu0;
  return state;
}

void iterate_once(SolverState& state, const ModalityStack& data, const SolverConfig& cfg,
                  Program program) {
  cfg.validate();
  check_matching_shapes(state, data);
  const std::size_t T = data.size();
  const Eigen::Index n = data.cols();
  const double mu = state.mu;
  const double lambda = lambda_for_rows(cfg, max_rows(data));
  const Matrix eye = Matrix::Identity(n, n);

  IterationRecord rec;
  rec.mu = mu;

  // L_{k+1} = X - E_k
  std::vector<Matrix> l(T);
  for (std::size_t t = 0; t < T; ++t) {
    l[t] = program == Program::kClean ? data[t] : Matrix(data[t] - state.E[t]);
  }

  // One eta1 shared by all modalities: the group prox couples the layers and
  // needs a common step, so take the largest per-modality requirement.
  double eta1 = 0.0;
  if (cfg.eta1) {
    eta1 = *cfg.eta1;
  } else {
    for (std::size_t t = 0; t < T; ++t) {
      const double s = spectral_norm(l[t]);
      eta1 = std::max(eta1, kEtaMargin * s * s);
    }
    if (eta1 == 0.0) {
      eta1 = kEtaMargin;
    }
  }
  rec.eta1 = eta1;

  // Linearized step for W, and the residual term reused by the E update.
  std::vector<Matrix> step(T);
  std::vector<Matrix> r(T);
  for (std::size_t t = 0; t < T; ++t) {
    r[t] = l[t] * (eye - state.W[t]) - state.Y[t] / mu;
    step[t] = state.W[t] + l[t].transpose() * r[t] / eta1;
  }
  MatrixStack w_plus = group_shrink(MatrixStack(std::move(step)), 1.0 / (mu * eta1));

  std::vector<Matrix> w_new(T);
  for (std::size_t t = 0; t < T; ++t) {
    w_new[t] = shrink(w_plus[t], cfg.rho / (mu * eta1));
    w_new[t].diagonal().setZero();
  }

  std::vector<Matrix> e_new(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (program == Program::kClean) {
      e_new[t] = Matrix::Zero(data[t].rows(), n);
      continue;
    }
    const Matrix w_hat = eye - w_new[t];
    double eta2 = 0.0;
    if (cfg.eta2) {
      eta2 = *cfg.eta2;
    } else {
      const double s = spectral_norm(w_hat);
      eta2 = kEtaMargin * s * s;
    }
    rec.eta2.push_back(eta2);
    e_new[t] = shrink(state.E[t] + r[t] * w_hat.transpose() / eta2, lambda / (mu * eta2));
  }

  double change_sq = 0.0;
  double prev_sq = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    state.Y[t] += mu * (l[t] * w_new[t] - l[t]);
    change_sq += (w_new[t] - state.W[t]).squaredNorm();
    prev_sq += state.W[t].squaredNorm();
    state.W[t] = std::move(w_new[t]);
    state.E[t] = std::move(e_new[t]);
    state.L[t] = program == Program::kClean ? data[t] : Matrix(data[t] - state.E[t]);
  }
  state.mu = std::min(cfg.growth * mu, cfg.mu_max);
  ++state.iter;

  rec.w_change = std::sqrt(change_sq) / std::max(1.0, std::sqrt(prev_sq));
  for (std::size_t t = 0; t < T; ++t) {
    rec.residuals.push_back(relative_residual(state.L[t], state.W[t]));
  }
  rec.objective = objective(state, cfg);

  bool finite = std::isfinite(state.mu) && std::isfinite(rec.objective);
  for (double v : rec.residuals) {
    finite = finite && std::isfinite(v);
  }
  state.diverged = !finite;
  state.history.push_back(std::move(rec));
}

SolverResult fit_rogsure(const ModalityStack& data, const SolverConfig& cfg) {
  return run(data, cfg, Program::kRobust);
}

SolverResult fit_clean(const ModalityStack& data, const SolverConfig& cfg) {
  return run(data, cfg, Program::kClean);
}

double group_norm(const MatrixStack& omega) {
  if (omega.empty()) {
    return 0.0;
  }
  if (omega.size() == 1) {
    return omega[0].cwiseAbs().sum();
  }
  const Matrix& first = omega[0];
  double total = 0.0;
  for (Eigen::Index j = 0; j < first.cols(); ++j) {
    for (Eigen::Index i = 0; i < first.rows(); ++i) {
      double sq = 0.0;
      for (const auto& layer : omega) {
        sq += layer(i, j) * layer(i, j);
      }
      total += std::sqrt(sq);
    }
  }
  return total;
}

double objective(const SolverState& state, const SolverConfig& cfg) {
  const double lambda = lambda_for_rows(cfg, max_rows(state.E));
  double value = group_norm(state.W);
  for (const auto& w : state.W) {
    value += cfg.rho * w.cwiseAbs().sum();
  }
  for (const auto& e : state.E) {
    value += lambda * e.cwiseAbs().sum();
  }
  return value;
}

double relative_residual(const Matrix& l, const Matrix& w) {
  return (l * w - l).norm() / std::max(1.0, l.norm());
}

}  // namespace rogsure
