#include "nnfir/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"
#include "nnfir/lifted.hpp"

namespace nnfir {

void SolverConfig::validate() const {
  if (max_iters == 0) throw ConfigError("max_iters must be >= 1");
  if (!(tol_objective > 0.0)) throw ConfigError("tol_objective must be > 0");
  if (!(tol_kkt > 0.0)) throw ConfigError("tol_kkt must be > 0");
  if (stall_window == 0) throw ConfigError("stall_window must be >= 1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kkt_satisfied: return "kkt_satisfied";
    case Termination::objective_stalled: return "objective_stalled";
    case Termination::max_iters: return "max_iters";
  }
  return "unknown";
}

bool VerificationSummary::all_pass() const {
  bool ok = max_objective_increase <= 1e-12 && max_simplex_residual <= 1e-10 && positivity_preserved;
  if (enabled) {
    ok = ok && max_gain_residual <= 1e-10 && max_gain_w_residual <= 1e-12 &&
         max_pythagoras_Y <= 1e-10 && max_pythagoras_W <= 1e-10 && pythagoras_skipped == 0 &&
         max_gradient_form_gap <= 1e-13 && min_gain >= -1e-12;
  }
  return ok;
}

namespace {

void require_problem_shape(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h) {
  if (Y.rows() != U.rows() || Y.cols() != U.cols()) throw DimensionError("Y and U shapes differ");
  if (h.size() != U.rows()) throw DimensionError("h length does not match N+1");
}

void require_initial_mass(const NonnegMatrix& U) {
  if (!(U.row_sum(0) > 0.0)) {
    throw DegenerateDataError("U_{0.} = 0: the lag-N coefficient has no input mass");
  }
}

// h'_k = h_k A_k / alpha_{N-k} given the back-projected ratio A.
ImpulseResponse multiplicative_update(const ImpulseResponse& h, const std::vector<double>& A,
                                      const std::vector<double>& alpha) {
  const std::size_t N = h.size() - 1;
  std::vector<double> next(N + 1);
  for (std::size_t k = 0; k <= N; ++k) next[k] = h[k] / alpha[N - k] * A[k];
  return ImpulseResponse(std::move(next));
}

double sum_weighted(const ImpulseResponse& h, const std::vector<double>& alpha) {
  const std::size_t N = h.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k <= N; ++k) acc += h[k] * alpha[N - k];
  return acc;
}

// Relative gap between the product and gradient forms of the update.
double gradient_form_gap(const ImpulseResponse& h, const ImpulseResponse& a,
                         const ImpulseResponse& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double scale = std::max({h[k], a[k], b[k]});
    if (scale == 0.0) continue;
    gap = std::max(gap, std::abs(a[k] - b[k]) / scale);
  }
  return gap;
}

StepGain gains_from_tensors(const LiftedTensor& Yt, const LiftedTensor& Yt1, const LiftedTensor& Wt,
                            const LiftedTensor& Wt1, double F_t, double F_t1,
                            const NonnegMatrix& U, const ImpulseResponse& h_t,
                            const ImpulseResponse& h_t1, double S) {
  StepGain g;
  g.delta_F = F_t - F_t1;
  g.gain_Y = i_divergence(Yt, Yt1);
  g.gain_W = i_divergence(Wt1, Wt);
  const auto p_t = simplex_coordinates(U, h_t, S);
  const auto p_t1 = simplex_coordinates(U, h_t1, S);
  g.gain_W_simplex = S * i_divergence(std::span<const double>(p_t1), std::span<const double>(p_t));
  g.identity_residual = std::abs(g.delta_F - (g.gain_Y + g.gain_W));
  g.simplex_residual = std::abs(g.gain_W - g.gain_W_simplex);
  return g;
}

struct PreparedData {
  NonnegMatrix Y;
  NonnegMatrix U;
  std::vector<std::size_t> dropped;
};

// Drops experiments whose input and output columns are both zero.
PreparedData drop_empty_experiments(const NonnegMatrix& Y, const NonnegMatrix& U) {
  std::vector<std::size_t> keep;
  PreparedData out;
  for (std::size_t j = 0; j < U.cols(); ++j) {
    bool empty = true;
    for (std::size_t i = 0; i < U.rows() && empty; ++i) empty = U(i, j) == 0.0 && Y(i, j) == 0.0;
    (empty ? out.dropped : keep).push_back(j);
  }
  if (out.dropped.empty() || keep.empty()) {
    out.Y = Y;
    out.U = U;
    if (keep.empty()) out.dropped.clear();
    return out;
  }
  const std::size_t n = U.rows();
  std::vector<double> y(n * keep.size()), u(n * keep.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < keep.size(); ++c) {
      y[i * keep.size() + c] = Y(i, keep[c]);
      u[i * keep.size() + c] = U(i, keep[c]);
    }
  }
  out.Y = NonnegMatrix(n, keep.size(), std::move(y));
  out.U = NonnegMatrix(n, keep.size(), std::move(u));
  return out;
}

}  // namespace

ImpulseResponse update_step(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h) {
  require_problem_shape(Y, U, h);
  require_initial_mass(U);
  const NonnegMatrix W = ConvolutionSystem(U).apply(h);
  return multiplicative_update(h, backprojected_ratio(Y, U, W), cumulative_input_mass(U));
}

ImpulseResponse gradient_form_step(const NonnegMatrix& Y, const NonnegMatrix& U,
                                   const ImpulseResponse& h) {
  require_problem_shape(Y, U, h);
  require_initial_mass(U);
  const auto grad = gradient(Y, U, h);
  const auto alpha = cumulative_input_mass(U);
  const std::size_t N = h.size() - 1;
  std::vector<double> next(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    // 1 - grad/alpha = A/alpha >= 0; the clamp only absorbs rounding.
    next[k] = std::max(0.0, h[k] * (1.0 - grad[k] / alpha[N - k]));
  }
  return ImpulseResponse(std::move(next));
}

ImpulseResponse initial_point(const NonnegMatrix& Y, const NonnegMatrix& U,
                              const SolverConfig& config) {
  const std::size_t n = U.rows();
  switch (config.init) {
    case InitKind::ones:
      return ImpulseResponse::ones(n);
    case InitKind::uniform_simplex: {
      require_initial_mass(U);
      const auto alpha = cumulative_input_mass(U);
      const double S = Y.total();
      std::vector<double> h(n);
      for (std::size_t k = 0; k < n; ++k) h[k] = S / (static_cast<double>(n) * alpha[n - 1 - k]);
      return ImpulseResponse(std::move(h));
    }
    case InitKind::user:
      if (config.init_vector.size() != n) {
        throw DimensionError("initial vector has length " + std::to_string(config.init_vector.size()) +
                             ", expected " + std::to_string(n));
      }
      return ImpulseResponse(config.init_vector);
  }
  throw ConfigError("unknown init kind");
}

SolverReport solve(const NonnegMatrix& Y_in, const NonnegMatrix& U_in, const SolverConfig& config) {
  config.validate();
  if (Y_in.rows() != U_in.rows() || Y_in.cols() != U_in.cols()) {
    throw DimensionError("solve: Y and U shapes differ");
  }
  PreparedData data = drop_empty_experiments(Y_in, U_in);
  const NonnegMatrix& Y = data.Y;
  const NonnegMatrix& U = data.U;
  const std::size_t n = U.rows();
  const std::size_t N = n - 1;

  SolverReport report;
  report.dropped_columns = data.dropped;
  report.verification.enabled = config.verify_mode;
  report.S = Y.total();

  if (Y.is_zero()) {
    // F(0) = sum T(0)U = 0 is the global minimum.
    report.h_final = ImpulseResponse::zeros(n);
    report.objective_trace = {0.0};
    auto grad = cumulative_input_mass(U);  // grad_k = alpha_{N-k} at Y = 0
    std::reverse(grad.begin(), grad.end());
    report.kkt_final = kkt_from_gradient(std::move(grad), report.h_final, 0.0);
    report.termination = Termination::kkt_satisfied;
    if (config.record_history) report.history = {report.h_final};
    return report;
  }

  const ConditionFragment c1 = check_condition_1(Y, U);
  if (!c1.holds) {
    const Witness& w = c1.witnesses.front();
    throw WellPosednessError("condition 1 fails: Y(" + std::to_string(w.row) + "," +
                             std::to_string(*w.col) + ") > 0 precedes every positive input");
  }
  require_initial_mass(U);

  const ConvolutionSystem sys(U);
  const auto alpha = cumulative_input_mass(U);
  const double S = report.S;

  ImpulseResponse h = initial_point(Y, U, config);
  for (std::size_t k = 0; k < n; ++k) {
    if (h[k] == 0.0) report.frozen_coordinates.push_back(k);
  }
  NonnegMatrix W = sys.apply(h);
  double F = i_divergence(Y, W);
  if (!std::isfinite(F)) throw InitializationError("F(h^0) is infinite for the chosen start");

  report.objective_trace.push_back(F);
  if (config.record_history) report.history.push_back(h);
  const bool start_positive = report.frozen_coordinates.empty();

  VerificationSummary& vs = report.verification;
  std::size_t stalled = 0;
  KktResidual kkt;
  while (true) {
    const auto A = backprojected_ratio(Y, U, W);
    std::vector<double> grad(n);
    for (std::size_t k = 0; k <= N; ++k) grad[k] = alpha[N - k] - A[k];
    kkt = kkt_from_gradient(std::move(grad), h, default_active_tolerance(h));

    if (kkt.max_violation <= config.tol_kkt) {
      report.termination = Termination::kkt_satisfied;
      break;
    }
    if (stalled >= config.stall_window) {
      report.termination = Termination::objective_stalled;
      break;
    }
    if (report.iterations_used >= config.max_iters) {
      report.termination = Termination::max_iters;
      break;
    }

    ImpulseResponse next = multiplicative_update(h, A, alpha);
    NonnegMatrix W_next = sys.apply(next);
    const double F_next = i_divergence(Y, W_next);

    vs.max_objective_increase = std::max(vs.max_objective_increase, F_next - F);
    const double simplex_res = std::abs(sum_weighted(next, alpha) - S);
    report.simplex_residuals.push_back(simplex_res);
    vs.max_simplex_residual = std::max(vs.max_simplex_residual, simplex_res / S);
    if (start_positive) {
      // A_k == 0 means no positive output ever sees lag k; that coordinate drops
      // to its optimum 0 in one step. Subnormal values may underflow to 0. Neither
      // counts as a positivity failure.
      for (std::size_t k = 0; k < n; ++k) {
        if (h[k] >= std::numeric_limits<double>::min() && A[k] > 0.0 && !(next[k] > 0.0)) {
          vs.positivity_preserved = false;
        }
      }
    }

    if (config.verify_mode) {
      const LiftedTensor Wt = lift_from_h(U, h);
      const LiftedTensor Wt1 = lift_from_h(U, next);
      const LiftedTensor Yt = partial_min_Y(Y, Wt);
      const LiftedTensor Yt1 = partial_min_Y(Y, Wt1);
      const StepGain g = gains_from_tensors(Yt, Yt1, Wt, Wt1, F, F_next, U, h, next, S);
      report.gain_trace.push_back(g);
      vs.max_gain_residual = std::max(vs.max_gain_residual, g.identity_residual / (1.0 + std::abs(g.delta_F)));
      vs.max_gain_w_residual = std::max(vs.max_gain_w_residual, g.simplex_residual / (1.0 + std::abs(g.gain_W)));
      vs.min_gain = std::min({vs.min_gain, g.gain_Y, g.gain_W});

      const IdentityCheck py = pythagoras_Y_check(Yt, Wt1);
      const IdentityCheck pw = pythagoras_W_check(Yt, Wt, U);
      const double py_scaled = py.evaluated ? py.residual / (1.0 + std::abs(py.lhs)) : 0.0;
      const double pw_scaled = pw.evaluated ? pw.residual / (1.0 + std::abs(pw.lhs)) : 0.0;
      if (!py.evaluated) ++vs.pythagoras_skipped;
      if (!pw.evaluated) ++vs.pythagoras_skipped;
      report.pythagoras_Y_trace.push_back(py_scaled);
      report.pythagoras_W_trace.push_back(pw_scaled);
      vs.max_pythagoras_Y = std::max(vs.max_pythagoras_Y, py_scaled);
      vs.max_pythagoras_W = std::max(vs.max_pythagoras_W, pw_scaled);

      vs.max_gradient_form_gap =
          std::max(vs.max_gradient_form_gap, gradient_form_gap(h, next, gradient_form_step(Y, U, h)));
      ++vs.steps_checked;
    }

    const double rel_decrease = (F - F_next) / std::max(std::abs(F), std::numeric_limits<double>::min());
    stalled = rel_decrease < config.tol_objective ? stalled + 1 : 0;

    h = std::move(next);
    W = std::move(W_next);
    F = F_next;
    report.objective_trace.push_back(F);
    if (config.record_history) report.history.push_back(h);
    ++report.iterations_used;
  }

  for (std::size_t k : kkt.active_set) {
    if (-kkt.gradient[k] > config.tol_kkt) report.suspect_active_set.push_back(k);
  }
  report.kkt_final = std::move(kkt);
  report.h_final = std::move(h);
  return report;
}

StepGain step_gain_decomposition(const NonnegMatrix& Y, const NonnegMatrix& U,
                                 const ImpulseResponse& h_t, const ImpulseResponse& h_t1) {
  require_problem_shape(Y, U, h_t);
  require_problem_shape(Y, U, h_t1);
  const LiftedTensor Wt = lift_from_h(U, h_t);
  const LiftedTensor Wt1 = lift_from_h(U, h_t1);
  const LiftedTensor Yt = partial_min_Y(Y, Wt);
  const LiftedTensor Yt1 = partial_min_Y(Y, Wt1);
  return gains_from_tensors(Yt, Yt1, Wt, Wt1, objective(Y, U, h_t), objective(Y, U, h_t1), U, h_t,
                            h_t1, Y.total());
}

double simplex_projection_residual(const NonnegMatrix& U, const ImpulseResponse& h, double S) {
  if (h.size() != U.rows()) throw DimensionError("simplex_projection_residual: length mismatch");
  return std::abs(sum_weighted(h, cumulative_input_mass(U)) - S);
}

std::vector<double> monotone_lyapunov_trace(std::span<const ImpulseResponse> history,
                                            const ImpulseResponse& h_ref, const NonnegMatrix& U,
                                            double S) {
  const auto p_ref = simplex_coordinates(U, h_ref, S);
  std::vector<double> trace;
  trace.reserve(history.size());
  for (const auto& h : history) {
    const auto p = simplex_coordinates(U, h, S);
    trace.push_back(i_divergence(std::span<const double>(p_ref), std::span<const double>(p)));
  }
  return trace;
}

}  // namespace nnfir
