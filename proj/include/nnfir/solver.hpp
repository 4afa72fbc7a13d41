#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nnfir/diagnostics.hpp"
#include "nnfir/nonneg.hpp"

namespace nnfir {

enum class InitKind { ones, uniform_simplex, user };

struct SolverConfig {
  std::size_t max_iters = 100000;
  /// Relative objective decrease below which an iteration counts as stalled.
  double tol_objective = 1e-12;
  /// Stop once the KKT max_violation drops to this value.
  double tol_kkt = 1e-8;
  /// Consecutive stalled iterations before giving up.
  std::size_t stall_window = 5;
  InitKind init = InitKind::ones;
  std::vector<double> init_vector;  // used when init == InitKind::user
  /// Materialize the lifted tensors every step and check the identities.
  bool verify_mode = false;
  /// Keep every iterate h^t (needed for the Lyapunov trace).
  bool record_history = false;

  /// Throws ConfigError on nonpositive tolerances or max_iters == 0.
  void validate() const;
};

enum class Termination { kkt_satisfied, objective_stalled, max_iters };

std::string to_string(Termination t);

/// Decrease of F over one step split into its two lifted contributions.
struct StepGain {
  double delta_F = 0.0;           // F(h^t) - F(h^{t+1})
  double gain_Y = 0.0;            // I(Y^t || Y^{t+1})
  double gain_W = 0.0;            // I(W^{t+1} || W^t)
  double gain_W_simplex = 0.0;    // S I(p^{t+1} || p^t)
  double identity_residual = 0.0; // |delta_F - (gain_Y + gain_W)|
  double simplex_residual = 0.0;  // |gain_W - gain_W_simplex|
};

/// Worst values seen across a run; all zero when nothing was checked.
struct VerificationSummary {
  bool enabled = false;
  std::size_t steps_checked = 0;
  double max_objective_increase = 0.0;   // max F(h^{t+1}) - F(h^t)
  double max_gain_residual = 0.0;        // identity_residual / (1 + |delta_F|)
  double max_gain_w_residual = 0.0;      // simplex_residual / (1 + |gain_W|)
  double max_pythagoras_Y = 0.0;         // residual / (1 + |lhs|)
  double max_pythagoras_W = 0.0;
  std::size_t pythagoras_skipped = 0;
  double max_simplex_residual = 0.0;     // |sum h alpha - S| / S over t >= 1
  double max_gradient_form_gap = 0.0;    // relative gap of the two update forms
  double min_gain = 0.0;                 // most negative of gain_Y, gain_W
  bool positivity_preserved = true;      // h_k > 0 kept wherever A_k > 0

  bool all_pass() const;
};

struct SolverReport {
  ImpulseResponse h_final;
  std::vector<double> objective_trace;
  std::vector<StepGain> gain_trace;          // verify_mode only
  std::vector<double> pythagoras_Y_trace;    // verify_mode only, scaled residuals
  std::vector<double> pythagoras_W_trace;
  std::vector<double> simplex_residuals;     // t = 1..T, absolute
  std::vector<ImpulseResponse> history;      // record_history only, h^0..h^T
  KktResidual kkt_final;
  Termination termination = Termination::max_iters;
  std::size_t iterations_used = 0;
  double S = 0.0;
  std::vector<std::size_t> dropped_columns;
  /// Coordinates zero in h^0; multiplicative updates keep them at zero.
  std::vector<std::size_t> frozen_coordinates;
  /// Active coordinates whose KKT sign condition fails by more than tol_kkt.
  std::vector<std::size_t> suspect_active_set;
  VerificationSummary verification;
};

/// One multiplicative update h'_k = h_k A_k / alpha_{N-k}.
ImpulseResponse update_step(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h);

/// The same update written as h_k (1 - grad_k / alpha_{N-k}).
ImpulseResponse gradient_form_step(const NonnegMatrix& Y, const NonnegMatrix& U,
                                   const ImpulseResponse& h);

ImpulseResponse initial_point(const NonnegMatrix& Y, const NonnegMatrix& U,
                              const SolverConfig& config);

/// Runs the multiplicative iteration until KKT, stall or max_iters.
/// Throws WellPosednessError if condition 1 fails, DegenerateDataError when
/// U_{0.} == 0, InitializationError if F(h^0) is infinite.
SolverReport solve(const NonnegMatrix& Y, const NonnegMatrix& U, const SolverConfig& config = {});

StepGain step_gain_decomposition(const NonnegMatrix& Y, const NonnegMatrix& U,
                                 const ImpulseResponse& h_t, const ImpulseResponse& h_t1);

/// |sum_k h_k alpha_{N-k} - S|.
double simplex_projection_residual(const NonnegMatrix& U, const ImpulseResponse& h, double S);

/// I(p_ref || p^t) along a run, with h_ref standing in for the limit. Only
/// meaningful once the run has converged.
std::vector<double> monotone_lyapunov_trace(std::span<const ImpulseResponse> history,
                                            const ImpulseResponse& h_ref, const NonnegMatrix& U,
                                            double S);

}  // namespace nnfir
