#pragma once

#include <cstddef>
#include <vector>

#include "nnfir/nonneg.hpp"

namespace nnfir {

enum class ToyCase { interior, boundary };

/// Closed-form minimizer for N = 1, m = 1.
struct ToySolution {
  ImpulseResponse h_star;
  ToyCase regime = ToyCase::interior;
  double objective_at_star = 0.0;
  /// y0 y1 u0 > 0, the strict-convexity pattern for this toy.
  bool unique = false;
};

/// Interior when y1 u0 - y0 u1 >= 0: h* = (y0/u0, (y1 u0 - y0 u1)/u0^2) with F = 0.
/// Boundary otherwise: h* = ((y0 + y1)/(u0 + u1), 0). Requires u0 > 0.
ToySolution toy_closed_form(double u0, double u1, double y0, double y1);

NonnegMatrix toy_inputs(double u0, double u1);
NonnegMatrix toy_outputs(double y0, double y1);

struct BruteForceOptions {
  std::size_t points_per_dim = 11;
  /// Refinement rounds; each round halves the search radius.
  std::size_t rounds = 40;
};

struct BruteForceResult {
  ImpulseResponse h;
  double objective = 0.0;
  std::size_t evaluations = 0;
};

/// Grid search over the simplex sum_k h_k alpha_{N-k} = S, which holds every
/// minimizer. Each round lays a points_per_dim grid over the free simplex
/// coordinates around the incumbent and halves the radius. Limited to
/// N <= 3, m <= 3 (SizeError otherwise).
BruteForceResult brute_force_minimize(const NonnegMatrix& Y, const NonnegMatrix& U,
                                      const BruteForceOptions& options = {});

enum class RateRegime { exponential, one_over_t };

struct RateClassification {
  RateRegime regime = RateRegime::exponential;
  /// exp(slope) of the least-squares fit of log residual against t.
  double fitted_rate = 0.0;
  /// Slope of log residual against log t.
  double fitted_power = 0.0;
  std::vector<double> residual_trace;  // |h^t - h*|_inf, t = 0..iters
  ToyCase toy_case = ToyCase::interior;
  /// Contraction the analysis predicts: g0 (boundary), the nonzero eigenvalue
  /// of the linearized map (strict interior) or 1 (threshold).
  double predicted_rate = 0.0;
  /// h1^{T} / h1^{T-1} at the last step.
  double final_ratio_h1 = 0.0;
  /// Threshold case only: w = u0^2/(u0+u1), T v1^T and its limit y1/w, and the
  /// worst relative gap between v1^t and v1^0 y1/(w v1^0 t + y1).
  double w = 0.0;
  double t_v1 = 0.0;
  double t_v1_limit = 0.0;
  double closed_form_gap = 0.0;
  std::vector<ImpulseResponse> iterates;
};

/// Runs the update on the toy from the uniform simplex start and classifies
/// the convergence of h^t to the closed-form minimizer. Requires u0 > 0, y1 > 0.
RateClassification rate_experiment(double u0, double u1, double y0, double y1, std::size_t iters);

}  // namespace nnfir
