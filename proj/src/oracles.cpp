#include "nnfir/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nnfir/diagnostics.hpp"
#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"
#include "nnfir/solver.hpp"

namespace nnfir {

NonnegMatrix toy_inputs(double u0, double u1) { return NonnegMatrix{{u0}, {u1}}; }
NonnegMatrix toy_outputs(double y0, double y1) { return NonnegMatrix{{y0}, {y1}}; }

ToySolution toy_closed_form(double u0, double u1, double y0, double y1) {
  if (!(u0 > 0.0)) throw DegenerateDataError("toy_closed_form: requires u0 > 0");
  if (u1 < 0.0 || y0 < 0.0 || y1 < 0.0) throw InputError("toy_closed_form: negative data");
  ToySolution sol;
  sol.unique = y0 * y1 * u0 > 0.0;
  if (y1 * u0 - y0 * u1 >= 0.0) {
    sol.regime = ToyCase::interior;
    sol.h_star = ImpulseResponse{y0 / u0, (y1 * u0 - y0 * u1) / (u0 * u0)};
    sol.objective_at_star = 0.0;
  } else {
    sol.regime = ToyCase::boundary;
    sol.h_star = ImpulseResponse{(y0 + y1) / (u0 + u1), 0.0};
    sol.objective_at_star = objective(toy_outputs(y0, y1), toy_inputs(u0, u1), sol.h_star);
  }
  return sol;
}

BruteForceResult brute_force_minimize(const NonnegMatrix& Y, const NonnegMatrix& U,
                                      const BruteForceOptions& options) {
  if (Y.rows() != U.rows() || Y.cols() != U.cols()) throw DimensionError("brute_force: shapes differ");
  if (U.rows() > 4 || U.cols() > 3) throw SizeError("brute_force: requires N <= 3 and m <= 3");
  if (options.points_per_dim < 3) throw ConfigError("brute_force: need at least 3 points per dim");
  if (!check_condition_1(Y, U).holds) throw WellPosednessError("brute_force: condition 1 fails");
  if (!(U.row_sum(0) > 0.0)) throw DegenerateDataError("brute_force: requires U_{0.} > 0");

  const std::size_t n = U.rows();
  const std::size_t free_dims = n - 1;
  const double S = Y.total();
  const auto alpha = cumulative_input_mass(U);
  const ConvolutionSystem sys(U);

  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  if (S == 0.0) {
    best.h = ImpulseResponse::zeros(n);
    best.objective = 0.0;
    return best;
  }

  // Simplex coordinates p (sum one) map to h_k = S p_k / alpha_{N-k}.
  auto evaluate = [&](const std::vector<double>& p) {
    std::vector<double> h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = S * p[k] / alpha[n - 1 - k];
    ImpulseResponse hr(std::move(h));
    ++best.evaluations;
    const double F = objective(Y, sys, hr);
    if (F < best.objective) {
      best.objective = F;
      best.h = hr;
      return true;
    }
    return false;
  };

  std::vector<double> center(n, 1.0 / static_cast<double>(n));
  if (free_dims == 0) {
    evaluate({1.0});
    return best;
  }
  double radius = 0.5;
  const std::size_t pts = options.points_per_dim;
  std::vector<double> incumbent = center;
  std::vector<std::size_t> idx(free_dims, 0);
  std::vector<double> p(n);
  for (std::size_t round = 0; round < options.rounds; ++round) {
    std::fill(idx.begin(), idx.end(), 0);
    bool moved_to_edge = false;
    while (true) {
      double used = 0.0;
      bool edge = false;
      for (std::size_t d = 0; d < free_dims; ++d) {
        const double offset = -1.0 + 2.0 * static_cast<double>(idx[d]) / static_cast<double>(pts - 1);
        p[d] = std::clamp(center[d] + radius * offset, 0.0, 1.0);
        edge = edge || ((idx[d] == 0 || idx[d] == pts - 1) && p[d] > 0.0 && p[d] < 1.0);
        used += p[d];
      }
      if (used <= 1.0 + 1e-15) {
        p[free_dims] = std::max(0.0, 1.0 - used);
        if (evaluate(p)) {
          incumbent = p;
          moved_to_edge = edge;
        }
      }
      std::size_t d = 0;
      while (d < free_dims && ++idx[d] == pts) idx[d++] = 0;
      if (d == free_dims) break;
    }
    center = incumbent;
    // An incumbent on the box edge may sit next to a better region outside it:
    // recenter without shrinking.
    if (!moved_to_edge) radius *= 0.5;
  }
  return best;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double sse = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - intercept - f.slope * x[i];
    f.sse += e * e;
  }
  return f;
}

}  // namespace

RateClassification rate_experiment(double u0, double u1, double y0, double y1, std::size_t iters) {
  if (!(y1 > 0.0)) throw ConfigError("rate_experiment: requires y1 > 0");
  if (iters < 4) throw ConfigError("rate_experiment: need at least 4 iterations");
  const ToySolution toy = toy_closed_form(u0, u1, y0, y1);
  const NonnegMatrix U = toy_inputs(u0, u1);
  const NonnegMatrix Y = toy_outputs(y0, y1);

  RateClassification rc;
  rc.toy_case = toy.regime;
  const double gap = y1 * u0 - y0 * u1;
  if (toy.regime == ToyCase::boundary) {
    rc.predicted_rate = y1 * (u0 + u1) / ((y0 + y1) * u1);
  } else if (gap > 0.0) {
    rc.predicted_rate = u1 * (y0 + y1) / ((u0 + u1) * y1);
  } else {
    rc.predicted_rate = 1.0;
  }

  SolverConfig init_cfg;
  init_cfg.init = InitKind::uniform_simplex;
  ImpulseResponse h = initial_point(Y, U, init_cfg);
  rc.iterates.push_back(h);
  for (std::size_t t = 0; t < iters; ++t) {
    h = update_step(Y, U, h);
    rc.iterates.push_back(h);
  }
  for (const auto& it : rc.iterates) {
    rc.residual_trace.push_back(
        std::max(std::abs(it[0] - toy.h_star[0]), std::abs(it[1] - toy.h_star[1])));
  }
  const auto& last = rc.iterates.back();
  const auto& prev = rc.iterates[rc.iterates.size() - 2];
  rc.final_ratio_h1 = prev[1] > 0.0 ? last[1] / prev[1] : 0.0;

  // Fit only above the rounding floor, then over the last half of that span.
  const double floor = 1e-12 * (1.0 + toy.h_star.max());
  std::size_t usable = 1;
  while (usable < rc.residual_trace.size() && rc.residual_trace[usable] > floor) ++usable;
  std::vector<double> ts, logt, logr;
  for (std::size_t t = std::max<std::size_t>(1, usable / 2); t < usable; ++t) {
    ts.push_back(static_cast<double>(t));
    logt.push_back(std::log(static_cast<double>(t)));
    logr.push_back(std::log(rc.residual_trace[t]));
  }
  if (ts.size() >= 2) {
    const LineFit exp_fit = least_squares(ts, logr);
    const LineFit pow_fit = least_squares(logt, logr);
    rc.fitted_rate = std::exp(exp_fit.slope);
    rc.fitted_power = pow_fit.slope;
    rc.regime = std::abs(exp_fit.slope) < 1e-3 && pow_fit.sse < exp_fit.sse ? RateRegime::one_over_t
                                                                           : RateRegime::exponential;
  }

  if (toy.regime == ToyCase::interior && gap == 0.0) {
    rc.w = u0 * u0 / (u0 + u1);
    const double v0 = rc.iterates.front()[1] - toy.h_star[1];
    for (std::size_t t = 1; t < rc.iterates.size(); ++t) {
      const double v = rc.iterates[t][1] - toy.h_star[1];
      const double predicted = v0 * y1 / (rc.w * v0 * static_cast<double>(t) + y1);
      rc.closed_form_gap = std::max(rc.closed_form_gap, std::abs(v - predicted) / std::abs(predicted));
    }
    rc.t_v1 = static_cast<double>(iters) * (last[1] - toy.h_star[1]);
    rc.t_v1_limit = y1 / rc.w;
  }
  return rc;
}

}  // namespace nnfir
