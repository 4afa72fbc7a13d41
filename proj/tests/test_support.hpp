#pragma once

// Independent reference computations and random instance generators shared by
// the test binaries. Nothing here calls into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "nnfir/nonneg.hpp"

namespace nnfir::testing {

struct Instance {
  NonnegMatrix U;
  NonnegMatrix Y;
  std::size_t N = 0;
  std::size_t m = 0;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Dense lower-triangular Toeplitz T(h) times U, built entry by entry.
inline NonnegMatrix dense_toeplitz_product(const std::vector<double>& h, const NonnegMatrix& U) {
  const std::size_t n = U.rows();
  std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c <= r; ++c) T[r][c] = h[r - c];
  NonnegMatrix out(n, U.cols());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < U.cols(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += T[r][c] * U(c, j);
      out.set(r, j, s);
    }
  return out;
}

/// Textbook generalized KL divergence over flat arrays.
inline double naive_divergence(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0 && b[i] == 0.0) return std::numeric_limits<double>::infinity();
    if (a[i] > 0.0) s += a[i] * std::log(a[i] / b[i]);
    s += b[i] - a[i];
  }
  return s;
}

inline double naive_objective(const NonnegMatrix& Y, const NonnegMatrix& U, const std::vector<double>& h) {
  const NonnegMatrix W = dense_toeplitz_product(h, U);
  return naive_divergence({Y.values().begin(), Y.values().end()}, {W.values().begin(), W.values().end()});
}

/// Random instance with every Y_ij > 0 and every U_0j > 0, so Condition 2 holds.
/// Y is a noisy positive FIR response plus an independent positive floor.
inline Instance random_strict_instance(std::mt19937_64& rng, std::size_t max_N, std::size_t max_m) {
  Instance inst;
  inst.N = pick(rng, 0, max_N);
  inst.m = pick(rng, 1, max_m);
  const std::size_t n = inst.N + 1;
  std::vector<double> u(n * inst.m), h(n);
  for (auto& v : u) v = uniform(rng, 0.0, 1.0) < 0.2 ? 0.0 : uniform(rng, 0.05, 2.0);
  for (std::size_t j = 0; j < inst.m; ++j) u[j] = uniform(rng, 0.1, 2.0);
  for (auto& v : h) v = uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : uniform(rng, 0.05, 3.0);
  inst.U = NonnegMatrix(n, inst.m, u);
  const NonnegMatrix clean = dense_toeplitz_product(h, inst.U);
  std::vector<double> y(n * inst.m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < inst.m; ++j)
      y[i * inst.m + j] = clean(i, j) * uniform(rng, 0.5, 1.5) + uniform(rng, 0.01, 0.5);
  inst.Y = NonnegMatrix(n, inst.m, y);
  return inst;
}

/// Random instance with sparse data; only U_{0.} > 0 and Condition 1 are enforced.
inline Instance random_sparse_instance(std::mt19937_64& rng, std::size_t max_N, std::size_t max_m) {
  while (true) {
    Instance inst;
    inst.N = pick(rng, 0, max_N);
    inst.m = pick(rng, 1, max_m);
    const std::size_t n = inst.N + 1;
    std::vector<double> u(n * inst.m), y(n * inst.m);
    for (auto& v : u) v = uniform(rng, 0.0, 1.0) < 0.4 ? 0.0 : uniform(rng, 0.05, 2.0);
    for (auto& v : y) v = uniform(rng, 0.0, 1.0) < 0.4 ? 0.0 : uniform(rng, 0.05, 2.0);
    inst.U = NonnegMatrix(n, inst.m, u);
    inst.Y = NonnegMatrix(n, inst.m, y);
    double u0 = 0.0;
    for (std::size_t j = 0; j < inst.m; ++j) u0 += inst.U(0, j);
    if (u0 == 0.0 || inst.Y.is_zero()) continue;
    bool c1 = true;
    for (std::size_t j = 0; j < inst.m && c1; ++j) {
      bool seen_input = false;
      for (std::size_t i = 0; i < n && c1; ++i) {
        seen_input = seen_input || inst.U(i, j) > 0.0;
        if (inst.Y(i, j) > 0.0 && !seen_input) c1 = false;
      }
    }
    if (c1) return inst;
  }
}

inline std::vector<double> random_positive_h(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> h(n);
  for (auto& v : h) v = uniform(rng, 0.2, 2.0);
  return h;
}

/// Central-difference gradient of the naive objective.
inline std::vector<double> fd_gradient(const NonnegMatrix& Y, const NonnegMatrix& U, std::vector<double> h,
                                       double step = 1e-6) {
  std::vector<double> g(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double hk = h[k];
    const double e = step * std::max(1.0, std::abs(hk));
    h[k] = hk + e;
    const double fp = naive_objective(Y, U, h);
    h[k] = hk - e;
    const double fm = naive_objective(Y, U, h);
    h[k] = hk;
    g[k] = (fp - fm) / (2.0 * e);
  }
  return g;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double relative_gap(const std::vector<double>& approx, const std::vector<double>& exact) {
  double gap = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) gap = std::max(gap, std::abs(approx[i] - exact[i]));
  return gap / std::max(1.0, max_abs(exact));
}

}  // namespace nnfir::testing
