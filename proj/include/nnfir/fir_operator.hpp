#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nnfir/nonneg.hpp"

namespace nnfir {

/// Inputs U of m experiments over lags 0..N; the operator h -> T(h)U.
/// Inputs at negative time are zero, so every sum over lags stops at k <= i.
class ConvolutionSystem {
 public:
  explicit ConvolutionSystem(NonnegMatrix U);

  const NonnegMatrix& inputs() const { return U_; }
  std::size_t lags() const { return U_.rows() - 1; }         // N
  std::size_t experiments() const { return U_.cols(); }      // m
  std::size_t length() const { return U_.rows(); }           // N + 1

  /// (T(h)U)_{ij} = sum_{k=0}^{i} h_k U_{i-k,j}.
  NonnegMatrix apply(const ImpulseResponse& h) const;

  /// Solves T(h) u = y for experiment `column` by forward substitution. The
  /// result is signed: a negative entry means no perfect nonnegative model.
  std::vector<double> exact_solve(std::span<const double> y, std::size_t column = 0) const;

 private:
  NonnegMatrix U_;
};

/// F(h) = I(Y || T(h)U).
double objective(const NonnegMatrix& Y, const ConvolutionSystem& sys, const ImpulseResponse& h);
double objective(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h);

}  // namespace nnfir
