#pragma once

#include <cstddef>
#include <vector>

#include "nnfir/nonneg.hpp"

namespace nnfir {

/// Nonnegative three-index array T_{ilj}, i, l in 0..N, j in 0..m-1.
///
/// Elements of the lifted sets: the marginal-constrained set (T_{i.j} = Y_ij)
/// and the factored set (T_{ilj} = h_l U_{i-l,j}, zero for l > i). These are
/// O(N^2 m) objects and only exist for verification; the solver itself never
/// materializes them.
class LiftedTensor {
 public:
  LiftedTensor() = default;
  LiftedTensor(std::size_t length, std::size_t experiments);

  std::size_t length() const { return n_; }
  std::size_t experiments() const { return m_; }

  double operator()(std::size_t i, std::size_t l, std::size_t j) const {
    return data_[(i * n_ + l) * m_ + j];
  }
  /// Throws InputError for negative or non-finite values.
  void set(std::size_t i, std::size_t l, std::size_t j, double value);

  const std::vector<double>& values() const { return data_; }

  /// W_ij = T_{i.j}.
  NonnegMatrix marginal() const;
  /// T_{.l.} for every lag l.
  std::vector<double> lag_mass() const;
  double total() const;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> data_;
};

double i_divergence(const LiftedTensor& a, const LiftedTensor& b);

/// W_{ilj} = h_l U_{i-l,j}.
LiftedTensor lift_from_h(const NonnegMatrix& U, const ImpulseResponse& h);

/// Closest marginal-constrained tensor: Y*_{ilj} = Y_ij / W_ij * W_{ilj},
/// with 0/0 = 0. Throws DomainError where Y_ij > 0 but W_ij == 0.
LiftedTensor partial_min_Y(const NonnegMatrix& Y, const LiftedTensor& W);

struct FactoredMinimizer {
  LiftedTensor W;
  ImpulseResponse h;
};

/// Closest factored tensor: h*_l = T_{.l.} / alpha_{N-l}. Requires U_{0.} > 0
/// (DegenerateDataError otherwise).
FactoredMinimizer partial_min_W(const LiftedTensor& Y_tensor, const NonnegMatrix& U);

struct MembershipTag {
  bool in_Y_set = false;
  bool in_W_set = false;
  double y_residual = 0.0;  // max |T_{i.j} - Y_ij|
  double w_residual = 0.0;  // max |T_{ilj} - h_l U_{i-l,j}| with recovered h
};

/// Checks both defining constraints to 1e-12 (scaled by max(1, |value|)).
MembershipTag membership(const LiftedTensor& T, const NonnegMatrix& Y, const NonnegMatrix& U);

/// One side of a Pythagorean identity, lhs = split_a + split_b.
struct IdentityCheck {
  bool evaluated = false;  // false when some divergence is infinite
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;

  /// |lhs - rhs| <= 1e-10 (1 + |lhs|). Skipped checks do not pass.
  bool within_contract(double rel_tol = 1e-10) const;
};

/// I(Y||W) = I(Y||Y*(W)) + I(Y*(W)||W) for Y in the marginal set of its own
/// marginal.
IdentityCheck pythagoras_Y_check(const LiftedTensor& Y_tensor, const LiftedTensor& W);

/// I(Y||W) = I(Y||W*(Y)) + I(W*(Y)||W) for W in the factored set.
IdentityCheck pythagoras_W_check(const LiftedTensor& Y_tensor, const LiftedTensor& W,
                                 const NonnegMatrix& U);

struct LiftedRun {
  ImpulseResponse h;
  double value = 0.0;  // I(Y*(W)||W) at the last W
};

/// Alternating minimization carried out on the tensors themselves,
/// W -> Y*(W) -> W*(Y*) -> ..., without shunting through h.
LiftedRun lifted_alternating_minimize(const NonnegMatrix& Y, const NonnegMatrix& U,
                                      const ImpulseResponse& h0, std::size_t iterations);

}  // namespace nnfir
