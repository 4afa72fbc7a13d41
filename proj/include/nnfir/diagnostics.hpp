#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nnfir/nonneg.hpp"

namespace nnfir {

/// Offending data position. `col` is empty for row-level witnesses.
struct Witness {
  std::size_t row = 0;
  std::optional<std::size_t> col;

  friend bool operator==(const Witness&, const Witness&) = default;
};

struct ConditionFragment {
  bool holds = true;
  std::vector<Witness> witnesses;
};

/// Well-posedness: every positive output Y_ij has a positive input U_lj, l <= i.
ConditionFragment check_condition_1(const NonnegMatrix& Y, const NonnegMatrix& U);

/// Strict-convexity pattern: every time i has an experiment j with Y_ij > 0
/// and U_0j > 0.
ConditionFragment check_condition_2(const NonnegMatrix& Y, const NonnegMatrix& U);

struct ConditionReport {
  bool well_posed = false;
  /// Condition 2 on a nonempty effective domain (so it implies well_posed).
  bool strictly_convex = false;
  ConditionFragment condition_1;
  ConditionFragment condition_2;
};

ConditionReport check_conditions(const NonnegMatrix& Y, const NonnegMatrix& U);

/// A_k = sum_j sum_{i>=k} Y_ij U_{i-k,j} / W_ij with 0/0 = 0. This is the
/// back-projected ratio shared by the gradient and the multiplicative update.
/// Throws DomainError where Y_ij > 0 and W_ij == 0.
std::vector<double> backprojected_ratio(const NonnegMatrix& Y, const NonnegMatrix& U,
                                        const NonnegMatrix& W);

/// grad F(h)_k = -A_k + alpha_{N-k}.
std::vector<double> gradient(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h);

/// H_kl = sum_ij Y_ij / (T(h)U)_ij^2 U_{i-k,j} U_{i-l,j}.
Eigen::MatrixXd hessian(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

struct KktResidual {
  std::vector<double> gradient;
  /// Per coordinate: |grad_k| when h_k > tol_active, max(0, -grad_k) otherwise.
  double max_violation = 0.0;
  std::vector<std::size_t> active_set;
  double tol_active = 0.0;
};

/// 1e-12 * max_k h_k.
double default_active_tolerance(const ImpulseResponse& h);

KktResidual kkt_residual(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h,
                         double tol_active);
KktResidual kkt_residual(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h);

/// Same classification from an already computed gradient.
KktResidual kkt_from_gradient(std::vector<double> grad, const ImpulseResponse& h,
                              double tol_active);

}  // namespace nnfir
