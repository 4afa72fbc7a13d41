#include "nnfir/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"

namespace nnfir {

namespace {

void require_same_shape(const NonnegMatrix& Y, const NonnegMatrix& U, const char* who) {
  if (Y.rows() != U.rows() || Y.cols() != U.cols()) {
    throw DimensionError(std::string(who) + ": Y and U shapes differ");
  }
}

void require_length(const NonnegMatrix& U, const ImpulseResponse& h, const char* who) {
  if (h.size() != U.rows()) {
    throw DimensionError(std::string(who) + ": h has length " + std::to_string(h.size()) +
                         ", expected " + std::to_string(U.rows()));
  }
}

}  // namespace

ConditionFragment check_condition_1(const NonnegMatrix& Y, const NonnegMatrix& U) {
  require_same_shape(Y, U, "check_condition_1");
  ConditionFragment out;
  for (std::size_t j = 0; j < Y.cols(); ++j) {
    bool input_seen = false;
    for (std::size_t i = 0; i < Y.rows(); ++i) {
      input_seen = input_seen || U(i, j) > 0.0;
      if (Y(i, j) > 0.0 && !input_seen) {
        out.holds = false;
        out.witnesses.push_back({i, j});
      }
    }
  }
  std::sort(out.witnesses.begin(), out.witnesses.end(), [](const Witness& a, const Witness& b) {
    return a.row != b.row ? a.row < b.row : *a.col < *b.col;
  });
  return out;
}

ConditionFragment check_condition_2(const NonnegMatrix& Y, const NonnegMatrix& U) {
  require_same_shape(Y, U, "check_condition_2");
  ConditionFragment out;
  for (std::size_t i = 0; i < Y.rows(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < Y.cols() && !found; ++j) found = Y(i, j) > 0.0 && U(0, j) > 0.0;
    if (!found) {
      out.holds = false;
      out.witnesses.push_back({i, std::nullopt});
    }
  }
  return out;
}

ConditionReport check_conditions(const NonnegMatrix& Y, const NonnegMatrix& U) {
  ConditionReport r;
  r.condition_1 = check_condition_1(Y, U);
  r.condition_2 = check_condition_2(Y, U);
  r.well_posed = r.condition_1.holds;
  // With m >= 2 the condition-2 pattern can hold while another experiment
  // violates condition 1; strict convexity is then vacuous.
  r.strictly_convex = r.condition_1.holds && r.condition_2.holds;
  return r;
}

std::vector<double> backprojected_ratio(const NonnegMatrix& Y, const NonnegMatrix& U,
                                        const NonnegMatrix& W) {
  require_same_shape(Y, U, "backprojected_ratio");
  require_same_shape(Y, W, "backprojected_ratio");
  const std::size_t rows = Y.rows();
  const std::size_t m = Y.cols();
  std::vector<double> ratio(rows * m, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double y = Y(i, j);
      if (y == 0.0) continue;
      const double w = W(i, j);
      if (w == 0.0) {
        throw DomainError("objective is infinite: Y(" + std::to_string(i) + "," +
                          std::to_string(j) + ") > 0 but (T(h)U) is zero there");
      }
      ratio[i * m + j] = y / w;
    }
  }
  std::vector<double> A(rows, 0.0);
  for (std::size_t k = 0; k < rows; ++k) {
    double acc = 0.0;
    for (std::size_t i = k; i < rows; ++i) {
      for (std::size_t j = 0; j < m; ++j) acc += ratio[i * m + j] * U(i - k, j);
    }
    A[k] = acc;
  }
  return A;
}

std::vector<double> gradient(const NonnegMatrix& Y, const NonnegMatrix& U,
                             const ImpulseResponse& h) {
  require_same_shape(Y, U, "gradient");
  require_length(U, h, "gradient");
  const ConvolutionSystem sys(U);
  auto grad = backprojected_ratio(Y, U, sys.apply(h));
  const auto alpha = cumulative_input_mass(U);
  const std::size_t N = U.rows() - 1;
  for (std::size_t k = 0; k <= N; ++k) grad[k] = alpha[N - k] - grad[k];
  return grad;
}

Eigen::MatrixXd hessian(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h) {
  require_same_shape(Y, U, "hessian");
  require_length(U, h, "hessian");
  const NonnegMatrix W = ConvolutionSystem(U).apply(h);
  const std::size_t n = U.rows();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < U.cols(); ++j) {
      const double y = Y(i, j);
      if (y == 0.0) continue;
      const double w = W(i, j);
      if (w == 0.0) throw DomainError("hessian: objective is infinite at h");
      const double weight = y / (w * w);
      for (std::size_t k = 0; k <= i; ++k) {
        const double uk = U(i - k, j);
        if (uk == 0.0) continue;
        for (std::size_t l = 0; l <= k; ++l) {
          H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) += weight * uk * U(i - l, j);
        }
      }
    }
  }
  for (Eigen::Index k = 0; k < H.rows(); ++k) {
    for (Eigen::Index l = k + 1; l < H.cols(); ++l) H(k, l) = H(l, k);
  }
  return H;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double default_active_tolerance(const ImpulseResponse& h) { return 1e-12 * h.max(); }

KktResidual kkt_from_gradient(std::vector<double> grad, const ImpulseResponse& h,
                              double tol_active) {
  if (grad.size() != h.size()) throw DimensionError("kkt: gradient length mismatch");
  KktResidual r;
  r.tol_active = tol_active;
  for (std::size_t k = 0; k < h.size(); ++k) {
    double violation;
    if (h[k] > tol_active) {
      violation = std::abs(grad[k]);
    } else {
      r.active_set.push_back(k);
      violation = std::max(0.0, -grad[k]);
    }
    r.max_violation = std::max(r.max_violation, violation);
  }
  r.gradient = std::move(grad);
  return r;
}

KktResidual kkt_residual(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h,
                         double tol_active) {
  return kkt_from_gradient(gradient(Y, U, h), h, tol_active);
}

KktResidual kkt_residual(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h) {
  return kkt_residual(Y, U, h, default_active_tolerance(h));
}

}  // namespace nnfir
