#include "nnfir/lifted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nnfir/errors.hpp"

namespace nnfir {

LiftedTensor::LiftedTensor(std::size_t length, std::size_t experiments)
    : n_(length), m_(experiments), data_(length * length * experiments, 0.0) {
  if (length == 0 || experiments == 0) throw DimensionError("LiftedTensor: empty shape");
}

void LiftedTensor::set(std::size_t i, std::size_t l, std::size_t j, double value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw InputError("LiftedTensor: entries must be finite and nonnegative");
  }
  data_[(i * n_ + l) * m_ + j] = value;
}

NonnegMatrix LiftedTensor::marginal() const {
  std::vector<double> w(n_ * m_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t l = 0; l < n_; ++l) {
      for (std::size_t j = 0; j < m_; ++j) w[i * m_ + j] += (*this)(i, l, j);
    }
  }
  return NonnegMatrix(n_, m_, std::move(w));
}

std::vector<double> LiftedTensor::lag_mass() const {
  std::vector<double> mass(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t l = 0; l < n_; ++l) {
      for (std::size_t j = 0; j < m_; ++j) mass[l] += (*this)(i, l, j);
    }
  }
  return mass;
}

double LiftedTensor::total() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double i_divergence(const LiftedTensor& a, const LiftedTensor& b) {
  if (a.length() != b.length() || a.experiments() != b.experiments()) {
    throw DimensionError("i_divergence: tensor shapes differ");
  }
  return i_divergence(std::span<const double>(a.values()), std::span<const double>(b.values()));
}

LiftedTensor lift_from_h(const NonnegMatrix& U, const ImpulseResponse& h) {
  if (h.size() != U.rows()) throw DimensionError("lift_from_h: h length does not match N+1");
  const std::size_t n = U.rows();
  LiftedTensor W(n, U.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l <= i; ++l) {
      for (std::size_t j = 0; j < U.cols(); ++j) W.set(i, l, j, h[l] * U(i - l, j));
    }
  }
  return W;
}

LiftedTensor partial_min_Y(const NonnegMatrix& Y, const LiftedTensor& W) {
  if (Y.rows() != W.length() || Y.cols() != W.experiments()) {
    throw DimensionError("partial_min_Y: Y and tensor shapes differ");
  }
  const NonnegMatrix marg = W.marginal();
  const std::size_t n = W.length();
  LiftedTensor out(n, W.experiments());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < W.experiments(); ++j) {
      const double y = Y(i, j);
      if (y == 0.0) continue;
      const double w = marg(i, j);
      if (w == 0.0) {
        throw DomainError("partial_min_Y: infinite divergence, Y(" + std::to_string(i) + "," +
                          std::to_string(j) + ") > 0 with zero marginal");
      }
      for (std::size_t l = 0; l < n; ++l) out.set(i, l, j, y / w * W(i, l, j));
    }
  }
  return out;
}

FactoredMinimizer partial_min_W(const LiftedTensor& Y_tensor, const NonnegMatrix& U) {
  if (U.rows() != Y_tensor.length() || U.cols() != Y_tensor.experiments()) {
    throw DimensionError("partial_min_W: U and tensor shapes differ");
  }
  if (!(U.row_sum(0) > 0.0)) throw DegenerateDataError("partial_min_W: requires U_{0.} > 0");
  const auto alpha = cumulative_input_mass(U);
  const auto mass = Y_tensor.lag_mass();
  const std::size_t N = U.rows() - 1;
  std::vector<double> h(N + 1);
  for (std::size_t l = 0; l <= N; ++l) h[l] = mass[l] / alpha[N - l];
  ImpulseResponse hstar(std::move(h));
  return {lift_from_h(U, hstar), hstar};
}

MembershipTag membership(const LiftedTensor& T, const NonnegMatrix& Y, const NonnegMatrix& U) {
  if (Y.rows() != T.length() || Y.cols() != T.experiments() || U.rows() != T.length() ||
      U.cols() != T.experiments()) {
    throw DimensionError("membership: shapes differ");
  }
  MembershipTag tag;
  const NonnegMatrix marg = T.marginal();
  bool y_ok = true;
  for (std::size_t i = 0; i < Y.rows(); ++i) {
    for (std::size_t j = 0; j < Y.cols(); ++j) {
      const double d = std::abs(marg(i, j) - Y(i, j));
      tag.y_residual = std::max(tag.y_residual, d);
      y_ok = y_ok && d <= 1e-12 * std::max(1.0, Y(i, j));
    }
  }
  tag.in_Y_set = y_ok;

  const auto alpha = cumulative_input_mass(U);
  const auto mass = T.lag_mass();
  const std::size_t n = T.length();
  std::vector<double> h(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    if (alpha[n - 1 - l] > 0.0) h[l] = mass[l] / alpha[n - 1 - l];
  }
  bool w_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t j = 0; j < T.experiments(); ++j) {
        const double expected = l <= i ? h[l] * U(i - l, j) : 0.0;
        const double d = std::abs(T(i, l, j) - expected);
        tag.w_residual = std::max(tag.w_residual, d);
        w_ok = w_ok && d <= 1e-12 * std::max(1.0, expected);
      }
    }
  }
  tag.in_W_set = w_ok;
  return tag;
}

bool IdentityCheck::within_contract(double rel_tol) const {
  return evaluated && residual <= rel_tol * (1.0 + std::abs(lhs));
}

namespace {

IdentityCheck make_check(double lhs, double a, double b) {
  IdentityCheck c;
  if (!std::isfinite(lhs) || !std::isfinite(a) || !std::isfinite(b)) return c;
  c.evaluated = true;
  c.lhs = lhs;
  c.rhs = a + b;
  c.residual = std::abs(c.lhs - c.rhs);
  return c;
}

}  // namespace

IdentityCheck pythagoras_Y_check(const LiftedTensor& Y_tensor, const LiftedTensor& W) {
  const double lhs = i_divergence(Y_tensor, W);
  if (!std::isfinite(lhs)) return {};
  const LiftedTensor Ystar = partial_min_Y(Y_tensor.marginal(), W);
  return make_check(lhs, i_divergence(Y_tensor, Ystar), i_divergence(Ystar, W));
}

IdentityCheck pythagoras_W_check(const LiftedTensor& Y_tensor, const LiftedTensor& W,
                                 const NonnegMatrix& U) {
  const double lhs = i_divergence(Y_tensor, W);
  if (!std::isfinite(lhs)) return {};
  const FactoredMinimizer best = partial_min_W(Y_tensor, U);
  return make_check(lhs, i_divergence(Y_tensor, best.W), i_divergence(best.W, W));
}

LiftedRun lifted_alternating_minimize(const NonnegMatrix& Y, const NonnegMatrix& U,
                                      const ImpulseResponse& h0, std::size_t iterations) {
  LiftedTensor W = lift_from_h(U, h0);
  ImpulseResponse h = h0;
  for (std::size_t t = 0; t < iterations; ++t) {
    const LiftedTensor Yt = partial_min_Y(Y, W);
    FactoredMinimizer next = partial_min_W(Yt, U);
    W = std::move(next.W);
    h = std::move(next.h);
  }
  const LiftedTensor Yt = partial_min_Y(Y, W);
  return {h, i_divergence(Yt, W)};
}

}  // namespace nnfir
