#include "nnfir/nonneg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nnfir/errors.hpp"

namespace nnfir {

namespace {

void require_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InputError(std::string(what) + ": entries must be finite and nonnegative, got " +
                     std::to_string(v));
  }
}

}  // namespace

NonnegMatrix::NonnegMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) throw DimensionError("NonnegMatrix: rows and cols must be >= 1");
}

NonnegMatrix::NonnegMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw DimensionError("NonnegMatrix: rows and cols must be >= 1");
  if (data_.size() != rows * cols) {
    throw DimensionError("NonnegMatrix: expected " + std::to_string(rows * cols) + " values, got " +
                         std::to_string(data_.size()));
  }
  for (double v : data_) require_nonneg(v, "NonnegMatrix");
}

NonnegMatrix::NonnegMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  if (rows_ == 0 || cols_ == 0) throw DimensionError("NonnegMatrix: rows and cols must be >= 1");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("NonnegMatrix: ragged initializer");
    for (double v : r) {
      require_nonneg(v, "NonnegMatrix");
      data_.push_back(v);
    }
  }
}

void NonnegMatrix::set(std::size_t i, std::size_t j, double value) {
  require_nonneg(value, "NonnegMatrix::set");
  data_[i * cols_ + j] = value;
}

std::vector<double> NonnegMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

double NonnegMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
  return s;
}

double NonnegMatrix::total() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

bool NonnegMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

ImpulseResponse::ImpulseResponse(std::vector<double> gains) : h_(std::move(gains)) {
  if (h_.empty()) throw DimensionError("ImpulseResponse: length must be >= 1");
  for (double v : h_) require_nonneg(v, "ImpulseResponse");
}

ImpulseResponse::ImpulseResponse(std::initializer_list<double> gains)
    : ImpulseResponse(std::vector<double>(gains)) {}

ImpulseResponse ImpulseResponse::ones(std::size_t length) {
  return ImpulseResponse(std::vector<double>(length, 1.0));
}

ImpulseResponse ImpulseResponse::zeros(std::size_t length) {
  return ImpulseResponse(std::vector<double>(length, 0.0));
}

ImpulseResponse ImpulseResponse::unit_impulse(std::size_t length) {
  std::vector<double> h(length, 0.0);
  if (length) h[0] = 1.0;
  return ImpulseResponse(std::move(h));
}

double ImpulseResponse::max() const { return *std::max_element(h_.begin(), h_.end()); }

std::vector<double> cumulative_input_mass(const NonnegMatrix& U) {
  std::vector<double> alpha(U.rows());
  double run = 0.0;
  for (std::size_t k = 0; k < U.rows(); ++k) {
    run += U.row_sum(k);
    alpha[k] = run;
  }
  return alpha;
}

std::vector<double> simplex_coordinates(const NonnegMatrix& U, const ImpulseResponse& h, double S) {
  if (h.size() != U.rows()) {
    throw DimensionError("simplex_coordinates: h has length " + std::to_string(h.size()) +
                         ", expected " + std::to_string(U.rows()));
  }
  if (!(S > 0.0)) throw DegenerateDataError("simplex_coordinates: S must be positive");
  const auto alpha = cumulative_input_mass(U);
  const std::size_t N = h.size() - 1;
  std::vector<double> p(h.size());
  for (std::size_t k = 0; k <= N; ++k) p[k] = alpha[N - k] * h[k] / S;
  return p;
}

SimplexWeights SimplexWeights::from_iterate(const NonnegMatrix& U, const ImpulseResponse& h,
                                            double S) {
  SimplexWeights w{simplex_coordinates(U, h, S), S};
  const double mass = std::accumulate(w.p.begin(), w.p.end(), 0.0);
  if (std::abs(mass - 1.0) > 1e-12) {
    throw DomainError("SimplexWeights: iterate is off the simplex (mass " + std::to_string(mass) +
                      ")");
  }
  return w;
}

double i_divergence(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("i_divergence: size mismatch");
  double total = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double x = a[n];
    const double y = b[n];
    if (x == 0.0) {
      total += y;
    } else if (y == 0.0) {
      return std::numeric_limits<double>::infinity();
    } else {
      total += x * std::log(x / y) - x + y;
    }
  }
  return total;
}

double i_divergence(const NonnegMatrix& M, const NonnegMatrix& N) {
  if (M.rows() != N.rows() || M.cols() != N.cols()) {
    throw DimensionError("i_divergence: shapes differ");
  }
  return i_divergence(M.values(), N.values());
}

double i_divergence(const ImpulseResponse& a, const ImpulseResponse& b) {
  return i_divergence(a.values(), b.values());
}

bool absolutely_continuous(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("absolutely_continuous: size mismatch");
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (b[n] == 0.0 && a[n] != 0.0) return false;
  }
  return true;
}

bool absolutely_continuous(const NonnegMatrix& M, const NonnegMatrix& N) {
  if (M.rows() != N.rows() || M.cols() != N.cols()) {
    throw DimensionError("absolutely_continuous: shapes differ");
  }
  return absolutely_continuous(M.values(), N.values());
}

RescaledProblem rescale_problem(const NonnegMatrix& Y, const NonnegMatrix& U) {
  if (Y.rows() != U.rows() || Y.cols() != U.cols()) {
    throw DimensionError("rescale_problem: Y and U shapes differ");
  }
  const double S = Y.total();
  if (!(S > 0.0)) throw DegenerateDataError("rescale_problem: Y is identically zero");
  std::vector<double> y(Y.values().begin(), Y.values().end());
  std::vector<double> u(U.values().begin(), U.values().end());
  for (double& v : y) v /= S;
  for (double& v : u) v /= S;
  return {NonnegMatrix(Y.rows(), Y.cols(), std::move(y)),
          NonnegMatrix(U.rows(), U.cols(), std::move(u)), S};
}

}  // namespace nnfir
