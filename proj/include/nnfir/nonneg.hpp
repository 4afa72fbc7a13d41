#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nnfir {

/// Dense (N+1) x m matrix with nonnegative finite entries. Row i is time
/// index i, column j is experiment j. Holds the data U, Y and products T(h)U.
class NonnegMatrix {
 public:
  NonnegMatrix() = default;
  /// rows x cols matrix of zeros.
  NonnegMatrix(std::size_t rows, std::size_t cols);
  /// Row-major data; throws InputError on a negative or non-finite entry.
  NonnegMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Nested rows, e.g. {{1, 2}, {3, 4}}; throws DimensionError when ragged.
  NonnegMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  /// Writes one entry; throws InputError if value is negative or not finite.
  void set(std::size_t i, std::size_t j, double value);

  std::span<const double> values() const { return data_; }
  std::vector<double> column(std::size_t j) const;

  /// Sum of row i over experiments, i.e. M_{i.}.
  double row_sum(std::size_t i) const;
  double total() const;
  bool is_zero() const;

  friend bool operator==(const NonnegMatrix&, const NonnegMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Nonnegative impulse response h_0..h_N.
class ImpulseResponse {
 public:
  ImpulseResponse() = default;
  explicit ImpulseResponse(std::vector<double> gains);
  ImpulseResponse(std::initializer_list<double> gains);

  static ImpulseResponse ones(std::size_t length);
  static ImpulseResponse zeros(std::size_t length);
  static ImpulseResponse unit_impulse(std::size_t length);

  std::size_t size() const { return h_.size(); }
  double operator[](std::size_t k) const { return h_[k]; }
  std::span<const double> values() const { return h_; }
  double max() const;

  friend bool operator==(const ImpulseResponse&, const ImpulseResponse&) = default;

 private:
  std::vector<double> h_;
};

/// alpha_k = sum_{l<=k} U_{l.}, k = 0..N.
std::vector<double> cumulative_input_mass(const NonnegMatrix& U);

/// Raw simplex coordinates alpha_{N-k} h_k / S. They sum to one only when h
/// lies on the simplex sum_k h_k alpha_{N-k} = S.
std::vector<double> simplex_coordinates(const NonnegMatrix& U, const ImpulseResponse& h, double S);

/// Probability vector p_k = alpha_{N-k} h_k / S for an iterate on the simplex.
struct SimplexWeights {
  std::vector<double> p;
  double S = 0.0;

  /// Throws DomainError unless sum(p) is within 1e-12 of one.
  static SimplexWeights from_iterate(const NonnegMatrix& U, const ImpulseResponse& h, double S);
};

/// Generalized I-divergence sum(a log(a/b) - a + b) with 0 log 0 = 0 and
/// 0/0 = 0; +inf when a is not absolutely continuous w.r.t. b.
double i_divergence(std::span<const double> a, std::span<const double> b);
double i_divergence(const NonnegMatrix& M, const NonnegMatrix& N);
double i_divergence(const ImpulseResponse& a, const ImpulseResponse& b);

/// True iff M_ij == 0 wherever N_ij == 0 (exact zeros).
bool absolutely_continuous(std::span<const double> a, std::span<const double> b);
bool absolutely_continuous(const NonnegMatrix& M, const NonnegMatrix& N);

struct RescaledProblem {
  NonnegMatrix Y;
  NonnegMatrix U;
  double S = 0.0;
};

/// Divides Y and U by S = sum(Y). I(Y||T(h)U) = S I(Y/S||T(h)U/S) for all h.
RescaledProblem rescale_problem(const NonnegMatrix& Y, const NonnegMatrix& U);

}  // namespace nnfir
