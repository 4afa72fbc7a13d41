#include "nnfir/fir_operator.hpp"

#include <string>

#include "nnfir/errors.hpp"

namespace nnfir {

ConvolutionSystem::ConvolutionSystem(NonnegMatrix U) : U_(std::move(U)) {
  if (U_.rows() == 0 || U_.cols() == 0) throw DimensionError("ConvolutionSystem: empty input");
}

NonnegMatrix ConvolutionSystem::apply(const ImpulseResponse& h) const {
  if (h.size() != length()) {
    throw DimensionError("apply: h has length " + std::to_string(h.size()) + ", expected " +
                         std::to_string(length()));
  }
  const std::size_t rows = length();
  const std::size_t m = experiments();
  std::vector<double> out(rows * m, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k <= i; ++k) acc += h[k] * U_(i - k, j);
      out[i * m + j] = acc;
    }
  }
  return NonnegMatrix(rows, m, std::move(out));
}

std::vector<double> ConvolutionSystem::exact_solve(std::span<const double> y,
                                                   std::size_t column) const {
  if (y.size() != length()) throw DimensionError("exact_solve: y length does not match N+1");
  if (column >= experiments()) throw DimensionError("exact_solve: column out of range");
  const double u0 = U_(0, column);
  if (u0 == 0.0) throw SingularSystemError("exact_solve: u_0 = 0, triangular system is singular");
  std::vector<double> h(length(), 0.0);
  for (std::size_t i = 0; i < length(); ++i) {
    double rhs = y[i];
    for (std::size_t k = 0; k < i; ++k) rhs -= h[k] * U_(i - k, column);
    h[i] = rhs / u0;
  }
  return h;
}

double objective(const NonnegMatrix& Y, const ConvolutionSystem& sys, const ImpulseResponse& h) {
  return i_divergence(Y, sys.apply(h));
}

double objective(const NonnegMatrix& Y, const NonnegMatrix& U, const ImpulseResponse& h) {
  return objective(Y, ConvolutionSystem(U), h);
}

}  // namespace nnfir
