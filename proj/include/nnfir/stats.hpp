#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nnfir/nonneg.hpp"
#include "nnfir/solver.hpp"

namespace nnfir {

enum class NoiseFamily { point_mass, gamma_mean_one, lognormal_mean_one, two_point_mean_one };

/// Nonnegative multiplicative noise with E[delta] = 1 by construction.
struct NoiseModel {
  NoiseFamily family = NoiseFamily::gamma_mean_one;
  double shape = 4.0;  // gamma: shape a, scale 1/a
  double sigma = 0.5;  // lognormal: mu = -sigma^2/2
  double low = 0.5;    // two-point support {low, high}, low < 1 < high
  double high = 1.5;

  static NoiseModel point_mass();
  static NoiseModel gamma(double shape);
  static NoiseModel lognormal(double sigma);
  static NoiseModel two_point(double low, double high);

  /// Throws ConfigError when the parameters cannot give a mean-one law.
  void validate() const;
  /// Closed form of E[delta log delta].
  double e_delta_log_delta() const;
  double variance() const;
  double sample(std::mt19937_64& rng) const;
  std::string describe() const;
};

/// Independent uniform(low, high) input entries; low > 0 keeps U_0 > 0.
struct InputLaw {
  double low = 0.1;
  double high = 1.0;

  void validate() const;
};

struct ExperimentBatch {
  ImpulseResponse h_true;
  NonnegMatrix U;
  NonnegMatrix Y;
  NonnegMatrix delta;  // noise realizations, Y = delta .* T(h_true)U
  std::uint64_t seed = 0;
  NoiseModel noise;
};

/// Deterministic substream seed from a master seed and two indices.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Y^j = Delta^j T(h_true) U^j, inputs and noise on separate RNG streams.
/// Requires h_true > 0 componentwise.
ExperimentBatch generate_batch(const ImpulseResponse& h_true, const InputLaw& law,
                               const NoiseModel& noise, std::size_t m, std::uint64_t seed);

/// Solver settings used for estimation: tol_kkt scales with the input mass.
SolverConfig estimation_config(const NonnegMatrix& U);

struct ConsistencyCurve {
  std::vector<std::size_t> m_grid;
  std::size_t replicates = 0;
  /// errors[g][r] = |h_hat - h*|_2; NaN marks a failed replicate.
  std::vector<std::vector<double>> errors;
  std::vector<double> median_error;
  std::vector<std::size_t> missing;
  std::vector<std::string> diagnostics;
  std::size_t inversions = 0;  // grid steps where the median went up
  double shrink_factor = 0.0;  // median at first m / median at last m
  /// Median nonincreasing up to one inversion and, when the m ratio is >= 16,
  /// shrinking by at least a factor two.
  bool trend_ok = false;
};

ConsistencyCurve consistency_experiment(const ImpulseResponse& h_true, const InputLaw& law,
                                        const NoiseModel& noise,
                                        const std::vector<std::size_t>& m_grid,
                                        std::size_t replicates, std::uint64_t seed,
                                        std::size_t threads = 1);

struct ScaledErrorSample {
  std::size_t m = 0;
  std::vector<std::vector<double>> draws;  // sqrt(m)(h_hat - h*), kept replicates
  std::size_t excluded_boundary = 0;
  std::size_t failed = 0;
  std::vector<double> mean;
  std::vector<double> standard_error;
  std::vector<std::vector<double>> covariance;
  std::vector<double> skewness;
  std::vector<double> excess_kurtosis;
};

struct NormalityResult {
  ScaledErrorSample at_m;
  ScaledErrorSample at_4m;
  bool mean_ok = false;        // |mean_k| <= 4 SE_k at m
  double covariance_gap = 0.0; // |C_4m - C_m|_F / |C_m|_F
  bool covariance_ok = false;  // gap <= 0.3
  bool shape_ok = false;       // |skew| < 0.5, |excess kurtosis| < 1 at m
};

ScaledErrorSample scaled_error_sample(const ImpulseResponse& h_true, const InputLaw& law,
                                      const NoiseModel& noise, std::size_t m,
                                      std::size_t replicates, std::uint64_t seed,
                                      std::size_t threads = 1);

/// Samples at m and 4m and applies the mean, covariance-scaling and shape
/// screens.
NormalityResult normality_experiment(const ImpulseResponse& h_true, const InputLaw& law,
                                     const NoiseModel& noise, std::size_t m,
                                     std::size_t replicates, std::uint64_t seed,
                                     std::size_t threads = 1);

struct DecompositionCheck {
  double lhs_mean = 0.0;         // E I(Y || T(h)U)
  double rhs_mean = 0.0;         // E I(T(h*)U || T(h)U) + sum_j E(T(h*)U)_j E[delta log delta]
  double residual = 0.0;         // mean of the paired difference
  double standard_error = 0.0;   // of the paired difference
  double e_delta_log_delta = 0.0;
  std::size_t samples = 0;
  bool passes = false;           // |residual| <= 3 SE (plus rounding slack)
};

/// Monte Carlo check, with common random numbers, that the expected
/// criterion splits into the noiseless divergence plus the noise entropy term.
DecompositionCheck limit_criterion_decomposition_check(const ImpulseResponse& h_true,
                                                       const InputLaw& law,
                                                       const NoiseModel& noise,
                                                       const ImpulseResponse& h_probe,
                                                       std::size_t mc_samples,
                                                       std::uint64_t seed);

}  // namespace nnfir
