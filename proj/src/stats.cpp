#include "nnfir/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/digamma.hpp>

#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"

namespace nnfir {

NoiseModel NoiseModel::point_mass() {
  NoiseModel n;
  n.family = NoiseFamily::point_mass;
  return n;
}

NoiseModel NoiseModel::gamma(double shape) {
  NoiseModel n;
  n.family = NoiseFamily::gamma_mean_one;
  n.shape = shape;
  return n;
}

NoiseModel NoiseModel::lognormal(double sigma) {
  NoiseModel n;
  n.family = NoiseFamily::lognormal_mean_one;
  n.sigma = sigma;
  return n;
}

NoiseModel NoiseModel::two_point(double low, double high) {
  NoiseModel n;
  n.family = NoiseFamily::two_point_mean_one;
  n.low = low;
  n.high = high;
  return n;
}

void NoiseModel::validate() const {
  switch (family) {
    case NoiseFamily::point_mass:
      return;
    case NoiseFamily::gamma_mean_one:
      if (!(shape > 0.0) || !std::isfinite(shape)) throw ConfigError("gamma noise: shape must be > 0");
      return;
    case NoiseFamily::lognormal_mean_one:
      if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("lognormal noise: sigma must be >= 0");
      return;
    case NoiseFamily::two_point_mean_one:
      if (!(low >= 0.0 && low < 1.0 && high > 1.0 && std::isfinite(high))) {
        throw ConfigError("two-point noise: need 0 <= low < 1 < high for a mean-one law");
      }
      return;
  }
}

double NoiseModel::e_delta_log_delta() const {
  switch (family) {
    case NoiseFamily::point_mass:
      return 0.0;
    case NoiseFamily::gamma_mean_one:
      return boost::math::digamma(shape + 1.0) - std::log(shape);
    case NoiseFamily::lognormal_mean_one:
      return 0.5 * sigma * sigma;
    case NoiseFamily::two_point_mean_one: {
      const double p_high = (1.0 - low) / (high - low);
      const double low_term = low > 0.0 ? low * std::log(low) : 0.0;
      return p_high * high * std::log(high) + (1.0 - p_high) * low_term;
    }
  }
  return 0.0;
}

double NoiseModel::variance() const {
  switch (family) {
    case NoiseFamily::point_mass: return 0.0;
    case NoiseFamily::gamma_mean_one: return 1.0 / shape;
    case NoiseFamily::lognormal_mean_one: return std::expm1(sigma * sigma);
    case NoiseFamily::two_point_mean_one: return (1.0 - low) * (high - 1.0);
  }
  return 0.0;
}

double NoiseModel::sample(std::mt19937_64& rng) const {
  switch (family) {
    case NoiseFamily::point_mass:
      return 1.0;
    case NoiseFamily::gamma_mean_one:
      return std::gamma_distribution<double>(shape, 1.0 / shape)(rng);
    case NoiseFamily::lognormal_mean_one:
      return std::exp(std::normal_distribution<double>(-0.5 * sigma * sigma, sigma)(rng));
    case NoiseFamily::two_point_mean_one: {
      const double p_high = (1.0 - low) / (high - low);
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_high ? high : low;
    }
  }
  return 1.0;
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  switch (family) {
    case NoiseFamily::point_mass: os << "point-mass"; break;
    case NoiseFamily::gamma_mean_one: os << "gamma:" << shape; break;
    case NoiseFamily::lognormal_mean_one: os << "lognormal:" << sigma; break;
    case NoiseFamily::two_point_mean_one: os << "two-point:" << low << ',' << high; break;
  }
  return os.str();
}

void InputLaw::validate() const {
  if (!(low > 0.0 && high > low && std::isfinite(high))) {
    throw ConfigError("input law: need 0 < low < high");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(derive_seed(seed, stream));
}

// Runs fn(r) for r in [0, count) on `threads` workers; fn writes by index.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < count; r += threads) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

void require_interior(const ImpulseResponse& h) {
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0)) throw ConfigError("h_true must be strictly positive (interior point)");
  }
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Estimate {
  bool ok = false;
  ImpulseResponse h;
  std::string diagnostic;
};

Estimate estimate(const ExperimentBatch& batch) {
  Estimate e;
  try {
    const SolverReport rep = solve(batch.Y, batch.U, estimation_config(batch.U));
    e.h = rep.h_final;
    e.ok = true;
    if (rep.termination == Termination::max_iters) {
      e.diagnostic = "max_iters reached, kkt violation " + std::to_string(rep.kkt_final.max_violation);
    }
  } catch (const std::exception& ex) {
    e.diagnostic = ex.what();
  }
  return e;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

ExperimentBatch generate_batch(const ImpulseResponse& h_true, const InputLaw& law,
                               const NoiseModel& noise, std::size_t m, std::uint64_t seed) {
  law.validate();
  noise.validate();
  require_interior(h_true);
  if (m == 0) throw ConfigError("generate_batch: m must be >= 1");
  const std::size_t n = h_true.size();
  std::mt19937_64 input_rng = make_stream(seed, kInputStream);
  std::mt19937_64 noise_rng = make_stream(seed, kNoiseStream);
  std::uniform_real_distribution<double> input(law.low, law.high);

  std::vector<double> u(n * m), d(n * m);
  for (double& v : u) v = input(input_rng);
  for (double& v : d) v = noise.sample(noise_rng);
  ExperimentBatch b;
  b.h_true = h_true;
  b.U = NonnegMatrix(n, m, std::move(u));
  b.delta = NonnegMatrix(n, m, d);
  const NonnegMatrix clean = ConvolutionSystem(b.U).apply(h_true);
  std::vector<double> y(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) y[i * m + j] = clean(i, j) * d[i * m + j];
  }
  b.Y = NonnegMatrix(n, m, std::move(y));
  b.seed = seed;
  b.noise = noise;
  return b;
}

SolverConfig estimation_config(const NonnegMatrix& U) {
  SolverConfig cfg;
  cfg.tol_kkt = 1e-9 * std::max(1.0, U.total());
  return cfg;
}

ConsistencyCurve consistency_experiment(const ImpulseResponse& h_true, const InputLaw& law,
                                        const NoiseModel& noise,
                                        const std::vector<std::size_t>& m_grid,
                                        std::size_t replicates, std::uint64_t seed,
                                        std::size_t threads) {
  if (m_grid.empty() || replicates == 0) throw ConfigError("consistency: empty grid or no replicates");
  if (!std::is_sorted(m_grid.begin(), m_grid.end()) ||
      std::adjacent_find(m_grid.begin(), m_grid.end()) != m_grid.end()) {
    throw ConfigError("consistency: m_grid must be strictly increasing");
  }
  law.validate();
  noise.validate();
  require_interior(h_true);

  ConsistencyCurve curve;
  curve.m_grid = m_grid;
  curve.replicates = replicates;
  curve.errors.assign(m_grid.size(), std::vector<double>(replicates));
  curve.missing.assign(m_grid.size(), 0);
  std::vector<std::vector<std::string>> notes(m_grid.size(), std::vector<std::string>(replicates));

  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    parallel_for(replicates, threads, [&](std::size_t r) {
      const ExperimentBatch batch = generate_batch(h_true, law, noise, m_grid[g], derive_seed(seed, g, r));
      const Estimate est = estimate(batch);
      notes[g][r] = est.diagnostic;
      if (!est.ok) {
        curve.errors[g][r] = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      double sq = 0.0;
      for (std::size_t k = 0; k < h_true.size(); ++k) sq += std::pow(est.h[k] - h_true[k], 2);
      curve.errors[g][r] = std::sqrt(sq);
    });
  }
  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    for (std::size_t r = 0; r < replicates; ++r) {
      if (std::isnan(curve.errors[g][r])) ++curve.missing[g];
      if (!notes[g][r].empty()) {
        curve.diagnostics.push_back("m=" + std::to_string(m_grid[g]) + " replicate " +
                                    std::to_string(r) + ": " + notes[g][r]);
      }
    }
    curve.median_error.push_back(median(curve.errors[g]));
  }
  for (std::size_t g = 1; g < m_grid.size(); ++g) {
    if (curve.median_error[g] > curve.median_error[g - 1]) ++curve.inversions;
  }
  curve.shrink_factor = curve.median_error.front() / curve.median_error.back();
  const bool wide = m_grid.back() >= 16 * m_grid.front();
  curve.trend_ok = curve.inversions <= 1 && (!wide || curve.shrink_factor >= 2.0);
  return curve;
}

ScaledErrorSample scaled_error_sample(const ImpulseResponse& h_true, const InputLaw& law,
                                      const NoiseModel& noise, std::size_t m,
                                      std::size_t replicates, std::uint64_t seed,
                                      std::size_t threads) {
  law.validate();
  noise.validate();
  require_interior(h_true);
  if (replicates < 2) throw ConfigError("normality: need at least 2 replicates");
  const std::size_t n = h_true.size();
  const double root_m = std::sqrt(static_cast<double>(m));

  enum class Outcome { kept, boundary, failed };
  std::vector<Outcome> outcome(replicates);
  std::vector<std::vector<double>> draws(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const ExperimentBatch batch = generate_batch(h_true, law, noise, m, derive_seed(seed, m, r));
    const Estimate est = estimate(batch);
    if (!est.ok) {
      outcome[r] = Outcome::failed;
      return;
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += est.h[k] * est.h[k];
    norm = std::sqrt(norm);
    bool boundary = false;
    for (std::size_t k = 0; k < n; ++k) boundary = boundary || est.h[k] < 1e-6 * norm;
    outcome[r] = boundary ? Outcome::boundary : Outcome::kept;
    draws[r].resize(n);
    for (std::size_t k = 0; k < n; ++k) draws[r][k] = root_m * (est.h[k] - h_true[k]);
  });

  ScaledErrorSample s;
  s.m = m;
  for (std::size_t r = 0; r < replicates; ++r) {
    if (outcome[r] == Outcome::kept) s.draws.push_back(std::move(draws[r]));
    if (outcome[r] == Outcome::boundary) ++s.excluded_boundary;
    if (outcome[r] == Outcome::failed) ++s.failed;
  }
  const std::size_t count = s.draws.size();
  s.mean.assign(n, 0.0);
  s.standard_error.assign(n, std::numeric_limits<double>::quiet_NaN());
  s.covariance.assign(n, std::vector<double>(n, 0.0));
  s.skewness.assign(n, std::numeric_limits<double>::quiet_NaN());
  s.excess_kurtosis.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (count < 2) return s;
  const double c = static_cast<double>(count);
  for (const auto& d : s.draws) {
    for (std::size_t k = 0; k < n; ++k) s.mean[k] += d[k] / c;
  }
  for (const auto& d : s.draws) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        s.covariance[k][l] += (d[k] - s.mean[k]) * (d[l] - s.mean[l]) / (c - 1.0);
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double sd = std::sqrt(s.covariance[k][k]);
    s.standard_error[k] = sd / std::sqrt(c);
    if (sd == 0.0) continue;
    double m3 = 0.0, m4 = 0.0;
    for (const auto& d : s.draws) {
      const double z = (d[k] - s.mean[k]) / sd;
      m3 += z * z * z / c;
      m4 += z * z * z * z / c;
    }
    s.skewness[k] = m3;
    s.excess_kurtosis[k] = m4 - 3.0;
  }
  return s;
}

NormalityResult normality_experiment(const ImpulseResponse& h_true, const InputLaw& law,
                                     const NoiseModel& noise, std::size_t m,
                                     std::size_t replicates, std::uint64_t seed,
                                     std::size_t threads) {
  NormalityResult res;
  res.at_m = scaled_error_sample(h_true, law, noise, m, replicates, seed, threads);
  res.at_4m = scaled_error_sample(h_true, law, noise, 4 * m, replicates, derive_seed(seed, 4), threads);
  const std::size_t n = h_true.size();

  res.mean_ok = res.at_m.draws.size() >= 2;
  for (std::size_t k = 0; k < n && res.mean_ok; ++k) {
    res.mean_ok = std::abs(res.at_m.mean[k]) <= 4.0 * res.at_m.standard_error[k];
  }
  double diff = 0.0, base = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      diff += std::pow(res.at_4m.covariance[k][l] - res.at_m.covariance[k][l], 2);
      base += std::pow(res.at_m.covariance[k][l], 2);
    }
  }
  res.covariance_gap = base > 0.0 ? std::sqrt(diff / base) : (diff > 0.0 ? INFINITY : 0.0);
  res.covariance_ok = res.covariance_gap <= 0.3;
  res.shape_ok = res.at_m.draws.size() >= 2;
  for (std::size_t k = 0; k < n && res.shape_ok; ++k) {
    res.shape_ok = std::abs(res.at_m.skewness[k]) < 0.5 && std::abs(res.at_m.excess_kurtosis[k]) < 1.0;
  }
  return res;
}

DecompositionCheck limit_criterion_decomposition_check(const ImpulseResponse& h_true,
                                                       const InputLaw& law,
                                                       const NoiseModel& noise,
                                                       const ImpulseResponse& h_probe,
                                                       std::size_t mc_samples,
                                                       std::uint64_t seed) {
  if (h_probe.size() != h_true.size()) throw DimensionError("decomposition: h_probe length mismatch");
  if (mc_samples < 2) throw ConfigError("decomposition: need at least 2 samples");
  const double c = noise.e_delta_log_delta();
  const ExperimentBatch batch = generate_batch(h_true, law, noise, mc_samples, seed);
  const ConvolutionSystem sys(batch.U);
  const NonnegMatrix clean = sys.apply(h_true);
  const NonnegMatrix model = sys.apply(h_probe);
  const std::size_t n = h_true.size();

  DecompositionCheck out;
  out.samples = mc_samples;
  out.e_delta_log_delta = c;
  double sum_d = 0.0, sum_d2 = 0.0, sum_l = 0.0, sum_r = 0.0;
  std::vector<double> y(n), a(n), t(n);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    double clean_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = batch.Y(i, s);
      a[i] = clean(i, s);
      t[i] = model(i, s);
      clean_mass += a[i];
    }
    const double lhs = i_divergence(std::span<const double>(y), std::span<const double>(t));
    const double rhs = i_divergence(std::span<const double>(a), std::span<const double>(t)) + clean_mass * c;
    const double d = lhs - rhs;
    sum_l += lhs;
    sum_r += rhs;
    sum_d += d;
    sum_d2 += d * d;
  }
  const double ns = static_cast<double>(mc_samples);
  out.lhs_mean = sum_l / ns;
  out.rhs_mean = sum_r / ns;
  out.residual = sum_d / ns;
  const double var = std::max(0.0, (sum_d2 - ns * out.residual * out.residual) / (ns - 1.0));
  out.standard_error = std::sqrt(var / ns);
  out.passes = std::abs(out.residual) <= 3.0 * out.standard_error + 1e-12 * (1.0 + std::abs(out.lhs_mean));
  return out;
}

}  // namespace nnfir
