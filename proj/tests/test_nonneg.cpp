#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"
#include "nnfir/nonneg.hpp"
#include "test_support.hpp"

using namespace nnfir;

TEST_CASE("matrix construction validates entries and shape") {
  CHECK_THROWS_AS(NonnegMatrix(2, 1, {1.0, -1.0}), InputError);
  CHECK_THROWS_AS(NonnegMatrix(2, 1, {1.0, std::numeric_limits<double>::quiet_NaN()}), InputError);
  CHECK_THROWS_AS(NonnegMatrix(2, 1, {1.0, std::numeric_limits<double>::infinity()}), InputError);
  CHECK_THROWS_AS(NonnegMatrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS((NonnegMatrix{{1.0, 2.0}, {3.0}}), DimensionError);
  NonnegMatrix M{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(M(1, 0) == 3.0);
  CHECK(M.row_sum(1) == 7.0);
  CHECK(M.total() == 10.0);
  CHECK_THROWS_AS(M.set(0, 0, -0.5), InputError);
  CHECK_FALSE(M.is_zero());
  CHECK(NonnegMatrix(3, 2).is_zero());
}

TEST_CASE("cumulative input mass sums rows up to each lag") {
  const NonnegMatrix U{{1.0, 2.0}, {0.0, 1.0}, {4.0, 0.5}};
  const auto alpha = cumulative_input_mass(U);
  REQUIRE(alpha.size() == 3);
  CHECK(alpha[0] == doctest::Approx(3.0));
  CHECK(alpha[1] == doctest::Approx(4.0));
  CHECK(alpha[2] == doctest::Approx(8.5));
}

TEST_CASE("i_divergence conventions") {
  const std::vector<double> a{0.0, 1.0, 2.0};
  const std::vector<double> b{0.0, 1.0, 1.0};
  CHECK(i_divergence(std::span<const double>(a), std::span<const double>(a)) == 0.0);
  CHECK(i_divergence(std::span<const double>(a), std::span<const double>(b)) ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0));
  const std::vector<double> zero_b{1.0, 0.0, 0.0};
  const std::vector<double> pos_a{1.0, 0.5, 0.0};
  CHECK(std::isinf(i_divergence(std::span<const double>(pos_a), std::span<const double>(zero_b))));
  CHECK_FALSE(absolutely_continuous(std::span<const double>(pos_a), std::span<const double>(zero_b)));
  // a = 0 against b > 0 contributes b.
  const std::vector<double> z{0.0, 0.0};
  const std::vector<double> w{1.5, 2.5};
  CHECK(i_divergence(std::span<const double>(z), std::span<const double>(w)) == doctest::Approx(4.0));
}

TEST_CASE("i_divergence matches a textbook implementation and is nonnegative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(7), b(7);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = testing::uniform(rng, 0.0, 1.0) < 0.2 ? 0.0 : testing::uniform(rng, 0.0, 3.0);
      b[i] = testing::uniform(rng, 0.01, 3.0);
    }
    const double d = i_divergence(std::span<const double>(a), std::span<const double>(b));
    CHECK(d >= 0.0);
    CHECK(d == doctest::Approx(testing::naive_divergence(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("rescaling multiplies the objective by S") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::random_strict_instance(rng, 5, 4);
    const auto h = testing::random_positive_h(rng, inst.N + 1);
    const RescaledProblem r = rescale_problem(inst.Y, inst.U);
    CHECK(r.Y.total() == doctest::Approx(1.0));
    const double lhs = objective(inst.Y, inst.U, ImpulseResponse(h));
    const double rhs = r.S * objective(r.Y, r.U, ImpulseResponse(h));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
  CHECK_THROWS_AS(rescale_problem(NonnegMatrix(2, 1), NonnegMatrix(2, 1, {1.0, 1.0})), DegenerateDataError);
}

TEST_CASE("simplex weights require an iterate on the simplex") {
  const NonnegMatrix U{{1.0}, {1.0}};
  // alpha = (1, 2); h = (1, 1) has mass h0 alpha1 + h1 alpha0 = 3.
  const auto w = SimplexWeights::from_iterate(U, ImpulseResponse{1.0, 1.0}, 3.0);
  CHECK(w.p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(w.p[1] == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(SimplexWeights::from_iterate(U, ImpulseResponse{1.0, 1.0}, 4.0), DomainError);
}

TEST_CASE("impulse response helpers") {
  CHECK(ImpulseResponse::ones(3) == ImpulseResponse{1.0, 1.0, 1.0});
  CHECK(ImpulseResponse::unit_impulse(3) == ImpulseResponse{1.0, 0.0, 0.0});
  CHECK(ImpulseResponse{0.5, 2.0}.max() == 2.0);
  CHECK_THROWS_AS(ImpulseResponse(std::vector<double>{}), DimensionError);
  CHECK_THROWS_AS(ImpulseResponse({1.0, -0.1}), InputError);
}
