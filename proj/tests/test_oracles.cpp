#include <cmath>
#include <random>

#include "doctest.h"
#include "nnfir/diagnostics.hpp"
#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"
#include "nnfir/oracles.hpp"
#include "nnfir/solver.hpp"
#include "test_support.hpp"

using namespace nnfir;

TEST_CASE("toy closed forms") {
  const ToySolution interior = toy_closed_form(1.0, 1.0, 1.0, 2.0);
  CHECK(interior.regime == ToyCase::interior);
  CHECK(interior.h_star == ImpulseResponse{1.0, 1.0});
  CHECK(interior.objective_at_star == 0.0);
  CHECK(interior.unique);

  const ToySolution boundary = toy_closed_form(1.0, 1.0, 2.0, 1.0);
  CHECK(boundary.regime == ToyCase::boundary);
  CHECK(boundary.h_star[0] == doctest::Approx(1.5));
  CHECK(boundary.h_star[1] == 0.0);
  // F(1.5, 0) = 2 log(4/3) + log(2/3).
  CHECK(boundary.objective_at_star == doctest::Approx(2.0 * std::log(4.0 / 3.0) + std::log(2.0 / 3.0)));

  const ToySolution threshold = toy_closed_form(1.0, 1.0, 1.0, 1.0);
  CHECK(threshold.regime == ToyCase::interior);
  CHECK(threshold.h_star[1] == 0.0);
  CHECK_THROWS_AS(toy_closed_form(0.0, 1.0, 1.0, 1.0), DegenerateDataError);
}

TEST_CASE("solver reproduces the toy dichotomy on random toys") {
  std::mt19937_64 rng(51);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double u0 = testing::uniform(rng, 0.2, 2.0), u1 = testing::uniform(rng, 0.0, 2.0);
    const double y0 = testing::uniform(rng, 0.2, 2.0), y1 = testing::uniform(rng, 0.2, 2.0);
    const ToySolution sol = toy_closed_form(u0, u1, y0, y1);
    // The exact solve predicts the regime by the sign of its second entry.
    const auto exact = ConvolutionSystem(toy_inputs(u0, u1)).exact_solve(std::vector<double>{y0, y1});
    if (std::abs(exact[1]) < 1e-3) continue;
    CHECK((exact[1] > 0.0) == (sol.regime == ToyCase::interior));
    SolverConfig cfg;
    cfg.tol_kkt = 1e-11;
    const SolverReport rep = solve(toy_outputs(y0, y1), toy_inputs(u0, u1), cfg);
    CHECK(std::abs(rep.h_final[0] - sol.h_star[0]) <= 1e-6);
    CHECK(std::abs(rep.h_final[1] - sol.h_star[1]) <= 1e-6);
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("brute force agrees with the solver on small instances") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = testing::random_strict_instance(rng, 2, 3);
    const BruteForceResult bf = brute_force_minimize(inst.Y, inst.U);
    SolverConfig cfg;
    cfg.tol_kkt = 1e-10;
    const SolverReport rep = solve(inst.Y, inst.U, cfg);
    CHECK(std::abs(bf.objective - objective(inst.Y, inst.U, rep.h_final)) <= 1e-6);
    for (std::size_t k = 0; k < bf.h.size(); ++k) CHECK(std::abs(bf.h[k] - rep.h_final[k]) <= 1e-4);
  }
}

TEST_CASE("brute force finds the toy boundary optimum") {
  const BruteForceResult bf = brute_force_minimize(toy_outputs(2.0, 1.0), toy_inputs(1.0, 1.0));
  CHECK(bf.h[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(bf.h[1] == doctest::Approx(0.0));
}

TEST_CASE("brute force size limits") {
  CHECK_THROWS_AS(brute_force_minimize(NonnegMatrix(5, 1, {1, 1, 1, 1, 1}), NonnegMatrix(5, 1, {1, 1, 1, 1, 1})),
                  SizeError);
  CHECK_THROWS_AS(brute_force_minimize(NonnegMatrix(1, 4, {1, 1, 1, 1}), NonnegMatrix(1, 4, {1, 1, 1, 1})),
                  SizeError);
}

TEST_CASE("boundary toy converges geometrically at the predicted rate") {
  const RateClassification rc = rate_experiment(1.0, 1.0, 2.0, 1.0, 200);
  CHECK(rc.regime == RateRegime::exponential);
  CHECK(rc.predicted_rate == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(rc.fitted_rate - 2.0 / 3.0) <= 0.05 * 2.0 / 3.0);
  CHECK(rc.final_ratio_h1 == doctest::Approx(2.0 / 3.0).epsilon(0.01));
}

TEST_CASE("threshold toy converges like 1/t") {
  const RateClassification rc = rate_experiment(1.0, 1.0, 1.0, 1.0, 10000);
  CHECK(rc.regime == RateRegime::one_over_t);
  CHECK(rc.w == doctest::Approx(0.5));
  CHECK(rc.t_v1_limit == doctest::Approx(2.0));
  CHECK(std::abs(rc.t_v1 - 2.0) <= 0.02 * 2.0);
  CHECK(rc.fitted_power == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("strict interior toy contracts at the linearized rate") {
  const RateClassification rc = rate_experiment(1.0, 0.5, 1.0, 3.0, 400);
  CHECK(rc.regime == RateRegime::exponential);
  CHECK(rc.predicted_rate == doctest::Approx(4.0 / 9.0));
  CHECK(std::abs(rc.fitted_rate - rc.predicted_rate) <= 0.05 * rc.predicted_rate);
}
