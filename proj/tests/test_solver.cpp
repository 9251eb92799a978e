#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hodc/problems.hpp"
#include "hodc/solver.hpp"
#include "test_util.hpp"

using namespace hodc;
using Vec = VectorX<double>;
using Mat = MatrixX<double>;

namespace {

SolverConfig<double> fixed_config(int p, int q, double mp, double mq, int max_outer = 500) {
  SolverConfig<double> cfg;
  cfg.params.p = p;
  cfg.params.q = q;
  cfg.params.M_p = mp;
  cfg.params.M_q = mq;
  cfg.max_outer = max_outer;
  return cfg;
}

}  // namespace

TEST_CASE("run_hodc basics") {
  std::mt19937_64 rng(3);

  SUBCASE("stationary start stops after one zero step") {
    const auto data = make_quad_minus_quad<double>(6, 9);
    for (auto [p, q] : {std::pair<int, int>{1, 1}, {2, 2}}) {
      CAPTURE(p);
      CAPTURE(q);
      const auto out = run_hodc(data.problem, data.stationary_point, fixed_config(p, q, 3, 1));
      CHECK(out.status == SolveStatus::converged_step);
      REQUIRE(out.trace.size() == 2);
      CHECK(out.trace[1].step_norm <= 1e-10);
      CHECK((out.final_x - data.stationary_point).norm() <= 1e-10);
    }
  }

  SUBCASE("hand instance contracts by 3/4 per step") {
    // f = |x|^2/2, g = |x|^2/4, p = q = 1, M_p = M_q = 1:
    // x+ = x - (x/2)/2 = 0.75 x and F = |x|^2/4.
    const Index n = 3;
    DcProblem<double> prob;
    prob.f = quadratic_oracle<double>(Mat::Identity(n, n), Vec::Zero(n));
    prob.g = scaled_sqnorm_oracle<double>(0.5, n);
    prob.psi = zero_term<double>();
    prob.dimension = n;
    prob.known_lower_bound = 0.0;
    const Vec x0 = Vec::Unit(n, 0);
    auto cfg = fixed_config(1, 1, 1, 1);
    cfg.stop_residual = 1e-13;  // force the step-norm rule to fire first
    const auto out = run_hodc(prob, x0, cfg);
    REQUIRE(out.trace.size() >= 5);
    for (size_t k = 0; k + 1 < 5; ++k) {
      CHECK((out.trace[k + 1].x - 0.75 * out.trace[k].x).norm() < 1e-14);
      CHECK(out.trace[k + 1].F_value ==
            doctest::Approx(0.5625 * out.trace[k].F_value).epsilon(1e-12));
    }
    CHECK(out.status == SolveStatus::converged_step);
    CHECK(out.final_x.norm() < 1e-8);
  }

  SUBCASE("poly_dc from x0 = 3 lands on sqrt(6)") {
    const auto data = make_poly_dc<double>(1, 0);
    auto cfg = fixed_config(2, 2, 12.0, 0.1);
    const auto out = run_hodc(data.problem, Vec::Constant(1, 3.0), cfg);
    CHECK(out.final_x[0] == doctest::Approx(std::sqrt(6.0)).epsilon(1e-9));
    const Vec grad = data.problem.f.gradient(out.final_x) - data.problem.g.gradient(out.final_x);
    CHECK(grad.norm() < 1e-8);
  }

  SUBCASE("F is nonincreasing along every trace") {
    for (const auto& name : builtin_problem_names()) {
      CAPTURE(name);
      const auto prob = builtin_problem<double>(name, 6, 77);
      const int q = 1;
      auto cfg = fixed_config(2, q, *prob.f.lipschitz(2) > 0 ? 1.5 * *prob.f.lipschitz(2) : 0.5,
                              1.5 * *prob.g.lipschitz(q) + 0.1, 120);
      const auto out = run_hodc(prob, Vec::Constant(6, 0.5), cfg);
      for (size_t k = 1; k < out.trace.size(); ++k)
        CHECK(out.trace[k].F_value <=
              out.trace[k - 1].F_value + 1e-10 * (1.0 + std::abs(out.trace[k - 1].F_value)));
    }
  }

  SUBCASE("indicator constraint solve projects onto the orthant") {
    // f = |x - c|^2/2 with mixed-sign c, g = (mu/2)|x|^2, psi = ind{x >= 0}:
    // the unique solution clamps c/(1 - mu) at zero.
    const Index n = 4;
    const double mu = 0.1;
    Vec c(n);
    c << 1.0, -2.0, 0.5, -0.3;
    DcProblem<double> prob;
    prob.f = quadratic_oracle<double>(Mat::Identity(n, n), c, 0.5 * c.squaredNorm());
    prob.g = scaled_sqnorm_oracle<double>(mu, n);
    prob.psi = nonnegative_indicator_term<double>();
    prob.dimension = n;
    const auto out = run_hodc(prob, Vec::Ones(n), fixed_config(1, 1, 1.5, 0.2));
    const Vec expected = (c / (1.0 - mu)).cwiseMax(0.0);
    CHECK((out.final_x - expected).norm() < 1e-7);
    CHECK(stationarity_residual(prob, out.final_x, 0.5) < 1e-7);
  }

  SUBCASE("input and capability errors") {
    const auto data = make_lasso_minus_concave<double>(4, 2);
    CHECK_THROWS_AS(run_hodc(data.problem, Vec::Zero(3), fixed_config(1, 1, 1, 1)), InputError);
    CHECK_THROWS_AS(run_hodc(data.problem, Vec::Zero(4), fixed_config(2, 2, 1, 1)),
                    CapabilityError);

    DcProblem<double> constrained;
    constrained.f = quadratic_oracle<double>(Mat::Identity(2, 2), Vec::Zero(2));
    constrained.g = zero_oracle<double>(2);
    constrained.psi = nonnegative_indicator_term<double>();
    constrained.dimension = 2;
    CHECK_THROWS_AS(run_hodc(constrained, Vec::Constant(2, -1.0), fixed_config(1, 1, 1, 1)),
                    InputError);
  }

  SUBCASE("fixed mode warns when M is below the hint") {
    const auto data = make_quad_minus_quad<double>(4, 1);
    const auto out = run_hodc(data.problem, Vec::Ones(4), fixed_config(1, 1, 0.5, 1.0));
    CHECK_FALSE(out.warnings.empty());
  }
}

TEST_CASE("converged statuses reflect the thresholds at the last record") {
  const auto data = make_quad_minus_quad<double>(6, 2);

  auto cfg = fixed_config(2, 2, 0.1, 0.1);
  const auto by_residual = run_hodc(data.problem, Vec::Ones(6), cfg);
  REQUIRE(by_residual.status == SolveStatus::converged_residual);
  CHECK(by_residual.trace.back().residual_bound < cfg.stop_residual);

  cfg.stop_residual = 1e-16;
  const auto by_step = run_hodc(data.problem, Vec::Ones(6), cfg);
  REQUIRE(by_step.status == SolveStatus::converged_step);
  CHECK(by_step.trace.back().step_norm < cfg.stop_step_norm);
}

TEST_CASE("convex instance: (2,1) and (1,1) reach the same minimum") {
  // lasso_minus_concave is built with A'A - mu I positive definite, so F is
  // convex with a unique minimizer and both certified paths must agree.
  const auto data = make_lasso_minus_concave<double>(8, 6);
  auto cfg_comp = fixed_config(2, 1, 0.5, 1.5 * *data.problem.g.lipschitz(1));
  const auto composite = run_hodc(data.problem, Vec::Ones(8), cfg_comp);
  auto cfg_prox = fixed_config(1, 1, 1.5 * *data.problem.f.lipschitz(1),
                               1.5 * *data.problem.g.lipschitz(1));
  const auto prox = run_hodc(data.problem, Vec::Ones(8), cfg_prox);
  CHECK(std::abs(composite.F_final - prox.F_final) < 1e-6);
}

TEST_CASE("descent and summability along quad traces") {
  const auto data = make_quad_minus_quad<double>(8, 5);
  const double lpf = *data.problem.f.lipschitz(1);
  const double lqg = *data.problem.g.lipschitz(1);
  auto cfg = fixed_config(1, 1, 1.5 * lpf, 1.5 * lqg);
  const auto out = run_hodc(data.problem, Vec::Ones(8), cfg);
  REQUIRE((out.status == SolveStatus::converged_step ||
           out.status == SolveStatus::converged_residual));

  const double coeff = 2.0 * std::sqrt((cfg.params.M_p - lpf) / 2.0 * (cfg.params.M_q - lqg) / 2.0);
  double lhs_sum = 0.0;
  for (size_t k = 1; k < out.trace.size(); ++k) {
    const double drop = out.trace[k - 1].F_value - out.trace[k].F_value;
    const double s = out.trace[k].step_norm;
    CHECK(drop >= coeff * s * s - 1e-8 * (1.0 + std::abs(out.trace[k - 1].F_value)));
    lhs_sum += s * s;
  }
  const double cap =
      (out.trace.front().F_value - *data.problem.known_lower_bound) / coeff + 1e-8;
  CHECK(lhs_sum <= cap);
}

TEST_CASE("run_ahodc") {
  std::mt19937_64 rng(13);

  SUBCASE("M0 = gamma + L with a close start never doubles") {
    const auto data = make_quad_minus_quad<double>(6, 21);
    SolverConfig<double> cfg;
    cfg.mode = SolverMode::adaptive;
    cfg.params.p = 2;
    cfg.params.q = 2;
    cfg.gamma = 0.1;
    // L_2 hints are exactly zero for quadratics
    cfg.M_p0 = cfg.gamma + *data.problem.f.lipschitz(2);
    cfg.M_q0 = cfg.gamma + *data.problem.g.lipschitz(2);
    const Vec x0 = data.stationary_point + 0.5 * Vec::Unit(6, 2);
    const auto out = run_ahodc(data.problem, x0, cfg);
    REQUIRE(out.status != SolveStatus::inner_failure);
    for (size_t k = 1; k < out.trace.size(); ++k) CHECK(out.trace[k].doublings == 0);
    CHECK(out.F_final == doctest::Approx(*data.problem.known_lower_bound).epsilon(1e-8));
  }

  SUBCASE("tiny M0 needs at most the arithmetic number of doublings") {
    const auto data = make_quad_minus_quad<double>(6, 4);
    SolverConfig<double> cfg;
    cfg.mode = SolverMode::adaptive;
    cfg.params.p = 1;
    cfg.params.q = 1;
    cfg.gamma = 0.5;
    cfg.M_p0 = 1e-6;
    cfg.M_q0 = 1e-6;
    const auto out = run_ahodc(data.problem, Vec::Ones(6), cfg);
    REQUIRE(out.trace.size() >= 2);
    const double l_max = std::max(*data.problem.f.lipschitz(1), *data.problem.g.lipschitz(1));
    const int bound = static_cast<int>(std::ceil(std::log2((cfg.gamma + l_max) / 1e-6)));
    CHECK(out.trace[1].doublings <= bound);

    // per-iteration bound with the evolving M^k
    double mp_k = cfg.M_p0, mq_k = cfg.M_q0;
    for (size_t k = 1; k < out.trace.size(); ++k) {
      const double ratio = std::max((cfg.gamma + *data.problem.f.lipschitz(1)) / mp_k,
                                    (cfg.gamma + *data.problem.g.lipschitz(1)) / mq_k);
      CHECK(out.trace[k].doublings <= static_cast<int>(std::ceil(std::log2(ratio))) + 1);
      mp_k = std::max(std::ldexp(mp_k, out.trace[k].doublings - 1), 1e-12);
      mq_k = std::max(std::ldexp(mq_k, out.trace[k].doublings - 1), 1e-12);
    }
  }

  SUBCASE("fixed and adaptive agree on the unique critical point") {
    const auto data = make_quad_minus_quad<double>(5, 101);
    const auto fixed_out =
        run_hodc(data.problem, Vec::Ones(5), fixed_config(2, 2, 0.1, 0.1));
    SolverConfig<double> cfg;
    cfg.mode = SolverMode::adaptive;
    cfg.params.p = 2;
    cfg.params.q = 2;
    cfg.gamma = 0.05;
    cfg.M_p0 = 1.0;
    cfg.M_q0 = 1.0;
    const auto adaptive_out = run_ahodc(data.problem, Vec::Ones(5), cfg);
    CHECK(std::abs(fixed_out.F_final - adaptive_out.F_final) < 1e-6);
  }

  SUBCASE("gamma must be positive") {
    const auto data = make_quad_minus_quad<double>(3, 1);
    SolverConfig<double> cfg;
    cfg.mode = SolverMode::adaptive;
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(run_ahodc(data.problem, Vec::Zero(3), cfg), InputError);
  }
}

TEST_CASE("stationarity_residual") {
  std::mt19937_64 rng(55);

  SUBCASE("zero at the quad stationary point") {
    const auto data = make_quad_minus_quad<double>(5, 3);
    CHECK(stationarity_residual(data.problem, data.stationary_point, 0.4) < 1e-10);
  }

  SUBCASE("zero when the l1 subdifferential absorbs the gradient") {
    DcProblem<double> prob;
    prob.f = quadratic_oracle<double>(Mat::Zero(1, 1), Vec::Constant(1, -0.05));
    prob.g = zero_oracle<double>(1);
    prob.psi = l1_term<double>(0.1);
    prob.dimension = 1;
    CHECK(stationarity_residual(prob, Vec::Zero(1), 0.7) == 0.0);
  }

  SUBCASE("positive away from stationarity and shrinking along the trace tail") {
    const auto data = make_quad_minus_quad<double>(5, 8);
    const Vec x = test::random_vector(5, rng);
    CHECK(stationarity_residual(data.problem, x, 0.5) > 0.0);

    const auto out = run_hodc(data.problem, Vec::Ones(5), fixed_config(1, 1, 3.0, 0.75));
    REQUIRE(out.trace.size() > 12);
    const double t = 1.0 / 3.75;
    for (size_t k = out.trace.size() - 6; k + 1 < out.trace.size(); ++k) {
      CHECK(stationarity_residual(data.problem, out.trace[k + 1].x, t) <=
            stationarity_residual(data.problem, out.trace[k].x, t) + 1e-12);
    }
  }

  SUBCASE("t must be positive") {
    const auto data = make_quad_minus_quad<double>(3, 1);
    CHECK_THROWS_AS(stationarity_residual(data.problem, Vec::Zero(3), 0.0), InputError);
  }
}
