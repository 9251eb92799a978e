#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hodc/diagnostics.hpp"
#include "hodc/problems.hpp"

using namespace hodc;
using Vec = VectorX<double>;

namespace {

struct QuadRun {
  QuadMinusQuadData<double> data = make_quad_minus_quad<double>(6, 5);
  ModelParams<double> params;
  SolveOutcome<double> out;
  double lpf, lqg;

  QuadRun() {
    lpf = *data.problem.f.lipschitz(1);
    lqg = *data.problem.g.lipschitz(1);
    SolverConfig<double> cfg;
    cfg.params.p = 1;
    cfg.params.q = 1;
    cfg.params.M_p = 1.5 * lpf;
    cfg.params.M_q = 1.5 * lqg;
    params = cfg.params;
    out = run_hodc(data.problem, Vec::Ones(6), cfg);
  }
};

std::vector<IterationRecord<double>> constant_trace(int len) {
  std::vector<IterationRecord<double>> trace;
  for (int k = 0; k < len; ++k) {
    IterationRecord<double> r;
    r.k = k;
    r.x = Vec::Zero(3);
    r.F_value = 1.0;
    r.step_norm = 0.0;
    r.residual_bound = 0.0;
    r.M_p_used = 1.0;
    r.M_q_used = 1.0;
    trace.push_back(r);
  }
  return trace;
}

}  // namespace

TEST_CASE("audit_descent") {
  const QuadRun run;

  SUBCASE("single-record trace passes vacuously") {
    std::vector<IterationRecord<double>> trace(run.out.trace.begin(),
                                               run.out.trace.begin() + 1);
    const auto audit = audit_descent(trace, run.params, run.lpf, run.lqg);
    CHECK(audit.pass);
    CHECK(audit.per_step_lhs.empty());
  }

  SUBCASE("quad trace with exact hints has zero violations") {
    const auto audit = audit_descent(run.out.trace, run.params, run.lpf, run.lqg);
    CHECK(audit.applicable);
    CHECK(audit.pass);
    CHECK(audit.violations.empty());
    CHECK(audit.per_step_lhs.size() == run.out.trace.size() - 1);
  }

  SUBCASE("an injected F increase is flagged at its k") {
    auto corrupted = run.out.trace;
    REQUIRE(corrupted.size() > 5);
    corrupted[4].F_value = corrupted[3].F_value + 1.0;
    const auto audit = audit_descent(corrupted, run.params, run.lpf, run.lqg);
    CHECK_FALSE(audit.pass);
    REQUIRE_FALSE(audit.violations.empty());
    CHECK(audit.violations.front().first == corrupted[4].k);
  }

  SUBCASE("M at or below the hint makes the audit inapplicable") {
    const auto audit = audit_descent(run.out.trace, run.params, run.params.M_p, run.lqg);
    CHECK_FALSE(audit.applicable);
    CHECK_FALSE(audit.note.empty());
  }
}

TEST_CASE("summability_check") {
  const QuadRun run;
  const double f_lower = *run.data.problem.known_lower_bound;

  SUBCASE("stationary start is trivially summable") {
    std::vector<IterationRecord<double>> trace(run.out.trace.begin(),
                                               run.out.trace.begin() + 1);
    const auto rep = summability_check(trace, run.params, run.lpf, run.lqg, f_lower);
    CHECK(rep.pass);
    CHECK(rep.lhs_sum == 0.0);
  }

  SUBCASE("full run against the known lower bound") {
    const auto rep = summability_check(run.out.trace, run.params, run.lpf, run.lqg, f_lower);
    CHECK(rep.pass);
    CHECK(rep.lhs_sum <= rep.rhs_cap);
  }

  SUBCASE("inflated F_lower is flagged as misconfigured") {
    const double inflated = run.out.trace.front().F_value + 10.0;
    const auto rep = summability_check(run.out.trace, run.params, run.lpf, run.lqg, inflated);
    CHECK_FALSE(rep.pass);
    CHECK(rep.rhs_cap < 0.0);
    CHECK(rep.note.find("misconfigured") != std::string::npos);
  }
}

TEST_CASE("audit_rate") {
  const QuadRun run;
  REQUIRE(run.out.trace.size() >= 20);

  SUBCASE("strongly convex quad run classifies as linear") {
    const auto rep = audit_rate(run.out.trace, run.params, run.lpf, run.lqg,
                                run.data.problem.known_lower_bound);
    REQUIRE(rep.regime.has_value());
    CHECK(*rep.regime == RateRegime::linear);
    REQUIRE(rep.geometric_fit_r2.has_value());
    CHECK(*rep.geometric_fit_r2 >= 0.9);
    REQUIRE(rep.fitted_exponent.has_value());
    CHECK(*rep.fitted_exponent < 0.0);
    CHECK(rep.theoretical_exponent == doctest::Approx(-0.5));
    REQUIRE(rep.kl_r_estimate.has_value());
    CHECK(*rep.kl_r_estimate == doctest::Approx(2.0).epsilon(0.2));
  }

  SUBCASE("envelope from trace constants holds for k >= 10") {
    const auto rep = audit_rate(run.out.trace, run.params, run.lpf, run.lqg,
                                run.data.problem.known_lower_bound);
    CHECK(rep.envelope_checked);
    CHECK(rep.envelope_satisfied);
  }

  SUBCASE("degenerate constant trace yields no fit") {
    const auto trace = constant_trace(12);
    const auto rep = audit_rate(trace, run.params, 1.0, 1.0, std::optional<double>(0.0));
    CHECK_FALSE(rep.fitted_exponent.has_value());
    CHECK_FALSE(rep.regime.has_value());
    CHECK_FALSE(rep.notes.empty());
  }

  SUBCASE("too-short traces are an input error") {
    const auto trace = constant_trace(5);
    CHECK_THROWS_AS(audit_rate(trace, run.params), InputError);
  }

  SUBCASE("rate fit is scale invariant in the residuals") {
    auto scaled = run.out.trace;
    for (auto& r : scaled) r.residual_bound *= 7.25;
    const auto base = audit_rate(run.out.trace, run.params);
    const auto rep = audit_rate(scaled, run.params);
    REQUIRE(base.fitted_exponent.has_value());
    REQUIRE(rep.fitted_exponent.has_value());
    CHECK(*rep.fitted_exponent == doctest::Approx(*base.fitted_exponent).epsilon(1e-9));
    CHECK(rep.regime == base.regime);
  }

  SUBCASE("superlinear decay is recognized") {
    // synthetic trace with squared gaps each step
    std::vector<IterationRecord<double>> trace;
    double d = 0.5;
    for (int k = 0; k < 14; ++k) {
      IterationRecord<double> r;
      r.k = k;
      r.x = Vec::Constant(2, d);
      r.F_value = d * d;
      r.step_norm = k == 0 ? 0.0 : d;
      r.residual_bound = d;
      r.M_p_used = r.M_q_used = 1.0;
      trace.push_back(r);
      d = d * d;
    }
    trace.back().x = Vec::Zero(2);
    const auto rep = audit_rate(trace, run.params);
    REQUIRE(rep.regime.has_value());
    CHECK(*rep.regime == RateRegime::superlinear_observed);
  }
}
