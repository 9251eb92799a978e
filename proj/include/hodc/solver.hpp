#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hodc/inner.hpp"
#include "hodc/model.hpp"

namespace hodc {

enum class SolverMode { fixed, adaptive };
enum class SolveStatus { converged_step, converged_residual, max_iters, inner_failure };

inline const char* to_string(SolverMode m) {
  return m == SolverMode::fixed ? "fixed" : "adaptive";
}

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged_step: return "converged_step";
    case SolveStatus::converged_residual: return "converged_residual";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::inner_failure: return "inner_failure";
  }
  return "?";
}

template <typename Scalar>
struct SolverConfig {
  ModelParams<Scalar> params;
  SolverMode mode = SolverMode::fixed;

  // adaptive mode
  Scalar gamma = Scalar(1);
  Scalar M_p0 = Scalar(1);
  Scalar M_q0 = Scalar(1);
  int max_line_search_doublings = 60;

  int max_outer = 500;
  Scalar stop_step_norm = Scalar(1e-9);
  Scalar stop_residual = Scalar(1e-8);
  int inner_max_iter = 1000;
};

template <typename Scalar>
struct IterationRecord {
  int k = 0;
  VectorX<Scalar> x;
  Scalar F_value = Scalar(0);
  Scalar step_norm = Scalar(0);
  /// (L_p^f + M_p)/p! s^p + (L_q^g + M_q)/q! s^q when both hints exist,
  /// otherwise the prox fixed-point residual at x.
  Scalar residual_bound = Scalar(0);
  Scalar M_p_used = Scalar(0);
  Scalar M_q_used = Scalar(0);
  std::optional<InnerStatus> inner_status{};
  int inner_iterations = 0;
  int doublings = 0;
};

template <typename Scalar>
struct SolveOutcome {
  VectorX<Scalar> final_x;
  std::vector<IterationRecord<Scalar>> trace;
  SolveStatus status = SolveStatus::max_iters;
  Scalar F_final = Scalar(0);
  std::vector<std::string> warnings;
  std::string diagnostic;
};

/// Prox fixed-point residual (1/t) |x - prox_{psi,t}(x - t (grad f - grad g))|;
/// zero exactly at stationary points of F.
template <typename Scalar>
Scalar stationarity_residual(const DcProblem<Scalar>& problem, const VectorArg<Scalar>& x,
                             Scalar t) {
  if (!(t > Scalar(0))) throw InputError("stationarity_residual: t must be > 0");
  if (x.size() != problem.dimension)
    throw InputError("stationarity_residual: x has wrong dimension");
  const VectorX<Scalar> grad = problem.f.gradient(x) - problem.g.gradient(x);
  const VectorX<Scalar> moved = problem.psi.prox((x - t * grad).eval(), t);
  return (x - moved).norm() / t;
}

namespace detail {

template <typename Scalar>
Scalar residual_bound_from_step(const DcProblem<Scalar>& problem,
                                const ModelParams<Scalar>& params, Scalar M_p, Scalar M_q,
                                const VectorX<Scalar>& y, Scalar step) {
  const auto lpf = problem.f.lipschitz(params.p);
  const auto lqg = problem.g.lipschitz(params.q);
  if (lpf && lqg) {
    return (*lpf + M_p) / factorial<Scalar>(params.p) * std::pow(step, Scalar(params.p)) +
           (*lqg + M_q) / factorial<Scalar>(params.q) * std::pow(step, Scalar(params.q));
  }
  return stationarity_residual(problem, y, Scalar(1) / (M_p + M_q));
}

template <typename Scalar>
void start_trace(const DcProblem<Scalar>& problem, const SolverConfig<Scalar>& config,
                 const VectorX<Scalar>& x0, Scalar M_p, Scalar M_q,
                 SolveOutcome<Scalar>& outcome) {
  if (x0.size() != problem.dimension) throw InputError("solver: x0 has wrong dimension");
  if (!problem.psi.in_domain(x0)) throw InputError("solver: x0 is outside dom psi");
  config.params.validate();
  if (config.max_outer < 1) throw InputError("solver: max_outer must be >= 1");
  if (!inner_supported(config.params, problem.psi))
    throw CapabilityError(
        "solver: no certified inner path for this (p, q, psi); supported: (1,1) any psi, "
        "(2,1) any psi, (1,2)/(2,2) with psi == 0");

  IterationRecord<Scalar> rec;
  rec.k = 0;
  rec.x = x0;
  rec.F_value = evaluate_objective(problem, x0);
  rec.step_norm = Scalar(0);
  rec.residual_bound = stationarity_residual(problem, x0, Scalar(1) / (M_p + M_q));
  rec.M_p_used = M_p;
  rec.M_q_used = M_q;
  outcome.trace.push_back(std::move(rec));
  outcome.final_x = x0;
  outcome.F_final = outcome.trace.back().F_value;
}

}  // namespace detail

/// HO-DC: fixed M_p, M_q. Each step minimizes the surrogate at the current
/// iterate and must satisfy the anchor descent m(x_{k+1}; x_k) <= F(x_k);
/// a violation marks a solver bug and ends the run as inner_failure.
template <typename Scalar>
SolveOutcome<Scalar> run_hodc(const DcProblem<Scalar>& problem, const VectorArg<Scalar>& x0,
                              const SolverConfig<Scalar>& config) {
  const ModelParams<Scalar>& params = config.params;
  SolveOutcome<Scalar> outcome;
  detail::start_trace(problem, config, x0, params.M_p, params.M_q, outcome);

  const auto lpf = problem.f.lipschitz(params.p);
  const auto lqg = problem.g.lipschitz(params.q);
  if ((lpf && params.M_p <= *lpf) || (lqg && params.M_q <= *lqg))
    outcome.warnings.push_back(
        "fixed mode: M_p or M_q does not exceed the corresponding Lipschitz hint; "
        "the descent guarantee may not hold");

  VectorX<Scalar> x = x0;
  Scalar f_cur = outcome.trace.back().F_value;

  for (int k = 1; k <= config.max_outer; ++k) {
    const ModelAnchor<Scalar> anchor = make_anchor(problem, params, x);
    const InnerSolveResult<Scalar> inner =
        solve_inner(anchor, params, problem.psi, config.inner_max_iter);
    if (inner.status == InnerStatus::max_iter) {
      outcome.status = SolveStatus::inner_failure;
      outcome.diagnostic = "inner solver hit max_iter without meeting the theta tolerance";
      return outcome;
    }
    const Scalar m_val = surrogate_value(anchor, params, problem.psi, inner.y);
    if (m_val > f_cur + Scalar(1e-8) * (Scalar(1) + std::abs(f_cur))) {
      outcome.status = SolveStatus::inner_failure;
      outcome.diagnostic = "anchor descent m(y;x) <= F(x) violated (solver bug or invalid "
                           "oracle convexity contract)";
      return outcome;
    }

    const Scalar step = (inner.y - x).norm();
    x = inner.y;
    f_cur = evaluate_objective(problem, x);

    IterationRecord<Scalar> rec;
    rec.k = k;
    rec.x = x;
    rec.F_value = f_cur;
    rec.step_norm = step;
    rec.residual_bound =
        detail::residual_bound_from_step(problem, params, params.M_p, params.M_q, x, step);
    rec.M_p_used = params.M_p;
    rec.M_q_used = params.M_q;
    rec.inner_status = inner.status;
    rec.inner_iterations = inner.iterations;
    outcome.trace.push_back(std::move(rec));
    outcome.final_x = x;
    outcome.F_final = f_cur;

    if (step < config.stop_step_norm) {
      outcome.status = SolveStatus::converged_step;
      return outcome;
    }
    if (outcome.trace.back().residual_bound < config.stop_residual) {
      outcome.status = SolveStatus::converged_residual;
      return outcome;
    }
  }
  outcome.status = SolveStatus::max_iters;
  return outcome;
}

/// AHO-DC: doubling line search on (M_p, M_q). Step k tries 2^i (M_p^k, M_q^k)
/// until F(x_{k+1}) <= F(x_k) - gamma |x_{k+1} - x_k|^{(p+q+2)/2}, then passes
/// 2^{i-1} (M_p^k, M_q^k) to the next iteration; an accept at i = 0 therefore
/// halves the constants, floored at 1e-12.
template <typename Scalar>
SolveOutcome<Scalar> run_ahodc(const DcProblem<Scalar>& problem, const VectorArg<Scalar>& x0,
                               const SolverConfig<Scalar>& config) {
  if (!(config.gamma > Scalar(0))) throw InputError("run_ahodc: gamma must be > 0");
  if (!(config.M_p0 > Scalar(0)) || !(config.M_q0 > Scalar(0)))
    throw InputError("run_ahodc: M_p0 and M_q0 must be > 0");

  SolveOutcome<Scalar> outcome;
  detail::start_trace(problem, config, x0, config.M_p0, config.M_q0, outcome);

  const Scalar exponent = Scalar(config.params.p + config.params.q + 2) / Scalar(2);
  constexpr Scalar kFloor = Scalar(1e-12);

  VectorX<Scalar> x = x0;
  Scalar f_cur = outcome.trace.back().F_value;
  Scalar mp_k = config.M_p0;
  Scalar mq_k = config.M_q0;

  for (int k = 1; k <= config.max_outer; ++k) {
    const ModelAnchor<Scalar> anchor = make_anchor(problem, config.params, x);

    int doublings = 0;
    InnerSolveResult<Scalar> inner;
    ModelParams<Scalar> trial = config.params;
    Scalar f_next = f_cur;
    bool accepted = false;
    for (int i = 0; i <= config.max_line_search_doublings; ++i) {
      trial.M_p = std::ldexp(mp_k, i);
      trial.M_q = std::ldexp(mq_k, i);
      inner = solve_inner(anchor, trial, problem.psi, config.inner_max_iter);
      if (inner.status == InnerStatus::max_iter) continue;
      const Scalar step = (inner.y - x).norm();
      f_next = evaluate_objective(problem, inner.y);
      if (f_next <= f_cur - config.gamma * std::pow(step, exponent) +
                        Scalar(1e-12) * (Scalar(1) + std::abs(f_cur))) {
        doublings = i;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      outcome.status = SolveStatus::inner_failure;
      outcome.diagnostic =
          "adaptive line search exhausted " +
          std::to_string(config.max_line_search_doublings) +
          " doublings without the gamma descent (bad oracle or wrong convexity contract?)";
      return outcome;
    }

    const Scalar step = (inner.y - x).norm();
    x = inner.y;
    f_cur = f_next;

    IterationRecord<Scalar> rec;
    rec.k = k;
    rec.x = x;
    rec.F_value = f_cur;
    rec.step_norm = step;
    rec.residual_bound =
        detail::residual_bound_from_step(problem, trial, trial.M_p, trial.M_q, x, step);
    rec.M_p_used = trial.M_p;
    rec.M_q_used = trial.M_q;
    rec.inner_status = inner.status;
    rec.inner_iterations = inner.iterations;
    rec.doublings = doublings;
    outcome.trace.push_back(std::move(rec));
    outcome.final_x = x;
    outcome.F_final = f_cur;

    mp_k = std::max(std::ldexp(mp_k, doublings - 1), kFloor);
    mq_k = std::max(std::ldexp(mq_k, doublings - 1), kFloor);

    if (step < config.stop_step_norm) {
      outcome.status = SolveStatus::converged_step;
      return outcome;
    }
    if (outcome.trace.back().residual_bound < config.stop_residual) {
      outcome.status = SolveStatus::converged_residual;
      return outcome;
    }
  }
  outcome.status = SolveStatus::max_iters;
  return outcome;
}

}  // namespace hodc
