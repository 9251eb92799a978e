#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "hodc/cubic.hpp"
#include "hodc/model.hpp"

namespace hodc {

enum class InnerStatus { exact, tolerance_met, max_iter };

inline const char* to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::exact: return "exact";
    case InnerStatus::tolerance_met: return "tolerance_met";
    case InnerStatus::max_iter: return "max_iter";
  }
  return "?";
}

/// Outcome of one subproblem solve: the next iterate and a bound on the norm
/// of the smallest model subgradient at it.
template <typename Scalar>
struct InnerSolveResult {
  VectorX<Scalar> y;
  Scalar model_subgradient_norm_bound = Scalar(0);
  int iterations = 0;
  InnerStatus status = InnerStatus::exact;
};

/// True when solve_inner has a certified path for this combination.
template <typename Scalar>
bool inner_supported(const ModelParams<Scalar>& params, const SimpleConvexTerm<Scalar>& psi) {
  const int p = params.p, q = params.q;
  if (p == 1 && q == 1) return true;
  if (p < 1 || p > 2 || q < 1 || q > 2) return false;
  if (psi.is_zero) return true;
  return p == 2 && q == 1;  // the only convex composite model
}

/// p = q = 1: the surrogate is a prox-friendly strongly convex quadratic and
/// the exact global minimizer is one proximal step.
template <typename Scalar>
InnerSolveResult<Scalar> solve_prox_linear(const ModelAnchor<Scalar>& anchor,
                                           const ModelParams<Scalar>& params,
                                           const SimpleConvexTerm<Scalar>& psi) {
  if (params.p != 1 || params.q != 1)
    throw InputError("solve_prox_linear: requires p = q = 1");
  const Scalar step = Scalar(1) / (params.M_p + params.M_q);
  const VectorX<Scalar> grad = anchor.f_data.gradient - anchor.g_data.gradient;
  InnerSolveResult<Scalar> res;
  res.y = psi.prox((anchor.x - step * grad).eval(), step);
  res.model_subgradient_norm_bound = Scalar(0);
  res.iterations = 1;
  res.status = InnerStatus::exact;
  return res;
}

namespace detail {

/// Assembles the cubic reduction for p, q in {1,2} with psi == 0: degree<=2
/// Taylor terms go into (v, H), a quadratic regularizer (from a degree-1
/// side) is absorbed into H, and the cubic regularizer weight becomes M.
template <typename Scalar>
CubicSubproblem<Scalar> assemble_cubic(const ModelAnchor<Scalar>& anchor,
                                       const ModelParams<Scalar>& params) {
  const Index n = anchor.x.size();
  CubicSubproblem<Scalar> sub;
  sub.v = anchor.f_data.gradient - anchor.g_data.gradient;
  sub.H = MatrixX<Scalar>::Zero(n, n);
  sub.M = Scalar(0);
  if (params.p == 2) {
    sub.H += anchor.f_data.hessian;
    sub.M += params.M_p;
  } else {
    sub.H.diagonal().array() += params.M_p;
  }
  if (params.q == 2) {
    sub.H -= anchor.g_data.hessian;
    sub.M += params.M_q;
  } else {
    sub.H.diagonal().array() += params.M_q;
  }
  return sub;
}

/// Backtracking proximal gradient on the convex composite model, run until
/// the subgradient residual meets the theta stopping rule.
template <typename Scalar>
InnerSolveResult<Scalar> composite_prox_gradient(const ModelAnchor<Scalar>& anchor,
                                                 const ModelParams<Scalar>& params,
                                                 const SimpleConvexTerm<Scalar>& psi,
                                                 int max_iter, Scalar theta) {
  using Vector = VectorX<Scalar>;
  const Vector& x = anchor.x;
  const int min_pq = std::min(params.p, params.q);

  InnerSolveResult<Scalar> res;
  res.y = x;
  res.status = InnerStatus::max_iter;

  Vector y = x;
  Scalar smooth_y = surrogate_smooth_value(anchor, params, y);
  Vector grad_y = surrogate_gradient_smooth_part(anchor, params, y);
  Scalar lambda = std::max(Scalar(1), grad_y.norm());

  for (int it = 1; it <= max_iter; ++it) {
    Vector y_next;
    Scalar smooth_next = Scalar(0);
    for (int bt = 0; bt < 120; ++bt) {
      y_next = psi.prox((y - grad_y / lambda).eval(), Scalar(1) / lambda);
      const Vector diff = y_next - y;
      smooth_next = surrogate_smooth_value(anchor, params, y_next);
      const Scalar quad_bound = smooth_y + grad_y.dot(diff) +
                                Scalar(0.5) * lambda * diff.squaredNorm() +
                                Scalar(1e-14) * (Scalar(1) + std::abs(smooth_y));
      if (smooth_next <= quad_bound) break;
      lambda *= Scalar(2);
    }
    const Vector grad_next = surrogate_gradient_smooth_part(anchor, params, y_next);
    // prox optimality gives xi = lambda (y - y_next) - grad_y in d psi(y_next),
    // so grad_next + xi is a model subgradient at y_next.
    const Scalar residual = (grad_next - grad_y + lambda * (y - y_next)).norm();
    y = y_next;
    smooth_y = smooth_next;
    grad_y = grad_next;
    res.y = y;
    res.model_subgradient_norm_bound = residual;
    res.iterations = it;
    if (residual <= theta * std::pow((y - x).norm(), Scalar(min_pq)) + Scalar(1e-12)) {
      res.status = InnerStatus::tolerance_met;
      break;
    }
    lambda = std::max(lambda * Scalar(0.9), Scalar(1e-8));
  }
  return res;
}

}  // namespace detail

/// Computes a stationary point of min_y m_p^q(y; x) that satisfies the
/// anchor descent m(y; x) <= m(x; x) = F(x).
///
/// Dispatch: (1,1) -> exact proximal step for any psi; (2,1)/(1,2)/(2,2)
/// with psi == 0 -> certified global cubic solve; (2,1) with psi != 0 ->
/// backtracking proximal gradient on the (convex) model with the theta rule.
/// Everything else has no certified path and raises CapabilityError.
template <typename Scalar>
InnerSolveResult<Scalar> solve_inner(const ModelAnchor<Scalar>& anchor,
                                     const ModelParams<Scalar>& params,
                                     const SimpleConvexTerm<Scalar>& psi, int max_iter = 1000) {
  params.validate();
  if (!inner_supported(params, psi))
    throw CapabilityError(
        "solve_inner: unsupported (p, q, psi) combination; supported: (1,1) for any psi, "
        "(2,1) for any psi, and (1,2), (2,2) only with psi == 0");

  if (params.p == 1 && params.q == 1) return solve_prox_linear(anchor, params, psi);

  if (psi.is_zero) {
    const CubicSubproblem<Scalar> sub = detail::assemble_cubic(anchor, params);
    const CubicSolution<Scalar> cs = solve_cubic_global(sub);
    InnerSolveResult<Scalar> res;
    res.y = anchor.x + cs.h_star;
    res.model_subgradient_norm_bound = cs.kkt_residual;
    res.iterations = cs.secular_iterations;
    res.status = InnerStatus::exact;
    return res;
  }

  // Composite path; if roundoff ever breaks the anchor descent, restart from
  // x with a tighter tolerance.
  const Scalar f_anchor = surrogate_value(anchor, params, psi, anchor.x);
  Scalar theta = params.theta;
  InnerSolveResult<Scalar> res;
  for (int attempt = 0; attempt < 4; ++attempt) {
    res = detail::composite_prox_gradient(anchor, params, psi, max_iter, theta);
    const Scalar m_val = surrogate_value(anchor, params, psi, res.y);
    if (m_val <= f_anchor + Scalar(1e-10) * (Scalar(1) + std::abs(f_anchor))) return res;
    theta *= Scalar(0.1);
  }
  return res;
}

}  // namespace hodc
