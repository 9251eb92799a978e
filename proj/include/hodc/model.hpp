#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "hodc/oracles.hpp"
#include "hodc/types.hpp"

namespace hodc {

/// Surrogate configuration: Taylor degrees p (for f) and q (for g),
/// regularization weights M_p, M_q, and the inner tolerance multiplier theta.
template <typename Scalar>
struct ModelParams {
  int p = 1;
  int q = 1;
  Scalar M_p = Scalar(1);
  Scalar M_q = Scalar(1);
  Scalar theta = Scalar(0.1);

  void validate() const {
    if (p < 1 || p > 3 || q < 1 || q > 3)
      throw InputError("ModelParams: p and q must be in {1, 2, 3}");
    if (!(M_p > Scalar(0)) || !(M_q > Scalar(0)))
      throw InputError("ModelParams: M_p and M_q must be > 0");
    if (!(theta >= Scalar(0))) throw InputError("ModelParams: theta must be >= 0");
  }
};

/// For p = 3 the f-side regularized Taylor model is convex only when
/// M_p >= 3 L_3^f; callers that rely on that convexity check it here.
template <typename Scalar>
void validate_convexity_preserving(const ModelParams<Scalar>& params, Scalar l3f_hint) {
  if (params.p == 3 && params.M_p < Scalar(3) * l3f_hint)
    throw InputError("convexity-preserving mode needs M_p >= 3 L_3^f");
}

namespace detail {

/// Cached derivative data of one smooth part at the anchor point.
template <typename Scalar>
struct TaylorData {
  Scalar value = Scalar(0);
  VectorX<Scalar> gradient;
  MatrixX<Scalar> hessian;                                               // order >= 2
  std::function<MatrixX<Scalar>(const VectorX<Scalar>&)> third_apply;   // order == 3
  int order = 1;
};

template <typename Scalar>
TaylorData<Scalar> cache_taylor_data(const SmoothOracle<Scalar>& oracle,
                                     const VectorX<Scalar>& x, int order,
                                     const char* which) {
  if (oracle.derivative_order < order)
    throw InputError(std::string("ModelAnchor: oracle ") + which + " supplies order " +
                     std::to_string(oracle.derivative_order) + " but order " +
                     std::to_string(order) + " was requested");
  TaylorData<Scalar> d;
  d.order = order;
  d.value = oracle.value(x);
  d.gradient = oracle.gradient(x);
  if (order >= 2) {
    if (!oracle.has_hessian())
      throw InputError(std::string("ModelAnchor: oracle ") + which + " has no hessian");
    d.hessian = oracle.hessian(x);
  }
  if (order >= 3) {
    if (!oracle.has_third())
      throw InputError(std::string("ModelAnchor: oracle ") + which +
                       " has no third derivative");
    d.third_apply = [apply = oracle.third_derivative_apply, x](const VectorX<Scalar>& h) {
      return apply(x, h);
    };
  }
  return d;
}

/// phi(x) + sum_{i<=order} D^i phi(x)[h]^i / i!
template <typename Scalar>
Scalar taylor_from_data(const TaylorData<Scalar>& d, const VectorX<Scalar>& h, int order) {
  Scalar t = d.value + d.gradient.dot(h);
  if (order >= 2) t += Scalar(0.5) * h.dot(d.hessian * h);
  if (order >= 3) t += h.dot(d.third_apply(h) * h) / Scalar(6);
  return t;
}

/// Gradient in y of the Taylor polynomial: grad + H h + (1/2) D3[h] h.
template <typename Scalar>
VectorX<Scalar> taylor_gradient_from_data(const TaylorData<Scalar>& d,
                                          const VectorX<Scalar>& h, int order) {
  VectorX<Scalar> g = d.gradient;
  if (order >= 2) g.noalias() += d.hessian * h;
  if (order >= 3) g.noalias() += Scalar(0.5) * (d.third_apply(h) * h);
  return g;
}

}  // namespace detail

enum class SmoothPart { f, g };

/// Derivative data of f and g frozen at one outer iterate x. Immutable after
/// construction, so adaptive line-search retries with different M reuse it.
template <typename Scalar>
struct ModelAnchor {
  using Vector = VectorX<Scalar>;

  Vector x;
  detail::TaylorData<Scalar> f_data;
  detail::TaylorData<Scalar> g_data;

  ModelAnchor(const DcProblem<Scalar>& problem, Vector anchor, int order_f, int order_g)
      : x(std::move(anchor)) {
    if (x.size() != problem.dimension)
      throw InputError("ModelAnchor: anchor point has wrong dimension");
    f_data = detail::cache_taylor_data(problem.f, x, order_f, "f");
    g_data = detail::cache_taylor_data(problem.g, x, order_g, "g");
  }

  const detail::TaylorData<Scalar>& data(SmoothPart part) const {
    return part == SmoothPart::f ? f_data : g_data;
  }
};

template <typename Scalar>
ModelAnchor<Scalar> make_anchor(const DcProblem<Scalar>& problem,
                                const ModelParams<Scalar>& params,
                                const VectorArg<Scalar>& x) {
  return ModelAnchor<Scalar>(problem, x, params.p, params.q);
}

/// T_order of f or g around the anchor, evaluated at y.
template <typename Scalar>
Scalar taylor_value(const ModelAnchor<Scalar>& anchor, SmoothPart part, int order,
                    const VectorArg<Scalar>& y) {
  const auto& d = anchor.data(part);
  if (order < 0 || order > d.order)
    throw InputError("taylor_value: order " + std::to_string(order) +
                     " exceeds cached order " + std::to_string(d.order));
  return detail::taylor_from_data(d, (y - anchor.x).eval(), order);
}

namespace detail {

template <typename Scalar>
Scalar factorial(int k) {
  Scalar v(1);
  for (int i = 2; i <= k; ++i) v *= Scalar(i);
  return v;
}

}  // namespace detail

/// T_{p,q}(y; x): the surrogate without psi, i.e.
/// T_p^f + M_p/(p+1)! |y-x|^{p+1} - T_q^g + M_q/(q+1)! |y-x|^{q+1}.
template <typename Scalar>
Scalar surrogate_smooth_value(const ModelAnchor<Scalar>& anchor,
                              const ModelParams<Scalar>& params, const VectorArg<Scalar>& y) {
  const VectorX<Scalar> h = y - anchor.x;
  const Scalar r = h.norm();
  return detail::taylor_from_data(anchor.f_data, h, params.p) +
         params.M_p / detail::factorial<Scalar>(params.p + 1) * std::pow(r, Scalar(params.p + 1)) -
         detail::taylor_from_data(anchor.g_data, h, params.q) +
         params.M_q / detail::factorial<Scalar>(params.q + 1) * std::pow(r, Scalar(params.q + 1));
}

/// m_p^q(y; x) = T_{p,q}(y; x) + psi(y). Majorizes F once M_p > L_p^f and
/// M_q > L_q^g, and touches it at y = x.
template <typename Scalar>
Scalar surrogate_value(const ModelAnchor<Scalar>& anchor, const ModelParams<Scalar>& params,
                       const SimpleConvexTerm<Scalar>& psi, const VectorArg<Scalar>& y) {
  return surrogate_smooth_value(anchor, params, y) + psi.value(y);
}

/// Gradient in y of the smooth part T_{p,q} of the surrogate (everything
/// except psi). The regularizer gradients vanish at y = x for every p >= 1.
template <typename Scalar>
VectorX<Scalar> surrogate_gradient_smooth_part(const ModelAnchor<Scalar>& anchor,
                                               const ModelParams<Scalar>& params,
                                               const VectorArg<Scalar>& y) {
  const VectorX<Scalar> h = y - anchor.x;
  const Scalar r = h.norm();
  VectorX<Scalar> grad = detail::taylor_gradient_from_data(anchor.f_data, h, params.p) -
                         detail::taylor_gradient_from_data(anchor.g_data, h, params.q);
  if (r > Scalar(0)) {
    const Scalar wf =
        params.M_p / detail::factorial<Scalar>(params.p) * std::pow(r, Scalar(params.p - 1));
    const Scalar wg =
        params.M_q / detail::factorial<Scalar>(params.q) * std::pow(r, Scalar(params.q - 1));
    grad.noalias() += (wf + wg) * h;
  }
  return grad;
}

}  // namespace hodc
