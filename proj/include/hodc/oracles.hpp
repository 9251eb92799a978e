#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "hodc/errors.hpp"
#include "hodc/types.hpp"

namespace hodc {

/// A smooth convex function exposed through value/derivative callbacks.
///
/// Derivatives are supplied up to `derivative_order` (1..3). Third derivatives
/// are exposed only directionally: `third_derivative_apply(x, h)` returns the
/// symmetric matrix D3 phi(x)[h], which is all the model layer ever needs and
/// avoids storing an order-3 tensor.
template <typename Scalar>
struct SmoothOracle {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  std::function<Scalar(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;  // set iff derivative_order >= 2
  std::function<Matrix(const Vector&, const Vector&)> third_derivative_apply;  // iff order == 3
  int derivative_order = 1;

  /// Optional upper bounds on the Lipschitz constants L_1, L_2, L_3 of the
  /// corresponding derivative orders (index i holds L_{i+1}).
  std::array<std::optional<Scalar>, 3> lipschitz_hint{};

  bool has_hessian() const { return static_cast<bool>(hessian); }
  bool has_third() const { return static_cast<bool>(third_derivative_apply); }
  std::optional<Scalar> lipschitz(int order) const {
    return (order >= 1 && order <= 3) ? lipschitz_hint[order - 1] : std::nullopt;
  }
};

/// A proper lsc convex term psi with a cheap proximal operator.
///
/// `value` returns +inf outside dom psi; `prox(x, t)` returns
/// argmin_u psi(u) + (1/2t) |u - x|^2 and always lands in dom psi.
template <typename Scalar>
struct SimpleConvexTerm {
  using Vector = VectorX<Scalar>;

  std::function<Scalar(const Vector&)> value;
  std::function<Vector(const Vector&, Scalar)> prox;
  std::function<bool(const Vector&)> in_domain;
  bool is_zero = false;
};

/// psi == 0: prox is the identity, domain is everything.
template <typename Scalar>
SimpleConvexTerm<Scalar> zero_term() {
  using Vector = VectorX<Scalar>;
  SimpleConvexTerm<Scalar> t;
  t.value = [](const Vector&) { return Scalar(0); };
  t.prox = [](const Vector& x, Scalar) { return x; };
  t.in_domain = [](const Vector&) { return true; };
  t.is_zero = true;
  return t;
}

/// psi(x) = lambda * |x|_1, prox = soft thresholding.
template <typename Scalar>
SimpleConvexTerm<Scalar> l1_term(Scalar lambda) {
  using Vector = VectorX<Scalar>;
  if (!(lambda >= Scalar(0))) throw InputError("l1_term: lambda must be >= 0");
  SimpleConvexTerm<Scalar> t;
  t.value = [lambda](const Vector& x) { return lambda * x.template lpNorm<1>(); };
  t.prox = [lambda](const Vector& x, Scalar step) {
    const Scalar tau = lambda * step;
    Vector y(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const Scalar xi = x[i];
      y[i] = xi > tau ? xi - tau : (xi < -tau ? xi + tau : Scalar(0));
    }
    return y;
  };
  t.in_domain = [](const Vector&) { return true; };
  return t;
}

/// psi = indicator of the nonnegative orthant, prox = projection.
template <typename Scalar>
SimpleConvexTerm<Scalar> nonnegative_indicator_term() {
  using Vector = VectorX<Scalar>;
  SimpleConvexTerm<Scalar> t;
  t.value = [](const Vector& x) {
    return x.minCoeff() >= Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  };
  t.prox = [](const Vector& x, Scalar) { return x.cwiseMax(Scalar(0)).eval(); };
  t.in_domain = [](const Vector& x) { return x.minCoeff() >= Scalar(0); };
  return t;
}

/// The DC problem F(x) = f(x) + psi(x) - g(x) on dom psi.
template <typename Scalar>
struct DcProblem {
  using Vector = VectorX<Scalar>;

  SmoothOracle<Scalar> f;
  SmoothOracle<Scalar> g;
  SimpleConvexTerm<Scalar> psi;
  Index dimension = 0;
  std::optional<Scalar> known_lower_bound{};
};

/// F(x) = f(x) + psi(x) - g(x); +inf iff x is outside dom psi.
template <typename Scalar>
Scalar evaluate_objective(const DcProblem<Scalar>& problem, const VectorArg<Scalar>& x) {
  if (x.size() != problem.dimension)
    throw InputError("evaluate_objective: x has size " + std::to_string(x.size()) +
                     ", problem dimension is " + std::to_string(problem.dimension));
  const Scalar psi_val = problem.psi.value(x);
  if (!(psi_val < std::numeric_limits<Scalar>::infinity()))
    return std::numeric_limits<Scalar>::infinity();
  return problem.f.value(x) + psi_val - problem.g.value(x);
}

// ---------------------------------------------------------------------------
// Built-in smooth oracles
// ---------------------------------------------------------------------------

/// phi(x) = (1/2) x'Ax - b'x + c with A symmetric. Exact derivatives to
/// order 3 (the third derivative is identically zero).
template <typename Scalar>
SmoothOracle<Scalar> quadratic_oracle(MatrixX<Scalar> A, VectorX<Scalar> b, Scalar c = Scalar(0)) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  const Index n = A.rows();
  SmoothOracle<Scalar> o;
  o.value = [A, b, c](const Vector& x) { return Scalar(0.5) * x.dot(A * x) - b.dot(x) + c; };
  o.gradient = [A, b](const Vector& x) { return (A * x - b).eval(); };
  o.hessian = [A](const Vector&) { return A; };
  o.third_derivative_apply = [n](const Vector&, const Vector&) {
    return Matrix::Zero(n, n).eval();
  };
  o.derivative_order = 3;
  o.lipschitz_hint[1] = Scalar(0);
  o.lipschitz_hint[2] = Scalar(0);
  return o;
}

/// phi(x) = (mu/2) |x|^2.
template <typename Scalar>
SmoothOracle<Scalar> scaled_sqnorm_oracle(Scalar mu, Index n) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  SmoothOracle<Scalar> o;
  o.value = [mu](const Vector& x) { return Scalar(0.5) * mu * x.squaredNorm(); };
  o.gradient = [mu](const Vector& x) { return (mu * x).eval(); };
  o.hessian = [mu, n](const Vector&) { return (mu * Matrix::Identity(n, n)).eval(); };
  o.third_derivative_apply = [n](const Vector&, const Vector&) {
    return Matrix::Zero(n, n).eval();
  };
  o.derivative_order = 3;
  o.lipschitz_hint[0] = std::abs(mu);
  o.lipschitz_hint[1] = Scalar(0);
  o.lipschitz_hint[2] = Scalar(0);
  return o;
}

/// phi(x) = log sum_i exp(<a_i, x>) where the a_i are the rows of A.
/// Smooth convex with Lipschitz derivatives up to order 3.
template <typename Scalar>
SmoothOracle<Scalar> log_sum_exp_oracle(MatrixX<Scalar> A) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  // softmax of Ax, computed with the usual max shift
  auto softmax = [A](const Vector& x) {
    Vector z = A * x;
    const Scalar zmax = z.maxCoeff();
    Vector s = (z.array() - zmax).exp();
    s /= s.sum();
    return s;
  };

  SmoothOracle<Scalar> o;
  o.value = [A](const Vector& x) {
    Vector z = A * x;
    const Scalar zmax = z.maxCoeff();
    return zmax + std::log((z.array() - zmax).exp().sum());
  };
  o.gradient = [A, softmax](const Vector& x) { return (A.transpose() * softmax(x)).eval(); };
  o.hessian = [A, softmax](const Vector& x) {
    const Vector s = softmax(x);
    Matrix H = A.transpose() * s.asDiagonal() * A;
    const Vector As = A.transpose() * s;
    H.noalias() -= As * As.transpose();
    return H;
  };
  o.third_derivative_apply = [A, softmax](const Vector& x, const Vector& h) {
    const Vector s = softmax(x);
    const Vector u = A * h;
    const Scalar sbar = s.dot(u);
    const Vector w = (s.array() * (u.array() - sbar)).matrix();
    // D3 in softmax coordinates is diag(w) - w s' - s w'; pull back through A.
    Matrix T = A.transpose() * w.asDiagonal() * A;
    const Vector Aw = A.transpose() * w;
    const Vector As = A.transpose() * s;
    T.noalias() -= Aw * As.transpose();
    T.noalias() -= As * Aw.transpose();
    return T;
  };
  o.derivative_order = 3;
  return o;
}

/// phi(x) = sum_i c * x_i^4, separable even quartic (convex for c > 0).
template <typename Scalar>
SmoothOracle<Scalar> even_quartic_oracle(Scalar c) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  if (!(c > Scalar(0))) throw InputError("even_quartic_oracle: c must be > 0");
  SmoothOracle<Scalar> o;
  o.value = [c](const Vector& x) { return c * x.array().square().square().sum(); };
  o.gradient = [c](const Vector& x) { return (Scalar(4) * c * x.array().cube()).matrix().eval(); };
  o.hessian = [c](const Vector& x) {
    return Matrix((Scalar(12) * c * x.array().square()).matrix().asDiagonal());
  };
  o.third_derivative_apply = [c](const Vector& x, const Vector& h) {
    return Matrix((Scalar(24) * c * x.array() * h.array()).matrix().asDiagonal());
  };
  o.derivative_order = 3;
  return o;
}

/// phi == 0 with all derivatives zero.
template <typename Scalar>
SmoothOracle<Scalar> zero_oracle(Index n) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  SmoothOracle<Scalar> o;
  o.value = [](const Vector&) { return Scalar(0); };
  o.gradient = [n](const Vector&) { return Vector::Zero(n).eval(); };
  o.hessian = [n](const Vector&) { return Matrix::Zero(n, n).eval(); };
  o.third_derivative_apply = [n](const Vector&, const Vector&) {
    return Matrix::Zero(n, n).eval();
  };
  o.derivative_order = 3;
  o.lipschitz_hint = {Scalar(0), Scalar(0), Scalar(0)};
  return o;
}

}  // namespace hodc
