#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hodc/errors.hpp"
#include "hodc/types.hpp"

namespace hodc {

/// min_h <v, h> + (1/2) <Hh, h> + (M/6) |h|^3 with H symmetric, M > 0.
template <typename Scalar>
struct CubicSubproblem {
  VectorX<Scalar> v;
  MatrixX<Scalar> H;
  Scalar M = Scalar(1);
};

template <typename Scalar>
Scalar cubic_objective(const CubicSubproblem<Scalar>& sub, const VectorArg<Scalar>& h) {
  const Scalar r = h.norm();
  return sub.v.dot(h) + Scalar(0.5) * h.dot(sub.H * h) + sub.M / Scalar(6) * r * r * r;
}

/// Secular function phi(r) = |(H + (Mr/2) I)^{-1} v| - r, evaluated through a
/// Cholesky solve so it is independent of the eigendecomposition route used
/// by the solver. Returns +inf when the shifted matrix is not positive
/// definite.
template <typename Scalar>
Scalar cubic_secular(const CubicSubproblem<Scalar>& sub, Scalar r) {
  MatrixX<Scalar> shifted = sub.H;
  shifted.diagonal().array() += Scalar(0.5) * sub.M * r;
  Eigen::LLT<MatrixX<Scalar>> llt(shifted);
  if (llt.info() != Eigen::Success) return std::numeric_limits<Scalar>::infinity();
  return llt.solve(sub.v).norm() - r;
}

/// Certified global minimizer of a CubicSubproblem.
template <typename Scalar>
struct CubicSolution {
  VectorX<Scalar> h_star;
  Scalar r_star = Scalar(0);       // |h_star|
  Scalar lambda_min_H = Scalar(0);
  Scalar objective = Scalar(0);
  Scalar kkt_residual = Scalar(0);  // |(H + (M r*/2) I) h* + v|
  bool hard_case = false;
  int secular_iterations = 0;
};

/// Computes the global minimizer via the secular equation
///   r = |(H + (Mr/2) I)^{-1} v|,  r >= max(0, -2 lambda_min / M),
/// solved by safeguarded bisection + Newton to |phi(r)| <= tol, with the
/// standard eigenvector correction when v is orthogonal to the minimal
/// eigenspace and no interior root exists (the hard case).
template <typename Scalar>
CubicSolution<Scalar> solve_cubic_global(const CubicSubproblem<Scalar>& sub, Scalar tol) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  const Index n = sub.H.rows();
  if (sub.H.cols() != n || sub.v.size() != n)
    throw InputError("solve_cubic_global: inconsistent dimensions");
  if (!sub.v.allFinite() || !sub.H.allFinite() || !std::isfinite(sub.M))
    throw InputError("solve_cubic_global: non-finite entries");
  if (!(sub.M > Scalar(0))) throw InputError("solve_cubic_global: M must be > 0");
  if (!(tol > Scalar(0))) throw InputError("solve_cubic_global: tol must be > 0");
  const Scalar h_scale = std::max(Scalar(1), sub.H.template lpNorm<Eigen::Infinity>());
  if ((sub.H - sub.H.transpose()).template lpNorm<Eigen::Infinity>() > Scalar(1e-12) * h_scale)
    throw InputError("solve_cubic_global: H is not symmetric");

  const Matrix Hs = Scalar(0.5) * (sub.H + sub.H.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Hs);
  if (es.info() != Eigen::Success)
    throw NumericalError("solve_cubic_global: eigendecomposition failed");
  const Vector lam = es.eigenvalues();  // ascending
  const Matrix& Q = es.eigenvectors();
  const Vector w = Q.transpose() * sub.v;

  const Scalar lam1 = lam[0];
  const Scalar r_lo = std::max(Scalar(0), -Scalar(2) * lam1 / sub.M);
  const Scalar vnorm = sub.v.norm();
  const Scalar gap_tol = Scalar(1e-10) * std::max(Scalar(1), lam.cwiseAbs().maxCoeff());
  const Scalar hard_tol = Scalar(1e-11) * (Scalar(1) + vnorm);

  // i belongs to the minimal eigenspace iff min_space[i]
  std::vector<bool> min_space(static_cast<size_t>(n));
  Scalar wmin_sq = Scalar(0);
  for (Index i = 0; i < n; ++i) {
    min_space[static_cast<size_t>(i)] = lam[i] <= lam1 + gap_tol;
    if (min_space[static_cast<size_t>(i)]) wmin_sq += w[i] * w[i];
  }
  const Scalar wmin_norm = std::sqrt(wmin_sq);

  // psi(r) over either all components or only those outside the minimal
  // eigenspace; +inf when a kept component sits on a non-positive shift.
  auto psi_and_slope = [&](Scalar r, bool skip_min) {
    Scalar sum2 = Scalar(0), sum3 = Scalar(0);
    for (Index i = 0; i < n; ++i) {
      if (skip_min && min_space[static_cast<size_t>(i)]) continue;
      if (w[i] == Scalar(0)) continue;
      const Scalar d = lam[i] + Scalar(0.5) * sub.M * r;
      if (!(d > Scalar(0))) return std::pair<Scalar, Scalar>(kInf, -kInf);
      const Scalar t = w[i] / d;
      sum2 += t * t;
      sum3 += t * t / d;
    }
    const Scalar psi = std::sqrt(sum2);
    const Scalar slope = psi > Scalar(0) ? -Scalar(0.5) * sub.M * sum3 / psi : Scalar(0);
    return std::pair<Scalar, Scalar>(psi, slope);
  };

  CubicSolution<Scalar> sol;
  sol.lambda_min_H = lam1;

  auto assemble = [&](Scalar r, bool skip_min, std::optional<Scalar> tau) {
    Vector ht = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      const bool in_min = min_space[static_cast<size_t>(i)];
      if (skip_min && in_min) continue;
      const Scalar d = lam[i] + Scalar(0.5) * sub.M * r;
      if (w[i] != Scalar(0)) ht[i] = -w[i] / d;
    }
    if (tau) ht[0] += *tau;
    sol.h_star = Q * ht;
    sol.r_star = sol.h_star.norm();
    sol.kkt_residual =
        (Hs * sol.h_star + Scalar(0.5) * sub.M * sol.r_star * sol.h_star + sub.v).norm();
    sol.objective = cubic_objective(sub, sol.h_star);
  };

  // Safeguarded Newton on phi(r) = psi(r) - r over a sign-change bracket.
  auto solve_secular = [&](Scalar a, bool skip_min) {
    auto phi = [&](Scalar r) {
      auto [p, dp] = psi_and_slope(r, skip_min);
      return std::pair<Scalar, Scalar>(p - r, dp - Scalar(1));
    };
    Scalar b = a + std::max(Scalar(1), a);
    for (int i = 0; i < 200 && phi(b).first > Scalar(0); ++i) b = a + Scalar(2) * (b - a);
    Scalar r = Scalar(0.5) * (a + b);
    for (int it = 0; it < 200; ++it) {
      ++sol.secular_iterations;
      auto [val, slope] = phi(r);
      if (std::abs(val) <= tol) break;
      if (val > Scalar(0))
        a = r;
      else
        b = r;
      Scalar next = slope < Scalar(0) ? r - val / slope : std::numeric_limits<Scalar>::quiet_NaN();
      if (!std::isfinite(next) || next <= a || next >= b) next = Scalar(0.5) * (a + b);
      if (next == r) break;
      r = next;
    }
    return r;
  };

  if (vnorm == Scalar(0)) {
    if (lam1 >= Scalar(0)) {
      sol.h_star = Vector::Zero(n);
      assemble(Scalar(0), true, Scalar(0));
    } else {
      sol.hard_case = true;
      assemble(r_lo, true, r_lo);
    }
    return sol;
  }

  if (lam1 >= Scalar(0) || wmin_norm > hard_tol) {
    const Scalar r = solve_secular(r_lo, false);
    assemble(r, false, std::nullopt);
    return sol;
  }

  // v is (numerically) orthogonal to the minimal eigenspace.
  const Scalar psi_perp = psi_and_slope(r_lo, true).first;
  if (psi_perp >= r_lo) {
    const Scalar r = solve_secular(r_lo, true);
    assemble(r, true, std::nullopt);
    return sol;
  }

  // Hard case: boundary solution completed along a minimal eigenvector.
  sol.hard_case = true;
  const Scalar tau = std::sqrt(std::max(Scalar(0), r_lo * r_lo - psi_perp * psi_perp));
  assemble(r_lo, true, tau);
  return sol;
}

/// Default tolerance |phi(r)| <= 1e-10 (1 + |v|).
template <typename Scalar>
CubicSolution<Scalar> solve_cubic_global(const CubicSubproblem<Scalar>& sub) {
  return solve_cubic_global(sub, Scalar(1e-10) * (Scalar(1) + sub.v.norm()));
}

}  // namespace hodc
