#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hodc/oracles.hpp"

namespace hodc {

namespace detail {

template <typename Scalar>
MatrixX<Scalar> gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(Scalar(0), Scalar(1));
  MatrixX<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

template <typename Scalar>
VectorX<Scalar> gaussian_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(Scalar(0), Scalar(1));
  VectorX<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

template <typename Scalar>
MatrixX<Scalar> random_orthogonal(Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(gaussian_matrix<Scalar>(n, n, rng));
  return qr.householderQ() * MatrixX<Scalar>::Identity(n, n);
}

template <typename Scalar>
Scalar spectral_norm(const MatrixX<Scalar>& A) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(
      (A.transpose() * A).eval(), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(Scalar(0), es.eigenvalues().maxCoeff()));
}

}  // namespace detail

/// f = (1/2) x'Ax - b'x with eigenvalues of A in [1, 2], g = (mu/2)|x|^2,
/// psi = 0. F is strongly convex with the unique stationary point
/// x* = (A - mu I)^{-1} b, so the exact minimum value is known.
template <typename Scalar>
struct QuadMinusQuadData {
  MatrixX<Scalar> A;
  VectorX<Scalar> b;
  Scalar mu;
  VectorX<Scalar> stationary_point;
  DcProblem<Scalar> problem;
};

template <typename Scalar>
QuadMinusQuadData<Scalar> make_quad_minus_quad(Index n, std::uint64_t seed) {
  if (n < 1) throw InputError("make_quad_minus_quad: n must be >= 1");
  std::mt19937_64 rng(seed ^ 0x71a6d0u);
  QuadMinusQuadData<Scalar> d;
  const MatrixX<Scalar> Q = detail::random_orthogonal<Scalar>(n, rng);
  VectorX<Scalar> eigs(n);
  for (Index i = 0; i < n; ++i)
    eigs[i] = n == 1 ? Scalar(1.5) : Scalar(1) + Scalar(i) / Scalar(n - 1);
  d.A = Q * eigs.asDiagonal() * Q.transpose();
  d.A = Scalar(0.5) * (d.A + d.A.transpose()).eval();
  d.b = detail::gaussian_vector<Scalar>(n, rng);
  d.mu = Scalar(0.5);

  d.problem.f = quadratic_oracle<Scalar>(d.A, d.b);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(d.A, Eigen::EigenvaluesOnly);
  d.problem.f.lipschitz_hint[0] = es.eigenvalues().maxCoeff();
  d.problem.g = scaled_sqnorm_oracle<Scalar>(d.mu, n);
  d.problem.psi = zero_term<Scalar>();
  d.problem.dimension = n;

  d.stationary_point =
      (d.A - d.mu * MatrixX<Scalar>::Identity(n, n)).ldlt().solve(d.b);
  const Scalar f_star = Scalar(0.5) * d.stationary_point.dot(d.A * d.stationary_point) -
                        d.b.dot(d.stationary_point) -
                        Scalar(0.5) * d.mu * d.stationary_point.squaredNorm();
  d.problem.known_lower_bound = f_star;
  return d;
}

/// f = (1/2)|Ax - b|^2 with singular values of A in [1, 2],
/// g = (mu/2)|x|^2 with mu below sigma_min(A)^2, psi = lambda |x|_1.
/// F stays convex and coercive, which pins down a unique minimizer.
template <typename Scalar>
struct LassoMinusConcaveData {
  MatrixX<Scalar> A;
  VectorX<Scalar> b;
  Scalar mu;
  Scalar lambda;
  DcProblem<Scalar> problem;
};

template <typename Scalar>
LassoMinusConcaveData<Scalar> make_lasso_minus_concave(Index n, std::uint64_t seed) {
  if (n < 1) throw InputError("make_lasso_minus_concave: n must be >= 1");
  std::mt19937_64 rng(seed ^ 0x1a550u);
  LassoMinusConcaveData<Scalar> d;
  const MatrixX<Scalar> U = detail::random_orthogonal<Scalar>(n, rng);
  const MatrixX<Scalar> V = detail::random_orthogonal<Scalar>(n, rng);
  VectorX<Scalar> sv(n);
  for (Index i = 0; i < n; ++i)
    sv[i] = n == 1 ? Scalar(1.5) : Scalar(1) + Scalar(i) / Scalar(n - 1);
  d.A = U * sv.asDiagonal() * V.transpose();
  d.b = detail::gaussian_vector<Scalar>(n, rng);
  d.mu = Scalar(0.5);
  d.lambda = Scalar(0.1);

  const MatrixX<Scalar> AtA = (d.A.transpose() * d.A).eval();
  const VectorX<Scalar> Atb = d.A.transpose() * d.b;
  d.problem.f = quadratic_oracle<Scalar>(AtA, Atb, Scalar(0.5) * d.b.squaredNorm());
  d.problem.f.lipschitz_hint[0] = sv.maxCoeff() * sv.maxCoeff();
  d.problem.g = scaled_sqnorm_oracle<Scalar>(d.mu, n);
  d.problem.psi = l1_term<Scalar>(d.lambda);
  d.problem.dimension = n;

  // Dropping lambda|x|_1 >= 0 leaves a strongly convex quadratic whose
  // minimum value is a valid lower bound for F.
  const MatrixX<Scalar> H = AtA - d.mu * MatrixX<Scalar>::Identity(n, n);
  d.problem.known_lower_bound =
      Scalar(0.5) * d.b.squaredNorm() - Scalar(0.5) * Atb.dot(H.ldlt().solve(Atb));
  return d;
}

/// f and g are both log-sum-exp terms with different data. The rows of A_f
/// include +-2 e_i, which makes F coercive as long as the rows of A_g are
/// short enough; F >= -log(rows of A_g) everywhere.
template <typename Scalar>
struct LseMinusLseData {
  MatrixX<Scalar> A_f;
  MatrixX<Scalar> A_g;
  DcProblem<Scalar> problem;
};

template <typename Scalar>
LseMinusLseData<Scalar> make_lse_minus_lse(Index n, std::uint64_t seed) {
  if (n < 1) throw InputError("make_lse_minus_lse: n must be >= 1");
  std::mt19937_64 rng(seed ^ 0x15e15eu);
  LseMinusLseData<Scalar> d;

  const Index extra = n;
  d.A_f.resize(2 * n + extra, n);
  d.A_f.topRows(n) = Scalar(2) * MatrixX<Scalar>::Identity(n, n);
  d.A_f.middleRows(n, n) = Scalar(-2) * MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> G = detail::gaussian_matrix<Scalar>(extra, n, rng);
  for (Index i = 0; i < extra; ++i) {
    const Scalar r = G.row(i).norm();
    if (r > Scalar(1)) G.row(i) /= r;
  }
  d.A_f.bottomRows(extra) = G;

  const Index mg = n + 1;
  MatrixX<Scalar> Gg = detail::gaussian_matrix<Scalar>(mg, n, rng);
  const Scalar cap = Scalar(1) / std::sqrt(Scalar(n));
  for (Index i = 0; i < mg; ++i) {
    const Scalar r = Gg.row(i).norm();
    if (r > cap) Gg.row(i) *= cap / r;
  }
  d.A_g = Gg;

  auto hints = [](const MatrixX<Scalar>& A) {
    const Scalar s = detail::spectral_norm(A);
    return std::array<std::optional<Scalar>, 3>{s * s, Scalar(2) * s * s * s,
                                                Scalar(4) * s * s * s * s};
  };
  d.problem.f = log_sum_exp_oracle<Scalar>(d.A_f);
  d.problem.f.lipschitz_hint = hints(d.A_f);
  d.problem.g = log_sum_exp_oracle<Scalar>(d.A_g);
  d.problem.g.lipschitz_hint = hints(d.A_g);
  d.problem.psi = zero_term<Scalar>();
  d.problem.dimension = n;
  d.problem.known_lower_bound = -std::log(Scalar(mg));
  return d;
}

/// f = sum_i x_i^4 / 12, g = |x|^2, psi = 0. Coordinates decouple, so the
/// stationary points are x_i in {0, +-sqrt(6)} and the minimum is -3n.
/// The quartic has no global Lipschitz gradient; the hints stored here are
/// valid on the box |x_i| <= 4, which contains every sublevel set the tests
/// and benchmarks touch.
template <typename Scalar>
struct PolyDcData {
  VectorX<Scalar> stationary_point;  // sqrt(6) * ones
  DcProblem<Scalar> problem;
};

template <typename Scalar>
PolyDcData<Scalar> make_poly_dc(Index n, std::uint64_t /*seed*/) {
  if (n < 1) throw InputError("make_poly_dc: n must be >= 1");
  PolyDcData<Scalar> d;
  d.problem.f = even_quartic_oracle<Scalar>(Scalar(1) / Scalar(12));
  d.problem.f.lipschitz_hint = {Scalar(16), Scalar(8), Scalar(2)};
  d.problem.g = scaled_sqnorm_oracle<Scalar>(Scalar(2), n);
  d.problem.psi = zero_term<Scalar>();
  d.problem.dimension = n;
  d.problem.known_lower_bound = Scalar(-3) * Scalar(n);
  d.stationary_point = VectorX<Scalar>::Constant(n, std::sqrt(Scalar(6)));
  return d;
}

inline const std::vector<std::string>& builtin_problem_names() {
  static const std::vector<std::string> names = {"quad_minus_quad", "lasso_minus_concave",
                                                 "lse_minus_lse", "poly_dc"};
  return names;
}

/// Builds a reproducible problem instance from the registry.
template <typename Scalar>
DcProblem<Scalar> builtin_problem(const std::string& name, Index n, std::uint64_t seed) {
  if (name == "quad_minus_quad") return make_quad_minus_quad<Scalar>(n, seed).problem;
  if (name == "lasso_minus_concave") return make_lasso_minus_concave<Scalar>(n, seed).problem;
  if (name == "lse_minus_lse") return make_lse_minus_lse<Scalar>(n, seed).problem;
  if (name == "poly_dc") return make_poly_dc<Scalar>(n, seed).problem;
  std::string known;
  for (const auto& s : builtin_problem_names()) known += (known.empty() ? "" : ", ") + s;
  throw InputError("builtin_problem: unknown name '" + name + "' (known: " + known + ")");
}

}  // namespace hodc
