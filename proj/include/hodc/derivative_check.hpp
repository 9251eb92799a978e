#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hodc/oracles.hpp"
#include "hodc/types.hpp"

namespace hodc {

/// Central-difference step used throughout: h = max(1e-6, 1e-6 |x|).
template <typename Scalar>
Scalar fd_step(const VectorX<Scalar>& x) {
  return std::max(Scalar(1e-6), Scalar(1e-6) * x.norm());
}

/// Central finite-difference gradient of a scalar function.
template <typename Scalar, typename F>
VectorX<Scalar> fd_gradient(F&& value, const VectorX<Scalar>& x) {
  const Scalar h = fd_step(x);
  VectorX<Scalar> g(x.size());
  VectorX<Scalar> xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (value(xp) - value(xm)) / (2 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

/// Central finite-difference Jacobian of a vector field (column i = d field / d x_i).
template <typename Scalar, typename F>
MatrixX<Scalar> fd_jacobian(F&& field, const VectorX<Scalar>& x) {
  const Scalar h = fd_step(x);
  MatrixX<Scalar> J;
  VectorX<Scalar> xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    VectorX<Scalar> col = (field(xp) - field(xm)) / (2 * h);
    if (J.size() == 0) J.resize(col.size(), x.size());
    J.col(i) = col;
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return J;
}

/// Directional central difference of a matrix field along h_dir.
template <typename Scalar, typename F>
MatrixX<Scalar> fd_directional(F&& matrix_field, const VectorX<Scalar>& x,
                               const VectorX<Scalar>& h_dir) {
  const Scalar h = fd_step(x);
  return ((matrix_field((x + h * h_dir).eval()) - matrix_field((x - h * h_dir).eval())) /
          (2 * h))
      .eval();
}

template <typename Scalar>
struct DerivativeCheckReport {
  /// max relative error observed for orders 1..3 (index i holds order i+1);
  /// entries beyond the oracle's derivative_order stay 0.
  std::array<Scalar, 3> max_rel_error{};
  int orders_checked = 0;
  bool pass = true;
  /// Minimum hessian eigenvalue seen across the test points (convexity spot
  /// check); only meaningful when the oracle supplies a hessian.
  std::optional<Scalar> min_hessian_eigenvalue{};
  /// One message per failed point/order, including oracle exceptions.
  std::vector<std::string> failures;
};

namespace detail {

template <typename Scalar>
std::string format_point(const VectorX<Scalar>& x) {
  std::ostringstream os;
  os << "[";
  for (Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "]";
  return os.str();
}

}  // namespace detail

/// Compares each supplied derivative order against central finite differences
/// of the order below it, at every given point. Order 3 is checked
/// directionally along a fixed set of coordinate + diagonal directions.
template <typename Scalar>
DerivativeCheckReport<Scalar> check_derivatives(const SmoothOracle<Scalar>& oracle,
                                                const std::vector<VectorX<Scalar>>& points,
                                                Scalar tol) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  if (!(tol > Scalar(0))) throw InputError("check_derivatives: tol must be > 0");

  DerivativeCheckReport<Scalar> report;
  report.orders_checked = oracle.derivative_order;

  auto relative = [](Scalar err, Scalar scale) { return err / std::max(Scalar(1), scale); };

  for (const Vector& x : points) {
    try {
      // order 1: gradient vs FD of value
      const Vector g = oracle.gradient(x);
      const Vector g_fd = fd_gradient<Scalar>(oracle.value, x);
      const Scalar e1 = relative((g - g_fd).norm(), g_fd.norm());
      report.max_rel_error[0] = std::max(report.max_rel_error[0], e1);
      if (e1 > tol) {
        report.pass = false;
        report.failures.push_back("gradient mismatch (rel err " + std::to_string(e1) +
                                  ") at " + detail::format_point(x));
      }

      if (oracle.derivative_order >= 2 && oracle.has_hessian()) {
        const Matrix H = oracle.hessian(x);
        const Scalar asym = (H - H.transpose()).template lpNorm<Eigen::Infinity>();
        if (asym > Scalar(1e-12) * std::max(Scalar(1), H.norm())) {
          report.pass = false;
          report.failures.push_back("hessian asymmetry " + std::to_string(asym) + " at " +
                                    detail::format_point(x));
        }
        const Matrix H_fd = fd_jacobian<Scalar>(oracle.gradient, x);
        const Scalar e2 = relative((H - H_fd).norm(), H_fd.norm());
        report.max_rel_error[1] = std::max(report.max_rel_error[1], e2);
        if (e2 > tol) {
          report.pass = false;
          report.failures.push_back("hessian mismatch (rel err " + std::to_string(e2) +
                                    ") at " + detail::format_point(x));
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(Scalar(0.5) * (H + H.transpose()),
                                                 Eigen::EigenvaluesOnly);
        const Scalar lmin = es.eigenvalues().minCoeff();
        report.min_hessian_eigenvalue =
            report.min_hessian_eigenvalue ? std::min(*report.min_hessian_eigenvalue, lmin)
                                          : lmin;
      }

      if (oracle.derivative_order >= 3 && oracle.has_third()) {
        const Index n = x.size();
        std::vector<Vector> dirs;
        dirs.push_back(Vector::Unit(n, 0));
        if (n > 1) dirs.push_back(Vector::Unit(n, n - 1));
        dirs.push_back(Vector::Constant(n, Scalar(1) / std::sqrt(Scalar(n))));
        for (const Vector& d : dirs) {
          const Matrix T = oracle.third_derivative_apply(x, d);
          const Matrix T_fd = fd_directional<Scalar>(oracle.hessian, x, d);
          const Scalar e3 = relative((T - T_fd).norm(), T_fd.norm());
          report.max_rel_error[2] = std::max(report.max_rel_error[2], e3);
          if (e3 > tol) {
            report.pass = false;
            report.failures.push_back("third derivative mismatch (rel err " +
                                      std::to_string(e3) + ") at " +
                                      detail::format_point(x));
          }
        }
      }
    } catch (const std::exception& e) {
      report.pass = false;
      report.failures.push_back(std::string("oracle error at ") + detail::format_point(x) +
                                ": " + e.what());
    }
  }
  return report;
}

}  // namespace hodc
