#pragma once

#include <type_traits>

#include <Eigen/Core>

namespace hodc {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Non-deduced parameter type: Scalar is pinned by another argument, so
/// callers can pass arbitrary Eigen vector expressions.
template <typename Scalar>
using VectorArg = VectorX<std::type_identity_t<Scalar>>;

}  // namespace hodc
