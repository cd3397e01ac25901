#pragma once

// Kernels shared by the Tyler solvers: unit-normalizing samples, quadratic
// forms x^T S^{-1} x through a Cholesky factor, and weighted scatter sums.

#include <cmath>
#include <string>

#include "rshape/types.hpp"

namespace rshape::detail {

inline constexpr double kMaxCondition = 1e14;

/// Columns of `x` scaled to unit Euclidean norm. Rejects zero columns.
template <typename Derived>
Matrix<typename Derived::Scalar> unit_columns(const Eigen::MatrixBase<Derived>& x, const char* who) {
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> u = x;
    for (Index i = 0; i < u.cols(); ++i) {
        const Scalar norm = u.col(i).norm();
        if (!(norm > Scalar(0))) {
            throw std::invalid_argument(std::string(who) + ": sample " + std::to_string(i) +
                                        " is the zero vector");
        }
        if (!std::isfinite(static_cast<double>(norm))) {
            throw std::invalid_argument(std::string(who) + ": sample " + std::to_string(i) +
                                        " is not finite");
        }
        u.col(i) /= norm;
    }
    return u;
}

/// Cholesky factor of `sigma`; throws DegeneracyError when the factorization
/// fails or the condition estimate (max/min of diag(L))^2 exceeds 1e14.
template <typename Scalar>
Eigen::LLT<Matrix<Scalar>> guarded_cholesky(const Matrix<Scalar>& sigma, const char* who) {
    Eigen::LLT<Matrix<Scalar>> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw DegeneracyError(std::string(who) +
                              ": iterate lost positive definiteness; data may violate Kent's "
                              "subspace condition");
    }
    const auto diag = llt.matrixLLT().diagonal();
    const double ratio = static_cast<double>(diag.maxCoeff() / diag.minCoeff());
    if (!std::isfinite(ratio) || ratio * ratio > kMaxCondition) {
        throw DegeneracyError(std::string(who) +
                              ": iterate is numerically singular (condition estimate above 1e14); "
                              "data may violate Kent's subspace condition");
    }
    return llt;
}

/// q_i = x_i^T S^{-1} x_i for every column, via triangular solves.
template <typename Scalar, typename Derived>
Vector<Scalar> quadratic_forms(const Eigen::LLT<Matrix<Scalar>>& llt,
                               const Eigen::MatrixBase<Derived>& x) {
    const Matrix<Scalar> y = llt.matrixL().solve(x);
    return y.colwise().squaredNorm().transpose();
}

/// sum_i x_i x_i^T / q_i, exactly symmetric.
template <typename Scalar, typename Derived>
Matrix<Scalar> weighted_scatter(const Eigen::MatrixBase<Derived>& x, const Vector<Scalar>& q) {
    const Matrix<Scalar> scaled = x * q.cwiseSqrt().cwiseInverse().asDiagonal();
    Matrix<Scalar> s = Matrix<Scalar>::Zero(x.rows(), x.rows());
    s.template selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    s.template triangularView<Eigen::StrictlyUpper>() = s.transpose();
    return s;
}

}  // namespace rshape::detail
