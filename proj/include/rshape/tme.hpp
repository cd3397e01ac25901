#pragma once

#include <string>

#include "rshape/detail/scatter.hpp"
#include "rshape/types.hpp"

namespace rshape {

/// Result of a Tyler-type fixed-point solve.
template <typename Scalar>
struct TmeSolution {
    /// Unregularized solves: the trace-p estimate. Regularized solves: the
    /// raw fixed point of the regularized equation (tr of its inverse is p).
    Matrix<Scalar> estimate;
    /// Unregularized: normalized to sum 1. Regularized: 1 / (x_i^T S^{-1} x_i).
    Vector<Scalar> weights;
    int iterations = 0;
    /// Frobenius step between the last two trace-p-normalized iterates (the
    /// larger of that and the raw step for regularized solves).
    Scalar final_step = 0;
    /// Relative Frobenius residual of the fixed-point equation.
    Scalar residual = 0;
    bool converged = false;
    /// False when a regularized solve was forced below the existence bound.
    bool guaranteed = true;
};

struct TmeOptions {
    double tol = 1e-12;
    int max_iter = 1400;
};

/// Relative residual of Tyler's equation at `sigma`, with the left-hand side
/// renormalized to trace p.
template <typename Derived>
typename Derived::Scalar tyler_residual(const Eigen::MatrixBase<Derived>& samples,
                                        const Matrix<typename Derived::Scalar>& sigma) {
    using Scalar = typename Derived::Scalar;
    const Matrix<Scalar> unit = detail::unit_columns(samples, "tyler_residual");
    const Scalar p = Scalar(samples.rows());
    const auto llt = detail::guarded_cholesky(sigma, "tyler_residual");
    Matrix<Scalar> lhs = detail::weighted_scatter(unit, detail::quadratic_forms(llt, unit));
    lhs *= p / lhs.trace();
    const Matrix<Scalar> normalized = sigma * (p / sigma.trace());
    return (lhs - normalized).norm() / normalized.norm();
}

/// Weights w_i proportional to 1 / (x_i^T S^{-1} x_i), normalized to sum to one.
template <typename Derived>
Vector<typename Derived::Scalar> tme_weights(const Matrix<typename Derived::Scalar>& estimate,
                                             const Eigen::MatrixBase<Derived>& samples) {
    using Scalar = typename Derived::Scalar;
    const Eigen::LLT<Matrix<Scalar>> llt(estimate);
    if (llt.info() != Eigen::Success) throw DegeneracyError("tme_weights: estimate is not PD");
    Vector<Scalar> w = detail::quadratic_forms(llt, samples).cwiseInverse();
    if (!w.allFinite() || !(w.array() > Scalar(0)).all()) {
        throw std::domain_error("tme_weights: non-finite quadratic form");
    }
    return w / w.sum();
}

/// Tyler's M-estimator by the trace-normalized fixed-point iteration started
/// from the identity. Stops when consecutive iterates differ by less than
/// `tol` in Frobenius norm or after `max_iter` updates.
///
/// Samples are columns of `samples` (p x n). Requires n > p; Kent's subspace
/// condition is not enumerated, but numerically singular iterates raise
/// DegeneracyError.
template <typename Derived>
TmeSolution<typename Derived::Scalar> tyler_fixed_point(const Eigen::MatrixBase<Derived>& samples,
                                                        const TmeOptions& opts = {}) {
    using Scalar = typename Derived::Scalar;
    const Index p = samples.rows();
    const Index n = samples.cols();
    if (p < 1) throw std::invalid_argument("tyler_fixed_point: empty dimension");
    if (n <= p) {
        throw ExistenceError("tyler_fixed_point: Tyler's estimator needs n > p (n=" +
                             std::to_string(n) + ", p=" + std::to_string(p) + ")");
    }
    const Matrix<Scalar> unit = detail::unit_columns(samples, "tyler_fixed_point");
    const Scalar pd = Scalar(p);

    TmeSolution<Scalar> sol;
    Matrix<Scalar> sigma = Matrix<Scalar>::Identity(p, p);
    for (int k = 1; k <= opts.max_iter; ++k) {
        const auto llt = detail::guarded_cholesky(sigma, "tyler_fixed_point");
        Matrix<Scalar> next = detail::weighted_scatter(unit, detail::quadratic_forms(llt, unit));
        next *= pd / next.trace();
        sol.final_step = (next - sigma).norm();
        sigma = std::move(next);
        sol.iterations = k;
        if (sol.final_step < Scalar(opts.tol)) {
            sol.converged = true;
            break;
        }
    }
    sol.residual = tyler_residual(unit, sigma);
    sol.weights = tme_weights(sigma, samples.derived());
    sol.estimate = std::move(sigma);
    return sol;
}

template <typename Derived>
Vector<typename Derived::Scalar> tme_weights(const TmeSolution<typename Derived::Scalar>& solution,
                                             const Eigen::MatrixBase<Derived>& samples) {
    if (!solution.converged) throw std::invalid_argument("tme_weights: solution did not converge");
    return tme_weights(solution.estimate, samples);
}

inline TmeSolution<double> tyler_fixed_point(const DataSet& data, const TmeOptions& opts = {}) {
    return tyler_fixed_point(data.samples, opts);
}

}  // namespace rshape
