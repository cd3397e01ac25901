#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rshape/detail/scatter.hpp"
#include "rshape/tme.hpp"
#include "rshape/types.hpp"

namespace rshape {

enum class SolvePath {
    Dense,
    /// Solve inside the span of the samples when n < p.
    SubspaceAuto,
};

struct RegConfig {
    double alpha = 10.0;
    double tol = 1e-12;
    int max_iter = 1400;
    SolvePath path = SolvePath::SubspaceAuto;
    /// Run even when alpha <= p/n - 1; the result is marked non-guaranteed.
    bool force = false;
    /// Keep every iterate so the ConvergenceTrace can be filled in.
    bool record_trace = false;
};

/// e_k = ||S_k - S_final|| (spectral) for the raw iterates, k = 1, 2, ...
template <typename Scalar>
struct ConvergenceTrace {
    std::vector<Scalar> errors;
    /// errors[k+1] / errors[k], for every k with errors[k] > 0.
    std::vector<Scalar> ratios;
};

template <typename Scalar>
struct RegSolution {
    TmeSolution<Scalar> solution;
    ConvergenceTrace<Scalar> trace;
};

/// C(X) = (p/n) || sum_i x_i x_i^T / ||x_i||^2 ||, never below p/n.
template <typename Derived>
typename Derived::Scalar c_of_x(const Eigen::MatrixBase<Derived>& samples) {
    using Scalar = typename Derived::Scalar;
    const Matrix<Scalar> unit = detail::unit_columns(samples, "c_of_x");
    const Index p = unit.rows();
    const Index n = unit.cols();
    // X X^T and X^T X share their nonzero spectrum; use the smaller one.
    const Matrix<Scalar> gram = p <= n ? Matrix<Scalar>(unit * unit.transpose())
                                       : Matrix<Scalar>(unit.transpose() * unit);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(gram, Eigen::EigenvaluesOnly);
    return Scalar(p) / Scalar(n) * es.eigenvalues().maxCoeff();
}

inline double c_of_x(const DataSet& data) { return c_of_x(data.samples); }

/// High-probability upper bound 2 s (1 + 2 sqrt(p/n))^2 on C(X) for elliptical
/// data whose shape has spectral norm s. Diagnostic only.
inline double cx_theoretical_bound(double spectral_norm_shape, double p, double n) {
    if (!(spectral_norm_shape > 0 && p > 0 && n > 0)) {
        throw std::invalid_argument("cx_theoretical_bound: arguments must be positive");
    }
    const double root = 1.0 + 2.0 * std::sqrt(p / n);
    return 2.0 * spectral_norm_shape * root * root;
}

/// Smallest safe alpha for which the regularized iteration, started at
/// alpha/(1+alpha) I, contracts with ratio `rate` from the first step:
/// (1 + safety) max((3 + 1/rate) C - 1, 1e-6), nudged to be strictly above
/// the bound.
inline double recommend_alpha(double c, double rate, double safety = 0.01) {
    if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("recommend_alpha: rate must lie in (0, 1)");
    if (!(c > 0.0)) throw std::invalid_argument("recommend_alpha: C must be positive");
    if (!(safety >= 0.0)) throw std::invalid_argument("recommend_alpha: safety must be >= 0");
    const double bound = std::max((3.0 + 1.0 / rate) * c - 1.0, 0.0);
    double alpha = (1.0 + safety) * std::max(bound, 1e-6);
    if (alpha <= bound) alpha = std::nextafter(bound, std::numeric_limits<double>::infinity());
    return alpha;
}

/// Relative Frobenius residual of the regularized fixed-point equation.
template <typename Derived>
typename Derived::Scalar reg_tyler_residual(const Eigen::MatrixBase<Derived>& samples,
                                            const Matrix<typename Derived::Scalar>& sigma,
                                            double alpha) {
    using Scalar = typename Derived::Scalar;
    const Matrix<Scalar> unit = detail::unit_columns(samples, "reg_tyler_residual");
    const Index p = unit.rows();
    const Scalar a = Scalar(alpha / (1.0 + alpha));
    const Scalar c = Scalar(p) / (Scalar(unit.cols()) * Scalar(1.0 + alpha));
    const auto llt = detail::guarded_cholesky(sigma, "reg_tyler_residual");
    Matrix<Scalar> rhs = c * detail::weighted_scatter(unit, detail::quadratic_forms(llt, unit));
    rhs.diagonal().array() += a;
    return (rhs - sigma).norm() / sigma.norm();
}

/// w_i = 1 / (x_i^T S^{-1} x_i), unnormalized.
template <typename Derived>
Vector<typename Derived::Scalar> reg_weights(const Matrix<typename Derived::Scalar>& estimate,
                                             const Eigen::MatrixBase<Derived>& samples) {
    using Scalar = typename Derived::Scalar;
    const Eigen::LLT<Matrix<Scalar>> llt(estimate);
    if (llt.info() != Eigen::Success) throw DegeneracyError("reg_weights: estimate is not PD");
    Vector<Scalar> w = detail::quadratic_forms(llt, samples).cwiseInverse();
    if (!w.allFinite()) throw std::domain_error("reg_weights: non-finite quadratic form");
    return w;
}

template <typename Derived>
Vector<typename Derived::Scalar> reg_weights(const TmeSolution<typename Derived::Scalar>& solution,
                                             const Eigen::MatrixBase<Derived>& samples) {
    if (!solution.converged) throw std::invalid_argument("reg_weights: solution did not converge");
    return reg_weights(solution.estimate, samples);
}

namespace detail {

/// Regularized iteration for m-dimensional unit samples embedded in an
/// ambient space of dimension p >= m; the (p - m)-dimensional complement
/// carries the constant alpha/(1+alpha) block. The stopping rule acts on
/// the trace-p normalization of the full p x p iterate and on the raw step.
template <typename Scalar>
struct RegIterationResult {
    Matrix<Scalar> sigma;
    std::vector<Matrix<Scalar>> iterates;
    int iterations = 0;
    Scalar final_step = 0;
    bool converged = false;
};

template <typename Scalar>
RegIterationResult<Scalar> regularized_iteration(const Matrix<Scalar>& unit, Index ambient_dim,
                                                 const RegConfig& cfg) {
    const Index m = unit.rows();
    const Index n = unit.cols();
    const Scalar a = Scalar(cfg.alpha / (1.0 + cfg.alpha));
    const Scalar c = Scalar(ambient_dim) / (Scalar(n) * Scalar(1.0 + cfg.alpha));
    const Scalar complement = Scalar(ambient_dim - m);
    const auto full_trace = [&](const Matrix<Scalar>& s) { return s.trace() + complement * a; };

    RegIterationResult<Scalar> out;
    Matrix<Scalar> sigma = a * Matrix<Scalar>::Identity(m, m);
    if (cfg.record_trace) out.iterates.push_back(sigma);
    for (int k = 1; k <= cfg.max_iter; ++k) {
        const auto llt = guarded_cholesky(sigma, "reg_tyler");
        Matrix<Scalar> next = c * weighted_scatter(unit, quadratic_forms(llt, unit));
        next.diagonal().array() += a;
        // Below the existence bound the raw iterates grow without limit.
        if (!next.allFinite()) break;

        const Scalar s_old = Scalar(ambient_dim) / full_trace(sigma);
        const Scalar s_new = Scalar(ambient_dim) / full_trace(next);
        const Scalar block = (s_new * next - s_old * sigma).squaredNorm();
        const Scalar rest = complement * a * a * (s_new - s_old) * (s_new - s_old);
        // Proportional iterates have a zero normalized step, so the raw step
        // must also be small before stopping.
        const Scalar raw = (next - sigma).squaredNorm();
        out.final_step = std::sqrt(std::max(block + rest, raw));

        sigma = std::move(next);
        out.iterations = k;
        if (cfg.record_trace) out.iterates.push_back(sigma);
        if (out.final_step < Scalar(cfg.tol)) {
            out.converged = true;
            break;
        }
    }
    out.sigma = std::move(sigma);
    return out;
}

}  // namespace detail

/// Regularized Tyler's M-estimator: the fixed point of
///   S = 1/(1+alpha) (p/n) sum_i x_i x_i^T / (x_i^T S^{-1} x_i) + alpha/(1+alpha) I,
/// iterated from alpha/(1+alpha) I.
///
/// With SolvePath::SubspaceAuto and n < p the iteration runs in the span W of
/// the samples (economy SVD) and the result is embedded back with
/// alpha/(1+alpha) on the orthogonal complement of W.
///
/// Throws ExistenceError unless alpha > max(0, p/n - 1); `force` relaxes the
/// second half of that condition and marks the result non-guaranteed.
/// Hitting max_iter is not an error: the result comes back with converged = false
/// (and NaN residual and weights if the last iterate is unusable).
template <typename Derived>
RegSolution<typename Derived::Scalar> reg_tyler(const Eigen::MatrixBase<Derived>& samples,
                                                const RegConfig& cfg) {
    using Scalar = typename Derived::Scalar;
    const Index p = samples.rows();
    const Index n = samples.cols();
    if (p < 1 || n < 1) throw std::invalid_argument("reg_tyler: empty data");
    const double existence = std::max(0.0, double(p) / double(n) - 1.0);
    const bool above = cfg.alpha > existence;
    if (!(cfg.alpha > 0.0) || (!above && !cfg.force)) {
        throw ExistenceError("reg_tyler: alpha=" + std::to_string(cfg.alpha) +
                             " must exceed max(0, p/n - 1)=" + std::to_string(existence));
    }
    const Matrix<Scalar> unit = detail::unit_columns(samples, "reg_tyler");
    const Scalar a = Scalar(cfg.alpha / (1.0 + cfg.alpha));

    RegSolution<Scalar> out;
    auto& sol = out.solution;
    sol.guaranteed = above;

    std::vector<Matrix<Scalar>> iterates;
    if (cfg.path == SolvePath::SubspaceAuto && n < p) {
        Eigen::BDCSVD<Matrix<Scalar>> svd(unit, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        const Scalar cutoff = sv[0] * Scalar(p) * std::numeric_limits<Scalar>::epsilon();
        Index rank = 0;
        while (rank < sv.size() && sv[rank] > cutoff) ++rank;
        const Matrix<Scalar> basis = svd.matrixU().leftCols(rank);
        const Matrix<Scalar> projected = basis.transpose() * unit;
        auto it = detail::regularized_iteration<Scalar>(projected, p, cfg);
        const auto embed = [&](const Matrix<Scalar>& block) {
            Matrix<Scalar> full = basis * (block - a * Matrix<Scalar>::Identity(rank, rank)) *
                                  basis.transpose();
            full = (Scalar(0.5) * (full + full.transpose())).eval();
            full.diagonal().array() += a;
            return full;
        };
        sol.estimate = embed(it.sigma);
        for (const auto& m : it.iterates) iterates.push_back(embed(m));
        sol.iterations = it.iterations;
        sol.final_step = it.final_step;
        sol.converged = it.converged;
    } else {
        auto it = detail::regularized_iteration<Scalar>(unit, p, cfg);
        sol.estimate = std::move(it.sigma);
        iterates = std::move(it.iterates);
        sol.iterations = it.iterations;
        sol.final_step = it.final_step;
        sol.converged = it.converged;
    }

    if (sol.converged) {
        sol.residual = reg_tyler_residual(unit, sol.estimate, cfg.alpha);
        sol.weights = reg_weights(sol.estimate, samples.derived());
    } else {
        // A capped run may have drifted far from any fixed point.
        try {
            sol.residual = reg_tyler_residual(unit, sol.estimate, cfg.alpha);
            sol.weights = reg_weights(sol.estimate, samples.derived());
        } catch (const std::exception&) {
            sol.residual = std::numeric_limits<Scalar>::quiet_NaN();
            sol.weights = Vector<Scalar>::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
        }
    }

    if (cfg.record_trace) {
        for (const auto& m : iterates) {
            Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(m - sol.estimate, Eigen::EigenvaluesOnly);
            out.trace.errors.push_back(es.eigenvalues().cwiseAbs().maxCoeff());
        }
        for (std::size_t k = 0; k + 1 < out.trace.errors.size(); ++k) {
            if (out.trace.errors[k] > Scalar(0)) {
                out.trace.ratios.push_back(out.trace.errors[k + 1] / out.trace.errors[k]);
            }
        }
    }
    return out;
}

inline RegSolution<double> reg_tyler(const DataSet& data, const RegConfig& cfg) {
    return reg_tyler(data.samples, cfg);
}

}  // namespace rshape
