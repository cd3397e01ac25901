#pragma once

#include <cmath>
#include <optional>

#include "rshape/regtme.hpp"
#include "rshape/tme.hpp"
#include "rshape/types.hpp"

namespace rshape {

/// Threshold t = multiplier * sqrt(ln p / n), unless explicitly overridden.
struct ThresholdSchedule {
    double multiplier = 1.0;
    std::optional<double> explicit_t;
};

/// Keeps a_ij iff |a_ij| > t. Ties are zeroed; the diagonal is not exempt.
template <typename Derived>
Matrix<typename Derived::Scalar> hard_threshold(const Eigen::MatrixBase<Derived>& a,
                                                typename Derived::Scalar t) {
    using Scalar = typename Derived::Scalar;
    if (t < Scalar(0)) throw std::invalid_argument("hard_threshold: t must be nonnegative");
    return (a.array().abs() > t).select(a, Scalar(0));
}

inline double resolve_threshold(double p, double n, const ThresholdSchedule& schedule) {
    if (schedule.explicit_t) {
        if (!(*schedule.explicit_t >= 0.0)) throw std::invalid_argument("resolve_threshold: negative override");
        return *schedule.explicit_t;
    }
    if (!(p > 1.0) || !(n >= 1.0)) throw std::invalid_argument("resolve_threshold: need p > 1 and n >= 1");
    if (!(schedule.multiplier > 0.0)) throw std::invalid_argument("resolve_threshold: multiplier must be positive");
    return schedule.multiplier * std::sqrt(std::log(p) / n);
}

/// Thresholded Tyler's M-estimator (trace p before thresholding). Needs n > p.
template <typename Derived>
Matrix<typename Derived::Scalar> estimate_shape_tme(const Eigen::MatrixBase<Derived>& samples,
                                                    const TmeOptions& opts,
                                                    const ThresholdSchedule& schedule) {
    using Scalar = typename Derived::Scalar;
    const auto sol = tyler_fixed_point(samples, opts);
    const double t = resolve_threshold(double(samples.rows()), double(samples.cols()), schedule);
    return hard_threshold(sol.estimate, Scalar(t));
}

/// p (S - a I) / tr(S - a I) with a = alpha/(1+alpha): the regularized
/// estimate with the identity regularization removed, rescaled to trace p.
template <typename Scalar>
Matrix<Scalar> remove_regularization(const Matrix<Scalar>& sigma, double alpha) {
    const Scalar a = Scalar(alpha / (1.0 + alpha));
    Matrix<Scalar> core = sigma;
    core.diagonal().array() -= a;
    const Scalar tr = core.trace();
    if (!(tr > Scalar(sigma.rows()) * std::numeric_limits<Scalar>::epsilon())) {
        throw DegeneracyError("remove_regularization: zero trace after removing the identity part");
    }
    return core * (Scalar(sigma.rows()) / tr);
}

/// Everything one regularized solve yields for benchmarking.
template <typename Scalar>
struct RegShapeEstimate {
    Matrix<Scalar> unthresholded;
    Matrix<Scalar> thresholded;
    Scalar threshold = 0;
    TmeSolution<Scalar> solution;
};

template <typename Derived>
RegShapeEstimate<typename Derived::Scalar> regtme_estimates(const Eigen::MatrixBase<Derived>& samples,
                                                            const RegConfig& cfg,
                                                            const ThresholdSchedule& schedule) {
    using Scalar = typename Derived::Scalar;
    RegShapeEstimate<Scalar> out;
    out.solution = reg_tyler(samples, cfg).solution;
    out.unthresholded = remove_regularization(out.solution.estimate, cfg.alpha);
    out.threshold = Scalar(resolve_threshold(double(samples.rows()), double(samples.cols()), schedule));
    out.thresholded = hard_threshold(out.unthresholded, out.threshold);
    return out;
}

/// Thresholded regularized Tyler's M-estimator.
template <typename Derived>
Matrix<typename Derived::Scalar> estimate_shape_regtme(const Eigen::MatrixBase<Derived>& samples,
                                                       const RegConfig& cfg,
                                                       const ThresholdSchedule& schedule) {
    return regtme_estimates(samples, cfg, schedule).thresholded;
}

/// Sample second-moment matrix (1/n) sum x_i x_i^T rescaled to trace p.
template <typename Derived>
Matrix<typename Derived::Scalar> scaled_sample_cov(const Eigen::MatrixBase<Derived>& samples) {
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> s = Matrix<Scalar>::Zero(samples.rows(), samples.rows());
    s.template selfadjointView<Eigen::Lower>().rankUpdate(samples.derived(), Scalar(1) / Scalar(samples.cols()));
    s.template triangularView<Eigen::StrictlyUpper>() = s.transpose();
    const Scalar tr = s.trace();
    if (!(tr > Scalar(0)) || !std::isfinite(static_cast<double>(tr))) {
        throw DegeneracyError("scaled_sample_cov: sample covariance has zero or non-finite trace");
    }
    return s * (Scalar(samples.rows()) / tr);
}

template <typename Derived>
Matrix<typename Derived::Scalar> thresholded_sample_cov(const Eigen::MatrixBase<Derived>& samples,
                                                        const ThresholdSchedule& schedule) {
    using Scalar = typename Derived::Scalar;
    const double t = resolve_threshold(double(samples.rows()), double(samples.cols()), schedule);
    return hard_threshold(scaled_sample_cov(samples), Scalar(t));
}

}  // namespace rshape
