#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rshape/regtme.hpp"
#include "rshape/threshold.hpp"
#include "rshape/types.hpp"

namespace rshape {

/// Gaussian kernel density estimate evaluated on a uniform grid.
struct DensityCurve {
    VectorXd grid;
    VectorXd density;
    double bandwidth = 0.0;
};

inline constexpr Index kKdeGridSize = 512;

/// Gaussian KDE on 512 points spanning [min - 3h, max + 3h]. The bandwidth is
/// the normal-reference rule h = sigma (4 / 3n)^(1/5) with the robust scale
/// sigma = MAD / 0.6745 (falling back to the standard deviation when the MAD
/// is zero). Throws std::invalid_argument for fewer than two values or when
/// all values coincide.
DensityCurve kde(std::span<const double> values);

struct InlierStats {
    double w_in = 0.0;
    double sigma_in = 0.0;
    double w_left = 0.0;
    double w_right = 0.0;
};

/// Mode of the density and the Gaussian-equivalent spread of the level set
/// { f >= r f(mode) } around it: sigma = (w_R - w_L) / (2 sqrt(-2 ln r)).
/// The level-set ends are interpolated linearly between grid points.
InlierStats estimate_inlier_stats(const DensityCurve& curve, double r = 0.7);
InlierStats estimate_inlier_stats(std::span<const double> weights, double r = 0.7);

struct ScreeningReport {
    VectorXd weights;
    DensityCurve density;
    double w_in = 0.0;
    double sigma_in = 0.0;
    /// Sorted, unique indices of samples whose weight lies within bounds.
    std::vector<Index> kept;
    std::pair<double, double> bounds{0.0, 0.0};
};

struct ScreeningResult {
    ScreeningReport report;
    /// Thresholded regularized estimate recomputed on the kept samples.
    MatrixXd estimate;
    TmeSolution<double> solution;
};

/// Normalizes samples to unit norm, computes the regularized estimator and its
/// weights, keeps samples with weight in [w_in - 2 sigma_in, w_in + 2 sigma_in],
/// then re-estimates and thresholds on the kept samples.
///
/// Throws ScreeningError if fewer than max(p/(1+alpha) + 1, 10) samples survive.
ScreeningResult screen_and_reestimate(const MatrixXd& samples, const RegConfig& cfg,
                                      const ThresholdSchedule& schedule, double r = 0.7);

inline ScreeningResult screen_and_reestimate(const DataSet& data, const RegConfig& cfg,
                                             const ThresholdSchedule& schedule, double r = 0.7) {
    return screen_and_reestimate(data.samples, cfg, schedule, r);
}

}  // namespace rshape
