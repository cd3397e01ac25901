#include "rshape/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rshape {

namespace {

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + mid));
}

double robust_scale(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    const double med = median(v);
    for (double& x : v) x = std::abs(x - med);
    const double mad = median(std::move(v));
    if (mad > 0.0) return mad / 0.6745;

    double mean = 0.0;
    for (double x : values) mean += x;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double x : values) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// Linear interpolation of the abscissa where the density crosses `level`
// between grid points i (inside, >= level) and j (outside, < level).
double crossing(const DensityCurve& c, Index i, Index j, double level) {
    const double fi = c.density[i];
    const double fj = c.density[j];
    const double t = (fi - level) / (fi - fj);
    return c.grid[i] + t * (c.grid[j] - c.grid[i]);
}

}  // namespace

DensityCurve kde(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("kde: need at least two values");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("kde: non-finite value");
    }
    const double magnitude = std::max(std::abs(lo), std::abs(hi));
    if (!(hi - lo > 1e-12 * magnitude) || hi == lo) {
        throw std::invalid_argument("kde: degenerate input, all values are equal");
    }

    const double n = static_cast<double>(values.size());
    DensityCurve c;
    c.bandwidth = robust_scale(values) * std::pow(4.0 / (3.0 * n), 0.2);
    const double h = c.bandwidth;
    c.grid = VectorXd::LinSpaced(kKdeGridSize, lo - 3.0 * h, hi + 3.0 * h);
    c.density = VectorXd::Zero(kKdeGridSize);
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    for (Index g = 0; g < kKdeGridSize; ++g) {
        double acc = 0.0;
        for (double v : values) {
            const double z = (c.grid[g] - v) / h;
            acc += std::exp(-0.5 * z * z);
        }
        c.density[g] = norm * acc;
    }
    return c;
}

InlierStats estimate_inlier_stats(const DensityCurve& curve, double r) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("estimate_inlier_stats: r must lie in (0, 1)");
    const Index size = curve.density.size();
    if (size < 2 || curve.grid.size() != size) {
        throw std::invalid_argument("estimate_inlier_stats: malformed density curve");
    }
    Index mode = 0;
    curve.density.maxCoeff(&mode);
    const double level = r * curve.density[mode];

    InlierStats s;
    s.w_in = curve.grid[mode];
    Index left = mode;
    while (left > 0 && curve.density[left - 1] >= level) --left;
    s.w_left = left > 0 ? crossing(curve, left, left - 1, level) : curve.grid[0];
    Index right = mode;
    while (right + 1 < size && curve.density[right + 1] >= level) ++right;
    s.w_right = right + 1 < size ? crossing(curve, right, right + 1, level) : curve.grid[size - 1];
    s.sigma_in = 0.5 * (s.w_right - s.w_left) / std::sqrt(-2.0 * std::log(r));
    return s;
}

InlierStats estimate_inlier_stats(std::span<const double> weights, double r) {
    return estimate_inlier_stats(kde(weights), r);
}

ScreeningResult screen_and_reestimate(const MatrixXd& samples, const RegConfig& cfg,
                                      const ThresholdSchedule& schedule, double r) {
    const Index p = samples.rows();
    const MatrixXd unit = detail::unit_columns(samples, "screen_and_reestimate");

    ScreeningResult out;
    auto& rep = out.report;
    const auto first = reg_tyler(unit, cfg).solution;
    rep.weights = reg_weights(first.estimate, unit);
    rep.density = kde(std::span<const double>(rep.weights.data(), rep.weights.size()));
    const InlierStats stats = estimate_inlier_stats(rep.density, r);
    rep.w_in = stats.w_in;
    rep.sigma_in = stats.sigma_in;
    rep.bounds = {stats.w_in - 2.0 * stats.sigma_in, stats.w_in + 2.0 * stats.sigma_in};
    for (Index i = 0; i < rep.weights.size(); ++i) {
        if (rep.weights[i] >= rep.bounds.first && rep.weights[i] <= rep.bounds.second) {
            rep.kept.push_back(i);
        }
    }

    const double min_kept = std::max(double(p) / (1.0 + cfg.alpha) + 1.0, 10.0);
    if (static_cast<double>(rep.kept.size()) < min_kept) {
        throw ScreeningError("screen_and_reestimate: only " + std::to_string(rep.kept.size()) +
                             " samples kept, need at least " + std::to_string(min_kept));
    }

    const MatrixXd kept = samples(Eigen::all, rep.kept);
    auto est = regtme_estimates(kept, cfg, schedule);
    out.estimate = std::move(est.thresholded);
    out.solution = std::move(est.solution);
    return out;
}

}  // namespace rshape
