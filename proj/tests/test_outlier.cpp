#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "rshape/datagen.hpp"
#include "rshape/metrics.hpp"
#include "rshape/outlier.hpp"

using namespace rshape;

namespace {

std::vector<double> normal_draws(int n, double mean, double sd, std::uint64_t seed) {
    Rng rng(seed, 0);
    std::vector<double> v(n);
    for (double& x : v) x = mean + sd * rng.normal();
    return v;
}

RegConfig alpha10() {
    RegConfig cfg;
    cfg.alpha = 10.0;
    return cfg;
}

}  // namespace

TEST_CASE("kde shape and normalization") {
    std::vector<double> sym;
    for (double v : normal_draws(300, 0.0, 1.0, 1)) {
        sym.push_back(v);
        sym.push_back(-v);
    }
    const DensityCurve c = kde(sym);
    REQUIRE(c.grid.size() == kKdeGridSize);
    CHECK(c.grid[0] == doctest::Approx(-c.grid[kKdeGridSize - 1]).epsilon(1e-12));
    for (Index i = 0; i < kKdeGridSize; ++i) {
        CHECK(std::abs(c.density[i] - c.density[kKdeGridSize - 1 - i]) <= 1e-10);
    }
    CHECK((c.density.array() >= 0).all());
    CHECK(std::abs(oracle::trapezoid(c.grid, c.density) - 1.0) <= 0.02);
    CHECK(c.grid[0] == doctest::Approx(*std::min_element(sym.begin(), sym.end()) - 3 * c.bandwidth));

    // direct kernel sum at every grid point
    for (Index i = 0; i < kKdeGridSize; i += 37) {
        CHECK(c.density[i] == doctest::Approx(oracle::kde_at(sym, c.bandwidth, c.grid[i])).epsilon(1e-10));
    }
}

TEST_CASE("kde bandwidth follows the robust normal-reference rule") {
    const std::vector<double> v{0.0, 1.0, 2.0, 3.0, 10.0};
    // median 2, absolute deviations {2,1,0,1,8}, MAD 1
    const double expected = (1.0 / 0.6745) * std::pow(4.0 / 15.0, 0.2);
    CHECK(kde(v).bandwidth == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kde mode of a standard normal sample") {
    // The argmax of a flat-topped estimate is noisy; check it across draws.
    std::vector<double> modes;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const DensityCurve c = kde(normal_draws(10000, 0.0, 1.0, 2000 + seed));
        Index arg = 0;
        c.density.maxCoeff(&arg);
        modes.push_back(std::abs(c.grid[arg]));
    }
    CHECK(std::count_if(modes.begin(), modes.end(), [](double m) { return m < 0.1; }) >= 24);
    CHECK(oracle::median(modes) < 0.1);
    CHECK(*std::max_element(modes.begin(), modes.end()) < 0.3);
}

TEST_CASE("kde degeneracy") {
    CHECK_THROWS_AS(kde(std::vector<double>{0.5, 0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(kde(std::vector<double>{0.5}), std::invalid_argument);
    CHECK_THROWS_AS(kde(std::vector<double>{1.0, 1.0 + 1e-16, 1.0}), std::invalid_argument);
    CHECK_NOTHROW(kde(std::vector<double>{0.0, 1.0}));
}

TEST_CASE("inlier stats recover the spread of an exact Gaussian curve") {
    for (double sigma : {0.01, 0.5, 3.0}) {
        DensityCurve c;
        c.grid = VectorXd::LinSpaced(kKdeGridSize, 0.2 - 8 * sigma, 0.2 + 8 * sigma);
        c.density = ((c.grid.array() - 0.2) / sigma).square().unaryExpr([](double z) { return std::exp(-0.5 * z); }) /
                    (sigma * std::sqrt(2 * std::numbers::pi));
        for (double r : {0.3, 0.7, 0.9}) {
            const InlierStats s = estimate_inlier_stats(c, r);
            const double spacing = c.grid[1] - c.grid[0];
            CHECK(std::abs(s.w_in - 0.2) <= spacing);
            CHECK(s.sigma_in == doctest::Approx(sigma).epsilon(1e-3));
            CHECK(s.w_left < s.w_in);
            CHECK(s.w_right > s.w_in);
        }
    }
    DensityCurve c = kde(normal_draws(50, 0, 1, 3));
    CHECK_THROWS_AS(estimate_inlier_stats(c, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_inlier_stats(c, 0.0), std::invalid_argument);
}

TEST_CASE("inlier stats on sampled weights") {
    const InlierStats s = estimate_inlier_stats(normal_draws(10000, 1.0, 0.01, 4));
    CHECK(std::abs(s.w_in - 1.0) <= 0.005);
    CHECK(std::abs(s.sigma_in - 0.01) <= 0.005);

    // 80/20 mixture with well separated modes: the mode sits at the heavy one.
    auto mix = normal_draws(8000, 2.0, 0.1, 5);
    const auto minor = normal_draws(2000, 5.0, 0.1, 6);
    mix.insert(mix.end(), minor.begin(), minor.end());
    const InlierStats m = estimate_inlier_stats(mix);
    CHECK(std::abs(m.w_in - 2.0) < 0.1);
    CHECK(m.w_right < 3.0);
}

TEST_CASE("screening report structure") {
    const Index p = 100, n = 200;
    const EllipticalModel model(ar_shape(p, 0.7));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const DataSet d = sample_elliptical(model, n, Rng(700 + seed, 0));
        const auto& rep = screen_and_reestimate(d, alpha10(), {}).report;
        CHECK(std::is_sorted(rep.kept.begin(), rep.kept.end()));
        CHECK(std::adjacent_find(rep.kept.begin(), rep.kept.end()) == rep.kept.end());
        CHECK(rep.bounds.first <= rep.w_in);
        CHECK(rep.bounds.second >= rep.w_in);
        CHECK(rep.bounds.first == doctest::Approx(rep.w_in - 2 * rep.sigma_in));
        CHECK(rep.weights.size() == n);
        for (Index i = 0; i < n; ++i) {
            const bool inside = rep.weights[i] >= rep.bounds.first && rep.weights[i] <= rep.bounds.second;
            CHECK(inside == std::binary_search(rep.kept.begin(), rep.kept.end(), i));
        }
        CHECK(std::abs(oracle::trapezoid(rep.density.grid, rep.density.density) - 1.0) <= 0.02);
    }
}

TEST_CASE("screening clean data keeps nearly everything") {
    const Index p = 100, n = 200;
    const EllipticalModel model(ar_shape(p, 0.7));
    double kept = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DataSet d = sample_elliptical(model, n, Rng(700 + seed, 0));
        kept += double(screen_and_reestimate(d, alpha10(), {}).report.kept.size()) / double(n);
    }
    CHECK(kept / 10 >= 0.9);
}

TEST_CASE("screening helps under contamination") {
    const Index p = 100, n = 200;
    const Shape truth = ar_shape(p, 0.7);
    const ContaminationSpec spec{0.2, EllipticalModel(truth), OutlierSpec::Uniform15};
    std::vector<double> before, after;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DataSet d = contaminate(spec, n, Rng(800 + seed, 0));
        before.push_back(relative_spectral_error(estimate_shape_regtme(d.samples, alpha10(), {}), truth));
        after.push_back(relative_spectral_error(screen_and_reestimate(d, alpha10(), {}).estimate, truth));
    }
    CHECK(oracle::median(after) <= oracle::median(before));
}

TEST_CASE("kept set is invariant to per-sample scaling") {
    const DataSet d = sample_elliptical(EllipticalModel(ar_shape(30, 0.7)), 60, Rng(900, 0));
    Rng rng(901, 0);
    MatrixXd scaled = d.samples;
    for (Index i = 0; i < scaled.cols(); ++i) scaled.col(i) *= std::exp(4 * (rng.uniform() - 0.5));
    const auto a = screen_and_reestimate(d.samples, alpha10(), {});
    const auto b = screen_and_reestimate(scaled, alpha10(), {});
    CHECK(a.report.kept == b.report.kept);
    CHECK((a.estimate - b.estimate).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("screening errors") {
    // symmetric data: every weight is identical
    MatrixXd sym(2, 8);
    sym << oracle::four_points(), -oracle::four_points();
    CHECK_THROWS_AS(screen_and_reestimate(sym, alpha10(), {}), std::invalid_argument);

    // too few samples left for a meaningful re-estimate
    const DataSet small = sample_elliptical(EllipticalModel(ar_shape(4, 0.7)), 9, Rng(902, 0));
    CHECK_THROWS_AS(screen_and_reestimate(small, alpha10(), {}), ScreeningError);

    const DataSet d = sample_elliptical(EllipticalModel(ar_shape(40, 0.7)), 20, Rng(903, 0));
    RegConfig low;
    low.alpha = 0.5;
    CHECK_THROWS_AS(screen_and_reestimate(d, low, {}), ExistenceError);
}
