#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rshape/experiment.hpp"

using namespace rshape;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_grid() {
    ExperimentConfig cfg;
    cfg.p_over_n = {0.5};
    cfg.n_values = {40};
    cfg.realizations = 2;
    return cfg;
}

const ResultRow& find(const ExperimentResult& res, const std::string& estimator, const std::string& u, int r) {
    for (const auto& row : res.rows)
        if (row.estimator == estimator && row.u_law == u && row.realization == r) return row;
    throw std::runtime_error("row not found");
}

const SummaryRow& summary_of(const ExperimentResult& res, const std::string& estimator, const std::string& alpha = "") {
    for (const auto& s : res.summary)
        if (s.estimator == estimator && (alpha.empty() || s.alpha == alpha)) return s;
    throw std::runtime_error("summary not found");
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rshape_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("grid rows: one per estimator, realization and grid point") {
    const auto res = run_experiment(small_grid());
    CHECK(res.rows.size() == 3 * 2 * 4);
    for (const auto& row : res.rows) {
        CHECK(row.status == "ok");
        CHECK(row.rel_spec_error >= 0.0);
        CHECK(row.p == 20);
        CHECK(row.alpha.has_value() == (row.estimator.find("RegTME") != std::string::npos));
    }
    CHECK(res.summary.size() == 3 * 4);
    for (const auto& s : res.summary) CHECK(s.count == 2);
}

TEST_CASE("regularized errors do not depend on the u-law") {
    const auto res = run_experiment(small_grid());
    for (const char* est : {"RegTME", "th-RegTME"}) {
        for (int r = 0; r < 2; ++r) {
            const double base = find(res, est, "constant", r).rel_spec_error;
            CHECK(std::abs(find(res, est, "laplace", r).rel_spec_error - base) <= 1e-10);
            CHECK(std::abs(find(res, est, "cauchy", r).rel_spec_error - base) <= 1e-10);
        }
    }
    // the sample covariance does see the u-law
    CHECK(find(res, "SampCov", "cauchy", 0).rel_spec_error != find(res, "SampCov", "constant", 0).rel_spec_error);
}

TEST_CASE("reruns are byte-identical and realizations are independent") {
    ExperimentConfig cfg = small_grid();
    cfg.realizations = 1;
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    write_experiment(cfg, run_experiment(cfg), a);
    write_experiment(cfg, run_experiment(cfg), b);
    for (const char* f : {"estimator-grid.csv", "estimator-grid_summary.csv"}) {
        CHECK(!slurp(a / f).empty());
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "estimator-grid.csv").rfind(std::string(kRowHeader) + "\n", 0) == 0);
    const auto meta = nlohmann::json::parse(slurp(a / "estimator-grid_meta.json"));
    CHECK(meta.at("rng") == "philox4x32-10");
    CHECK(meta.contains("timestamp"));
    CHECK(config_from_json(meta.at("config")).n_values == cfg.n_values);

    // realization 0 of a longer run matches the single-realization run
    ExperimentConfig longer = cfg;
    longer.realizations = 3;
    const auto one = run_experiment(cfg);
    const auto three = run_experiment(longer);
    for (const auto& row : one.rows) {
        CHECK(format_row(row, false) == format_row(find(three, row.estimator, row.u_law, 0), false));
    }

    // worker count does not change the output
    ExperimentConfig threaded = longer;
    threaded.threads = 3;
    const auto par = run_experiment(threaded);
    REQUIRE(par.rows.size() == three.rows.size());
    for (std::size_t i = 0; i < par.rows.size(); ++i)
        CHECK(format_row(par.rows[i], false) == format_row(three.rows[i], false));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("timing is kept out of the data file unless requested") {
    ExperimentConfig cfg = small_grid();
    cfg.realizations = 1;
    const auto res = run_experiment(cfg);
    const std::string line = format_row(res.rows.front(), false);
    CHECK(line.find(",,ok") != std::string::npos);
    CHECK(format_row(res.rows.front(), true).find(",,ok") == std::string::npos);

    cfg.record_timing = true;
    const fs::path dir = scratch("timing");
    write_experiment(cfg, res, dir);
    CHECK(fs::exists(dir / "estimator-grid_timing.csv"));
    CHECK(slurp(dir / "estimator-grid.csv").find(",,ok") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("thresholding helps on sparse Gaussian data") {
    ExperimentConfig cfg;
    cfg.p_over_n = {0.5};
    cfg.n_values = {200};
    cfg.u_laws = {ULaw::Constant};
    const auto res = run_experiment(cfg);
    CHECK(summary_of(res, "th-RegTME").lre < summary_of(res, "RegTME").lre);
}

TEST_CASE("alpha sweep") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::AlphaSweep;
    cfg.p_over_n = {0.5};
    cfg.n_values = {200};
    cfg.u_laws = {ULaw::Constant};
    cfg.alpha = {2, 5, 10, 20};
    const auto res = run_experiment(cfg);
    CHECK(res.rows.size() == 4 * 20);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : res.summary) {
        CHECK(s.estimator == "th-RegTME");
        lo = std::min(lo, s.lre);
        hi = std::max(hi, s.lre);
    }
    CHECK(hi - lo <= 0.1);
}

TEST_CASE("alpha sweep: runtime grows near the existence bound") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::AlphaSweep;
    cfg.p_over_n = {2.0};
    cfg.n_values = {50};
    cfg.u_laws = {ULaw::Constant};
    cfg.alpha = {1.05, 10};
    cfg.realizations = 5;
    const auto res = run_experiment(cfg);
    double t_near = 0, t_far = 0;
    int it_near = 0, it_far = 0;
    for (const auto& row : res.rows) {
        CHECK(row.status == "ok");
        (*row.alpha < 2 ? t_near : t_far) += row.wall_time_s;
        (*row.alpha < 2 ? it_near : it_far) += row.iterations;
    }
    CHECK(t_near > t_far);
    CHECK(it_near > it_far);

    // below the bound: refused by default, tagged when forced
    cfg.alpha = {0.5};
    cfg.realizations = 1;
    const auto refused = run_experiment(cfg);
    CHECK(refused.rows.front().status == "error:existence");
    CHECK(std::isnan(refused.rows.front().rel_spec_error));
    CHECK(refused.summary.front().failures == 1);
    cfg.force_alpha = true;
    const auto forced = run_experiment(cfg);
    CHECK(forced.rows.front().status.rfind("forced", 0) == 0);
}

TEST_CASE("single-alpha sweep rows share the grid row format") {
    ExperimentConfig cfg = small_grid();
    cfg.experiment = Experiment::AlphaSweep;
    cfg.u_laws = {ULaw::Constant};
    cfg.realizations = 1;
    const auto sweep = run_experiment(cfg);
    REQUIRE(sweep.rows.size() == 1);
    cfg.experiment = Experiment::EstimatorGrid;
    const auto grid = run_experiment(cfg);
    const ResultRow& g = find(grid, "th-RegTME", "constant", 0);
    const ResultRow& s = sweep.rows.front();
    CHECK(s.rel_spec_error == g.rel_spec_error);
    CHECK(s.iterations == g.iterations);
    auto strip = [](std::string line) { return line.substr(line.find(',')); };
    CHECK(strip(format_row(s, false)) == strip(format_row(g, false)));

    ExperimentConfig vs_n = cfg;
    vs_n.experiment = Experiment::AlphaVsN;
    vs_n.p = 30;
    vs_n.n_values = {20, 40};
    const auto r = run_experiment(vs_n);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].p == 30);
    CHECK(r.rows[1].p == 30);
}

TEST_CASE("alpha auto picks a per-dataset value") {
    ExperimentConfig cfg = small_grid();
    cfg.alpha_auto = true;
    cfg.u_laws = {ULaw::Constant};
    const auto res = run_experiment(cfg);
    const double a0 = *find(res, "RegTME", "constant", 0).alpha;
    const double a1 = *find(res, "RegTME", "constant", 1).alpha;
    CHECK(a0 > 0.5 * (3 + 2) - 1);  // C(X) >= p/n
    CHECK(a0 != a1);
}

TEST_CASE("outlier screening reports") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::OutlierScreening;
    cfg.p_over_n = {0.5};
    cfg.n_values = {60};
    cfg.u_laws = {ULaw::Constant};
    cfg.epsilons = {0.0, 0.2};
    cfg.outlier_models = {OutlierSpec::Uniform15};
    cfg.realizations = 2;
    const auto res = run_experiment(cfg);
    CHECK(res.rows.size() == 2 * 2 * 2);
    REQUIRE(res.reports.size() == 4);
    for (const auto& rep : res.reports) {
        CHECK(rep.at("labels").size() == 60);
        const double eps = rep.at("epsilon").get<double>();
        CHECK(rep.at("true_outliers").get<long>() == std::lround(eps * 60));
        if (rep.at("status") == "ok") {
            CHECK(rep.at("weights").size() == 60);
            CHECK(rep.at("bounds").size() == 2);
        }
    }
    CHECK(res.rows[0].experiment == "outlier-screening:eps=0:model=uniform15");
    CHECK(res.rows[0].estimator == "th-RegTME");
    CHECK(res.rows[1].estimator == "screened-th-RegTME");
    const fs::path dir = scratch("outlier");
    write_experiment(cfg, res, dir);
    CHECK(nlohmann::json::parse(slurp(dir / "outlier-screening_reports.json")).size() == 4);
    fs::remove_all(dir);
}

TEST_CASE("matrix dumps") {
    ExperimentConfig cfg = small_grid();
    cfg.u_laws = {ULaw::Constant};
    cfg.dump_matrices = true;
    const auto res = run_experiment(cfg);
    CHECK(res.matrices.size() == 5);  // truth and four estimates of realization 0
    const fs::path dir = scratch("dump");
    write_experiment(cfg, res, dir);
    CHECK(fs::exists(dir / "matrices" / "truth_p20.csv"));
    fs::remove_all(dir);
}

TEST_CASE("config parsing and validation") {
    const auto j = nlohmann::json::parse(R"({
        "experiment": "alpha-sweep", "p_over_n": [1.0], "n_values": [50, 100],
        "u_laws": ["constant", "cauchy"], "alpha": 4, "realizations": 3,
        "master_seed": 7, "threshold_multiplier": 1.5, "xi_mode": "sphere"})");
    const ExperimentConfig cfg = config_from_json(j);
    CHECK(cfg.experiment == Experiment::AlphaSweep);
    CHECK(cfg.alpha == std::vector<double>{4.0});
    CHECK(cfg.u_laws.size() == 2);
    CHECK(cfg.master_seed == 7);
    CHECK(cfg.xi_mode == XiMode::SphereUniform);
    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(config_from_json(nlohmann::json::parse(R"({"alpha": "auto"})")).alpha_auto);
    CHECK(config_from_json(nlohmann::json::parse(R"({"alpha": [1, 2]})")).alpha.size() == 2);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"alpha": "big"})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"experiment": "nope"})")), std::invalid_argument);

    const auto invalid = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    invalid([](ExperimentConfig& c) { c.realizations = 0; });
    invalid([](ExperimentConfig& c) { c.n_values = {3}; });
    invalid([](ExperimentConfig& c) { c.p_over_n = {0.01}; });
    invalid([](ExperimentConfig& c) { c.alpha = {-1}; });
    invalid([](ExperimentConfig& c) { c.R_target = 1; });
    invalid([](ExperimentConfig& c) { c.experiment = Experiment::AlphaVsN; });
    invalid([](ExperimentConfig& c) {
        c.experiment = Experiment::OutlierScreening;
        c.epsilons = {1.0};
    });
    CHECK_NOTHROW(ExperimentConfig{}.validate());
}
