#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rshape/datagen.hpp"
#include "rshape/types.hpp"

namespace rshape {

enum class Experiment { EstimatorGrid, AlphaSweep, AlphaVsN, OutlierScreening };

std::string to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

/// Monte Carlo benchmark configuration. JSON keys match the field names.
struct ExperimentConfig {
    Experiment experiment = Experiment::EstimatorGrid;
    std::vector<double> p_over_n{0.5, 1.0, 2.0};
    std::vector<Index> n_values{100, 200};
    std::vector<ULaw> u_laws{ULaw::Constant, ULaw::Laplace, ULaw::Cauchy};
    /// Regularization values; ignored when alpha_auto is set.
    std::vector<double> alpha{10.0};
    /// Pick alpha per dataset with recommend_alpha(C(X), R_target).
    bool alpha_auto = false;
    double R_target = 0.5;
    double threshold_multiplier = 1.0;
    int realizations = 20;
    std::uint64_t master_seed = 20240601;
    double tol = 1e-12;
    int max_iter = 1400;
    std::string output_dir = "results";

    /// Fixed dimension for alpha-vs-n (overrides p_over_n there).
    Index p = 0;
    std::vector<double> epsilons{0.0, 0.1, 0.2, 0.3, 0.4};
    std::vector<OutlierSpec> outlier_models{OutlierSpec::Uniform15, OutlierSpec::Spiked};
    /// Solve below the existence bound alpha <= p/n - 1 instead of refusing.
    bool force_alpha = false;
    XiMode xi_mode = XiMode::StandardGaussian;
    double rho = 0.7;
    /// Draw 2n samples and use their pairwise differences.
    bool symmetrize = false;
    /// Fill the wall_time_s column of the data CSV (breaks byte-identity).
    bool record_timing = false;
    int threads = 1;
    /// Write truth and realization-0 estimates as matrix CSVs.
    bool dump_matrices = false;

    void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// One estimator on one realization at one grid point.
struct ResultRow {
    std::string experiment;
    std::string estimator;
    Index n = 0;
    Index p = 0;
    std::string u_law;
    std::optional<double> alpha;
    int realization = 0;
    std::uint64_t seed = 0;
    double rel_spec_error = 0.0;  // NaN when status is an error
    int iterations = 0;
    double wall_time_s = 0.0;
    std::string status = "ok";
};

/// Aggregate over realizations of one (experiment, estimator, n, p, u_law, alpha).
struct SummaryRow {
    std::string experiment;
    std::string estimator;
    Index n = 0;
    Index p = 0;
    std::string u_law;
    std::string alpha;
    int count = 0;
    int failures = 0;
    double lre = 0.0;
    double median_rel_error = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<SummaryRow> summary;
    /// Screening reports (outlier-screening only), one object per realization.
    nlohmann::json reports = nlohmann::json::array();
    /// Dumped matrices by file stem (dump_matrices only).
    std::vector<std::pair<std::string, MatrixXd>> matrices;
};

inline constexpr const char* kRowHeader =
    "experiment,estimator,n,p,u_law,alpha,realization,seed,rel_spec_error,iterations,wall_time_s,status";

/// Runs the configured experiment. Solver failures become tagged rows.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_estimator_grid(const ExperimentConfig& cfg);
ExperimentResult run_alpha_sweep(const ExperimentConfig& cfg);
ExperimentResult run_outlier_screening(const ExperimentConfig& cfg);

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
std::string format_row(const ResultRow& row, bool with_timing);

/// Writes <exp>.csv, <exp>_summary.csv, <exp>_timing.csv and <exp>_meta.json
/// (plus <exp>_reports.json and matrix dumps when present) under `dir`.
/// Everything except the timing and meta files is a deterministic function of the config.
void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result,
                      const std::filesystem::path& dir);

}  // namespace rshape
