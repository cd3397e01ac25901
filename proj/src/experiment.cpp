#include "rshape/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "rshape/io.hpp"
#include "rshape/metrics.hpp"
#include "rshape/outlier.hpp"
#include "rshape/regtme.hpp"
#include "rshape/threshold.hpp"

namespace rshape {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

constexpr const char* kVersion = "rshape 1.0.0";
constexpr const char* kRngName = "philox4x32-10";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint32_t grid_tag(Index n, Index p, std::uint32_t extra = 0) {
    return static_cast<std::uint32_t>(n) * 7919u + static_cast<std::uint32_t>(p) * 104729u +
           extra * 15485863u;
}

Index resolve_p(double ratio, Index n) {
    return static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
}

std::string error_status(const std::exception& e) {
    if (dynamic_cast<const ExistenceError*>(&e)) return "error:existence";
    if (dynamic_cast<const DegeneracyError*>(&e)) return "error:degenerate";
    if (dynamic_cast<const ScreeningError*>(&e)) return "error:screening";
    return "error:failure";
}

std::string solve_status(const TmeSolution<double>& sol) {
    if (!sol.guaranteed) return sol.converged ? "forced" : "forced-not-converged";
    return sol.converged ? "ok" : "not-converged";
}

DataSet draw(const ExperimentConfig& cfg, const EllipticalModel& model, Index n, const Rng& rng) {
    if (!cfg.symmetrize) return sample_elliptical(model, n, rng);
    DataSet raw = sample_elliptical(model, 2 * n, rng);
    DataSet out = pair_differences(raw.samples);
    out.meta = raw.meta;
    out.meta.model += "+pair-differences";
    return out;
}

RegConfig reg_config(const ExperimentConfig& cfg, double alpha) {
    RegConfig rc;
    rc.alpha = alpha;
    rc.tol = cfg.tol;
    rc.max_iter = cfg.max_iter;
    rc.force = cfg.force_alpha;
    return rc;
}

ThresholdSchedule schedule(const ExperimentConfig& cfg) {
    ThresholdSchedule s;
    s.multiplier = cfg.threshold_multiplier;
    return s;
}

struct TaskOutput {
    std::vector<ResultRow> rows;
    json report;  // null when absent
    std::vector<std::pair<std::string, MatrixXd>> matrices;
};

// Runs tasks [0, count) on `threads` workers; outputs keep task order.
ExperimentResult run_tasks(std::size_t count, int threads,
                           const std::function<TaskOutput(std::size_t)>& task) {
    std::vector<TaskOutput> outputs(count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) outputs[i] = task(i);
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    ExperimentResult result;
    for (auto& out : outputs) {
        result.rows.insert(result.rows.end(), std::make_move_iterator(out.rows.begin()),
                           std::make_move_iterator(out.rows.end()));
        if (!out.report.is_null()) result.reports.push_back(std::move(out.report));
        for (auto& m : out.matrices) result.matrices.push_back(std::move(m));
    }
    result.summary = summarize(result.rows);
    return result;
}

// Shortest round-trip form, for labels.
std::string short_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_alpha(const std::optional<double>& alpha) {
    return alpha ? io::format_double(*alpha) : std::string();
}

template <typename T>
json enum_list(const std::vector<T>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(to_string(x));
    return out;
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::EstimatorGrid: return "estimator-grid";
        case Experiment::AlphaSweep: return "alpha-sweep";
        case Experiment::AlphaVsN: return "alpha-vs-n";
        case Experiment::OutlierScreening: return "outlier-screening";
    }
    return "estimator-grid";
}

Experiment parse_experiment(std::string_view name) {
    if (name == "estimator-grid") return Experiment::EstimatorGrid;
    if (name == "alpha-sweep") return Experiment::AlphaSweep;
    if (name == "alpha-vs-n") return Experiment::AlphaVsN;
    if (name == "outlier-screening") return Experiment::OutlierScreening;
    throw std::invalid_argument("unknown experiment: " + std::string(name));
}

void ExperimentConfig::validate() const {
    const auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (realizations < 1) fail("realizations must be >= 1");
    if (n_values.empty()) fail("n_values must not be empty");
    for (Index n : n_values)
        if (n < 4) fail("every n must be >= 4");
    if (u_laws.empty()) fail("u_laws must not be empty");
    if (!alpha_auto && alpha.empty()) fail("alpha must not be empty");
    for (double a : alpha)
        if (!(a > 0.0)) fail("alpha values must be positive");
    if (!(R_target > 0.0 && R_target < 1.0)) fail("R_target must lie in (0, 1)");
    if (!(threshold_multiplier > 0.0)) fail("threshold_multiplier must be positive");
    if (!(tol > 0.0)) fail("tol must be positive");
    if (max_iter < 1) fail("max_iter must be >= 1");
    if (!(std::abs(rho) < 1.0)) fail("rho must lie in (-1, 1)");
    if (threads < 1) fail("threads must be >= 1");
    if (experiment == Experiment::AlphaVsN) {
        if (p < 2) fail("alpha-vs-n needs a fixed p >= 2");
    } else {
        if (p_over_n.empty()) fail("p_over_n must not be empty");
        for (double r : p_over_n)
            for (Index n : n_values)
                if (resolve_p(r, n) < 2) fail("every resolved p = round(ratio n) must be >= 2");
    }
    if (experiment == Experiment::OutlierScreening) {
        if (epsilons.empty()) fail("epsilons must not be empty");
        for (double e : epsilons)
            if (!(e >= 0.0 && e < 1.0)) fail("epsilons must lie in [0, 1)");
        if (outlier_models.empty()) fail("outlier_models must not be empty");
    }
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("p_over_n")) c.p_over_n = j.at("p_over_n").get<std::vector<double>>();
    if (j.contains("n_values")) c.n_values = j.at("n_values").get<std::vector<Index>>();
    if (j.contains("u_laws")) {
        c.u_laws.clear();
        for (const auto& s : j.at("u_laws")) c.u_laws.push_back(parse_u_law(s.get<std::string>()));
    }
    if (j.contains("alpha")) {
        const auto& a = j.at("alpha");
        if (a.is_string()) {
            if (a.get<std::string>() != "auto") throw std::invalid_argument("config: alpha must be a number, a list or \"auto\"");
            c.alpha_auto = true;
        } else if (a.is_array()) {
            c.alpha = a.get<std::vector<double>>();
        } else {
            c.alpha = {a.get<double>()};
        }
    }
    if (j.contains("alpha_auto")) c.alpha_auto = j.at("alpha_auto").get<bool>();
    if (j.contains("R_target")) c.R_target = j.at("R_target").get<double>();
    if (j.contains("threshold_multiplier")) c.threshold_multiplier = j.at("threshold_multiplier").get<double>();
    if (j.contains("realizations")) c.realizations = j.at("realizations").get<int>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("p")) c.p = j.at("p").get<Index>();
    if (j.contains("epsilons")) c.epsilons = j.at("epsilons").get<std::vector<double>>();
    if (j.contains("outlier_models")) {
        c.outlier_models.clear();
        for (const auto& s : j.at("outlier_models")) c.outlier_models.push_back(parse_outlier_spec(s.get<std::string>()));
    }
    if (j.contains("force_alpha")) c.force_alpha = j.at("force_alpha").get<bool>();
    if (j.contains("xi_mode")) c.xi_mode = parse_xi_mode(j.at("xi_mode").get<std::string>());
    if (j.contains("rho")) c.rho = j.at("rho").get<double>();
    if (j.contains("symmetrize")) c.symmetrize = j.at("symmetrize").get<bool>();
    if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("dump_matrices")) c.dump_matrices = j.at("dump_matrices").get<bool>();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["p_over_n"] = c.p_over_n;
    j["n_values"] = c.n_values;
    j["u_laws"] = enum_list(c.u_laws);
    if (c.alpha_auto) {
        j["alpha"] = "auto";
    } else {
        j["alpha"] = c.alpha;
    }
    j["R_target"] = c.R_target;
    j["threshold_multiplier"] = c.threshold_multiplier;
    j["realizations"] = c.realizations;
    j["master_seed"] = c.master_seed;
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["output_dir"] = c.output_dir;
    j["p"] = c.p;
    j["epsilons"] = c.epsilons;
    j["outlier_models"] = enum_list(c.outlier_models);
    j["force_alpha"] = c.force_alpha;
    j["xi_mode"] = to_string(c.xi_mode);
    j["rho"] = c.rho;
    j["symmetrize"] = c.symmetrize;
    j["record_timing"] = c.record_timing;
    j["threads"] = c.threads;
    j["dump_matrices"] = c.dump_matrices;
    return j;
}

ExperimentResult run_estimator_grid(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Point {
        Index n, p;
        ULaw u;
    };
    std::vector<Point> points;
    for (double ratio : cfg.p_over_n)
        for (Index n : cfg.n_values)
            for (ULaw u : cfg.u_laws) points.push_back({n, resolve_p(ratio, n), u});

    const auto R = static_cast<std::size_t>(cfg.realizations);
    const std::string exp_name = to_string(cfg.experiment);
    const ThresholdSchedule sched = schedule(cfg);

    return run_tasks(points.size() * R, cfg.threads, [&](std::size_t task) {
        const Point& pt = points[task / R];
        const int r = static_cast<int>(task % R);
        const Shape truth = ar_shape(pt.p, cfg.rho);
        const Rng rng = Rng(cfg.master_seed, static_cast<std::uint64_t>(r)).child(grid_tag(pt.n, pt.p));
        const DataSet data = draw(cfg, EllipticalModel(truth, cfg.xi_mode, pt.u), pt.n, rng);

        TaskOutput out;
        const auto row = [&](std::string estimator, std::optional<double> alpha) {
            ResultRow rr;
            rr.experiment = exp_name;
            rr.estimator = std::move(estimator);
            rr.n = pt.n;
            rr.p = pt.p;
            rr.u_law = to_string(pt.u);
            rr.alpha = alpha;
            rr.realization = r;
            rr.seed = cfg.master_seed;
            return rr;
        };
        const std::string stem = "n" + std::to_string(pt.n) + "_p" + std::to_string(pt.p) + "_" +
                                 to_string(pt.u) + "_r" + std::to_string(r);
        const bool dump = cfg.dump_matrices && r == 0;
        if (dump) out.matrices.emplace_back("truth_p" + std::to_string(pt.p), truth.matrix());

        for (const bool thresholded : {false, true}) {
            ResultRow rr = row(thresholded ? "th-SampCov" : "SampCov", std::nullopt);
            const auto start = Clock::now();
            try {
                const MatrixXd est = thresholded ? thresholded_sample_cov(data.samples, sched)
                                                 : scaled_sample_cov(data.samples);
                rr.wall_time_s = seconds_since(start);
                rr.rel_spec_error = relative_spectral_error(est, truth);
                if (dump) out.matrices.emplace_back(rr.estimator + "_" + stem, est);
            } catch (const std::exception& e) {
                rr.wall_time_s = seconds_since(start);
                rr.rel_spec_error = kNaN;
                rr.status = error_status(e);
            }
            out.rows.push_back(std::move(rr));
        }

        const double alpha = cfg.alpha_auto ? recommend_alpha(c_of_x(data.samples), cfg.R_target)
                                            : cfg.alpha.front();
        ResultRow reg = row("RegTME", alpha);
        ResultRow th = row("th-RegTME", alpha);
        const auto start = Clock::now();
        try {
            const auto est = regtme_estimates(data.samples, reg_config(cfg, alpha), sched);
            reg.wall_time_s = th.wall_time_s = seconds_since(start);
            reg.rel_spec_error = relative_spectral_error(est.unthresholded, truth);
            th.rel_spec_error = relative_spectral_error(est.thresholded, truth);
            reg.iterations = th.iterations = est.solution.iterations;
            reg.status = th.status = solve_status(est.solution);
            if (dump) {
                out.matrices.emplace_back("RegTME_" + stem, est.unthresholded);
                out.matrices.emplace_back("th-RegTME_" + stem, est.thresholded);
            }
        } catch (const std::exception& e) {
            reg.wall_time_s = th.wall_time_s = seconds_since(start);
            reg.rel_spec_error = th.rel_spec_error = kNaN;
            reg.status = th.status = error_status(e);
        }
        out.rows.push_back(std::move(reg));
        out.rows.push_back(std::move(th));
        return out;
    });
}

ExperimentResult run_alpha_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Point {
        Index n, p;
        ULaw u;
        std::optional<double> alpha;  // nullopt = auto
    };
    std::vector<std::pair<Index, Index>> sizes;
    if (cfg.experiment == Experiment::AlphaVsN) {
        for (Index n : cfg.n_values) sizes.emplace_back(n, cfg.p);
    } else {
        for (double ratio : cfg.p_over_n)
            for (Index n : cfg.n_values) sizes.emplace_back(n, resolve_p(ratio, n));
    }
    std::vector<Point> points;
    for (const auto& [n, p] : sizes)
        for (ULaw u : cfg.u_laws) {
            if (cfg.alpha_auto) {
                points.push_back({n, p, u, std::nullopt});
            } else {
                for (double a : cfg.alpha) points.push_back({n, p, u, a});
            }
        }

    const auto R = static_cast<std::size_t>(cfg.realizations);
    const std::string exp_name = to_string(cfg.experiment);
    const ThresholdSchedule sched = schedule(cfg);

    return run_tasks(points.size() * R, cfg.threads, [&](std::size_t task) {
        const Point& pt = points[task / R];
        const int r = static_cast<int>(task % R);
        const Shape truth = ar_shape(pt.p, cfg.rho);
        const Rng rng = Rng(cfg.master_seed, static_cast<std::uint64_t>(r)).child(grid_tag(pt.n, pt.p));
        const DataSet data = draw(cfg, EllipticalModel(truth, cfg.xi_mode, pt.u), pt.n, rng);
        const double alpha = pt.alpha ? *pt.alpha : recommend_alpha(c_of_x(data.samples), cfg.R_target);

        ResultRow rr;
        rr.experiment = exp_name;
        rr.estimator = "th-RegTME";
        rr.n = pt.n;
        rr.p = pt.p;
        rr.u_law = to_string(pt.u);
        rr.alpha = alpha;
        rr.realization = r;
        rr.seed = cfg.master_seed;
        const auto start = Clock::now();
        try {
            const auto est = regtme_estimates(data.samples, reg_config(cfg, alpha), sched);
            rr.wall_time_s = seconds_since(start);
            rr.rel_spec_error = relative_spectral_error(est.thresholded, truth);
            rr.iterations = est.solution.iterations;
            rr.status = solve_status(est.solution);
        } catch (const std::exception& e) {
            rr.wall_time_s = seconds_since(start);
            rr.rel_spec_error = kNaN;
            rr.status = error_status(e);
        }
        TaskOutput out;
        out.rows.push_back(std::move(rr));
        return out;
    });
}

ExperimentResult run_outlier_screening(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Point {
        Index n, p;
        ULaw u;
        std::size_t eps_index;
        OutlierSpec model;
    };
    std::vector<Point> points;
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e)
        for (OutlierSpec model : cfg.outlier_models)
            for (double ratio : cfg.p_over_n)
                for (Index n : cfg.n_values)
                    for (ULaw u : cfg.u_laws) points.push_back({n, resolve_p(ratio, n), u, e, model});

    const auto R = static_cast<std::size_t>(cfg.realizations);
    const ThresholdSchedule sched = schedule(cfg);
    const double alpha_fixed = cfg.alpha.empty() ? 10.0 : cfg.alpha.front();

    return run_tasks(points.size() * R, cfg.threads, [&](std::size_t task) {
        const Point& pt = points[task / R];
        const int r = static_cast<int>(task % R);
        const double eps = cfg.epsilons[pt.eps_index];
        std::ostringstream name;
        name << to_string(cfg.experiment) << ":eps=" << short_double(eps)
             << ":model=" << to_string(pt.model);
        const std::string exp_name = name.str();

        const Shape truth = ar_shape(pt.p, cfg.rho);
        const auto extra = static_cast<std::uint32_t>(2 * pt.eps_index + (pt.model == OutlierSpec::Spiked) + 1);
        const Rng rng = Rng(cfg.master_seed, static_cast<std::uint64_t>(r)).child(grid_tag(pt.n, pt.p, extra));
        const ContaminationSpec spec{eps, EllipticalModel(truth, cfg.xi_mode, pt.u), pt.model};
        const DataSet data = contaminate(spec, pt.n, rng);
        const double alpha = cfg.alpha_auto ? recommend_alpha(c_of_x(data.samples), cfg.R_target) : alpha_fixed;
        const RegConfig rc = reg_config(cfg, alpha);

        TaskOutput out;
        const auto row = [&](std::string estimator) {
            ResultRow rr;
            rr.experiment = exp_name;
            rr.estimator = std::move(estimator);
            rr.n = pt.n;
            rr.p = pt.p;
            rr.u_law = to_string(pt.u);
            rr.alpha = alpha;
            rr.realization = r;
            rr.seed = cfg.master_seed;
            return rr;
        };

        ResultRow before = row("th-RegTME");
        auto start = Clock::now();
        try {
            const auto est = regtme_estimates(data.samples, rc, sched);
            before.wall_time_s = seconds_since(start);
            before.rel_spec_error = relative_spectral_error(est.thresholded, truth);
            before.iterations = est.solution.iterations;
            before.status = solve_status(est.solution);
        } catch (const std::exception& e) {
            before.wall_time_s = seconds_since(start);
            before.rel_spec_error = kNaN;
            before.status = error_status(e);
        }
        out.rows.push_back(std::move(before));

        const auto& labels = *data.labels;
        json report;
        report["experiment"] = exp_name;
        report["epsilon"] = eps;
        report["outlier_model"] = to_string(pt.model);
        report["n"] = pt.n;
        report["p"] = pt.p;
        report["u_law"] = to_string(pt.u);
        report["alpha"] = alpha;
        report["realization"] = r;
        report["seed"] = cfg.master_seed;
        report["labels"] = std::vector<bool>(labels.begin(), labels.end());
        report["true_outliers"] = std::count(labels.begin(), labels.end(), true);

        ResultRow after = row("screened-th-RegTME");
        start = Clock::now();
        try {
            const auto screened = screen_and_reestimate(data.samples, rc, sched);
            after.wall_time_s = seconds_since(start);
            after.rel_spec_error = relative_spectral_error(screened.estimate, truth);
            after.iterations = screened.solution.iterations;
            after.status = solve_status(screened.solution);
            const auto& rep = screened.report;
            report["weights"] = std::vector<double>(rep.weights.begin(), rep.weights.end());
            report["w_in"] = rep.w_in;
            report["sigma_in"] = rep.sigma_in;
            report["bounds"] = {rep.bounds.first, rep.bounds.second};
            report["kept"] = rep.kept;
            Index dropped_outliers = 0;
            std::vector<bool> keep(labels.size(), false);
            for (Index i : rep.kept) keep[i] = true;
            for (std::size_t i = 0; i < labels.size(); ++i) dropped_outliers += labels[i] && !keep[i];
            report["removed_true_outliers"] = dropped_outliers;
        } catch (const std::exception& e) {
            after.wall_time_s = seconds_since(start);
            after.rel_spec_error = kNaN;
            after.status = error_status(e);
            report["error"] = e.what();
        }
        report["status"] = after.status;
        out.rows.push_back(std::move(after));
        out.report = std::move(report);
        return out;
    });
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case Experiment::EstimatorGrid: return run_estimator_grid(cfg);
        case Experiment::AlphaSweep:
        case Experiment::AlphaVsN: return run_alpha_sweep(cfg);
        case Experiment::OutlierScreening: return run_outlier_screening(cfg);
    }
    throw std::invalid_argument("run_experiment: unknown experiment");
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    std::vector<SummaryRow> out;
    std::vector<std::vector<double>> errors;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        const std::string alpha = format_alpha(r.alpha);
        const std::string key = r.experiment + '\x1f' + r.estimator + '\x1f' + std::to_string(r.n) + '\x1f' +
                                std::to_string(r.p) + '\x1f' + r.u_law + '\x1f' + alpha;
        auto [it, inserted] = index.try_emplace(key, out.size());
        if (inserted) {
            SummaryRow s;
            s.experiment = r.experiment;
            s.estimator = r.estimator;
            s.n = r.n;
            s.p = r.p;
            s.u_law = r.u_law;
            s.alpha = alpha;
            out.push_back(std::move(s));
            errors.emplace_back();
        }
        SummaryRow& s = out[it->second];
        if (r.status.rfind("error:", 0) == 0 || std::isnan(r.rel_spec_error)) {
            ++s.failures;
        } else {
            ++s.count;
            errors[it->second].push_back(r.rel_spec_error);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& e = errors[i];
        if (e.empty()) {
            out[i].lre = out[i].median_rel_error = kNaN;
            continue;
        }
        out[i].lre = lre(e);
        std::sort(e.begin(), e.end());
        const std::size_t m = e.size() / 2;
        out[i].median_rel_error = e.size() % 2 ? e[m] : 0.5 * (e[m - 1] + e[m]);
    }
    return out;
}

std::string format_row(const ResultRow& r, bool with_timing) {
    std::ostringstream os;
    os << r.experiment << ',' << r.estimator << ',' << r.n << ',' << r.p << ',' << r.u_law << ','
       << format_alpha(r.alpha) << ',' << r.realization << ',' << r.seed << ','
       << io::format_double(r.rel_spec_error) << ',' << r.iterations << ','
       << (with_timing ? io::format_double(r.wall_time_s) : std::string()) << ',' << r.status;
    return os.str();
}

void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result,
                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::string stem = to_string(cfg.experiment);
    const auto open = [&](const std::string& name) {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        return os;
    };

    {
        auto os = open(stem + ".csv");
        os << kRowHeader << '\n';
        for (const auto& r : result.rows) os << format_row(r, cfg.record_timing) << '\n';
    }
    {
        auto os = open(stem + "_summary.csv");
        os << "experiment,estimator,n,p,u_law,alpha,count,failures,lre,median_rel_error\n";
        for (const auto& s : result.summary) {
            os << s.experiment << ',' << s.estimator << ',' << s.n << ',' << s.p << ',' << s.u_law << ','
               << s.alpha << ',' << s.count << ',' << s.failures << ',' << io::format_double(s.lre) << ','
               << io::format_double(s.median_rel_error) << '\n';
        }
    }
    {
        auto os = open(stem + "_timing.csv");
        os << "experiment,estimator,n,p,u_law,alpha,realization,iterations,wall_time_s\n";
        for (const auto& r : result.rows) {
            os << r.experiment << ',' << r.estimator << ',' << r.n << ',' << r.p << ',' << r.u_law << ','
               << format_alpha(r.alpha) << ',' << r.realization << ',' << r.iterations << ','
               << io::format_double(r.wall_time_s) << '\n';
        }
    }
    if (!result.reports.empty()) {
        auto os = open(stem + "_reports.json");
        os << result.reports.dump(1) << '\n';
    }
    if (!result.matrices.empty()) {
        std::filesystem::create_directories(dir / "matrices");
        for (const auto& [name, m] : result.matrices) io::write_matrix_csv(dir / "matrices" / (name + ".csv"), m);
    }
    {
        json meta;
        meta["config"] = config_to_json(cfg);
        meta["rng"] = kRngName;
        meta["version"] = kVersion;
        meta["rows"] = result.rows.size();
        const std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        meta["timestamp"] = stamp;
        auto os = open(stem + "_meta.json");
        os << meta.dump(2) << '\n';
    }
}

}  // namespace rshape
