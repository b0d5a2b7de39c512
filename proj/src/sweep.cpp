#include "risloc/sweep.hpp"

#include "risloc/estimation.hpp"
#include "risloc/version.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace risloc {

namespace {

struct PointOutcome {
    std::vector<double> coords;
    std::string strategy;
    BoundReport report;
    bool ok{false};
    std::string error;
};

std::vector<std::vector<double>> expand_grid(const std::vector<SweepAxisConfig>& axes) {
    std::vector<std::vector<double>> points;
    if (axes.empty())
        throw std::invalid_argument("sweep: at least one axis is required");
    std::vector<size_t> idx(axes.size(), 0);
    bool done = false;
    while (!done) {
        std::vector<double> coords(axes.size());
        for (size_t a = 0; a < axes.size(); ++a)
            coords[a] = axes[a].values[idx[a]];
        points.push_back(std::move(coords));
        done = true;
        for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
            if (++idx[a] < axes[a].values.size()) {
                done = false;
                break;
            }
            idx[a] = 0;
        }
    }
    return points;
}

OptimizeOptions optimize_options_from(const PhaseConfig& phase) {
    OptimizeOptions opt;
    opt.max_evals_per_dim = phase.max_evals_per_dim;
    opt.restart_seed = phase.seed;
    return opt;
}

PointOutcome evaluate_point(const ScenarioConfig& base, const std::vector<double>& coords,
                            PhaseStrategy strategy) {
    PointOutcome out;
    out.coords = coords;
    out.strategy = to_string(strategy);
    try {
        ScenarioConfig local = base;
        for (size_t a = 0; a < base.sweep.size(); ++a)
            apply_sweep_value(local, base.sweep[a].axis, coords[a]);
        const ResolvedScenario rs = resolve_scenario(local.to_scenario());
        const PhaseProfile profile =
            make_profile(rs, strategy, local.phase.seed, local.phase.quantization_levels,
                         local.phase.objective, optimize_options_from(local.phase));
        const BoundMode mode = local.resolved_mode();
        const FimOutput fim = assemble_fim(rs, profile, mode);
        out.report = crlb(fim, local.bounds.crlb_options(local.subset_mask_for(mode)));
        const GdopPair g = gdop(out.report, rs);
        out.report.gdop_position = g.position;
        out.report.gdop_orientation = g.orientation;
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

void run_parallel(int threads, size_t count, const std::function<void(size_t)>& work) {
    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, count == 0 ? 1 : static_cast<unsigned>(count));
    if (n_threads <= 1) {
        for (size_t i = 0; i < count; ++i)
            work(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t)
        pool.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

std::string csv_from_outcomes(const ScenarioConfig& config, BoundMode mode,
                              const std::vector<PointOutcome>& outcomes,
                              std::vector<std::string>& warnings) {
    const auto& sigma_labels =
        mode == BoundMode::two_stage ? two_stage_parameter_labels() : direct_parameter_labels();
    std::ostringstream csv;
    for (const auto& axis : config.sweep)
        csv << axis.axis << ",";
    csv << "strategy,peb_m,oeb_rad,oeb_deg,gdop_position,gdop_orientation";
    for (const auto& label : sigma_labels)
        csv << ",sigma_" << label;
    csv << ",condition_number,error\n";

    for (const auto& o : outcomes) {
        for (double c : o.coords)
            csv << format_number(c) << ",";
        csv << o.strategy << ",";
        if (o.ok) {
            csv << format_number(o.report.peb_m) << "," << format_number(o.report.oeb_rad) << ","
                << format_number(o.report.oeb_deg()) << "," << format_number(o.report.gdop_position)
                << "," << format_number(o.report.gdop_orientation);
            for (const auto& label : sigma_labels) {
                csv << ",";
                for (const auto& [name, sigma] : o.report.per_parameter_sigmas)
                    if (name == label) {
                        csv << format_number(sigma);
                        break;
                    }
            }
            csv << "," << format_number(o.report.condition_number) << ",";
            for (const auto& w : o.report.warnings)
                warnings.push_back(w);
        } else {
            csv << ",,,,";
            for (size_t i = 0; i < sigma_labels.size(); ++i)
                csv << ",";
            csv << ",," << o.error;
            warnings.push_back("point failed: " + o.error);
        }
        csv << "\n";
    }
    return csv.str();
}

SweepResult sweep_impl(const ScenarioConfig& config, const std::vector<PhaseStrategy>& strategies,
                       const std::string& command) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    if (strategies.empty())
        throw std::invalid_argument("sweep: at least one strategy is required");
    const auto points = expand_grid(config.sweep);

    std::vector<PointOutcome> outcomes(points.size() * strategies.size());
    run_parallel(config.threads, outcomes.size(), [&](size_t i) {
        const size_t point_idx = i / strategies.size();
        const size_t strat_idx = i % strategies.size();
        outcomes[i] = evaluate_point(config, points[point_idx], strategies[strat_idx]);
    });

    SweepResult result;
    result.manifest.config_hash = config.config_hash();
    result.manifest.code_version = version_string;
    result.manifest.command = command;
    result.csv = csv_from_outcomes(config, config.resolved_mode(), outcomes,
                                   result.manifest.warnings);
    result.manifest.rows = static_cast<int>(outcomes.size());
    result.manifest.csv_hash = fnv1a_hash(result.csv);
    result.manifest.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

double wrapped_angle_error(double est, double truth) {
    double d = std::fmod(est - truth, 2.0 * std::numbers::pi);
    if (d > std::numbers::pi)
        d -= 2.0 * std::numbers::pi;
    if (d < -std::numbers::pi)
        d += 2.0 * std::numbers::pi;
    return d;
}

} // namespace

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", value);
    return buf;
}

std::string RunManifest::to_text() const {
    std::ostringstream os;
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx", static_cast<unsigned long long>(config_hash));
    os << "config_hash = " << hash_buf << "\n";
    os << "code_version = " << code_version << "\n";
    os << "command = " << command << "\n";
    os << "rows = " << rows << "\n";
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx", static_cast<unsigned long long>(csv_hash));
    os << "csv_hash = " << hash_buf << "\n";
    os << "wall_ms = " << wall_ms << "\n";
    for (const auto& [key, value] : extra)
        os << key << " = " << value << "\n";
    os << "warnings = " << warnings.size() << "\n";
    for (const auto& w : warnings)
        os << "warning = " << w << "\n";
    return os.str();
}

SweepResult run_sweep(const ScenarioConfig& config) {
    return sweep_impl(config, {config.phase.strategy}, "run");
}

SweepResult compare_strategies(const ScenarioConfig& config,
                               const std::vector<PhaseStrategy>& strategies) {
    return sweep_impl(config, strategies, "compare");
}

MleRunResult run_mle(const ScenarioConfig& config, int trials_override) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    const int trials = trials_override > 0 ? trials_override : config.mle.trials;

    ScenarioConfig local = config;
    if (!local.sweep.empty()) {
        // evaluate at the first sweep point when a sweep is present
        for (size_t a = 0; a < local.sweep.size(); ++a)
            apply_sweep_value(local, local.sweep[a].axis, local.sweep[a].values.front());
    }
    const ResolvedScenario rs = resolve_scenario(local.to_scenario());
    const PhaseProfile profile =
        make_profile(rs, local.phase.strategy, local.phase.seed, local.phase.quantization_levels,
                     local.phase.objective, optimize_options_from(local.phase));

    // bound with the frozen dimensions treated as known
    FimOutput fim = assemble_fim(rs, profile, BoundMode::direct);
    // independent noise realizations add their information
    fim.state_fim.matrix *= static_cast<double>(local.mle.snapshots);
    const std::vector<bool> estimate_mask(local.mle.estimate.begin(), local.mle.estimate.end());
    const BoundReport bound = crlb(fim, local.bounds.crlb_options(estimate_mask));

    const StateVector truth = state_from_scenario(rs);
    MleConfig mle_cfg;
    for (int d = 0; d < 6; ++d) {
        if (local.mle.estimate[d]) {
            mle_cfg.box_min[d] = truth[d] - local.mle.box_half_width[d];
            mle_cfg.box_max[d] = truth[d] + local.mle.box_half_width[d];
            mle_cfg.grid_points[d] = std::max(2, local.mle.grid_points[d]);
        } else {
            mle_cfg.box_min[d] = truth[d];
            mle_cfg.box_max[d] = truth[d];
            mle_cfg.grid_points[d] = 1;
        }
    }
    mle_cfg.refinement = local.mle.refinement == "none" ? MleConfig::Refinement::none
                                                        : MleConfig::Refinement::local_descent;
    mle_cfg.max_refine_iters = local.mle.max_refine_iters;
    mle_cfg.snapshots = local.mle.snapshots;

    struct TrialRow {
        StateVector error;
        double ll;
        long evals;
        bool boundary;
    };
    std::vector<TrialRow> rows(trials);
    run_parallel(local.threads, rows.size(), [&](size_t t) {
        const std::uint64_t trial_seed = local.seed + 7919ull * (t + 1);
        const auto snapshots = simulate_snapshots(rs, profile, trial_seed, local.mle.snapshots);
        MleDiagnostics diag;
        const StateVector est = mle_estimate(snapshots, rs, profile, mle_cfg, &diag);
        TrialRow row;
        for (int d = 0; d < 3; ++d)
            row.error[d] = est[d] - truth[d];
        for (int d = 3; d < 6; ++d)
            row.error[d] = wrapped_angle_error(est[d], truth[d]);
        row.ll = diag.log_likelihood;
        row.evals = diag.evaluations;
        row.boundary = diag.boundary_hit;
        rows[t] = row;
    });

    MleRunResult result;
    result.trials = trials;
    double pos_sq = 0.0;
    double orient_sq = 0.0;
    std::ostringstream csv;
    csv << "trial,err_x,err_y,err_z,err_pos,err_alpha,err_beta,err_gamma,log_likelihood,"
           "evaluations,boundary_hit\n";
    for (int t = 0; t < trials; ++t) {
        const TrialRow& r = rows[t];
        const double pos_err = r.error.head<3>().norm();
        pos_sq += pos_err * pos_err;
        orient_sq += r.error.tail<3>().squaredNorm();
        csv << t << "," << format_number(r.error[0]) << "," << format_number(r.error[1]) << ","
            << format_number(r.error[2]) << "," << format_number(pos_err) << ","
            << format_number(r.error[3]) << "," << format_number(r.error[4]) << ","
            << format_number(r.error[5]) << "," << format_number(r.ll) << "," << r.evals << ","
            << (r.boundary ? 1 : 0) << "\n";
    }
    result.csv = csv.str();
    result.rmse_position_m = std::sqrt(pos_sq / trials);
    result.rmse_orientation_rad = std::sqrt(orient_sq / trials);
    result.peb_m = bound.peb_m;
    result.oeb_rad = bound.oeb_rad;
    result.effective_snr_db = effective_snr_db(rs, profile);

    result.manifest.config_hash = local.config_hash();
    result.manifest.code_version = version_string;
    result.manifest.command = "mle";
    result.manifest.rows = trials;
    result.manifest.csv_hash = fnv1a_hash(result.csv);
    result.manifest.extra.emplace_back("rmse_position_m", format_number(result.rmse_position_m));
    result.manifest.extra.emplace_back("rmse_orientation_rad",
                                       format_number(result.rmse_orientation_rad));
    result.manifest.extra.emplace_back("peb_m", format_number(result.peb_m));
    result.manifest.extra.emplace_back("oeb_rad", format_number(result.oeb_rad));
    result.manifest.extra.emplace_back("effective_snr_db",
                                       format_number(result.effective_snr_db));
    result.manifest.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace risloc
