#include "risloc/estimation.hpp"

#include "risloc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace risloc {

namespace {

constexpr double golden_ratio = 0.6180339887498949; // (sqrt(5) - 1) / 2

StationPose ms_pose_from_state(const StateVector& s) {
    StationPose pose;
    pose.centroid = Vec3(s[0], s[1], s[2]);
    pose.orientation = Vec3(s[3], s[4], s[5]);
    return pose;
}

double log_likelihood_resolved(const std::vector<Eigen::VectorXcd>& snapshots,
                               const ResolvedScenario& candidate, const PhaseProfile& profile) {
    const int n_sub = candidate.base.signal.subcarrier_count;
    if (snapshots.empty() || static_cast<int>(snapshots.size()) % n_sub != 0)
        throw std::invalid_argument(
            "log_likelihood: one snapshot per subcarrier and realization is required");
    const double sigma2 = candidate.base.noise_variance_w;
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("log_likelihood: noise variance must be positive");
    const int n_bs = candidate.n_bs();
    const int realizations = static_cast<int>(snapshots.size()) / n_sub;
    double ll = 0.0;
    for (int n = 1; n <= n_sub; ++n) {
        const Eigen::VectorXcd mu = response(candidate, profile, n).total();
        for (int g = 0; g < realizations; ++g) {
            const Eigen::VectorXcd& y = snapshots[g * n_sub + n - 1];
            if (y.size() != n_bs)
                throw std::invalid_argument("log_likelihood: snapshot length mismatch");
            ll += -(y - mu).squaredNorm() / sigma2 - n_bs * std::log(std::numbers::pi * sigma2);
        }
    }
    return ll;
}

} // namespace

void MleConfig::validate() const {
    for (int d = 0; d < 6; ++d) {
        if (grid_points[d] < 1)
            throw std::invalid_argument("mle: grid_points must be at least 1 per dimension");
        if (grid_points[d] > 1 && !(box_max[d] > box_min[d]))
            throw std::invalid_argument("mle: search box is empty along a searched dimension");
    }
    if (snapshots < 1)
        throw std::invalid_argument("mle: at least one snapshot is required");
    if (max_refine_iters < 0)
        throw std::invalid_argument("mle: max_refine_iters must be non-negative");
}

double log_likelihood(const std::vector<Eigen::VectorXcd>& snapshots, const StateVector& candidate,
                      const ResolvedScenario& s, const PhaseProfile& profile) {
    return log_likelihood_resolved(snapshots, with_ms_pose(s, ms_pose_from_state(candidate)),
                                   profile);
}

StateVector state_from_scenario(const ResolvedScenario& s) {
    StateVector v;
    v << s.base.ms_pose.centroid, s.base.ms_pose.orientation;
    return v;
}

std::vector<Eigen::VectorXcd> simulate_snapshots(const ResolvedScenario& s,
                                                 const PhaseProfile& profile, std::uint64_t seed,
                                                 int realizations) {
    if (realizations < 1)
        throw std::invalid_argument("simulate_snapshots: at least one realization is required");
    std::vector<Eigen::VectorXcd> out;
    const int n_sub = s.base.signal.subcarrier_count;
    out.reserve(static_cast<size_t>(n_sub) * realizations);
    for (int g = 0; g < realizations; ++g)
        for (int n = 1; n <= n_sub; ++n) {
            const Eigen::VectorXcd mu = response(s, profile, n).total();
            out.push_back(add_noise(mu, s.base.noise_variance_w,
                                    seed + static_cast<std::uint64_t>(g) * n_sub +
                                        static_cast<std::uint64_t>(n)));
        }
    return out;
}

double effective_snr_db(const ResolvedScenario& s, const PhaseProfile& profile) {
    const int n_sub = s.base.signal.subcarrier_count;
    double acc = 0.0;
    for (int n = 1; n <= n_sub; ++n)
        acc += response(s, profile, n).total().squaredNorm();
    const double mean_power = acc / (static_cast<double>(n_sub) * s.n_bs());
    return 10.0 * std::log10(mean_power / s.base.noise_variance_w);
}

StateVector mle_estimate(const std::vector<Eigen::VectorXcd>& snapshots, const ResolvedScenario& s,
                         const PhaseProfile& profile, const MleConfig& config,
                         MleDiagnostics* diagnostics) {
    config.validate();
    MleDiagnostics diag;

    const auto evaluate = [&](const StateVector& state) -> double {
        ++diag.evaluations;
        return log_likelihood_resolved(snapshots, with_ms_pose(s, ms_pose_from_state(state)),
                                       profile);
    };

    // coarse grid, row-major over dimensions; ties keep the lexicographically smallest point
    std::array<std::vector<double>, 6> grids;
    for (int d = 0; d < 6; ++d) {
        const int g = config.grid_points[d];
        grids[d].resize(g);
        if (g == 1) {
            grids[d][0] = config.box_min[d];
        } else {
            const double step = (config.box_max[d] - config.box_min[d]) / (g - 1);
            for (int i = 0; i < g; ++i)
                grids[d][i] = config.box_min[d] + i * step;
        }
    }

    StateVector best = StateVector::Zero();
    double best_ll = -std::numeric_limits<double>::infinity();
    std::array<int, 6> best_idx{};
    std::array<int, 6> idx{};
    bool done = false;
    while (!done) {
        StateVector candidate;
        for (int d = 0; d < 6; ++d)
            candidate[d] = grids[d][idx[d]];
        const double ll = evaluate(candidate);
        if (ll > best_ll) {
            best_ll = ll;
            best = candidate;
            best_idx = idx;
        }
        // advance the last dimension fastest
        done = true;
        for (int d = 5; d >= 0; --d) {
            if (++idx[d] < config.grid_points[d]) {
                done = false;
                break;
            }
            idx[d] = 0;
        }
    }

    for (int d = 0; d < 6; ++d) {
        if (config.grid_points[d] > 1 &&
            (best_idx[d] == 0 || best_idx[d] == config.grid_points[d] - 1)) {
            diag.boundary_hit = true;
            diag.warnings.push_back("coarse-grid maximum on the search-box boundary (dimension " +
                                    std::to_string(d) + ")");
            break;
        }
    }

    if (config.refinement == MleConfig::Refinement::local_descent) {
        std::array<double, 6> step{};
        for (int d = 0; d < 6; ++d) {
            if (config.grid_points[d] > 1)
                step[d] = (config.box_max[d] - config.box_min[d]) / (config.grid_points[d] - 1);
        }
        const bool wrap[6] = {false, false, false, true, true, true};

        for (int iter = 0; iter < config.max_refine_iters; ++iter) {
            double moved = 0.0;
            for (int d = 0; d < 6; ++d) {
                if (step[d] <= 0.0)
                    continue;
                // golden-section ascent of the 1D slice over [-h, h]
                double a = -step[d];
                double b = step[d];
                const auto slice = [&](double t) {
                    StateVector cand = best;
                    double v = best[d] + t;
                    if (wrap[d])
                        v = wrap_to_2pi(v);
                    else
                        v = std::clamp(v, config.box_min[d], config.box_max[d]);
                    cand[d] = v;
                    return evaluate(cand);
                };
                double x1 = b - golden_ratio * (b - a);
                double x2 = a + golden_ratio * (b - a);
                double f1 = slice(x1);
                double f2 = slice(x2);
                for (int it = 0; it < 40 && (b - a) > 1e-12 * std::max(1.0, std::abs(best[d]));
                     ++it) {
                    if (f1 < f2) {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + golden_ratio * (b - a);
                        f2 = slice(x2);
                    } else {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - golden_ratio * (b - a);
                        f1 = slice(x1);
                    }
                }
                const double t_best = 0.5 * (a + b);
                StateVector cand = best;
                double v = best[d] + t_best;
                if (wrap[d])
                    v = wrap_to_2pi(v);
                else
                    v = std::clamp(v, config.box_min[d], config.box_max[d]);
                cand[d] = v;
                const double ll = evaluate(cand);
                if (ll > best_ll) {
                    moved = std::max(moved, std::abs(t_best));
                    best_ll = ll;
                    best = cand;
                }
                step[d] = std::max(2.0 * std::abs(t_best), step[d] * 0.5);
            }
            if (moved == 0.0) {
                bool all_small = true;
                for (int d = 0; d < 6; ++d)
                    if (step[d] > 1e-10)
                        all_small = false;
                if (all_small)
                    break;
            }
        }

        // simplex polish over the searched dimensions; coordinate ascent alone stalls on
        // strongly correlated likelihoods short of the maximizer
        std::vector<int> free_dims;
        for (int d = 0; d < 6; ++d)
            if (config.grid_points[d] > 1)
                free_dims.push_back(d);
        if (!free_dims.empty()) {
            Eigen::VectorXd x0(free_dims.size());
            double scale = 0.0;
            for (size_t i = 0; i < free_dims.size(); ++i) {
                x0[i] = best[free_dims[i]];
                scale = std::max(scale, (config.box_max[free_dims[i]] -
                                         config.box_min[free_dims[i]]) /
                                            (config.grid_points[free_dims[i]] - 1));
            }
            const auto negative_ll = [&](const Eigen::VectorXd& x) {
                StateVector cand = best;
                for (size_t i = 0; i < free_dims.size(); ++i)
                    cand[free_dims[i]] = x[i];
                return -evaluate(cand);
            };
            const long polish_budget = 400 * static_cast<long>(free_dims.size());
            const detail::SimplexResult polished =
                detail::nelder_mead(negative_ll, x0, 0.25 * scale, polish_budget, 1e-13);
            if (-polished.value > best_ll) {
                best_ll = -polished.value;
                for (size_t i = 0; i < free_dims.size(); ++i) {
                    double v = polished.x[i];
                    if (wrap[free_dims[i]])
                        v = wrap_to_2pi(v);
                    best[free_dims[i]] = v;
                }
            }
        }
        for (int d = 0; d < 3; ++d) {
            if (config.grid_points[d] > 1 &&
                (best[d] <= config.box_min[d] || best[d] >= config.box_max[d])) {
                diag.boundary_hit = true;
                diag.warnings.push_back("refined maximum on or beyond the search-box boundary "
                                        "(dimension " + std::to_string(d) + ")");
                break;
            }
        }
    }

    diag.log_likelihood = best_ll;
    if (diagnostics)
        *diagnostics = diag;
    return best;
}

} // namespace risloc
