#include "risloc/phase_design.hpp"

#include "risloc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace risloc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Eigen::VectorXd wrapped(const Eigen::VectorXd& phases) {
    Eigen::VectorXd out(phases.size());
    for (int i = 0; i < phases.size(); ++i)
        out[i] = wrap_to_2pi(phases[i]);
    return out;
}

} // namespace

double wrap_to_2pi(double angle) {
    double a = std::fmod(angle, two_pi);
    if (a < 0.0)
        a += two_pi;
    return a;
}

std::string to_string(PhaseStrategy s) {
    switch (s) {
    case PhaseStrategy::mirror:
        return "mirror";
    case PhaseStrategy::random:
        return "random";
    case PhaseStrategy::proposed:
        return "proposed";
    case PhaseStrategy::optimized_crlb:
        return "optimized_crlb";
    case PhaseStrategy::quantized:
        return "quantized";
    }
    return "unknown";
}

PhaseStrategy phase_strategy_from_string(const std::string& name) {
    if (name == "mirror")
        return PhaseStrategy::mirror;
    if (name == "random")
        return PhaseStrategy::random;
    if (name == "proposed")
        return PhaseStrategy::proposed;
    if (name == "optimized_crlb" || name == "optimized")
        return PhaseStrategy::optimized_crlb;
    if (name == "quantized")
        return PhaseStrategy::quantized;
    throw std::invalid_argument("unknown phase strategy: " + name);
}

std::string to_string(PhaseObjective o) {
    return o == PhaseObjective::peb ? "peb" : "oeb";
}

PhaseObjective phase_objective_from_string(const std::string& name) {
    if (name == "peb")
        return PhaseObjective::peb;
    if (name == "oeb")
        return PhaseObjective::oeb;
    throw std::invalid_argument("unknown phase objective: " + name);
}

PhaseProfile mirror_profile(int n_ris) {
    if (n_ris < 1)
        throw std::invalid_argument("mirror_profile: element count must be positive");
    PhaseProfile p;
    p.strategy = PhaseStrategy::mirror;
    p.phases = Eigen::VectorXd::Zero(n_ris);
    return p;
}

PhaseProfile random_profile(int n_ris, std::uint64_t seed) {
    if (n_ris < 1)
        throw std::invalid_argument("random_profile: element count must be positive");
    PhaseProfile p;
    p.strategy = PhaseStrategy::random;
    p.seed = seed;
    p.phases.resize(n_ris);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, two_pi);
    for (int r = 0; r < n_ris; ++r)
        p.phases[r] = uniform(rng);
    return p;
}

PhaseProfile proposed_profile(const ResolvedScenario& s) {
    const int n_bs = s.n_bs();
    const int n_ris = s.n_ris();
    const int n_ms = s.n_ms();
    const double f0 = s.base.signal.carrier_hz;
    PhaseProfile p;
    p.strategy = PhaseStrategy::proposed;
    p.phases.resize(n_ris);
    for (int k = 0; k < n_ris; ++k) {
        double acc = 0.0;
        for (int b = 0; b < n_bs; ++b)
            for (int m = 0; m < n_ms; ++m)
                acc += (s.dist_br(b, k) + s.dist_rm(k, m) - s.dist_bm(b, m)) / speed_of_light;
        p.phases[k] = wrap_to_2pi(two_pi * f0 * acc / (n_ms * n_bs));
    }
    return p;
}

PhaseProfile quantize(const PhaseProfile& profile, int levels) {
    if (levels < 2)
        throw std::invalid_argument("quantize: at least two levels are required");
    PhaseProfile q = profile;
    q.strategy = PhaseStrategy::quantized;
    q.quantization_levels = levels;
    const double step = two_pi / levels;
    for (int r = 0; r < q.phases.size(); ++r) {
        const double t = wrap_to_2pi(q.phases[r]) / step;
        // nearest codebook index with exact halves resolved toward the lower index
        long k = static_cast<long>(std::ceil(t - 0.5));
        k = ((k % levels) + levels) % levels;
        q.phases[r] = k * step;
    }
    return q;
}

Eigen::VectorXd convexified_phases_raw(const ResolvedScenario& s) {
    const int n_bs = s.n_bs();
    const int n_ris = s.n_ris();
    const int n_ms = s.n_ms();
    const double f0 = s.base.signal.carrier_hz;

    // per-element sums of (tau_bk + tau_km) over (b, m)
    Eigen::VectorXd sums(n_ris);
    for (int k = 0; k < n_ris; ++k) {
        double acc = 0.0;
        for (int b = 0; b < n_bs; ++b)
            for (int m = 0; m < n_ms; ++m)
                acc += (s.dist_br(b, k) + s.dist_rm(k, m)) / speed_of_light;
        sums[k] = acc;
    }
    const double mean = sums.mean();
    return (two_pi * f0 / (n_ms * n_bs)) * (sums.array() - mean).matrix();
}

double alignment_phase(const ResolvedScenario& s) {
    const int n_bs = s.n_bs();
    const int n_ris = s.n_ris();
    const int n_ms = s.n_ms();
    const double f0 = s.base.signal.carrier_hz;
    double acc = 0.0;
    for (int b = 0; b < n_bs; ++b)
        for (int m = 0; m < n_ms; ++m)
            for (int r = 0; r < n_ris; ++r)
                acc += (-s.dist_bm(b, m) + s.dist_br(b, r) + s.dist_rm(r, m)) / speed_of_light;
    return two_pi * f0 * acc / (n_ris * n_ms * n_bs);
}

double phase_spread_objective(const ResolvedScenario& s, const Eigen::VectorXd& theta) {
    const int n_bs = s.n_bs();
    const int n_ris = s.n_ris();
    const int n_ms = s.n_ms();
    if (theta.size() != n_ris)
        throw std::invalid_argument("phase_spread_objective: phase vector length mismatch");
    const double f0 = s.base.signal.carrier_hz;
    const SignalConfig& sig = s.base.signal;

    double mean = 0.0;
    for (int r = 0; r < n_ris; ++r)
        for (int b = 0; b < n_bs; ++b)
            for (int m = 0; m < n_ms; ++m) {
                const double beta = sig.beam_phases.empty() ? 0.0 : sig.beam_phases[m];
                mean += theta[r] + beta -
                        two_pi * f0 * (s.dist_br(b, r) + s.dist_rm(r, m)) / speed_of_light;
            }
    mean /= static_cast<double>(n_ris) * n_bs * n_ms;

    double obj = 0.0;
    for (int r = 0; r < n_ris; ++r)
        for (int b = 0; b < n_bs; ++b)
            for (int m = 0; m < n_ms; ++m) {
                const double beta = sig.beam_phases.empty() ? 0.0 : sig.beam_phases[m];
                const double term =
                    theta[r] + beta -
                    two_pi * f0 * (s.dist_br(b, r) + s.dist_rm(r, m)) / speed_of_light - mean;
                obj += term * term;
            }
    return obj;
}

SnrBreakdown sum_snr(const ResolvedScenario& s, const PhaseProfile& profile) {
    if (profile.size() != s.n_ris())
        throw std::invalid_argument("sum_snr: phase profile length mismatch");
    const SignalConfig& sig = s.base.signal;
    const double f0 = sig.carrier_hz;
    const double w = two_pi * f0;
    const double scale = sig.power_w / s.base.noise_variance_w;

    SnrBreakdown out{0.0, 0.0, 0.0};
    for (int b = 0; b < s.n_bs(); ++b) {
        std::complex<double> direct{0.0, 0.0};
        std::complex<double> mp{0.0, 0.0};
        for (int m = 0; m < s.n_ms(); ++m) {
            const std::complex<double> wm = sig.tx_weight(m, s.n_ms());
            direct += s.rho_bm * wm * std::polar(1.0, -w * s.dist_bm(b, m) / speed_of_light);
            for (int r = 0; r < s.n_ris(); ++r)
                mp += s.rho_brm * wm * profile.omega(r) *
                      std::polar(1.0, -w * (s.dist_br(b, r) + s.dist_rm(r, m)) / speed_of_light);
        }
        out.direct += scale * std::norm(direct);
        out.multipath += scale * std::norm(mp);
        out.total += scale * std::norm(direct + mp);
    }
    return out;
}



PhaseProfile optimize_crlb(const ResolvedScenario& s, PhaseObjective objective,
                           const PhaseProfile& init, const OptimizeOptions& options,
                           OptimizeDiagnostics* diagnostics) {
    if (init.size() != s.n_ris())
        throw std::invalid_argument("optimize_crlb: init profile length mismatch");
    const BoundMode mode = default_bound_mode(s.base.signaling);
    const FimAssembler assembler(s, mode);

    const auto eval_profile = [&](const Eigen::VectorXd& phases) -> double {
        PhaseProfile p;
        p.strategy = PhaseStrategy::optimized_crlb;
        p.phases = phases;
        const BoundReport rep = crlb(assembler.assemble(p));
        return objective == PhaseObjective::peb ? rep.peb_m : rep.oeb_rad;
    };

    const long budget = static_cast<long>(options.max_evals_per_dim) * s.n_ris();
    detail::SimplexResult run = detail::nelder_mead(eval_profile, init.phases,
                                                    options.simplex_scale, budget,
                                                    options.ftol_rel);
    double init_value = run.value;
    {
        // the start vertex was evaluated first, so its value caps the result
        try {
            init_value = eval_profile(init.phases);
        } catch (...) {
            init_value = std::numeric_limits<double>::infinity();
        }
    }

    bool restarted = false;
    long used = run.evaluations;
    const double improvement =
        init_value > 0.0 ? (init_value - run.value) / init_value : 0.0;
    if (improvement < options.restart_threshold && used < budget) {
        restarted = true;
        const PhaseProfile alt = random_profile(s.n_ris(), options.restart_seed);
        detail::SimplexResult second = detail::nelder_mead(
            eval_profile, alt.phases, options.simplex_scale, budget - used, options.ftol_rel);
        used += second.evaluations;
        if (second.value < run.value)
            run = second;
    }

    PhaseProfile out;
    out.strategy = PhaseStrategy::optimized_crlb;
    out.phases = (run.value <= init_value) ? wrapped(run.x) : wrapped(init.phases);
    if (diagnostics) {
        diagnostics->evaluations = used;
        diagnostics->initial_objective = init_value;
        diagnostics->final_objective = std::min(run.value, init_value);
        diagnostics->restarted = restarted;
    }
    return out;
}

PhaseProfile make_profile(const ResolvedScenario& s, PhaseStrategy strategy, std::uint64_t seed,
                          int quantization_levels, PhaseObjective objective,
                          const OptimizeOptions& options) {
    switch (strategy) {
    case PhaseStrategy::mirror:
        return mirror_profile(s.n_ris());
    case PhaseStrategy::random:
        return random_profile(s.n_ris(), seed);
    case PhaseStrategy::proposed:
        return proposed_profile(s);
    case PhaseStrategy::optimized_crlb:
        return optimize_crlb(s, objective, proposed_profile(s), options);
    case PhaseStrategy::quantized:
        return quantize(optimize_crlb(s, objective, proposed_profile(s), options),
                        quantization_levels);
    }
    throw std::invalid_argument("make_profile: unknown strategy");
}

} // namespace risloc
