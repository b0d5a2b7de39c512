#pragma once

#include "risloc/bounds.hpp"
#include "risloc/phase_profile.hpp"
#include "risloc/simplex.hpp"
#include "risloc/signal_model.hpp"

#include <cstdint>

namespace risloc {

/// No induced phase shift: Theta = 0, Omega = identity.
PhaseProfile mirror_profile(int n_ris);

/// I.i.d. uniform phases on [0, 2*pi); deterministic under the seed.
PhaseProfile random_profile(int n_ris, std::uint64_t seed);

/// Closed-form SNR-maximizing design evaluated at the carrier:
///   theta*_k = (2 pi f0 / (N_M N_B)) sum_b sum_m (tau_bk + tau_km - tau_bm), reduced mod 2*pi.
PhaseProfile proposed_profile(const ResolvedScenario& s);

/// Snap every phase to the nearest point of the uniform codebook {2 pi k / L}, ties toward the
/// lower index (circular distance; 2*pi wraps onto index 0).
PhaseProfile quantize(const PhaseProfile& profile, int levels);

enum class PhaseObjective { peb, oeb };

std::string to_string(PhaseObjective o);
PhaseObjective phase_objective_from_string(const std::string& name);

struct OptimizeOptions {
    int max_evals_per_dim{500};       // total objective-evaluation budget is this times N_R
    double restart_threshold{1e-6};   // relative improvement below which a random restart runs
    std::uint64_t restart_seed{0};
    double simplex_scale{0.4};        // radians; initial simplex edge length
    double ftol_rel{1e-9};
};

struct OptimizeDiagnostics {
    long evaluations{0};
    double initial_objective{0.0};
    double final_objective{0.0};
    bool restarted{false};
};

/// Derivative-free minimization of PEB or OEB over the RIS phases, starting from `init`.
/// Never returns a profile whose objective exceeds the initialization's.
PhaseProfile optimize_crlb(const ResolvedScenario& s, PhaseObjective objective,
                           const PhaseProfile& init, const OptimizeOptions& options = {},
                           OptimizeDiagnostics* diagnostics = nullptr);

/// Profile for a named strategy with the harness defaults (optimized/quantized start from the
/// proposed design).
PhaseProfile make_profile(const ResolvedScenario& s, PhaseStrategy strategy, std::uint64_t seed,
                          int quantization_levels = 4, PhaseObjective objective = PhaseObjective::peb,
                          const OptimizeOptions& options = {});

/// Minimizer of the convexified spread objective before the alignment shift (unreduced
/// phases; their mean is zero).
Eigen::VectorXd convexified_phases_raw(const ResolvedScenario& s);

/// Constant phase aligning the reflected path with the direct path.
double alignment_phase(const ResolvedScenario& s);

/// The convexified objective gamma(Theta) on unwrapped phases.
double phase_spread_objective(const ResolvedScenario& s, const Eigen::VectorXd& theta);

struct SnrBreakdown {
    double direct;    // sum over BS antennas, direct link only
    double multipath; // reflected path only
    double total;     // coherent sum of both paths
};

/// Sum of per-antenna SNRs at the carrier frequency for a given profile.
SnrBreakdown sum_snr(const ResolvedScenario& s, const PhaseProfile& profile);



} // namespace risloc
