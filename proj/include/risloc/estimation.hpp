#pragma once

#include "risloc/phase_profile.hpp"
#include "risloc/signal_model.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace risloc {

using StateVector = Eigen::Matrix<double, 6, 1>; // (x, y, z, alpha, beta, gamma)

struct MleConfig {
    std::array<double, 6> box_min{};
    std::array<double, 6> box_max{};
    std::array<int, 6> grid_points{2, 2, 2, 2, 2, 2}; // 1 freezes a dimension at box_min
    enum class Refinement { none, local_descent };
    Refinement refinement{Refinement::local_descent};
    int max_refine_iters{60};
    int snapshots{1};

    void validate() const;
};

struct MleDiagnostics {
    double log_likelihood{0.0};
    long evaluations{0};
    bool boundary_hit{false};
    std::vector<std::string> warnings;
};

/// Exact log-likelihood of the snapshots under CN(mu(candidate), sigma^2 I), summed over
/// subcarriers and noise realizations. The snapshot list holds one vector per subcarrier,
/// realization after realization, so its length is a multiple of the subcarrier count.
double log_likelihood(const std::vector<Eigen::VectorXcd>& snapshots, const StateVector& candidate,
                      const ResolvedScenario& s, const PhaseProfile& profile);

/// Coarse grid search over the box followed by cyclic golden-section ascent. Orientation
/// dimensions wrap modulo 2*pi during refinement; position dimensions clamp to the box.
StateVector mle_estimate(const std::vector<Eigen::VectorXcd>& snapshots, const ResolvedScenario& s,
                         const PhaseProfile& profile, const MleConfig& config,
                         MleDiagnostics* diagnostics = nullptr);

/// Noisy snapshots of every subcarrier for the scenario's true MS state; `realizations`
/// independent copies are concatenated realization-major.
std::vector<Eigen::VectorXcd> simulate_snapshots(const ResolvedScenario& s,
                                                 const PhaseProfile& profile, std::uint64_t seed,
                                                 int realizations = 1);

StateVector state_from_scenario(const ResolvedScenario& s);

/// Mean received-sample SNR over all antennas and subcarriers, in dB.
double effective_snr_db(const ResolvedScenario& s, const PhaseProfile& profile);

} // namespace risloc
