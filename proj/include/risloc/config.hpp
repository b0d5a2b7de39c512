#pragma once

#include "risloc/bounds.hpp"
#include "risloc/phase_design.hpp"
#include "risloc/signal_model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace risloc {

struct StationConfig {
    Vec3 position{Vec3::Zero()};
    Vec3 orientation{Vec3::Zero()};
    int elements{1};
    double spacing_m{0.0};              // 0 = default lambda/2
    std::vector<Vec3> custom_positions; // empty = planar grid for the station's role
};

struct PhaseConfig {
    PhaseStrategy strategy{PhaseStrategy::proposed};
    std::uint64_t seed{1};
    int quantization_levels{4};
    PhaseObjective objective{PhaseObjective::peb};
    int max_evals_per_dim{500};
};

struct BoundsConfig {
    Signaling signaling{Signaling::synchronous};
    std::string mode{"default"}; // "default" | "direct" | "two_stage"
    std::vector<std::string> known_parameters; // treated as known (masked out)
    double condition_cap{1e12};
    std::string singular_policy{"error"}; // "error" | "pseudo_inverse"

    CrlbOptions crlb_options(const std::vector<bool>& mask) const;
};

struct SweepAxisConfig {
    std::string axis; // ms_x, ms_y, ms_z, ms_alpha, ms_beta, ms_gamma, n_ris
    std::vector<double> values;
};

struct MleSectionConfig {
    std::array<double, 6> box_half_width{0.01, 0.01, 0.01, 0.2, 0.2, 0.2};
    std::array<int, 6> grid_points{7, 7, 7, 1, 1, 1};
    std::array<bool, 6> estimate{true, true, true, false, false, false};
    std::string refinement{"local_descent"};
    int max_refine_iters{40};
    int snapshots{1};
    int trials{200};
};

/// One experiment description: station poses and layouts, signal and noise parameters,
/// phase-design strategy, bound mode, sweep axes and seeds.
struct ScenarioConfig {
    StationConfig bs, ris, ms;
    SignalConfig signal;
    NoiseModel noise;
    PhaseConfig phase;
    BoundsConfig bounds;
    bool use_ris{true};
    AsyncOffsets offsets{};
    std::vector<SweepAxisConfig> sweep;
    MleSectionConfig mle;
    std::uint64_t seed{1};
    int threads{0}; // 0 = all available

    static ScenarioConfig from_json(const nlohmann::json& j);
    static ScenarioConfig from_string(const std::string& text);
    static ScenarioConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    std::string canonical_text() const;

    void validate() const;
    Scenario to_scenario() const;
    BoundMode resolved_mode() const;

    /// Estimated-parameter mask for the mode; RIS-path parameters are dropped automatically
    /// when the RIS is disabled.
    std::vector<bool> subset_mask_for(BoundMode mode) const;

    std::uint64_t config_hash() const; // FNV-1a over the canonical serialization
};

/// Move one sweep coordinate on a copy of the configuration.
void apply_sweep_value(ScenarioConfig& config, const std::string& axis, double value);

std::uint64_t fnv1a_hash(const std::string& text);

} // namespace risloc
