#pragma once

#include "risloc/config.hpp"

#include <string>
#include <vector>

namespace risloc {

/// Key-value run record; the CSV bytes are reproducible for identical configs, the manifest
/// additionally carries wall-clock timing.
struct RunManifest {
    std::uint64_t config_hash{0};
    std::string code_version;
    std::string command;
    int rows{0};
    std::uint64_t csv_hash{0};
    double wall_ms{0.0};
    std::vector<std::pair<std::string, std::string>> extra; // summary key-value lines
    std::vector<std::string> warnings;

    std::string to_text() const;
};

struct SweepResult {
    std::string csv;
    RunManifest manifest;
};

/// One bound evaluation per sweep point; per-point failures land in the `error` column
/// without aborting the run.
SweepResult run_sweep(const ScenarioConfig& config);

/// Bound evaluations for several phase strategies over identical geometry and noise, keyed by
/// (sweep coordinates, strategy).
SweepResult compare_strategies(const ScenarioConfig& config,
                               const std::vector<PhaseStrategy>& strategies);

struct MleRunResult {
    std::string csv; // one row per trial
    RunManifest manifest;
    int trials{0};
    double rmse_position_m{0.0};
    double rmse_orientation_rad{0.0};
    double peb_m{0.0};
    double oeb_rad{0.0};
    double effective_snr_db{0.0};
};

/// Monte Carlo MLE validation against the bound on the configured scenario point.
MleRunResult run_mle(const ScenarioConfig& config, int trials_override = 0);

/// Format a double as scientific notation with 9 significant digits (CSV convention).
std::string format_number(double value);

} // namespace risloc
