#include "risloc/config.hpp"
#include "risloc/estimation.hpp"
#include "risloc/sweep.hpp"
#include "risloc/version.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace risloc;

namespace {

ResolvedScenario resolved_from_json(const std::string& config_json) {
    return resolve_scenario(ScenarioConfig::from_string(config_json).to_scenario());
}

PhaseProfile profile_from_json(const std::string& config_json, const std::string& strategy) {
    const ScenarioConfig config = ScenarioConfig::from_string(config_json);
    const ResolvedScenario rs = resolve_scenario(config.to_scenario());
    const PhaseStrategy strat =
        strategy.empty() ? config.phase.strategy : phase_strategy_from_string(strategy);
    OptimizeOptions opt;
    opt.max_evals_per_dim = config.phase.max_evals_per_dim;
    opt.restart_seed = config.phase.seed;
    return make_profile(rs, strat, config.phase.seed, config.phase.quantization_levels,
                        config.phase.objective, opt);
}

py::dict report_to_dict(const BoundReport& report) {
    py::dict d;
    d["peb_m"] = report.peb_m;
    d["oeb_rad"] = report.oeb_rad;
    d["oeb_deg"] = report.oeb_deg();
    d["gdop_position"] = report.gdop_position;
    d["gdop_orientation"] = report.gdop_orientation;
    d["condition_number"] = report.condition_number;
    py::dict sigmas;
    for (const auto& [name, sigma] : report.per_parameter_sigmas)
        sigmas[name.c_str()] = sigma;
    d["per_parameter_sigmas"] = sigmas;
    d["warnings"] = report.warnings;
    return d;
}

py::dict compute_bounds(const std::string& config_json, const std::string& strategy) {
    const ScenarioConfig config = ScenarioConfig::from_string(config_json);
    const ResolvedScenario rs = resolve_scenario(config.to_scenario());
    const PhaseProfile profile = profile_from_json(config_json, strategy);
    const BoundMode mode = config.resolved_mode();
    BoundReport report = crlb(assemble_fim(rs, profile, mode),
                              config.bounds.crlb_options(config.subset_mask_for(mode)));
    const GdopPair g = gdop(report, rs);
    report.gdop_position = g.position;
    report.gdop_orientation = g.orientation;
    py::dict d = report_to_dict(report);
    d["mode"] = to_string(mode);
    return d;
}

Eigen::VectorXd design_phases(const std::string& config_json, const std::string& strategy) {
    return profile_from_json(config_json, strategy).phases;
}

Eigen::VectorXcd channel_response(const std::string& config_json, int subcarrier,
                                  const std::optional<Eigen::VectorXd>& phases) {
    const ScenarioConfig config = ScenarioConfig::from_string(config_json);
    const ResolvedScenario rs = resolve_scenario(config.to_scenario());
    PhaseProfile profile;
    if (phases) {
        profile.phases = *phases;
    } else {
        profile = profile_from_json(config_json, "");
    }
    return response(rs, profile, subcarrier).total();
}

std::string run_sweep_csv(const std::string& config_json) {
    return run_sweep(ScenarioConfig::from_string(config_json)).csv;
}

py::dict mle_trials(const std::string& config_json, int trials) {
    const MleRunResult r = run_mle(ScenarioConfig::from_string(config_json), trials);
    py::dict d;
    d["trials"] = r.trials;
    d["rmse_position_m"] = r.rmse_position_m;
    d["rmse_orientation_rad"] = r.rmse_orientation_rad;
    d["peb_m"] = r.peb_m;
    d["oeb_rad"] = r.oeb_rad;
    d["effective_snr_db"] = r.effective_snr_db;
    d["csv"] = r.csv;
    return d;
}

} // namespace

PYBIND11_MODULE(_risloc, m) {
    m.doc() = "Localization error bounds and RIS phase design for single-anchor near-field "
              "systems";
    m.attr("__version__") = version_string;

    m.def("rotation_matrix", &rotation_matrix, py::arg("orientation"),
          "Rz(alpha) * Ry(beta) * Rx(gamma) for orientation (alpha, beta, gamma)");
    m.def(
        "element_pair_distance",
        [](const Vec3& local_a, const Vec3& local_b, const Vec3& centroid_a,
           const Vec3& centroid_b) {
            return element_pair_distance(local_a, local_b, centroid_link(centroid_a, centroid_b));
        },
        py::arg("local_a"), py::arg("local_b"), py::arg("centroid_a"), py::arg("centroid_b"),
        "spherical-wavefront element pair distance");
    m.def("compute_bounds", &compute_bounds, py::arg("config_json"), py::arg("strategy") = "",
          "PEB/OEB/GDOP report for a config (strategy override optional)");
    m.def("design_phases", &design_phases, py::arg("config_json"), py::arg("strategy") = "",
          "RIS phases for a config under the given strategy");
    m.def("channel_response", &channel_response, py::arg("config_json"), py::arg("subcarrier") = 1,
          py::arg("phases") = std::nullopt,
          "noiseless received vector at the BS for one subcarrier");
    m.def("run_sweep_csv", &run_sweep_csv, py::arg("config_json"),
          "run the configured sweep, return the CSV text");
    m.def("mle_trials", &mle_trials, py::arg("config_json"), py::arg("trials") = 0,
          "Monte Carlo MLE validation summary");
}
