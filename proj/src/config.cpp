#include "risloc/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace risloc {

using nlohmann::json;

namespace {

Vec3 vec3_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument(std::string("config: ") + what + " must be a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to_json(const Vec3& v) {
    return json::array({v[0], v[1], v[2]});
}

StationConfig station_from_json(const json& j) {
    StationConfig s;
    if (j.contains("position"))
        s.position = vec3_from_json(j.at("position"), "station position");
    if (j.contains("orientation"))
        s.orientation = vec3_from_json(j.at("orientation"), "station orientation");
    if (j.contains("elements"))
        s.elements = j.at("elements").get<int>();
    if (j.contains("spacing_m"))
        s.spacing_m = j.at("spacing_m").get<double>();
    if (j.contains("custom_positions"))
        for (const auto& p : j.at("custom_positions"))
            s.custom_positions.push_back(vec3_from_json(p, "custom position"));
    return s;
}

json station_to_json(const StationConfig& s) {
    json j;
    j["position"] = vec3_to_json(s.position);
    j["orientation"] = vec3_to_json(s.orientation);
    j["elements"] = s.elements;
    if (s.spacing_m > 0.0)
        j["spacing_m"] = s.spacing_m;
    if (!s.custom_positions.empty()) {
        json arr = json::array();
        for (const auto& p : s.custom_positions)
            arr.push_back(vec3_to_json(p));
        j["custom_positions"] = arr;
    }
    return j;
}

std::vector<double> axis_values_from_json(const json& j) {
    std::vector<double> values;
    if (j.contains("values")) {
        for (const auto& v : j.at("values"))
            values.push_back(v.get<double>());
        return values;
    }
    if (!(j.contains("start") && j.contains("stop") && j.contains("step")))
        throw std::invalid_argument("config: sweep axis needs either values or start/stop/step");
    const double start = j.at("start").get<double>();
    const double stop = j.at("stop").get<double>();
    const double step = j.at("step").get<double>();
    if (step == 0.0 || (stop - start) * step < 0.0)
        throw std::invalid_argument("config: sweep step does not reach the stop value");
    const double span = (stop - start) / step;
    const long count = static_cast<long>(std::floor(span + 1e-9)) + 1;
    for (long i = 0; i < count; ++i)
        values.push_back(start + static_cast<double>(i) * step);
    return values;
}

} // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    ScenarioConfig c;
    const json& stations = j.at("stations");
    c.bs = station_from_json(stations.at("bs"));
    c.ris = station_from_json(stations.at("ris"));
    c.ms = station_from_json(stations.at("ms"));

    if (j.contains("signal")) {
        const json& sig = j.at("signal");
        if (sig.contains("power_w"))
            c.signal.power_w = sig.at("power_w").get<double>();
        if (sig.contains("carrier_hz"))
            c.signal.carrier_hz = sig.at("carrier_hz").get<double>();
        if (sig.contains("subcarriers"))
            c.signal.subcarrier_count = sig.at("subcarriers").get<int>();
        if (sig.contains("subcarrier_spacing_hz"))
            c.signal.subcarrier_spacing_hz = sig.at("subcarrier_spacing_hz").get<double>();
        if (sig.contains("beam_phases"))
            c.signal.beam_phases = sig.at("beam_phases").get<std::vector<double>>();
        if (sig.contains("sync_residual_s"))
            c.signal.sync_residual_s = sig.at("sync_residual_s").get<double>();
    }
    if (j.contains("noise")) {
        const json& noi = j.at("noise");
        if (noi.contains("figure_db"))
            c.noise.figure_db = noi.at("figure_db").get<double>();
        if (noi.contains("temperature_k"))
            c.noise.temperature_k = noi.at("temperature_k").get<double>();
    }
    if (j.contains("phase")) {
        const json& ph = j.at("phase");
        if (ph.contains("strategy"))
            c.phase.strategy = phase_strategy_from_string(ph.at("strategy").get<std::string>());
        if (ph.contains("seed"))
            c.phase.seed = ph.at("seed").get<std::uint64_t>();
        if (ph.contains("quantization_levels"))
            c.phase.quantization_levels = ph.at("quantization_levels").get<int>();
        if (ph.contains("objective"))
            c.phase.objective = phase_objective_from_string(ph.at("objective").get<std::string>());
        if (ph.contains("max_evals_per_dim"))
            c.phase.max_evals_per_dim = ph.at("max_evals_per_dim").get<int>();
    }
    if (j.contains("bounds")) {
        const json& b = j.at("bounds");
        if (b.contains("signaling"))
            c.bounds.signaling = signaling_from_string(b.at("signaling").get<std::string>());
        if (b.contains("mode"))
            c.bounds.mode = b.at("mode").get<std::string>();
        if (b.contains("known_parameters"))
            c.bounds.known_parameters = b.at("known_parameters").get<std::vector<std::string>>();
        if (b.contains("condition_cap"))
            c.bounds.condition_cap = b.at("condition_cap").get<double>();
        if (b.contains("singular_policy"))
            c.bounds.singular_policy = b.at("singular_policy").get<std::string>();
    }
    if (j.contains("use_ris"))
        c.use_ris = j.at("use_ris").get<bool>();
    if (j.contains("offsets")) {
        c.offsets.chi_bm = j.at("offsets").value("chi_bm", 0.0);
        c.offsets.chi_brm = j.at("offsets").value("chi_brm", 0.0);
    }
    if (j.contains("sweep")) {
        for (const auto& axis : j.at("sweep")) {
            SweepAxisConfig a;
            a.axis = axis.at("axis").get<std::string>();
            a.values = axis_values_from_json(axis);
            c.sweep.push_back(std::move(a));
        }
    }
    if (j.contains("mle")) {
        const json& m = j.at("mle");
        if (m.contains("box_half_width")) {
            auto v = m.at("box_half_width").get<std::vector<double>>();
            if (v.size() != 6)
                throw std::invalid_argument("config: mle.box_half_width needs 6 entries");
            std::copy(v.begin(), v.end(), c.mle.box_half_width.begin());
        }
        if (m.contains("grid_points")) {
            auto v = m.at("grid_points").get<std::vector<int>>();
            if (v.size() != 6)
                throw std::invalid_argument("config: mle.grid_points needs 6 entries");
            std::copy(v.begin(), v.end(), c.mle.grid_points.begin());
        }
        if (m.contains("estimate")) {
            auto v = m.at("estimate").get<std::vector<bool>>();
            if (v.size() != 6)
                throw std::invalid_argument("config: mle.estimate needs 6 entries");
            std::copy(v.begin(), v.end(), c.mle.estimate.begin());
        }
        if (m.contains("refinement"))
            c.mle.refinement = m.at("refinement").get<std::string>();
        if (m.contains("max_refine_iters"))
            c.mle.max_refine_iters = m.at("max_refine_iters").get<int>();
        if (m.contains("snapshots"))
            c.mle.snapshots = m.at("snapshots").get<int>();
        if (m.contains("trials"))
            c.mle.trials = m.at("trials").get<int>();
    }
    if (j.contains("seed"))
        c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads"))
        c.threads = j.at("threads").get<int>();
    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::from_string(const std::string& text) {
    return from_json(json::parse(text));
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open file " + path);
    json j;
    in >> j;
    return from_json(j);
}

json ScenarioConfig::to_json() const {
    json j;
    j["stations"]["bs"] = station_to_json(bs);
    j["stations"]["ris"] = station_to_json(ris);
    j["stations"]["ms"] = station_to_json(ms);
    j["signal"] = {{"power_w", signal.power_w},
                   {"carrier_hz", signal.carrier_hz},
                   {"subcarriers", signal.subcarrier_count},
                   {"subcarrier_spacing_hz", signal.subcarrier_spacing_hz}};
    if (!signal.beam_phases.empty())
        j["signal"]["beam_phases"] = signal.beam_phases;
    if (signal.sync_residual_s != 0.0)
        j["signal"]["sync_residual_s"] = signal.sync_residual_s;
    j["noise"] = {{"figure_db", noise.figure_db}, {"temperature_k", noise.temperature_k}};
    j["phase"] = {{"strategy", to_string(phase.strategy)},
                  {"seed", phase.seed},
                  {"quantization_levels", phase.quantization_levels},
                  {"objective", to_string(phase.objective)},
                  {"max_evals_per_dim", phase.max_evals_per_dim}};
    j["bounds"] = {{"signaling", to_string(bounds.signaling)},
                   {"mode", bounds.mode},
                   {"condition_cap", bounds.condition_cap},
                   {"singular_policy", bounds.singular_policy}};
    if (!bounds.known_parameters.empty())
        j["bounds"]["known_parameters"] = bounds.known_parameters;
    j["use_ris"] = use_ris;
    if (offsets.chi_bm != 0.0 || offsets.chi_brm != 0.0)
        j["offsets"] = {{"chi_bm", offsets.chi_bm}, {"chi_brm", offsets.chi_brm}};
    if (!sweep.empty()) {
        json arr = json::array();
        for (const auto& a : sweep)
            arr.push_back({{"axis", a.axis}, {"values", a.values}});
        j["sweep"] = arr;
    }
    j["mle"] = {{"box_half_width", mle.box_half_width},
                {"grid_points", mle.grid_points},
                {"estimate", mle.estimate},
                {"refinement", mle.refinement},
                {"max_refine_iters", mle.max_refine_iters},
                {"snapshots", mle.snapshots},
                {"trials", mle.trials}};
    j["seed"] = seed;
    j["threads"] = threads;
    return j;
}

std::string ScenarioConfig::canonical_text() const {
    return to_json().dump(2);
}

void ScenarioConfig::validate() const {
    const auto check_station = [](const StationConfig& s, const char* name) {
        if (s.custom_positions.empty()) {
            if (s.elements < 1)
                throw std::invalid_argument(std::string("config: ") + name +
                                            " element count must be positive");
            const int root = static_cast<int>(std::lround(std::sqrt(double(s.elements))));
            if (root * root != s.elements)
                throw std::invalid_argument(std::string("config: ") + name +
                                            " element count must be a perfect square for the "
                                            "default planar layout");
        }
        if (!s.position.allFinite() || !s.orientation.allFinite())
            throw std::invalid_argument(std::string("config: ") + name + " pose must be finite");
    };
    check_station(bs, "bs");
    check_station(ris, "ris");
    check_station(ms, "ms");
    if (bounds.mode != "default" && bounds.mode != "direct" && bounds.mode != "two_stage")
        throw std::invalid_argument("config: bounds.mode must be default, direct or two_stage");
    if (!(bounds.condition_cap > 1.0))
        throw std::invalid_argument("config: bounds.condition_cap must exceed 1");
    if (bounds.singular_policy != "error" && bounds.singular_policy != "pseudo_inverse")
        throw std::invalid_argument("config: bounds.singular_policy must be error or pseudo_inverse");
    for (const auto& a : sweep) {
        if (a.values.empty())
            throw std::invalid_argument("config: sweep axis '" + a.axis + "' has no values");
        static const std::vector<std::string> axes = {"ms_x",     "ms_y",    "ms_z",    "ms_alpha",
                                                      "ms_beta",  "ms_gamma", "n_ris"};
        if (std::find(axes.begin(), axes.end(), a.axis) == axes.end())
            throw std::invalid_argument("config: unknown sweep axis '" + a.axis + "'");
    }
    const auto& labels = (resolved_mode() == BoundMode::two_stage) ? two_stage_parameter_labels()
                                                                   : direct_parameter_labels();
    for (const auto& name : bounds.known_parameters)
        if (std::find(labels.begin(), labels.end(), name) == labels.end())
            throw std::invalid_argument("config: unknown parameter in known_parameters: " + name);
    if (mle.trials < 1)
        throw std::invalid_argument("config: mle.trials must be positive");
}

BoundMode ScenarioConfig::resolved_mode() const {
    if (bounds.mode == "direct")
        return BoundMode::direct;
    if (bounds.mode == "two_stage")
        return BoundMode::two_stage;
    return default_bound_mode(bounds.signaling);
}

std::vector<bool> ScenarioConfig::subset_mask_for(BoundMode mode) const {
    const auto& labels =
        mode == BoundMode::two_stage ? two_stage_parameter_labels() : direct_parameter_labels();
    std::vector<bool> mask(labels.size(), true);
    for (size_t i = 0; i < labels.size(); ++i) {
        if (std::find(bounds.known_parameters.begin(), bounds.known_parameters.end(), labels[i]) !=
            bounds.known_parameters.end())
            mask[i] = false;
        // without the reflected path the RIS channel parameters carry no information
        if (!use_ris && mode == BoundMode::two_stage && i >= 4 && i <= 7)
            mask[i] = false;
    }
    return mask;
}

Scenario ScenarioConfig::to_scenario() const {
    Scenario sc;
    const double default_spacing = signal.wavelength() / 2.0;
    const auto make_layout = [&](const StationConfig& s, GridPlane plane) -> ArrayLayout {
        if (!s.custom_positions.empty()) {
            ArrayLayout layout;
            layout.initial_positions = s.custom_positions;
            layout.spacing = s.spacing_m;
            return layout;
        }
        const double spacing = s.spacing_m > 0.0 ? s.spacing_m : default_spacing;
        return ArrayLayout::planar_grid(s.elements, spacing, plane);
    };
    sc.bs_pose = {bs.position, bs.orientation};
    sc.ris_pose = {ris.position, ris.orientation};
    sc.ms_pose = {ms.position, ms.orientation};
    sc.bs_layout = make_layout(bs, GridPlane::xz);
    sc.ris_layout = make_layout(ris, GridPlane::yz);
    sc.ms_layout = make_layout(ms, GridPlane::xy);
    sc.signal = signal;
    sc.noise_variance_w = noise.variance_w(signal.subcarrier_spacing_hz);
    sc.use_ris = use_ris;
    sc.signaling = bounds.signaling;
    sc.offsets = offsets;
    return sc;
}

CrlbOptions BoundsConfig::crlb_options(const std::vector<bool>& mask) const {
    CrlbOptions opt;
    opt.condition_cap = condition_cap;
    opt.subset_mask = mask;
    opt.singular_policy = singular_policy == "pseudo_inverse" ? SingularPolicy::pseudo_inverse
                                                              : SingularPolicy::raise;
    return opt;
}

std::uint64_t ScenarioConfig::config_hash() const {
    return fnv1a_hash(canonical_text());
}

void apply_sweep_value(ScenarioConfig& config, const std::string& axis, double value) {
    if (axis == "ms_x")
        config.ms.position[0] = value;
    else if (axis == "ms_y")
        config.ms.position[1] = value;
    else if (axis == "ms_z")
        config.ms.position[2] = value;
    else if (axis == "ms_alpha")
        config.ms.orientation[0] = value;
    else if (axis == "ms_beta")
        config.ms.orientation[1] = value;
    else if (axis == "ms_gamma")
        config.ms.orientation[2] = value;
    else if (axis == "n_ris") {
        const int n = static_cast<int>(std::lround(value));
        if (n < 1 || std::abs(value - n) > 1e-9)
            throw std::invalid_argument("sweep: n_ris values must be positive integers");
        config.ris.elements = n;
    } else {
        throw std::invalid_argument("sweep: unknown axis " + axis);
    }
}

} // namespace risloc
