#include "risloc/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace risloc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Eigen::MatrixXd pair_distances(const ResolvedArray& a, const ResolvedArray& b,
                               const LinkGeometry& link_ab) {
    Eigen::MatrixXd d(a.count(), b.count());
    for (int i = 0; i < a.count(); ++i)
        for (int j = 0; j < b.count(); ++j)
            d(i, j) = element_pair_distance(a.local_positions[i], b.local_positions[j], link_ab);
    return d;
}

} // namespace

std::string to_string(Signaling s) {
    return s == Signaling::synchronous ? "synchronous" : "asynchronous";
}

Signaling signaling_from_string(const std::string& name) {
    if (name == "synchronous" || name == "sync")
        return Signaling::synchronous;
    if (name == "asynchronous" || name == "async")
        return Signaling::asynchronous;
    throw std::invalid_argument("unknown signaling scheme: " + name);
}

std::complex<double> SignalConfig::tx_weight(int m, int n_ms) const {
    const double beta = beam_phases.empty() ? 0.0 : beam_phases.at(m);
    return std::polar(1.0 / std::sqrt(static_cast<double>(n_ms)), beta);
}

std::complex<double> SignalConfig::data_symbol(int n) const {
    if (data_symbols.empty())
        return {1.0, 0.0};
    return data_symbols.at(n - 1);
}

double SignalConfig::ms_delay_error(int m) const {
    return ms_delay_errors_s.empty() ? 0.0 : ms_delay_errors_s.at(m);
}

double SignalConfig::ris_delay_error(int r) const {
    return ris_delay_errors_s.empty() ? 0.0 : ris_delay_errors_s.at(r);
}

void SignalConfig::validate(int n_ms, int n_ris) const {
    if (!(power_w >= 0.0))
        throw std::invalid_argument("signal: power must be non-negative");
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("signal: carrier frequency must be positive");
    if (subcarrier_count < 1)
        throw std::invalid_argument("signal: subcarrier count must be at least 1");
    if (subcarrier_spacing_hz < 0.0)
        throw std::invalid_argument("signal: subcarrier spacing must be non-negative");
    if (!beam_phases.empty() && static_cast<int>(beam_phases.size()) != n_ms)
        throw std::invalid_argument("signal: beam_phases length must equal the MS element count");
    if (!data_symbols.empty()) {
        if (static_cast<int>(data_symbols.size()) != subcarrier_count)
            throw std::invalid_argument("signal: data_symbols length must equal the subcarrier count");
        for (const auto& p : data_symbols)
            if (std::abs(std::abs(p) - 1.0) > 1e-9)
                throw std::invalid_argument("signal: data symbols must be unit modulus");
    }
    if (!ms_delay_errors_s.empty() && static_cast<int>(ms_delay_errors_s.size()) != n_ms)
        throw std::invalid_argument("signal: ms_delay_errors length must equal the MS element count");
    if (!ris_delay_errors_s.empty() && static_cast<int>(ris_delay_errors_s.size()) != n_ris)
        throw std::invalid_argument("signal: ris_delay_errors length must equal the RIS element count");
}

double NoiseModel::variance_w(double subcarrier_spacing_hz) const {
    if (!(subcarrier_spacing_hz > 0.0))
        throw std::invalid_argument("noise: subcarrier spacing must be positive");
    return boltzmann_constant * temperature_k * std::pow(10.0, figure_db / 10.0) *
           subcarrier_spacing_hz;
}

double element_pair_distance(const Vec3& local_a, const Vec3& local_b, const LinkGeometry& link_ab) {
    if (!(link_ab.distance > 0.0))
        throw DegenerateGeometryError("element_pair_distance: centroid distance must be positive");
    const Vec3 u = link_ab.unit();
    const double g1 = local_a.dot(local_b);
    const double g2 = u.dot(local_a - local_b);
    const double d = link_ab.distance;
    const double sq = local_a.squaredNorm() + local_b.squaredNorm() + d * d - 2.0 * (g1 + d * g2);
    return std::sqrt(std::max(sq, 0.0));
}

PathGains path_gains(double d_bm, double d_br, double d_rm, double wavelength) {
    if (!(d_bm > 0.0) || !(d_br > 0.0) || !(d_rm > 0.0))
        throw std::invalid_argument("path_gains: distances must be positive");
    if (!(wavelength > 0.0))
        throw std::invalid_argument("path_gains: wavelength must be positive");
    PathGains g;
    g.rho_bm = wavelength / (4.0 * std::numbers::pi * d_bm);
    g.rho_brm = wavelength / (4.0 * std::numbers::pi * (d_rm + d_br));
    return g;
}

ResolvedScenario resolve_scenario(const Scenario& scenario) {
    ResolvedScenario r;
    r.base = scenario;
    r.bs = resolve_array(scenario.bs_pose, scenario.bs_layout);
    r.ris = resolve_array(scenario.ris_pose, scenario.ris_layout);
    r.ms = resolve_array(scenario.ms_pose, scenario.ms_layout);
    r.bm = centroid_link(scenario.bs_pose, scenario.ms_pose);
    r.br = centroid_link(scenario.bs_pose, scenario.ris_pose);
    r.rm = centroid_link(scenario.ris_pose, scenario.ms_pose);
    const PathGains gains =
        path_gains(r.bm.distance, r.br.distance, r.rm.distance, scenario.signal.wavelength());
    r.rho_bm = gains.rho_bm;
    r.rho_brm = gains.rho_brm;
    r.dist_bm = pair_distances(r.bs, r.ms, r.bm);
    r.dist_br = pair_distances(r.bs, r.ris, r.br);
    r.dist_rm = pair_distances(r.ris, r.ms, r.rm);
    scenario.signal.validate(r.n_ms(), r.n_ris());
    return r;
}

ResolvedScenario with_ms_pose(const ResolvedScenario& resolved, const StationPose& ms_pose) {
    ResolvedScenario r;
    r.base = resolved.base;
    r.base.ms_pose = ms_pose;
    r.bs = resolved.bs;
    r.ris = resolved.ris;
    r.br = resolved.br;
    r.dist_br = resolved.dist_br;
    r.ms = resolve_array(ms_pose, r.base.ms_layout);
    r.bm = centroid_link(r.base.bs_pose, ms_pose);
    r.rm = centroid_link(r.base.ris_pose, ms_pose);
    const PathGains gains =
        path_gains(r.bm.distance, r.br.distance, r.rm.distance, r.base.signal.wavelength());
    r.rho_bm = gains.rho_bm;
    r.rho_brm = gains.rho_brm;
    r.dist_bm = pair_distances(r.bs, r.ms, r.bm);
    r.dist_rm = pair_distances(r.ris, r.ms, r.rm);
    return r;
}

namespace {

ChannelResponse response_impl(const ResolvedScenario& s, const PhaseProfile& profile, int n,
                              bool differential, const AsyncOffsets* offsets) {
    const SignalConfig& sig = s.base.signal;
    if (n < 1 || n > sig.subcarrier_count)
        throw std::invalid_argument("response: subcarrier index out of range");
    if (s.base.use_ris && profile.size() != s.n_ris())
        throw std::invalid_argument("response: phase profile length must equal the RIS element count");

    const int n_bs = s.n_bs();
    const int n_ms = s.n_ms();
    const int n_ris = s.n_ris();
    const double f = sig.subcarrier_hz(n);
    const double sqrt_p = std::sqrt(sig.power_w);
    const std::complex<double> symbol = sig.data_symbol(n);

    // Delays measured relative to the centroid path when the signaling is differential.
    const double base_bm = differential ? s.bm.distance / speed_of_light : 0.0;
    const double base_br = differential ? s.br.distance / speed_of_light : 0.0;
    const double base_rm = differential ? s.rm.distance / speed_of_light : 0.0;

    const std::complex<double> direct_rot =
        differential ? std::polar(1.0, -offsets->chi_bm)
                     : std::polar(1.0, -two_pi * f * sig.sync_residual_s);
    const std::complex<double> ris_rot =
        differential ? std::polar(1.0, -offsets->chi_brm)
                     : std::polar(1.0, -two_pi * f * sig.sync_residual_s);

    ChannelResponse out;
    out.direct_part = Eigen::VectorXcd::Zero(n_bs);
    out.ris_part = Eigen::VectorXcd::Zero(n_bs);

    for (int b = 0; b < n_bs; ++b) {
        std::complex<double> direct{0.0, 0.0};
        std::complex<double> ris{0.0, 0.0};
        for (int m = 0; m < n_ms; ++m) {
            const std::complex<double> x_m = sig.tx_weight(m, n_ms) * symbol;
            const double eta_m = sig.ms_delay_error(m);
            const double tau_bm = s.dist_bm(b, m) / speed_of_light - base_bm;
            direct += x_m * std::polar(1.0, -two_pi * f * (tau_bm + eta_m));
            if (s.base.use_ris) {
                for (int r = 0; r < n_ris; ++r) {
                    const double tau_ris = s.dist_br(b, r) / speed_of_light - base_br +
                                           s.dist_rm(r, m) / speed_of_light - base_rm;
                    const double eta_r = sig.ris_delay_error(r);
                    ris += x_m * profile.omega(r) *
                           std::polar(1.0, -two_pi * f * (tau_ris + eta_r + eta_m));
                }
            }
        }
        out.direct_part[b] = sqrt_p * s.rho_bm * direct_rot * direct;
        out.ris_part[b] = sqrt_p * s.rho_brm * ris_rot * ris;
    }
    return out;
}

} // namespace

ChannelResponse synchronous_response(const ResolvedScenario& s, const PhaseProfile& profile, int n) {
    return response_impl(s, profile, n, false, nullptr);
}

ChannelResponse asynchronous_response(const ResolvedScenario& s, const PhaseProfile& profile,
                                      const AsyncOffsets& offsets, int n) {
    return response_impl(s, profile, n, true, &offsets);
}

ChannelResponse response(const ResolvedScenario& s, const PhaseProfile& profile, int n) {
    if (s.base.signaling == Signaling::synchronous)
        return synchronous_response(s, profile, n);
    return asynchronous_response(s, profile, s.base.offsets, n);
}

Eigen::VectorXcd add_noise(const Eigen::VectorXcd& mu, double sigma2, std::uint64_t seed) {
    if (sigma2 < 0.0)
        throw std::invalid_argument("add_noise: noise variance must be non-negative");
    if (sigma2 == 0.0)
        return mu;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
    Eigen::VectorXcd y(mu.size());
    for (Eigen::Index b = 0; b < mu.size(); ++b) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        y[b] = mu[b] + std::complex<double>(re, im);
    }
    return y;
}

} // namespace risloc
