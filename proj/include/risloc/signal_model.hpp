#pragma once

#include "risloc/geometry.hpp"
#include "risloc/phase_profile.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace risloc {

inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double boltzmann_constant = 1.380649e-23; // J/K

enum class Signaling { synchronous, asynchronous };

std::string to_string(Signaling s);
Signaling signaling_from_string(const std::string& name);

/// Transmit-side signal description: OFDM subcarriers, beamfocusing weights, data symbols
/// and residual timing errors.
struct SignalConfig {
    double power_w{1.0};
    double carrier_hz{28e9};
    int subcarrier_count{1};
    double subcarrier_spacing_hz{240e3};
    std::vector<double> beam_phases;                  // beta_m; empty = all zero
    std::vector<std::complex<double>> data_symbols;   // p[n], |p|=1; empty = all one
    double sync_residual_s{0.0};                      // xi
    std::vector<double> ms_delay_errors_s;            // eta_m; empty = all zero
    std::vector<double> ris_delay_errors_s;           // eta_r; empty = all zero

    double wavelength() const { return speed_of_light / carrier_hz; }
    double bandwidth_hz() const { return subcarrier_count * subcarrier_spacing_hz; }

    /// Absolute frequency of the n-th subcarrier (n = 1..N). Phase rotations happen at the
    /// RF subcarrier frequency, i.e. the carrier plus the n-th baseband offset n*df.
    double subcarrier_hz(int n) const { return carrier_hz + n * subcarrier_spacing_hz; }

    std::complex<double> tx_weight(int m, int n_ms) const; // w_m = e^{j beta_m} / sqrt(N_M)
    std::complex<double> data_symbol(int n) const;         // 1-based subcarrier index
    double ms_delay_error(int m) const;
    double ris_delay_error(int r) const;

    void validate(int n_ms, int n_ris) const;
};

/// Phase offsets of the direct and reflected paths under asynchronous signaling.
struct AsyncOffsets {
    double chi_bm{0.0};
    double chi_brm{0.0};
};

/// Receiver thermal noise budget: sigma^2 = k_B * T * 10^(F/10) * df per subcarrier.
struct NoiseModel {
    double figure_db{3.0};
    double temperature_k{290.0};

    double variance_w(double subcarrier_spacing_hz) const;
};

/// Noiseless received signal at every BS antenna for one subcarrier, split by path.
struct ChannelResponse {
    Eigen::VectorXcd direct_part; // mu_{b,BM}
    Eigen::VectorXcd ris_part;    // mu_{b,BRM}

    Eigen::VectorXcd total() const { return direct_part + ris_part; }
};

/// Full experiment description prior to geometric resolution.
struct Scenario {
    StationPose bs_pose, ris_pose, ms_pose;
    ArrayLayout bs_layout, ris_layout, ms_layout;
    SignalConfig signal;
    double noise_variance_w{1.0};
    bool use_ris{true};
    Signaling signaling{Signaling::synchronous};
    AsyncOffsets offsets{};
};

/// Scenario with arrays, centroid links, path gains and all element-pair distances resolved.
struct ResolvedScenario {
    Scenario base;
    ResolvedArray bs, ris, ms;
    LinkGeometry bm, br, rm; // BS->MS, BS->RIS, RIS->MS
    double rho_bm{0.0};
    double rho_brm{0.0};
    Eigen::MatrixXd dist_bm; // N_B x N_M
    Eigen::MatrixXd dist_br; // N_B x N_R
    Eigen::MatrixXd dist_rm; // N_R x N_M

    int n_bs() const { return bs.count(); }
    int n_ris() const { return ris.count(); }
    int n_ms() const { return ms.count(); }
};

ResolvedScenario resolve_scenario(const Scenario& scenario);

/// Re-resolve only the MS-dependent parts for a new MS pose (grid-search hot path).
ResolvedScenario with_ms_pose(const ResolvedScenario& resolved, const StationPose& ms_pose);

/// Distance between element `a` of the link's origin station and element `b` of its target
/// station, computed from local (rotated) element offsets and the centroid link. Evaluates the
/// spherical-wavefront decomposition
///   d_ab = sqrt(|p_a|^2 + |p_b|^2 + d^2 - 2*(G1 + d*G2)),
/// with G1 = p_a . p_b and G2 = u . (p_a - p_b), u pointing from the origin station to the
/// target. With this sign convention the expression equals the Euclidean element-pair distance
/// exactly.
double element_pair_distance(const Vec3& local_a, const Vec3& local_b, const LinkGeometry& link_ab);

struct PathGains {
    double rho_bm;  // lambda / (4*pi*d_BM)
    double rho_brm; // lambda / (4*pi*(d_RM + d_BR))
};

PathGains path_gains(double d_bm, double d_br, double d_rm, double wavelength);

ChannelResponse synchronous_response(const ResolvedScenario& s, const PhaseProfile& profile, int n);
ChannelResponse asynchronous_response(const ResolvedScenario& s, const PhaseProfile& profile,
                                      const AsyncOffsets& offsets, int n);

/// Dispatch on the scenario's signaling scheme (asynchronous uses the scenario's offsets).
ChannelResponse response(const ResolvedScenario& s, const PhaseProfile& profile, int n);

/// y = mu + w with w ~ CN(0, sigma^2 I); deterministic for a fixed seed.
Eigen::VectorXcd add_noise(const Eigen::VectorXcd& mu, double sigma2, std::uint64_t seed);

} // namespace risloc
