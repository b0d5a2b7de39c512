#pragma once

#include "risloc/bounds.hpp"
#include "risloc/phase_design.hpp"
#include "risloc/signal_model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace risloc::testsupport {

inline constexpr double pi = std::numbers::pi;

inline Scenario base_scenario() {
    Scenario sc;
    const double lam = speed_of_light / 28e9;
    sc.bs_pose = {Vec3(0, 0, 0), Vec3::Zero()};
    sc.ris_pose = {Vec3(4, 3, 1), Vec3::Zero()};
    sc.ms_pose = {Vec3(5, 2, -1), Vec3(pi / 6, 0, 0)};
    sc.bs_layout = ArrayLayout::planar_grid(16, lam / 2, GridPlane::xz);
    sc.ris_layout = ArrayLayout::planar_grid(36, lam / 2, GridPlane::yz);
    sc.ms_layout = ArrayLayout::planar_grid(4, lam / 2, GridPlane::xy);
    sc.signal.carrier_hz = 28e9;
    sc.signal.subcarrier_count = 1;
    sc.signal.subcarrier_spacing_hz = 240e3;
    sc.noise_variance_w = NoiseModel{}.variance_w(240e3);
    return sc;
}

/// Heatmap study point: N_B=36, N_R=100, N_M=4, RIS at (10,10,-1), MS at (4,4,-3).
inline Scenario heatmap_scenario() {
    Scenario sc = base_scenario();
    const double lam = sc.signal.wavelength();
    sc.ris_pose = {Vec3(10, 10, -1), Vec3::Zero()};
    sc.ms_pose = {Vec3(4, 4, -3), Vec3(pi / 6, pi / 6, pi / 6)};
    sc.bs_layout = ArrayLayout::planar_grid(36, lam / 2, GridPlane::xz);
    sc.ris_layout = ArrayLayout::planar_grid(100, lam / 2, GridPlane::yz);
    return sc;
}

/// Strategy-comparison study: N_B=16, N_M=4, RIS at (4,3,1), MS at (5,2,-1), N=1.
inline Scenario strategy_scenario(int n_ris) {
    Scenario sc = base_scenario();
    sc.ris_layout = ArrayLayout::planar_grid(n_ris, sc.signal.wavelength() / 2, GridPlane::yz);
    return sc;
}

/// GDOP study: N_B=36, N_M=16, N_R variable, RIS at (4,3,1), MS on the d_BM=3 m shell.
inline Scenario gdop_scenario(int n_ris, double azimuth_rad) {
    Scenario sc = base_scenario();
    const double lam = sc.signal.wavelength();
    const double elev = 30.0 * pi / 180.0, d = 3.0;
    sc.ms_pose = {Vec3(d * std::cos(elev) * std::cos(azimuth_rad),
                       d * std::cos(elev) * std::sin(azimuth_rad), d * std::sin(elev)),
                  Vec3(pi / 6, 0, 0)};
    sc.bs_layout = ArrayLayout::planar_grid(36, lam / 2, GridPlane::xz);
    sc.ris_layout = ArrayLayout::planar_grid(n_ris, lam / 2, GridPlane::yz);
    sc.ms_layout = ArrayLayout::planar_grid(16, lam / 2, GridPlane::xy);
    sc.signal.subcarrier_count = 2400;
    return sc;
}

/// Sync-vs-async study: BS at (5,0,1.5), RIS at (0,5,2), N_B=36, N_R=64, N_M=4, N=8.
inline Scenario sync_async_scenario(double ms_x, bool with_ris, Signaling signaling) {
    Scenario sc = base_scenario();
    const double lam = sc.signal.wavelength();
    sc.bs_pose = {Vec3(5, 0, 1.5), Vec3::Zero()};
    sc.ris_pose = {Vec3(0, 5, 2), Vec3::Zero()};
    sc.ms_pose = {Vec3(ms_x, 5, 1), Vec3(pi / 4, pi / 2, 0)};
    sc.bs_layout = ArrayLayout::planar_grid(36, lam / 2, GridPlane::xz);
    sc.ris_layout = ArrayLayout::planar_grid(64, lam / 2, GridPlane::yz);
    sc.signal.subcarrier_count = 8;
    sc.use_ris = with_ris;
    sc.signaling = signaling;
    return sc;
}

/// Small scenario with strong SNR for estimator studies.
inline Scenario mle_scenario() {
    Scenario sc = base_scenario();
    const double lam = sc.signal.wavelength();
    sc.ris_pose = {Vec3(1.5, 1.5, 0.5), Vec3::Zero()};
    sc.ms_pose = {Vec3(2.0, 1.0, -0.5), Vec3(0.3, 0.2, 0.1)};
    sc.ris_layout = ArrayLayout::planar_grid(16, lam / 2, GridPlane::yz);
    sc.signal.subcarrier_count = 2;
    return sc;
}

/// Random small scenario (all station sizes <= 16 antennas), pole-safe geometry.
inline Scenario random_scenario(std::uint64_t seed, bool with_nonidealities = true) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto pick_count = [&]() {
        static const int counts[] = {1, 4, 9, 16};
        return counts[static_cast<int>(u01(rng) * 4.0) % 4];
    };
    const auto place = [&](double r_min, double r_max) {
        const double r = r_min + (r_max - r_min) * u01(rng);
        const double az = 2.0 * pi * u01(rng);
        const double el = (u01(rng) - 0.5) * 2.0; // +-1 rad, away from the poles
        return Vec3(r * std::cos(el) * std::cos(az), r * std::cos(el) * std::sin(az),
                    r * std::sin(el));
    };

    Scenario sc = base_scenario();
    const double lam = sc.signal.wavelength();
    sc.bs_pose = {Vec3(0, 0, 0), Vec3::Zero()};
    for (int attempt = 0; attempt < 100; ++attempt) {
        sc.ris_pose.centroid = place(2.0, 10.0);
        sc.ms_pose.centroid = place(2.0, 10.0);
        if ((sc.ris_pose.centroid - sc.ms_pose.centroid).norm() > 1.0)
            break;
    }
    sc.ms_pose.orientation =
        Vec3((u01(rng) - 0.5) * 2.0, (u01(rng) - 0.5) * 2.0, (u01(rng) - 0.5) * 2.0);
    const int n_bs = pick_count();
    const int n_ris = pick_count();
    const int n_ms = pick_count();
    sc.bs_layout = ArrayLayout::planar_grid(n_bs, lam / 2, GridPlane::xz);
    sc.ris_layout = ArrayLayout::planar_grid(n_ris, lam / 2, GridPlane::yz);
    sc.ms_layout = ArrayLayout::planar_grid(n_ms, lam / 2, GridPlane::xy);
    sc.signal.subcarrier_count = 1 + static_cast<int>(u01(rng) * 3.0) % 3;
    if (with_nonidealities) {
        sc.signal.sync_residual_s = (u01(rng) - 0.5) * 2e-10;
        sc.signal.beam_phases.resize(n_ms);
        sc.signal.ms_delay_errors_s.resize(n_ms);
        for (int m = 0; m < n_ms; ++m) {
            sc.signal.beam_phases[m] = 2.0 * pi * u01(rng);
            sc.signal.ms_delay_errors_s[m] = (u01(rng) - 0.5) * 2e-11;
        }
        sc.signal.ris_delay_errors_s.resize(n_ris);
        for (int r = 0; r < n_ris; ++r)
            sc.signal.ris_delay_errors_s[r] = (u01(rng) - 0.5) * 2e-11;
        sc.signal.data_symbols.resize(sc.signal.subcarrier_count);
        for (auto& p : sc.signal.data_symbols)
            p = std::polar(1.0, 2.0 * pi * u01(rng));
    }
    sc.offsets.chi_bm = 2.0 * pi * u01(rng);
    sc.offsets.chi_brm = 2.0 * pi * u01(rng);
    return sc;
}

/// mu(Gamma) evaluated by brute-force loops, independent of the library's derivative and
/// response paths; the element-pair distances are re-derived from the two-stage parameters.
inline Eigen::VectorXcd mu_of_gamma(const Eigen::VectorXd& gamma, const Scenario& sc, int n_bs,
                                    int n_ris, int n_ms, const PhaseProfile& profile, int n) {
    const double rho_bm = gamma[0], theta_bm = gamma[1], phi_bm = gamma[2], tau_bm = gamma[3];
    const double rho_brm = gamma[4], theta_rm = gamma[5], phi_rm = gamma[6], tau_rm = gamma[7];
    const Vec3 orientation(gamma[8], gamma[9], gamma[10]);
    const bool async = sc.signaling == Signaling::asynchronous;

    const Mat3 rot_ms = rotation_matrix(orientation);
    const Mat3 rot_bs = rotation_matrix(sc.bs_pose.orientation);
    const Mat3 rot_ris = rotation_matrix(sc.ris_pose.orientation);

    const auto pair_dist = [](const Vec3& p_s, const Vec3& p_m, double d, double theta,
                              double phi) {
        const Vec3 u(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
                     std::sin(theta));
        const double g1 = p_s.dot(p_m);
        const double g2 = u.dot(p_s - p_m);
        return std::sqrt(p_s.squaredNorm() + p_m.squaredNorm() + d * d - 2.0 * (g1 + d * g2));
    };

    const double f = sc.signal.subcarrier_hz(n);
    const double w = 2.0 * pi * f;
    const double d_bm = speed_of_light * tau_bm;
    const double d_rm = speed_of_light * tau_rm;
    // the BS-RIS link is known geometry, not part of Gamma
    const LinkGeometry br = centroid_link(sc.bs_pose.centroid, sc.ris_pose.centroid);

    Eigen::VectorXcd mu = Eigen::VectorXcd::Zero(n_bs);
    const double sqrt_p = std::sqrt(sc.signal.power_w);
    for (int b = 0; b < n_bs; ++b) {
        const Vec3 p_b = rot_bs * sc.bs_layout.initial_positions[b];
        std::complex<double> acc{0.0, 0.0};
        for (int m = 0; m < n_ms; ++m) {
            const Vec3 p_m = rot_ms * sc.ms_layout.initial_positions[m];
            const std::complex<double> x_m =
                sc.signal.tx_weight(m, n_ms) * sc.signal.data_symbol(n);
            const double eta_m = sc.signal.ms_delay_error(m);
            const double dist_bm = pair_dist(p_b, p_m, d_bm, theta_bm, phi_bm);
            double phase_bm = dist_bm / speed_of_light;
            if (async)
                phase_bm -= tau_bm;
            std::complex<double> direct =
                rho_bm * std::polar(1.0, -w * (phase_bm + eta_m)) *
                (async ? std::polar(1.0, -sc.offsets.chi_bm)
                       : std::polar(1.0, -w * sc.signal.sync_residual_s));
            std::complex<double> ris{0.0, 0.0};
            if (sc.use_ris) {
                for (int r = 0; r < n_ris; ++r) {
                    const Vec3 p_r = rot_ris * sc.ris_layout.initial_positions[r];
                    const Vec3 u_br = br.unit();
                    const double g1 = p_b.dot(p_r);
                    const double g2 = u_br.dot(p_b - p_r);
                    const double dist_br =
                        std::sqrt(p_b.squaredNorm() + p_r.squaredNorm() +
                                  br.distance * br.distance - 2.0 * (g1 + br.distance * g2));
                    const double dist_rm = pair_dist(p_r, p_m, d_rm, theta_rm, phi_rm);
                    double phase = (dist_br + dist_rm) / speed_of_light;
                    if (async)
                        phase -= br.distance / speed_of_light + tau_rm;
                    ris += profile.omega(r) *
                           std::polar(1.0, -w * (phase + sc.signal.ris_delay_error(r) + eta_m));
                }
                ris *= rho_brm * (async ? std::polar(1.0, -sc.offsets.chi_brm)
                                        : std::polar(1.0, -w * sc.signal.sync_residual_s));
            }
            acc += x_m * (direct + ris);
        }
        mu[b] = sqrt_p * acc;
    }
    return mu;
}

/// True two-stage parameter vector of a resolved scenario.
inline Eigen::VectorXd gamma_of(const ResolvedScenario& rs) {
    Eigen::VectorXd gamma(11);
    gamma << rs.rho_bm, rs.bm.elevation, rs.bm.azimuth, rs.bm.distance / speed_of_light,
        rs.rho_brm, rs.rm.elevation, rs.rm.azimuth, rs.rm.distance / speed_of_light,
        rs.base.ms_pose.orientation[0], rs.base.ms_pose.orientation[1],
        rs.base.ms_pose.orientation[2];
    return gamma;
}

/// Central finite difference of mu over one Gamma component.
inline Eigen::VectorXcd fd_two_stage_column(const ResolvedScenario& rs,
                                            const PhaseProfile& profile, int n, int j, double h) {
    Eigen::VectorXd gp = gamma_of(rs), gm = gamma_of(rs);
    gp[j] += h;
    gm[j] -= h;
    const Eigen::VectorXcd mu_p =
        mu_of_gamma(gp, rs.base, rs.n_bs(), rs.n_ris(), rs.n_ms(), profile, n);
    const Eigen::VectorXcd mu_m =
        mu_of_gamma(gm, rs.base, rs.n_bs(), rs.n_ris(), rs.n_ms(), profile, n);
    return (mu_p - mu_m) / (2.0 * h);
}

/// Central finite difference of the response over one state component (direct mode).
inline Eigen::VectorXcd fd_direct_column(const Scenario& sc, const PhaseProfile& profile, int n,
                                         int j, double h) {
    Scenario plus = sc, minus = sc;
    if (j < 3) {
        plus.ms_pose.centroid[j] += h;
        minus.ms_pose.centroid[j] -= h;
    } else {
        plus.ms_pose.orientation[j - 3] += h;
        minus.ms_pose.orientation[j - 3] -= h;
    }
    const Eigen::VectorXcd mu_p = response(resolve_scenario(plus), profile, n).total();
    const Eigen::VectorXcd mu_m = response(resolve_scenario(minus), profile, n).total();
    return (mu_p - mu_m) / (2.0 * h);
}

inline double column_rel_err(const Eigen::VectorXcd& analytic, const Eigen::VectorXcd& fd) {
    const double denom = std::max(analytic.norm(), 1e-300);
    return (analytic - fd).norm() / denom;
}

/// FD steps per two-stage parameter: length-equivalent steps for the delays (larger under
/// differential signaling, where the delay dependence survives only through the wavefront
/// curvature), 1e-6 rad for angles, 1e-4 relative for the gains.
inline double two_stage_step(const Eigen::VectorXd& gamma, int j, bool differential) {
    switch (j) {
    case 0:
    case 4:
        return 1e-4 * std::abs(gamma[j]);
    case 3:
    case 7:
        return (differential ? 1e-3 : 1e-5) / speed_of_light;
    default:
        return 1e-6;
    }
}

/// Adaptive comparison: the nominal step, one decade up, one decade down.
template <typename FdFn>
inline double best_fd_err(const Eigen::VectorXcd& analytic, FdFn&& fd, double h) {
    double best = std::numeric_limits<double>::infinity();
    for (double scale : {1.0, 10.0, 0.1})
        best = std::min(best, column_rel_err(analytic, fd(h * scale)));
    return best;
}

/// Column check against central finite differences with the adaptive steps. Columns whose
/// analytic and numerical magnitudes both sit below `zero_floor` count as matching: they are
/// structural zeros whose finite differences only pick up rounding of the distance kernels.
template <typename FdFn>
inline bool column_matches(const Eigen::VectorXcd& analytic, FdFn&& fd, double h,
                           double zero_floor, double* err_out = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    double smallest_fd = std::numeric_limits<double>::infinity();
    for (double scale : {1.0, 10.0, 0.1}) {
        const Eigen::VectorXcd fd_col = fd(h * scale);
        best = std::min(best, column_rel_err(analytic, fd_col));
        smallest_fd = std::min(smallest_fd, fd_col.norm());
    }
    if (err_out)
        *err_out = best;
    if (best <= 1e-5)
        return true;
    return analytic.norm() <= zero_floor && smallest_fd <= zero_floor;
}

/// Natural magnitude of a full-strength delay-derivative column at subcarrier n.
inline double column_scale(const ResolvedScenario& rs, const PhaseProfile& profile, int n) {
    const double f = rs.base.signal.subcarrier_hz(n);
    return 2.0 * pi * f * response(rs, profile, n).total().norm();
}

} // namespace risloc::testsupport
