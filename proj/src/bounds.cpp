#include "risloc/bounds.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace risloc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
using Cplx = std::complex<double>;

// Derivative kernels of the element-pair delays tau_sm for one link (origin station S -> MS),
// all indexed (s, m). The G2 projection gradients are evaluated in their expanded per-axis
// form, which stays finite at the elevation poles.
struct LinkKernels {
    Eigen::MatrixXd dist;
    Eigen::MatrixXd dtau_theta; // d tau_sm / d theta_SM
    Eigen::MatrixXd dtau_phi;   // d tau_sm / d phi_SM
    Eigen::MatrixXd dtau_tau;   // d tau_sm / d tau_SM
    std::array<Eigen::MatrixXd, 3> dtau_orient; // d tau_sm / d (alpha, beta, gamma)_MS
    std::array<Eigen::MatrixXd, 3> ddist_pos;   // d d_sm / d (x, y, z)_MS
};

std::array<std::vector<Vec3>, 3> ms_local_derivatives(const ResolvedScenario& s) {
    std::array<std::vector<Vec3>, 3> d;
    for (int axis = 0; axis < 3; ++axis) {
        const Mat3 dr = rotation_matrix_derivative(s.base.ms_pose.orientation, axis);
        d[axis].reserve(s.base.ms_layout.initial_positions.size());
        for (const Vec3& p0 : s.base.ms_layout.initial_positions)
            d[axis].push_back(dr * p0);
    }
    return d;
}

LinkKernels make_link_kernels(const ResolvedArray& origin, const ResolvedArray& ms,
                              const LinkGeometry& link,
                              const std::array<std::vector<Vec3>, 3>& dlocal_ms) {
    const int ns = origin.count();
    const int nm = ms.count();
    const double d = link.distance;
    const Vec3 u = link.unit();
    const Vec3 uth = link.unit_d_elevation();
    const double cos_el = std::cos(link.elevation);
    const Vec3 uph_over_cos(-std::sin(link.azimuth), std::cos(link.azimuth), 0.0);

    LinkKernels k;
    k.dist.resize(ns, nm);
    k.dtau_theta.resize(ns, nm);
    k.dtau_phi.resize(ns, nm);
    k.dtau_tau.resize(ns, nm);
    for (auto& m : k.dtau_orient)
        m.resize(ns, nm);
    for (auto& m : k.ddist_pos)
        m.resize(ns, nm);

    for (int si = 0; si < ns; ++si) {
        const Vec3& ps = origin.local_positions[si];
        for (int mi = 0; mi < nm; ++mi) {
            const Vec3& pm = ms.local_positions[mi];
            const Vec3 delta = pm - ps;
            const double g2 = -u.dot(delta);
            const double sq =
                ps.squaredNorm() + pm.squaredNorm() + d * d - 2.0 * (ps.dot(pm) + d * g2);
            const double dsm = std::sqrt(std::max(sq, 0.0));
            k.dist(si, mi) = dsm;
            k.dtau_theta(si, mi) = d * uth.dot(delta) / (speed_of_light * dsm);
            k.dtau_phi(si, mi) = d * cos_el * uph_over_cos.dot(delta) / (speed_of_light * dsm);
            k.dtau_tau(si, mi) = (d + u.dot(delta)) / dsm;
            const Vec3 ray = d * u + delta;
            for (int axis = 0; axis < 3; ++axis)
                k.dtau_orient[axis](si, mi) =
                    ray.dot(dlocal_ms[axis][mi]) / (speed_of_light * dsm);
            // grad of G2 = u . (ps - pm) through the centroid angles, expanded per axis
            const Vec3 dneg = -delta;
            const double th_proj = uth.dot(dneg);
            const double ph_proj = uph_over_cos.dot(dneg);
            for (int axis = 0; axis < 3; ++axis) {
                const double ng2 = (th_proj * uth[axis] + ph_proj * uph_over_cos[axis]) / d;
                k.ddist_pos[axis](si, mi) = (d * u[axis] - u[axis] * g2 - d * ng2) / dsm;
            }
        }
    }
    return k;
}

struct ComplexKernels {
    Eigen::MatrixXcd dtau_theta, dtau_phi, dtau_tau;
    std::array<Eigen::MatrixXcd, 3> dtau_orient;
    std::array<Eigen::MatrixXcd, 3> ddist; // differential-adjusted when asynchronous
};

ComplexKernels cast_kernels(const LinkKernels& k, const LinkGeometry& link, bool differential) {
    ComplexKernels c;
    c.dtau_theta = k.dtau_theta.cast<Cplx>();
    c.dtau_phi = k.dtau_phi.cast<Cplx>();
    if (differential)
        c.dtau_tau = (k.dtau_tau.array() - 1.0).matrix().cast<Cplx>();
    else
        c.dtau_tau = k.dtau_tau.cast<Cplx>();
    const Vec3 u = link.unit();
    for (int axis = 0; axis < 3; ++axis) {
        c.dtau_orient[axis] = k.dtau_orient[axis].cast<Cplx>();
        if (differential)
            c.ddist[axis] = (k.ddist_pos[axis].array() - u[axis]).matrix().cast<Cplx>();
        else
            c.ddist[axis] = k.ddist_pos[axis].cast<Cplx>();
    }
    return c;
}

struct SubcarrierTables {
    Eigen::MatrixXcd v; // N_B x N_M: exp(-j 2 pi f tautilde_bm)
    Eigen::MatrixXcd q; // N_B x N_R: exp(-j 2 pi f (tautilde_br + eta_r))
    Eigen::MatrixXcd s; // N_R x N_M: exp(-j 2 pi f tautilde_rm)
    Eigen::VectorXcd x; // N_M: sqrt(P) x_m[n] exp(-j 2 pi f eta_m)
    Cplx rot_direct{1.0, 0.0};
    Cplx rot_ris{1.0, 0.0};
    double freq{0.0};
};

SubcarrierTables make_tables(const ResolvedScenario& s, int n, bool differential) {
    const SignalConfig& sig = s.base.signal;
    SubcarrierTables t;
    t.freq = sig.subcarrier_hz(n);
    const double w = two_pi * t.freq;
    const double base_bm = differential ? s.bm.distance : 0.0;
    const double base_br = differential ? s.br.distance : 0.0;
    const double base_rm = differential ? s.rm.distance : 0.0;

    t.v.resize(s.n_bs(), s.n_ms());
    for (int b = 0; b < s.n_bs(); ++b)
        for (int m = 0; m < s.n_ms(); ++m)
            t.v(b, m) = std::polar(1.0, -w * (s.dist_bm(b, m) - base_bm) / speed_of_light);

    t.q.resize(s.n_bs(), s.n_ris());
    for (int b = 0; b < s.n_bs(); ++b)
        for (int r = 0; r < s.n_ris(); ++r)
            t.q(b, r) = std::polar(1.0, -w * ((s.dist_br(b, r) - base_br) / speed_of_light +
                                              sig.ris_delay_error(r)));

    t.s.resize(s.n_ris(), s.n_ms());
    for (int r = 0; r < s.n_ris(); ++r)
        for (int m = 0; m < s.n_ms(); ++m)
            t.s(r, m) = std::polar(1.0, -w * (s.dist_rm(r, m) - base_rm) / speed_of_light);

    t.x.resize(s.n_ms());
    for (int m = 0; m < s.n_ms(); ++m)
        t.x[m] = sig.tx_weight(m, s.n_ms()) * sig.data_symbol(n) *
                 std::polar(1.0, -w * sig.ms_delay_error(m));

    if (differential) {
        t.rot_direct = std::polar(1.0, -s.base.offsets.chi_bm);
        t.rot_ris = std::polar(1.0, -s.base.offsets.chi_brm);
    } else {
        t.rot_direct = std::polar(1.0, -w * sig.sync_residual_s);
        t.rot_ris = t.rot_direct;
    }
    return t;
}

template <typename Fn>
Eigen::MatrixXd pairwise_sum(int lo, int hi, Fn&& fn) {
    if (hi - lo == 1)
        return fn(lo);
    const int mid = lo + (hi - lo) / 2;
    return pairwise_sum(lo, mid, fn) + pairwise_sum(mid, hi, std::forward<Fn>(fn));
}

std::string format_combination(const Eigen::VectorXd& v, const std::vector<std::string>& labels) {
    std::vector<int> order(v.size());
    for (int i = 0; i < v.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });
    std::ostringstream os;
    int used = 0;
    for (int idx : order) {
        if (std::abs(v[idx]) < 0.25 && used > 0)
            break;
        if (used > 0)
            os << (v[idx] >= 0 ? " + " : " - ");
        else if (v[idx] < 0)
            os << "-";
        os << std::abs(v[idx]) << "*" << labels[idx];
        if (++used == 3)
            break;
    }
    return os.str();
}

struct InversionResult {
    Eigen::MatrixXd inverse;
    double condition;
    std::vector<std::string> warnings;
};

InversionResult invert_information(const Eigen::MatrixXd& fim, double condition_cap,
                                   const std::vector<std::string>& labels,
                                   SingularPolicy policy) {
    const int n = static_cast<int>(fim.rows());
    Eigen::MatrixXd sym = 0.5 * (fim + fim.transpose());
    Eigen::VectorXd diag(n);
    for (int i = 0; i < n; ++i) {
        diag[i] = sym(i, i);
        if (!(diag[i] > 0.0)) {
            if (policy == SingularPolicy::raise)
                throw UnidentifiableError("parameter carries no information: " + labels[i]);
            diag[i] = 0.0;
        }
    }
    // Entrywise correlation normalization with a single square root per pair; this keeps the
    // normalized matrix bit-identical under power-of-two rescaling of the FIM, so the exact
    // power/noise scaling laws survive ill conditioning.
    const auto pair_scale = [&](int i, int j) {
        if (diag[i] > 0.0 && diag[j] > 0.0)
            return std::sqrt(diag[i] * diag[j]);
        return 1.0;
    };
    Eigen::MatrixXd norm(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            norm(i, j) = (i == j && diag[i] > 0.0) ? 1.0 : sym(i, j) / pair_scale(i, j);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(norm);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("crlb: eigendecomposition failed");
    const double max_eig = eig.eigenvalues().maxCoeff();
    const double min_eig = eig.eigenvalues().minCoeff();
    if (!(max_eig > 0.0))
        throw UnidentifiableError("information matrix has no positive eigenvalues");
    const double cutoff = max_eig / condition_cap;

    InversionResult out;
    out.condition = (min_eig > 0.0) ? max_eig / min_eig : std::numeric_limits<double>::infinity();
    Eigen::MatrixXd inv_norm;
    if (min_eig < cutoff) {
        std::ostringstream os;
        os << "unidentifiable parameter combination (relative eigenvalue "
           << (min_eig / max_eig) << "): "
           << format_combination(eig.eigenvectors().col(0), labels);
        if (policy == SingularPolicy::raise)
            throw UnidentifiableError(os.str());
        // pseudo-inverse: drop every near-null direction, flag each one
        for (int i = 0; i < n; ++i) {
            if (eig.eigenvalues()[i] >= cutoff)
                continue;
            out.warnings.push_back(
                "dropped unidentifiable combination: " +
                format_combination(eig.eigenvectors().col(i), labels));
        }
        Eigen::VectorXd inv_eigs = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i)
            if (eig.eigenvalues()[i] >= cutoff)
                inv_eigs[i] = 1.0 / eig.eigenvalues()[i];
        inv_norm = eig.eigenvectors() * inv_eigs.asDiagonal() * eig.eigenvectors().transpose();
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(norm);
        if (llt.info() == Eigen::Success) {
            inv_norm = llt.solve(Eigen::MatrixXd::Identity(n, n));
        } else {
            inv_norm = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose();
        }
    }
    out.inverse.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.inverse(i, j) = inv_norm(i, j) / pair_scale(i, j);
    return out;
}

std::vector<int> kept_indices(const std::vector<bool>& mask, int n) {
    std::vector<int> keep;
    if (mask.empty()) {
        keep.resize(n);
        for (int i = 0; i < n; ++i)
            keep[i] = i;
        return keep;
    }
    if (static_cast<int>(mask.size()) != n)
        throw std::invalid_argument("crlb: subset mask length does not match the parameter count");
    for (int i = 0; i < n; ++i)
        if (mask[i])
            keep.push_back(i);
    if (keep.empty())
        throw std::invalid_argument("crlb: subset mask excludes every parameter");
    return keep;
}

Eigen::MatrixXd select_square(const Eigen::MatrixXd& m, const std::vector<int>& keep) {
    Eigen::MatrixXd out(keep.size(), keep.size());
    for (size_t i = 0; i < keep.size(); ++i)
        for (size_t j = 0; j < keep.size(); ++j)
            out(i, j) = m(keep[i], keep[j]);
    return out;
}

} // namespace

std::string to_string(BoundMode m) {
    return m == BoundMode::direct ? "direct" : "two_stage";
}

BoundMode bound_mode_from_string(const std::string& name) {
    if (name == "direct")
        return BoundMode::direct;
    if (name == "two_stage" || name == "two-stage")
        return BoundMode::two_stage;
    throw std::invalid_argument("unknown bound mode: " + name);
}

const std::vector<std::string>& direct_parameter_labels() {
    static const std::vector<std::string> labels = {"x_ms",     "y_ms",    "z_ms",
                                                    "alpha_ms", "beta_ms", "gamma_ms"};
    return labels;
}

const std::vector<std::string>& two_stage_parameter_labels() {
    static const std::vector<std::string> labels = {
        "rho_bm", "theta_bm", "phi_bm", "tau_bm",   "rho_brm", "theta_rm",
        "phi_rm", "tau_rm",   "alpha_ms", "beta_ms", "gamma_ms"};
    return labels;
}

double BoundReport::oeb_deg() const {
    return oeb_rad * 180.0 / std::numbers::pi;
}

BoundMode default_bound_mode(Signaling signaling) {
    return signaling == Signaling::synchronous ? BoundMode::two_stage : BoundMode::direct;
}

JacobianResult jacobian_two_stage(const ResolvedScenario& s) {
    JacobianResult out;
    out.matrix.setZero();
    const double lam = s.base.signal.wavelength();

    const auto fill_link = [&](const LinkGeometry& link, int col0, double rho_denominator) {
        const Vec3 u = link.unit();
        const Vec3 uth = link.unit_d_elevation();
        const double d = link.distance;
        const double cos_el = std::cos(link.elevation);
        const Vec3 uph_over_cos(-std::sin(link.azimuth), std::cos(link.azimuth), 0.0);
        const bool pole = link.at_pole || std::abs(cos_el) < 1e-12;
        if (pole)
            out.warnings.push_back(
                "link elevation at pole: azimuth column of the Jacobian is singular and was "
                "zeroed");
        for (int a = 0; a < 3; ++a) {
            out.matrix(a, col0 + 0) =
                -lam * u[a] / (4.0 * std::numbers::pi * rho_denominator * rho_denominator);
            out.matrix(a, col0 + 1) = uth[a] / d;
            out.matrix(a, col0 + 2) = pole ? 0.0 : uph_over_cos[a] / (d * cos_el);
            out.matrix(a, col0 + 3) = u[a] / speed_of_light;
        }
    };

    fill_link(s.bm, 0, s.bm.distance);
    fill_link(s.rm, 4, s.br.distance + s.rm.distance);
    out.matrix.block<3, 3>(3, 8) = Mat3::Identity();
    return out;
}

struct FimAssembler::Impl {
    ResolvedScenario scen;
    BoundMode bound_mode;
    bool differential{false};
    ComplexKernels bm, rm;
    std::array<double, 3> drho_bm{}, drho_brm{};
    std::vector<SubcarrierTables> tables;
    JacobianResult jacobian;

    explicit Impl(const ResolvedScenario& s, BoundMode mode) : scen(s), bound_mode(mode) {
        differential = s.base.signaling == Signaling::asynchronous;
        const auto dlocal = ms_local_derivatives(s);
        bm = cast_kernels(make_link_kernels(s.bs, s.ms, s.bm, dlocal), s.bm, differential);
        rm = cast_kernels(make_link_kernels(s.ris, s.ms, s.rm, dlocal), s.rm, differential);
        const double lam = s.base.signal.wavelength();
        const Vec3 u_bm = s.bm.unit();
        const Vec3 u_rm = s.rm.unit();
        const double den_brm = s.br.distance + s.rm.distance;
        for (int a = 0; a < 3; ++a) {
            drho_bm[a] = -lam * u_bm[a] / (4.0 * std::numbers::pi * s.bm.distance * s.bm.distance);
            drho_brm[a] = -lam * u_rm[a] / (4.0 * std::numbers::pi * den_brm * den_brm);
        }
        tables.reserve(s.base.signal.subcarrier_count);
        for (int n = 1; n <= s.base.signal.subcarrier_count; ++n)
            tables.push_back(make_tables(s, n, differential));
        if (mode == BoundMode::two_stage)
            jacobian = jacobian_two_stage(s);
    }

    Eigen::MatrixXcd derivative_matrix(const PhaseProfile& profile, int n) const {
        const SubcarrierTables& t = tables.at(n - 1);
        const Cplx c2(0.0, -two_pi * t.freq);
        const double rho_bm = scen.rho_bm;
        const double rho_brm = scen.rho_brm;
        const bool use_ris = scen.base.use_ris;

        const Eigen::VectorXcd vx = t.v * t.x;
        Eigen::MatrixXcd qw;
        Eigen::VectorXcd sx;
        if (use_ris) {
            qw = t.q * profile.omega().asDiagonal();
            sx = t.s * t.x;
        }

        const auto direct_col = [&](const Eigen::MatrixXcd& kernel) -> Eigen::VectorXcd {
            return t.rot_direct * (t.v.cwiseProduct(kernel) * t.x);
        };
        const auto ris_col = [&](const Eigen::MatrixXcd& kernel) -> Eigen::VectorXcd {
            return t.rot_ris * (qw * (t.s.cwiseProduct(kernel) * t.x));
        };

        const int cols = bound_mode == BoundMode::two_stage ? 11 : 6;
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(scen.n_bs(), cols);

        if (bound_mode == BoundMode::two_stage) {
            d.col(0) = t.rot_direct * vx;
            d.col(1) = c2 * rho_bm * direct_col(bm.dtau_theta);
            d.col(2) = c2 * rho_bm * direct_col(bm.dtau_phi);
            d.col(3) = c2 * rho_bm * direct_col(bm.dtau_tau);
            if (use_ris) {
                d.col(4) = t.rot_ris * (qw * sx);
                d.col(5) = c2 * rho_brm * ris_col(rm.dtau_theta);
                d.col(6) = c2 * rho_brm * ris_col(rm.dtau_phi);
                d.col(7) = c2 * rho_brm * ris_col(rm.dtau_tau);
            }
            for (int axis = 0; axis < 3; ++axis) {
                d.col(8 + axis) = c2 * rho_bm * direct_col(bm.dtau_orient[axis]);
                if (use_ris)
                    d.col(8 + axis) += c2 * rho_brm * ris_col(rm.dtau_orient[axis]);
            }
        } else {
            const Cplx phase_scale = c2 / speed_of_light;
            for (int axis = 0; axis < 3; ++axis) {
                Eigen::VectorXcd col = t.rot_direct * (drho_bm[axis] * vx) +
                                       rho_bm * phase_scale * direct_col(bm.ddist[axis]);
                if (use_ris)
                    col += t.rot_ris * (drho_brm[axis] * (qw * sx)) +
                           rho_brm * phase_scale * ris_col(rm.ddist[axis]);
                d.col(axis) = col;
            }
            for (int axis = 0; axis < 3; ++axis) {
                d.col(3 + axis) = c2 * rho_bm * direct_col(bm.dtau_orient[axis]);
                if (use_ris)
                    d.col(3 + axis) += c2 * rho_brm * ris_col(rm.dtau_orient[axis]);
            }
        }
        return d;
    }
};

FimAssembler::FimAssembler(const ResolvedScenario& s, BoundMode mode)
    : impl_(std::make_unique<Impl>(s, mode)) {}

FimAssembler::~FimAssembler() = default;
FimAssembler::FimAssembler(FimAssembler&&) noexcept = default;
FimAssembler& FimAssembler::operator=(FimAssembler&&) noexcept = default;

BoundMode FimAssembler::mode() const {
    return impl_->bound_mode;
}

Eigen::MatrixXcd FimAssembler::derivatives(const PhaseProfile& profile, int n) const {
    if (n < 1 || n > impl_->scen.base.signal.subcarrier_count)
        throw std::invalid_argument("derivatives: subcarrier index out of range");
    // the cached tables carry unit transmit power
    return std::sqrt(impl_->scen.base.signal.power_w) * impl_->derivative_matrix(profile, n);
}

FimOutput FimAssembler::assemble(const PhaseProfile& profile) const {
    const ResolvedScenario& s = impl_->scen;
    if (s.base.use_ris && profile.size() != s.n_ris())
        throw std::invalid_argument("assemble: phase profile length must equal the RIS element count");
    const int n_sub = s.base.signal.subcarrier_count;
    const double sigma2 = s.base.noise_variance_w;
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("assemble: noise variance must be positive");

    Eigen::MatrixXd fim = pairwise_sum(1, n_sub + 1, [&](int n) -> Eigen::MatrixXd {
        const Eigen::MatrixXcd d = impl_->derivative_matrix(profile, n);
        return (2.0 / sigma2) * (d.adjoint() * d).real();
    });
    // exact scaling in the transmit power: the tables are built at unit power
    fim *= s.base.signal.power_w;
    fim = 0.5 * (fim + fim.transpose()).eval();

    FimOutput out;
    if (impl_->bound_mode == BoundMode::two_stage) {
        FimMatrix param;
        param.matrix = fim;
        param.parameter_labels = two_stage_parameter_labels();
        param.mode = BoundMode::two_stage;
        param.subcarriers_accumulated = n_sub;

        const Eigen::Matrix<double, 6, 11>& j = impl_->jacobian.matrix;
        FimMatrix state;
        state.matrix = j * fim * j.transpose();
        state.matrix = 0.5 * (state.matrix + state.matrix.transpose()).eval();
        state.parameter_labels = direct_parameter_labels();
        state.mode = BoundMode::two_stage;
        state.subcarriers_accumulated = n_sub;

        out.state_fim = std::move(state);
        out.param_fim = std::move(param);
        out.jacobian = impl_->jacobian;
        out.warnings = impl_->jacobian.warnings;
    } else {
        FimMatrix state;
        state.matrix = fim;
        state.parameter_labels = direct_parameter_labels();
        state.mode = BoundMode::direct;
        state.subcarriers_accumulated = n_sub;
        out.state_fim = std::move(state);
    }
    return out;
}

Eigen::MatrixXcd mean_derivatives_two_stage(const ResolvedScenario& s, const PhaseProfile& profile,
                                            int n) {
    return FimAssembler(s, BoundMode::two_stage).derivatives(profile, n);
}

Eigen::MatrixXcd mean_derivatives_direct(const ResolvedScenario& s, const PhaseProfile& profile,
                                         int n) {
    return FimAssembler(s, BoundMode::direct).derivatives(profile, n);
}

FimOutput assemble_fim(const ResolvedScenario& s, const PhaseProfile& profile, BoundMode mode) {
    return FimAssembler(s, mode).assemble(profile);
}

BoundReport crlb(const FimOutput& fim, const CrlbOptions& options) {
    BoundReport report;
    report.warnings = fim.warnings;

    if (fim.state_fim.mode == BoundMode::two_stage) {
        if (!fim.param_fim || !fim.jacobian)
            throw std::invalid_argument("crlb: two-stage output is missing I(Gamma) or the Jacobian");
        const auto keep = kept_indices(options.subset_mask, 11);
        const Eigen::MatrixXd param_sub = select_square(fim.param_fim->matrix, keep);
        std::vector<std::string> kept_labels;
        for (int idx : keep)
            kept_labels.push_back(fim.param_fim->parameter_labels[idx]);

        // orientation entries of Gamma are the orientation states; masking one out means it
        // is known, so it leaves the state vector as well
        std::vector<int> state_keep = {0, 1, 2};
        for (int k = 0; k < 3; ++k)
            if (std::find(keep.begin(), keep.end(), 8 + k) != keep.end())
                state_keep.push_back(3 + k);
        Eigen::MatrixXd jk(state_keep.size(), keep.size());
        std::vector<std::string> state_labels;
        for (size_t r = 0; r < state_keep.size(); ++r) {
            state_labels.push_back(direct_parameter_labels()[state_keep[r]]);
            for (size_t c = 0; c < keep.size(); ++c)
                jk(r, c) = fim.jacobian->matrix(state_keep[r], keep[c]);
        }
        Eigen::MatrixXd state = jk * param_sub * jk.transpose();

        const InversionResult inv = invert_information(state, options.condition_cap,
                                                       state_labels, options.singular_policy);
        report.condition_number = inv.condition;
        report.warnings.insert(report.warnings.end(), inv.warnings.begin(), inv.warnings.end());
        double pos_var = 0.0;
        double orient_var = 0.0;
        for (size_t i = 0; i < state_keep.size(); ++i) {
            if (state_keep[i] < 3)
                pos_var += inv.inverse(i, i);
            else
                orient_var += inv.inverse(i, i);
        }
        report.peb_m = std::sqrt(pos_var);
        report.oeb_rad = std::sqrt(orient_var);

        try {
            const InversionResult invp = invert_information(param_sub, options.condition_cap,
                                                            kept_labels, options.singular_policy);
            report.warnings.insert(report.warnings.end(), invp.warnings.begin(),
                                   invp.warnings.end());
            for (size_t i = 0; i < keep.size(); ++i)
                report.per_parameter_sigmas.emplace_back(kept_labels[i],
                                                         std::sqrt(invp.inverse(i, i)));
        } catch (const UnidentifiableError& e) {
            report.warnings.push_back(std::string("per-parameter bounds unavailable: ") + e.what());
        }
    } else {
        const auto keep = kept_indices(options.subset_mask, 6);
        const Eigen::MatrixXd sub = select_square(fim.state_fim.matrix, keep);
        std::vector<std::string> kept_labels;
        for (int idx : keep)
            kept_labels.push_back(fim.state_fim.parameter_labels[idx]);
        const InversionResult inv =
            invert_information(sub, options.condition_cap, kept_labels, options.singular_policy);
        report.condition_number = inv.condition;
        report.warnings.insert(report.warnings.end(), inv.warnings.begin(), inv.warnings.end());
        double pos_var = 0.0;
        double orient_var = 0.0;
        for (size_t i = 0; i < keep.size(); ++i) {
            if (keep[i] < 3)
                pos_var += inv.inverse(i, i);
            else
                orient_var += inv.inverse(i, i);
            report.per_parameter_sigmas.emplace_back(kept_labels[i], std::sqrt(inv.inverse(i, i)));
        }
        report.peb_m = std::sqrt(pos_var);
        report.oeb_rad = std::sqrt(orient_var);
    }
    return report;
}

GdopPair gdop(const BoundReport& report, double sigma, double kappa_p, double kappa_phi) {
    if (!(sigma > 0.0) || !(kappa_p > 0.0) || !(kappa_phi > 0.0))
        throw std::invalid_argument("gdop: sigma and normalization factors must be positive");
    return {report.peb_m / (sigma * kappa_p), report.oeb_rad / (sigma * kappa_phi)};
}

GdopPair gdop(const BoundReport& report, const ResolvedScenario& s) {
    const double sigma = std::sqrt(s.base.noise_variance_w);
    const double sqrt_p = std::sqrt(s.base.signal.power_w);
    return gdop(report, sigma, s.bm.distance / sqrt_p, 1.0 / sqrt_p);
}

} // namespace risloc
