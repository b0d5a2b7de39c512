#pragma once

#include "risloc/signal_model.hpp"

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace risloc {

/// Thrown when the Fisher information matrix is singular (or numerically so) on the
/// requested parameter subspace.
class UnidentifiableError : public std::runtime_error {
  public:
    explicit UnidentifiableError(const std::string& what) : std::runtime_error(what) {}
};

enum class BoundMode { direct, two_stage };

std::string to_string(BoundMode m);
BoundMode bound_mode_from_string(const std::string& name);

/// Parameter orderings are fixed:
///   direct    s     = (x_ms, y_ms, z_ms, alpha_ms, beta_ms, gamma_ms)
///   two-stage Gamma = (rho_bm, theta_bm, phi_bm, tau_bm,
///                      rho_brm, theta_rm, phi_rm, tau_rm,
///                      alpha_ms, beta_ms, gamma_ms)
const std::vector<std::string>& direct_parameter_labels();
const std::vector<std::string>& two_stage_parameter_labels();

struct FimMatrix {
    Eigen::MatrixXd matrix; // symmetric PSD
    std::vector<std::string> parameter_labels;
    BoundMode mode{BoundMode::direct};
    int subcarriers_accumulated{0};
};

struct JacobianResult {
    Eigen::Matrix<double, 6, 11> matrix; // rows: state s, columns: Gamma
    std::vector<std::string> warnings;
};

struct FimOutput {
    FimMatrix state_fim;                   // 6x6 information on s
    std::optional<FimMatrix> param_fim;    // 11x11 information on Gamma (two-stage only)
    std::optional<JacobianResult> jacobian;
    std::vector<std::string> warnings;
};

/// What to do when the FIM is singular on the masked subspace (relative eigenvalue below
/// 1/condition_cap): raise an error naming the unidentifiable combination, or drop the
/// near-null directions (pseudo-inverse) and attach the combination as a warning.
enum class SingularPolicy { raise, pseudo_inverse };

struct CrlbOptions {
    // Maximum admissible condition number of the (normalized) FIM; the reciprocal is the
    // relative eigenvalue cutoff of the pseudo-inverse fallback.
    double condition_cap{1e12};
    // Estimated-parameter flags over the mode's parameter vector (Gamma for two-stage, s for
    // direct); false = treated as known. Empty = all estimated.
    std::vector<bool> subset_mask;
    SingularPolicy singular_policy{SingularPolicy::raise};
};

struct BoundReport {
    double peb_m{0.0};
    double oeb_rad{0.0};
    double gdop_position{std::numeric_limits<double>::quiet_NaN()};
    double gdop_orientation{std::numeric_limits<double>::quiet_NaN()};
    std::vector<std::pair<std::string, double>> per_parameter_sigmas;
    double condition_number{0.0};
    std::vector<std::string> warnings;

    double oeb_deg() const;
};

/// d(mu_b[n])/d(Gamma_j): complex N_B x 11 matrix of analytic derivatives.
Eigen::MatrixXcd mean_derivatives_two_stage(const ResolvedScenario& s, const PhaseProfile& profile,
                                            int n);

/// d(mu_b[n])/d(s_j): complex N_B x 6 matrix of analytic derivatives.
Eigen::MatrixXcd mean_derivatives_direct(const ResolvedScenario& s, const PhaseProfile& profile,
                                         int n);

/// The 6x11 Jacobian d(Gamma)/d(s) of the two-stage parameterization.
JacobianResult jacobian_two_stage(const ResolvedScenario& s);

/// Accumulate the FIM over all subcarriers (deterministic pairwise reduction). In two-stage
/// mode the output carries both I(Gamma) and the chained I(s) = J I(Gamma) J^T.
FimOutput assemble_fim(const ResolvedScenario& s, const PhaseProfile& profile, BoundMode mode);

/// Default bound mode for a signaling scheme: two-stage for synchronous, direct for
/// asynchronous signaling.
BoundMode default_bound_mode(Signaling signaling);

/// Invert the (optionally masked) FIM and extract PEB, OEB and per-parameter deviations.
BoundReport crlb(const FimOutput& fim, const CrlbOptions& options = {});

struct GdopPair {
    double position;
    double orientation;
};

/// GDOP_p = PEB / (sigma * kappa_p), GDOP_phi = OEB / (sigma * kappa_phi).
GdopPair gdop(const BoundReport& report, double sigma, double kappa_p, double kappa_phi);

/// Convenience: kappa_p = d_BM / sqrt(P), kappa_phi = 1 / sqrt(P), sigma from the scenario.
GdopPair gdop(const BoundReport& report, const ResolvedScenario& s);

/// Precomputed workspace for repeated FIM assembly with varying RIS phases (all geometry
/// kernels and per-subcarrier phasor tables are profile-independent).
class FimAssembler {
  public:
    FimAssembler(const ResolvedScenario& s, BoundMode mode);
    ~FimAssembler();
    FimAssembler(FimAssembler&&) noexcept;
    FimAssembler& operator=(FimAssembler&&) noexcept;

    FimOutput assemble(const PhaseProfile& profile) const;
    Eigen::MatrixXcd derivatives(const PhaseProfile& profile, int n) const;
    BoundMode mode() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace risloc
