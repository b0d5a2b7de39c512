#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>

namespace risloc {

enum class PhaseStrategy { mirror, random, proposed, optimized_crlb, quantized };

std::string to_string(PhaseStrategy s);
PhaseStrategy phase_strategy_from_string(const std::string& name);

/// RIS phase shifts Theta and the induced unit-modulus reflection weights omega_r = e^{j theta_r}.
struct PhaseProfile {
    PhaseStrategy strategy{PhaseStrategy::mirror};
    Eigen::VectorXd phases; // length N_R, each in [0, 2*pi)
    std::optional<std::uint64_t> seed;
    std::optional<int> quantization_levels;

    int size() const { return static_cast<int>(phases.size()); }

    std::complex<double> omega(int r) const {
        return std::polar(1.0, phases[r]);
    }

    Eigen::VectorXcd omega() const {
        Eigen::VectorXcd w(phases.size());
        for (int r = 0; r < phases.size(); ++r)
            w[r] = omega(r);
        return w;
    }
};

/// Reduce an angle to [0, 2*pi).
double wrap_to_2pi(double angle);

} // namespace risloc
