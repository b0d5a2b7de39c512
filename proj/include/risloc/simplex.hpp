#pragma once

#include <Eigen/Dense>

#include <functional>

namespace risloc::detail {

struct SimplexResult {
    Eigen::VectorXd x;
    double value{0.0};
    long evaluations{0};
};

/// Nelder-Mead simplex minimization; deterministic; returns the best point ever evaluated.
/// Non-finite or throwing objective evaluations count as +infinity.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, double scale, long max_evals,
                          double ftol_rel);

} // namespace risloc::detail
