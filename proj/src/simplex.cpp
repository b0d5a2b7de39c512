#include "risloc/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>
#include <algorithm>

namespace risloc::detail {


SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, double scale, long max_evals,
                          double ftol_rel) {
    const int dim = static_cast<int>(start.size());
    SimplexResult best;
    best.x = start;
    best.value = std::numeric_limits<double>::infinity();

    auto eval = [&](const Eigen::VectorXd& x) -> double {
        double v;
        try {
            v = objective(x);
        } catch (...) {
            v = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(v))
            v = std::numeric_limits<double>::infinity();
        ++best.evaluations;
        if (v < best.value) {
            best.value = v;
            best.x = x;
        }
        return v;
    };

    std::vector<Eigen::VectorXd> verts(dim + 1, start);
    std::vector<double> vals(dim + 1);
    vals[0] = eval(verts[0]);
    for (int i = 0; i < dim; ++i) {
        verts[i + 1][i] += scale;
        vals[i + 1] = eval(verts[i + 1]);
        if (best.evaluations >= max_evals)
            return best;
    }

    std::vector<int> order(dim + 1);
    while (best.evaluations < max_evals) {
        for (int i = 0; i <= dim; ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return vals[a] < vals[b]; });
        const int lo = order[0];
        const int hi = order[dim];
        const int second_hi = order[dim - 1];

        const double spread = vals[hi] - vals[lo];
        if (spread <= ftol_rel * (std::abs(vals[lo]) + 1e-300))
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i <= dim; ++i)
            if (i != hi)
                centroid += verts[i];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd reflected = centroid + (centroid - verts[hi]);
        const double fr = eval(reflected);
        if (best.evaluations >= max_evals)
            break;

        if (fr < vals[lo]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - verts[hi]);
            const double fe = eval(expanded);
            if (fe < fr) {
                verts[hi] = expanded;
                vals[hi] = fe;
            } else {
                verts[hi] = reflected;
                vals[hi] = fr;
            }
        } else if (fr < vals[second_hi]) {
            verts[hi] = reflected;
            vals[hi] = fr;
        } else {
            const Eigen::VectorXd contracted = centroid + 0.5 * (verts[hi] - centroid);
            const double fc = eval(contracted);
            if (fc < vals[hi]) {
                verts[hi] = contracted;
                vals[hi] = fc;
            } else {
                // shrink toward the best vertex
                for (int i = 0; i <= dim; ++i) {
                    if (i == lo)
                        continue;
                    verts[i] = verts[lo] + 0.5 * (verts[i] - verts[lo]);
                    vals[i] = eval(verts[i]);
                    if (best.evaluations >= max_evals)
                        return best;
                }
            }
        }
    }
    return best;
}

} // namespace risloc::detail
