#include "sysrel/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace sysrel {

MinimizeResult nelder_mead_box(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper, const NelderMeadOptions& options) {
    const Eigen::Index d = start.size();
    int evaluations = 0;
    auto project_box = [&](Eigen::VectorXd x) { return x.cwiseMax(lower).cwiseMin(upper); };
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> simplex;
    std::vector<double> values;
    auto build_simplex = [&](const Eigen::VectorXd& origin, double origin_value) {
        simplex.assign(1, origin);
        values.assign(1, origin_value);
        for (Eigen::Index i = 0; i < d; ++i) {
            Eigen::VectorXd v = origin;
            const double room_up = upper[i] - origin[i];
            v[i] += room_up >= options.initial_step ? options.initial_step : -options.initial_step;
            v = project_box(v);
            simplex.push_back(v);
            values.push_back(eval(v));
        }
    };

    Eigen::VectorXd x0 = project_box(start);
    build_simplex(x0, eval(x0));

    std::vector<std::size_t> order(simplex.size());
    int restarts = 0;
    while (true) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        {
            std::vector<Eigen::VectorXd> s;
            std::vector<double> v;
            for (std::size_t k : order) {
                s.push_back(simplex[k]);
                v.push_back(values[k]);
            }
            simplex = std::move(s);
            values = std::move(v);
        }
        const double best = values.front();
        const double worst = values.back();
        double size = 0.0;
        for (std::size_t k = 1; k < simplex.size(); ++k)
            size = std::max(size, (simplex[k] - simplex[0]).cwiseAbs().maxCoeff());
        const bool flat = std::isfinite(worst) &&
                          std::abs(worst - best) <= options.value_tolerance * (std::abs(best) + 1e-12);
        if (flat || size <= options.step_tolerance ||
            evaluations >= options.max_evaluations) {
            // One restart around the incumbent guards against a collapsed simplex.
            if (restarts == 0 && evaluations + d + 1 < options.max_evaluations && size > 0.0) {
                ++restarts;
                build_simplex(simplex.front(), values.front());
                order.resize(simplex.size());
                continue;
            }
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (Eigen::Index k = 0; k < d; ++k) centroid += simplex[static_cast<std::size_t>(k)];
        centroid /= static_cast<double>(d);
        const Eigen::VectorXd& xw = simplex.back();

        const Eigen::VectorXd xr = project_box(centroid + (centroid - xw));
        const double fr = eval(xr);
        if (fr < values.front()) {
            const Eigen::VectorXd xe = project_box(centroid + 2.0 * (centroid - xw));
            const double fe = eval(xe);
            if (fe < fr) {
                simplex.back() = xe;
                values.back() = fe;
            } else {
                simplex.back() = xr;
                values.back() = fr;
            }
            continue;
        }
        if (fr < values[values.size() - 2]) {
            simplex.back() = xr;
            values.back() = fr;
            continue;
        }
        const bool outside = fr < values.back();
        const Eigen::VectorXd xc = outside ? project_box(centroid + 0.5 * (xr - centroid))
                                           : project_box(centroid + 0.5 * (xw - centroid));
        const double fc = eval(xc);
        if (fc < std::min(fr, values.back())) {
            simplex.back() = xc;
            values.back() = fc;
            continue;
        }
        for (std::size_t k = 1; k < simplex.size(); ++k) {
            simplex[k] = project_box(simplex[0] + 0.5 * (simplex[k] - simplex[0]));
            values[k] = eval(simplex[k]);
        }
    }
    return {simplex.front(), values.front(), evaluations};
}

}  // namespace sysrel
