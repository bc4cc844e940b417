#pragma once

#include <functional>

#include <Eigen/Core>

namespace sysrel {

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
};

struct NelderMeadOptions {
    double initial_step = 0.5;
    int max_evaluations = 500;
    double value_tolerance = 1e-9;
    double step_tolerance = 1e-6;
};

/// Derivative-free minimization inside the box [lower, upper]. Trial points are
/// projected onto the box; non-finite objective values count as +infinity.
MinimizeResult nelder_mead_box(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper, const NelderMeadOptions& options = {});

}  // namespace sysrel
