#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "sysrel/composition.hpp"

namespace sysrel {

/// Independent Gaussian component responses Z_j ~ N(means_j, stds_j^2).
struct ResponseGaussians {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;
};

/// Jansen estimator of the total Sobol' indices of h(Z). Components with zero
/// spread get exactly 0; estimates are clamped to [0, 1.05].
/// Throws DegenerateVarianceError when the variance of h(Z) is numerically zero.
Eigen::VectorXd total_sobol(const CompositionExpr& expr, const ResponseGaussians& z, std::size_t n = 4096,
                            std::uint64_t seed = 0);

/// Index of the largest entry; ties go to the smallest index. Throws
/// RoutingError when every entry is zero.
std::size_t select_limit_state(const Eigen::VectorXd& indices);

}  // namespace sysrel
