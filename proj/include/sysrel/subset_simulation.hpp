#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "sysrel/input_model.hpp"

namespace sysrel {

/// Limit state over the full physical input vector; failure is g <= 0.
using LimitState = std::function<double(const Eigen::VectorXd&)>;

struct SusConfig {
    std::size_t samples_per_level = 10000;
    double p0 = 0.1;
    std::size_t max_levels = 10;
    double rho = 0.8;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument unless p0, rho in (0,1), max_levels >= 1 and
    /// samples_per_level * p0 >= 10.
    void validate() const;
};

struct SusLevel {
    /// Intermediate threshold b_l; the last level reports 0.
    double threshold = 0.0;
    /// Fraction of the level's samples at or below the next threshold.
    double conditional_probability = 0.0;
    /// MCMC acceptance rate of the chains that produced this level (0 for level 0).
    double acceptance_rate = 0.0;
    double cov = 0.0;
};

struct SusResult {
    double pf = 0.0;
    /// Coefficient of variation of the pf estimator; +inf when no failure was found.
    double cov = 0.0;
    /// False when max_levels was reached before a threshold reached zero.
    bool converged = false;
    std::vector<SusLevel> levels;

    /// Every point whose limit state was evaluated, one per column, in generation order.
    Eigen::MatrixXd samples;
    Eigen::MatrixXd standard_samples;
    Eigen::VectorXd values;

    std::size_t evaluations() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// Subset simulation in standard-normal space with conditional-sampling MCMC
/// (u' = rho u + sqrt(1 - rho^2) xi, accepted iff it stays in the current level).
SusResult subset_simulation(const LimitState& lsf, const InputModel& model, const SusConfig& cfg);

/// beta = -Phi^-1(pf).
double reliability_index(double pf);

}  // namespace sysrel
