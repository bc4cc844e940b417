#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sysrel {

enum class MarginalKind { gaussian, lognormal, gumbel, uniform };

const char* to_string(MarginalKind kind);
MarginalKind marginal_kind_from_string(const std::string& name);

/// Univariate input distribution.
///
/// Gaussian, lognormal and Gumbel (maximum) marginals are described by their
/// mean and standard deviation; the natural parameters are computed once at
/// construction. Uniform marginals are described by their bounds.
class Marginal {
public:
    static Marginal gaussian(double mean, double std_dev);
    static Marginal gaussian_cov(double mean, double cov);
    static Marginal lognormal(double mean, double cov);
    static Marginal gumbel(double mean, double cov);
    static Marginal uniform(double lower, double upper);

    MarginalKind kind() const noexcept { return kind_; }
    double mean() const noexcept { return mean_; }
    double std_dev() const noexcept { return std_; }
    /// Coefficient of variation; zero-mean Gaussians report 0.
    double cov() const noexcept { return mean_ != 0.0 ? std_ / std::abs(mean_) : 0.0; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    double median() const;

    /// Natural parameters: (mu_ln, sigma_ln) for lognormal, (location, scale)
    /// for Gumbel, (mean, std) for Gaussian, (lower, upper) for uniform.
    double natural1() const noexcept { return nat1_; }
    double natural2() const noexcept { return nat2_; }

    /// Support of the distribution (infinite ends where unbounded).
    double support_min() const noexcept;
    double support_max() const noexcept;

    bool operator==(const Marginal&) const = default;

private:
    Marginal() = default;

    MarginalKind kind_ = MarginalKind::gaussian;
    double mean_ = 0.0;
    double std_ = 1.0;
    double lower_ = 0.0;
    double upper_ = 0.0;
    double nat1_ = 0.0;
    double nat2_ = 1.0;
};

double marginal_cdf(const Marginal& m, double x);
/// Upper tail 1 - F(x), accurate when F(x) is close to one.
double marginal_ccdf(const Marginal& m, double x);
double marginal_quantile(const Marginal& m, double p);
double marginal_pdf(const Marginal& m, double x);

double standard_normal_cdf(double u);
double standard_normal_quantile(double p);

/// u = Phi^-1(F(x)) and its inverse, evaluated through the tail that keeps precision.
double marginal_to_standard(const Marginal& m, double x);
double marginal_from_standard(const Marginal& m, double u);

/// Independent marginals plus, for every component limit state, the list of
/// global input indices it depends on.
class InputModel {
public:
    InputModel() = default;
    InputModel(std::vector<Marginal> marginals, std::vector<std::vector<std::size_t>> component_maps,
               std::vector<std::string> names = {});

    std::size_t dimension() const noexcept { return marginals_.size(); }
    std::size_t component_count() const noexcept { return maps_.size(); }

    const std::vector<Marginal>& marginals() const noexcept { return marginals_; }
    const Marginal& marginal(std::size_t i) const { return marginals_.at(i); }
    const std::vector<std::vector<std::size_t>>& component_maps() const noexcept { return maps_; }
    const std::vector<std::size_t>& component_map(std::size_t j) const { return maps_.at(j); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Marginals of the inputs that feed component j, in map order.
    std::vector<Marginal> component_marginals(std::size_t j) const;

private:
    std::vector<Marginal> marginals_;
    std::vector<std::vector<std::size_t>> maps_;
    std::vector<std::string> names_;
};

Eigen::VectorXd to_standard(const InputModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd from_standard(const InputModel& model, const Eigen::VectorXd& u);

/// Sub-vector of x selected by a component map.
Eigen::VectorXd project(const Eigen::VectorXd& x, std::span<const std::size_t> map);

struct Hypercube {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dimension() const noexcept { return lower.size(); }
};

struct BoundsMode {
    enum class Kind { five_sigma, quantile };

    Kind kind = Kind::five_sigma;
    double p_lo = 1e-5;
    double p_hi = 1.0 - 1e-5;

    static BoundsMode five_sigma() { return {}; }
    static BoundsMode quantile(double p_lo, double p_hi) { return {Kind::quantile, p_lo, p_hi}; }
    /// five_sigma up to 15 dimensions, quantile(1e-5, 1 - 1e-5) above.
    static BoundsMode automatic(std::size_t dimension);
};

/// Sampling box for the initial experimental designs.
Hypercube initial_design_bounds(const InputModel& model, BoundsMode mode);

/// Latin hypercube sample; returns a (dimension x n) matrix, one point per column.
Eigen::MatrixXd lhs_sample(const Hypercube& bounds, std::size_t n, std::uint64_t seed);

}  // namespace sysrel
