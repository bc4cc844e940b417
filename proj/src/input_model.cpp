#include "sysrel/input_model.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/extreme_value.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "sysrel/random.hpp"

namespace sysrel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Bounded supports are sampled this far inside their end points so that
// every design point has a finite standard-normal image.
constexpr double kSupportInset = 1e-12;
// Largest |u| used when mapping from standard space; Phi(-37) is still a normal double.
constexpr double kMaxStandard = 37.0;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite argument");
}

void require_probability(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("marginal_quantile: probability must lie in (0, 1)");
}

boost::math::lognormal_distribution<double> as_lognormal(const Marginal& m) {
    return {m.natural1(), m.natural2()};
}

boost::math::extreme_value_distribution<double> as_gumbel(const Marginal& m) {
    return {m.natural1(), m.natural2()};
}

}  // namespace

const char* to_string(MarginalKind kind) {
    switch (kind) {
        case MarginalKind::gaussian: return "gaussian";
        case MarginalKind::lognormal: return "lognormal";
        case MarginalKind::gumbel: return "gumbel";
        case MarginalKind::uniform: return "uniform";
    }
    return "unknown";
}

MarginalKind marginal_kind_from_string(const std::string& name) {
    if (name == "gaussian" || name == "normal") return MarginalKind::gaussian;
    if (name == "lognormal") return MarginalKind::lognormal;
    if (name == "gumbel") return MarginalKind::gumbel;
    if (name == "uniform") return MarginalKind::uniform;
    throw std::invalid_argument("unknown marginal kind '" + name + "' (expected gaussian, lognormal, gumbel or uniform)");
}

Marginal Marginal::gaussian(double mean, double std_dev) {
    if (!std::isfinite(mean) || !(std_dev > 0.0) || !std::isfinite(std_dev))
        throw std::invalid_argument("gaussian marginal requires a finite mean and std > 0");
    Marginal m;
    m.kind_ = MarginalKind::gaussian;
    m.mean_ = mean;
    m.std_ = std_dev;
    m.nat1_ = mean;
    m.nat2_ = std_dev;
    m.lower_ = -kInf;
    m.upper_ = kInf;
    return m;
}

Marginal Marginal::gaussian_cov(double mean, double cov) {
    if (!(cov > 0.0) || mean == 0.0)
        throw std::invalid_argument("gaussian marginal in (mean, CoV) form requires mean != 0 and CoV > 0");
    return gaussian(mean, cov * std::abs(mean));
}

Marginal Marginal::lognormal(double mean, double cov) {
    if (!(mean > 0.0) || !(cov > 0.0) || !std::isfinite(mean) || !std::isfinite(cov))
        throw std::invalid_argument("lognormal marginal requires mean > 0 and CoV > 0");
    Marginal m;
    m.kind_ = MarginalKind::lognormal;
    m.mean_ = mean;
    m.std_ = cov * mean;
    const double var_ln = std::log1p(cov * cov);
    m.nat2_ = std::sqrt(var_ln);
    m.nat1_ = std::log(mean) - 0.5 * var_ln;
    m.lower_ = 0.0;
    m.upper_ = kInf;
    return m;
}

Marginal Marginal::gumbel(double mean, double cov) {
    if (!(mean > 0.0) || !(cov > 0.0) || !std::isfinite(mean) || !std::isfinite(cov))
        throw std::invalid_argument("gumbel marginal requires mean > 0 and CoV > 0");
    Marginal m;
    m.kind_ = MarginalKind::gumbel;
    m.mean_ = mean;
    m.std_ = cov * mean;
    m.nat2_ = m.std_ * std::sqrt(6.0) / std::numbers::pi;
    m.nat1_ = mean - std::numbers::egamma * m.nat2_;
    m.lower_ = -kInf;
    m.upper_ = kInf;
    return m;
}

Marginal Marginal::uniform(double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
        throw std::invalid_argument("uniform marginal requires finite lower < upper");
    Marginal m;
    m.kind_ = MarginalKind::uniform;
    m.lower_ = lower;
    m.upper_ = upper;
    m.mean_ = 0.5 * (lower + upper);
    m.std_ = (upper - lower) / std::sqrt(12.0);
    m.nat1_ = lower;
    m.nat2_ = upper;
    return m;
}

double Marginal::median() const {
    switch (kind_) {
        case MarginalKind::lognormal: return std::exp(nat1_);
        case MarginalKind::gumbel: return nat1_ - nat2_ * std::log(std::numbers::ln2);
        default: return mean_;
    }
}

double Marginal::support_min() const noexcept {
    switch (kind_) {
        case MarginalKind::lognormal: return 0.0;
        case MarginalKind::uniform: return lower_;
        default: return -kInf;
    }
}

double Marginal::support_max() const noexcept {
    return kind_ == MarginalKind::uniform ? upper_ : kInf;
}

double standard_normal_cdf(double u) {
    return 0.5 * boost::math::erfc(-u / std::numbers::sqrt2);
}

double standard_normal_quantile(double p) {
    require_probability(p);
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double marginal_cdf(const Marginal& m, double x) {
    require_finite(x, "marginal_cdf");
    switch (m.kind()) {
        case MarginalKind::gaussian: return standard_normal_cdf((x - m.mean()) / m.std_dev());
        case MarginalKind::lognormal: return x <= 0.0 ? 0.0 : boost::math::cdf(as_lognormal(m), x);
        case MarginalKind::gumbel: return boost::math::cdf(as_gumbel(m), x);
        case MarginalKind::uniform: return std::clamp((x - m.lower()) / (m.upper() - m.lower()), 0.0, 1.0);
    }
    return 0.0;
}

double marginal_ccdf(const Marginal& m, double x) {
    require_finite(x, "marginal_ccdf");
    switch (m.kind()) {
        case MarginalKind::gaussian: return standard_normal_cdf(-(x - m.mean()) / m.std_dev());
        case MarginalKind::lognormal:
            return x <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(as_lognormal(m), x));
        case MarginalKind::gumbel: return boost::math::cdf(boost::math::complement(as_gumbel(m), x));
        case MarginalKind::uniform: return std::clamp((m.upper() - x) / (m.upper() - m.lower()), 0.0, 1.0);
    }
    return 0.0;
}

double marginal_quantile(const Marginal& m, double p) {
    require_probability(p);
    switch (m.kind()) {
        case MarginalKind::gaussian: return m.mean() + m.std_dev() * standard_normal_quantile(p);
        case MarginalKind::lognormal: return boost::math::quantile(as_lognormal(m), p);
        case MarginalKind::gumbel: return boost::math::quantile(as_gumbel(m), p);
        case MarginalKind::uniform: return m.lower() + p * (m.upper() - m.lower());
    }
    return 0.0;
}

double marginal_pdf(const Marginal& m, double x) {
    require_finite(x, "marginal_pdf");
    switch (m.kind()) {
        case MarginalKind::gaussian: {
            const double z = (x - m.mean()) / m.std_dev();
            return std::exp(-0.5 * z * z) / (m.std_dev() * std::sqrt(2.0 * std::numbers::pi));
        }
        case MarginalKind::lognormal: return x <= 0.0 ? 0.0 : boost::math::pdf(as_lognormal(m), x);
        case MarginalKind::gumbel: return boost::math::pdf(as_gumbel(m), x);
        case MarginalKind::uniform: return (x < m.lower() || x > m.upper()) ? 0.0 : 1.0 / (m.upper() - m.lower());
    }
    return 0.0;
}

double marginal_to_standard(const Marginal& m, double x) {
    require_finite(x, "to_standard");
    switch (m.kind()) {
        case MarginalKind::gaussian: return (x - m.mean()) / m.std_dev();
        case MarginalKind::lognormal:
            if (!(x > 0.0)) throw std::domain_error("to_standard: lognormal input must be positive");
            return (std::log(x) - m.natural1()) / m.natural2();
        case MarginalKind::gumbel:
        case MarginalKind::uniform: {
            if (m.kind() == MarginalKind::uniform && !(x > m.lower() && x < m.upper()))
                throw std::domain_error("to_standard: value outside the uniform support");
            const double p = marginal_cdf(m, x);
            if (p <= 0.5) {
                if (!(p > 0.0)) throw std::domain_error("to_standard: value too far in the lower tail");
                return standard_normal_quantile(p);
            }
            const double q = marginal_ccdf(m, x);
            if (!(q > 0.0)) throw std::domain_error("to_standard: value too far in the upper tail");
            return -standard_normal_quantile(q);
        }
    }
    return 0.0;
}

double marginal_from_standard(const Marginal& m, double u) {
    require_finite(u, "from_standard");
    switch (m.kind()) {
        case MarginalKind::gaussian: return m.mean() + m.std_dev() * u;
        case MarginalKind::lognormal: return std::exp(m.natural1() + m.natural2() * u);
        case MarginalKind::gumbel: {
            const double uc = std::clamp(u, -kMaxStandard, kMaxStandard);
            if (uc <= 0.0) return boost::math::quantile(as_gumbel(m), standard_normal_cdf(uc));
            return boost::math::quantile(boost::math::complement(as_gumbel(m), standard_normal_cdf(-uc)));
        }
        case MarginalKind::uniform: {
            const double uc = std::clamp(u, -kMaxStandard, kMaxStandard);
            const double width = m.upper() - m.lower();
            if (uc <= 0.0) return m.lower() + width * standard_normal_cdf(uc);
            return m.upper() - width * standard_normal_cdf(-uc);
        }
    }
    return 0.0;
}

InputModel::InputModel(std::vector<Marginal> marginals, std::vector<std::vector<std::size_t>> component_maps,
                       std::vector<std::string> names)
    : marginals_(std::move(marginals)), maps_(std::move(component_maps)), names_(std::move(names)) {
    if (marginals_.empty()) throw std::invalid_argument("InputModel: at least one marginal is required");
    const std::size_t M = marginals_.size();
    if (names_.empty()) {
        for (std::size_t i = 0; i < M; ++i) names_.push_back("x" + std::to_string(i + 1));
    } else if (names_.size() != M) {
        throw std::invalid_argument("InputModel: names and marginals differ in length");
    }
    for (std::size_t j = 0; j < maps_.size(); ++j) {
        const auto& map = maps_[j];
        if (map.empty()) throw std::invalid_argument("InputModel: component map " + std::to_string(j + 1) + " is empty");
        std::vector<std::size_t> sorted = map;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("InputModel: component map " + std::to_string(j + 1) + " has duplicate indices");
        if (sorted.back() >= M)
            throw std::invalid_argument("InputModel: component map " + std::to_string(j + 1) + " references input " +
                                        std::to_string(sorted.back()) + " but only " + std::to_string(M) +
                                        " inputs exist");
    }
}

std::vector<Marginal> InputModel::component_marginals(std::size_t j) const {
    std::vector<Marginal> out;
    for (std::size_t i : component_map(j)) out.push_back(marginals_[i]);
    return out;
}

Eigen::VectorXd to_standard(const InputModel& model, const Eigen::VectorXd& x) {
    if (static_cast<std::size_t>(x.size()) != model.dimension())
        throw std::invalid_argument("to_standard: dimension mismatch");
    Eigen::VectorXd u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) u[i] = marginal_to_standard(model.marginals()[i], x[i]);
    return u;
}

Eigen::VectorXd from_standard(const InputModel& model, const Eigen::VectorXd& u) {
    if (static_cast<std::size_t>(u.size()) != model.dimension())
        throw std::invalid_argument("from_standard: dimension mismatch");
    Eigen::VectorXd x(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) x[i] = marginal_from_standard(model.marginals()[i], u[i]);
    return x;
}

Eigen::VectorXd project(const Eigen::VectorXd& x, std::span<const std::size_t> map) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(map.size()));
    for (std::size_t k = 0; k < map.size(); ++k) {
        if (map[k] >= static_cast<std::size_t>(x.size())) throw std::invalid_argument("project: index out of range");
        out[static_cast<Eigen::Index>(k)] = x[static_cast<Eigen::Index>(map[k])];
    }
    return out;
}

BoundsMode BoundsMode::automatic(std::size_t dimension) {
    return dimension <= 15 ? five_sigma() : quantile(1e-5, 1.0 - 1e-5);
}

Hypercube initial_design_bounds(const InputModel& model, BoundsMode mode) {
    const auto M = static_cast<Eigen::Index>(model.dimension());
    Hypercube box{Eigen::VectorXd(M), Eigen::VectorXd(M)};
    if (mode.kind == BoundsMode::Kind::quantile) {
        if (!(mode.p_lo > 0.0 && mode.p_lo < mode.p_hi && mode.p_hi < 1.0))
            throw std::invalid_argument("initial_design_bounds: need 0 < p_lo < p_hi < 1");
    }
    for (Eigen::Index i = 0; i < M; ++i) {
        const Marginal& m = model.marginals()[static_cast<std::size_t>(i)];
        double lo, hi;
        if (mode.kind == BoundsMode::Kind::quantile) {
            lo = marginal_quantile(m, mode.p_lo);
            hi = marginal_quantile(m, mode.p_hi);
        } else {
            lo = m.mean() - 5.0 * m.std_dev();
            hi = m.mean() + 5.0 * m.std_dev();
            switch (m.kind()) {
                case MarginalKind::lognormal: lo = std::max(lo, 1e-6 * m.median()); break;
                case MarginalKind::uniform:
                    lo = std::max(lo, marginal_quantile(m, kSupportInset));
                    hi = std::min(hi, marginal_quantile(m, 1.0 - kSupportInset));
                    break;
                default: break;
            }
        }
        box.lower[i] = lo;
        box.upper[i] = hi;
    }
    return box;
}

Eigen::MatrixXd lhs_sample(const Hypercube& bounds, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("lhs_sample: n must be at least 1");
    const Eigen::Index d = bounds.dimension();
    Eigen::MatrixXd points(d, static_cast<Eigen::Index>(n));
    Rng rng(derive_seed(seed, 0x1a5));
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<std::size_t> strata(n);
    for (Eigen::Index i = 0; i < d; ++i) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        std::shuffle(strata.begin(), strata.end(), rng);
        const double width = bounds.upper[i] - bounds.lower[i];
        for (std::size_t k = 0; k < n; ++k) {
            const double t = (static_cast<double>(strata[k]) + jitter(rng)) / static_cast<double>(n);
            points(i, static_cast<Eigen::Index>(k)) = bounds.lower[i] + std::min(t, std::nextafter(1.0, 0.0)) * width;
        }
    }
    return points;
}

}  // namespace sysrel
