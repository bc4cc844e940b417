#include "sysrel/subset_simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "sysrel/errors.hpp"
#include "sysrel/random.hpp"

namespace sysrel {

void SusConfig::validate() const {
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("sus: p0 must lie in (0, 1)");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("sus: rho must lie in (0, 1)");
    if (max_levels < 1) throw std::invalid_argument("sus: max_levels must be at least 1");
    if (static_cast<double>(samples_per_level) * p0 < 10.0 - 1e-9)
        throw std::invalid_argument("sus: samples_per_level * p0 must be at least 10");
}

double reliability_index(double pf) {
    if (!(pf > 0.0 && pf < 1.0)) throw std::domain_error("reliability_index: pf must lie in (0, 1)");
    return -standard_normal_quantile(pf);
}

namespace {

class Pool {
public:
    Pool(Eigen::Index dim, Eigen::Index capacity) : x_(dim, capacity), u_(dim, capacity), g_(capacity) {}

    void push(const Eigen::VectorXd& u, const Eigen::VectorXd& x, double g) {
        if (size_ == g_.size()) {
            const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * size_);
            x_.conservativeResize(Eigen::NoChange, cap);
            u_.conservativeResize(Eigen::NoChange, cap);
            g_.conservativeResize(cap);
        }
        x_.col(size_) = x;
        u_.col(size_) = u;
        g_[size_] = g;
        ++size_;
    }

    void move_into(SusResult& out) {
        out.samples = x_.leftCols(size_);
        out.standard_samples = u_.leftCols(size_);
        out.values = g_.head(size_);
    }

private:
    Eigen::MatrixXd x_;
    Eigen::MatrixXd u_;
    Eigen::VectorXd g_;
    Eigen::Index size_ = 0;
};

// Au & Beck correlation factor for indicators arranged in chains.
double chain_correlation_factor(const std::vector<char>& indicator, const std::vector<std::size_t>& chain_start,
                                double p) {
    const double r0 = p * (1.0 - p);
    if (r0 <= 0.0) return 0.0;
    std::size_t longest = 0;
    for (std::size_t c = 0; c + 1 < chain_start.size(); ++c)
        longest = std::max(longest, chain_start[c + 1] - chain_start[c]);
    double gamma = 0.0;
    for (std::size_t k = 1; k < longest; ++k) {
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t c = 0; c + 1 < chain_start.size(); ++c) {
            for (std::size_t t = chain_start[c]; t + k < chain_start[c + 1]; ++t) {
                sum += static_cast<double>(indicator[t] && indicator[t + k]);
                ++pairs;
            }
        }
        if (pairs == 0) break;
        const double rk = sum / static_cast<double>(pairs) - p * p;
        gamma += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(longest)) * rk / r0;
    }
    return std::max(gamma, 0.0);
}

}  // namespace

SusResult subset_simulation(const LimitState& lsf, const InputModel& model, const SusConfig& cfg) {
    cfg.validate();
    const Eigen::Index dim = static_cast<Eigen::Index>(model.dimension());
    if (dim == 0) throw std::invalid_argument("subset_simulation: input model is empty");
    const std::size_t n = cfg.samples_per_level;
    const std::size_t n_seeds = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.p0));
    const double sqrt_1m_rho2 = std::sqrt(1.0 - cfg.rho * cfg.rho);

    Rng rng(derive_seed(cfg.seed, 0x5055ULL));
    boost::random::normal_distribution<double> normal;

    Pool pool(dim, static_cast<Eigen::Index>(n + 3 * (n - n_seeds)));
    Eigen::VectorXd u(dim);
    Eigen::VectorXd x(dim);
    auto evaluate = [&](const Eigen::VectorXd& uu) {
        x = from_standard(model, uu);
        const double g = lsf(x);
        if (!std::isfinite(g)) {
            std::ostringstream os;
            os << "subset_simulation: limit state returned " << g << " at x = [" << x.transpose() << "]";
            throw EvaluationError(os.str());
        }
        pool.push(uu, x, g);
        return g;
    };

    // Current level: samples stored chain by chain.
    Eigen::MatrixXd level_u(dim, static_cast<Eigen::Index>(n));
    std::vector<double> level_g(n);
    std::vector<std::size_t> chain_start(n + 1);
    std::iota(chain_start.begin(), chain_start.end(), std::size_t{0});  // level 0: n chains of length 1
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < dim; ++k) u[k] = normal(rng);
        level_u.col(static_cast<Eigen::Index>(i)) = u;
        level_g[i] = evaluate(u);
    }

    SusResult result;
    double pf = 1.0;
    double cov2 = 0.0;
    double acceptance = 0.0;
    std::vector<std::size_t> order(n);
    std::vector<char> indicator(n);

    for (std::size_t level = 0;; ++level) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return level_g[a] < level_g[b]; });
        const std::size_t failures =
            static_cast<std::size_t>(std::count_if(level_g.begin(), level_g.end(), [](double g) { return g <= 0.0; }));
        const bool last = level_g[order[n_seeds - 1]] <= 0.0;
        const bool truncated = !last && level + 1 == cfg.max_levels;

        SusLevel info;
        info.acceptance_rate = acceptance;
        double threshold = 0.0;
        if (last || truncated) {
            info.threshold = 0.0;
            info.conditional_probability = static_cast<double>(failures) / static_cast<double>(n);
        } else {
            threshold = 0.5 * (level_g[order[n_seeds - 1]] + level_g[order[n_seeds]]);
            info.threshold = threshold;
            info.conditional_probability = static_cast<double>(n_seeds) / static_cast<double>(n);
        }
        const double p = info.conditional_probability;
        for (std::size_t i = 0; i < n; ++i) indicator[i] = level_g[i] <= threshold;
        if (p > 0.0) {
            const double gamma = level == 0 ? 0.0 : chain_correlation_factor(indicator, chain_start, p);
            const double d2 = (1.0 - p) / (p * static_cast<double>(n)) * (1.0 + gamma);
            info.cov = std::sqrt(d2);
            cov2 += d2;
        } else {
            info.cov = std::numeric_limits<double>::infinity();
        }
        result.levels.push_back(info);

        if (last || truncated) {
            result.converged = last;
            if (failures > 0) {
                pf *= p;
                result.cov = std::sqrt(cov2);
            } else {
                pf /= static_cast<double>(n);  // upper bound: fewer than one failure in n samples
                result.cov = std::numeric_limits<double>::infinity();
            }
            break;
        }
        pf *= p;

        // Seeds are the n_seeds best samples, in ascending order of g; chain lengths
        // split n as evenly as possible, longer chains first.
        Eigen::MatrixXd next_u(dim, static_cast<Eigen::Index>(n));
        std::vector<double> next_g(n);
        const std::size_t base_len = n / n_seeds;
        const std::size_t extra = n % n_seeds;
        std::size_t pos = 0;
        std::size_t accepted = 0;
        std::size_t proposed = 0;
        for (std::size_t c = 0; c < n_seeds; ++c) {
            chain_start[c] = pos;
            const std::size_t len = base_len + (c < extra ? 1 : 0);
            Eigen::VectorXd current = level_u.col(static_cast<Eigen::Index>(order[c]));
            double g_current = level_g[order[c]];
            next_u.col(static_cast<Eigen::Index>(pos)) = current;
            next_g[pos++] = g_current;
            for (std::size_t t = 1; t < len; ++t) {
                for (Eigen::Index k = 0; k < dim; ++k) u[k] = cfg.rho * current[k] + sqrt_1m_rho2 * normal(rng);
                const double g = evaluate(u);
                ++proposed;
                if (g <= threshold) {
                    current = u;
                    g_current = g;
                    ++accepted;
                }
                next_u.col(static_cast<Eigen::Index>(pos)) = current;
                next_g[pos++] = g_current;
            }
        }
        chain_start[n_seeds] = pos;
        chain_start.resize(n_seeds + 1);
        acceptance = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
        level_u = std::move(next_u);
        level_g = std::move(next_g);
    }

    result.pf = pf;
    pool.move_into(result);
    return result;
}

}  // namespace sysrel
