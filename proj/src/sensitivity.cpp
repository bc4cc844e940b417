#include "sysrel/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "sysrel/errors.hpp"
#include "sysrel/random.hpp"

namespace sysrel {

Eigen::VectorXd total_sobol(const CompositionExpr& expr, const ResponseGaussians& z, std::size_t n,
                            std::uint64_t seed) {
    const Eigen::Index m = z.means.size();
    if (z.stds.size() != m) throw std::invalid_argument("total_sobol: means and stds differ in length");
    if (n < 256) throw std::invalid_argument("total_sobol: at least 256 base samples are required");
    if ((z.stds.array() < 0.0).any() || !z.means.allFinite() || !z.stds.allFinite())
        throw std::invalid_argument("total_sobol: stds must be finite and non-negative");
    expr.bind(static_cast<std::size_t>(m));
    if ((z.stds.array() == 0.0).all()) throw DegenerateVarianceError("total_sobol: every component has zero spread");

    const Eigen::Index rows = static_cast<Eigen::Index>(n);
    Rng rng(derive_seed(seed, 0x50b01));
    boost::random::normal_distribution<double> normal;
    Eigen::MatrixXd a(m, rows);
    Eigen::MatrixXd b(m, rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < m; ++j) a(j, i) = z.means[j] + z.stds[j] * normal(rng);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < m; ++j) b(j, i) = z.means[j] + z.stds[j] * normal(rng);

    Eigen::VectorXd fa(rows);
    Eigen::VectorXd fb(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        fa[i] = expr.evaluate(a.col(i));
        fb[i] = expr.evaluate(b.col(i));
    }
    if (!fa.allFinite() || !fb.allFinite()) throw EvaluationError("total_sobol: composition produced a non-finite value");

    Eigen::VectorXd all(2 * rows);
    all << fa, fb;
    const double mean = all.mean();
    const double variance = (all.array() - mean).square().sum() / static_cast<double>(2 * rows - 1);
    const double scale = std::max(fa.cwiseAbs().maxCoeff(), fb.cwiseAbs().maxCoeff());
    if (!(variance > 1e-14 * scale * scale))
        throw DegenerateVarianceError("total_sobol: variance of the composition is numerically zero");

    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd ab(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        if (z.stds[j] == 0.0) continue;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            ab = a.col(i);
            ab[j] = b(j, i);
            const double d = fa[i] - expr.evaluate(ab);
            acc += d * d;
        }
        s[j] = std::clamp(acc / (2.0 * static_cast<double>(rows)) / variance, 0.0, 1.05);
    }
    return s;
}

std::size_t select_limit_state(const Eigen::VectorXd& indices) {
    if (indices.size() == 0) throw std::invalid_argument("select_limit_state: empty index vector");
    if (!indices.allFinite()) throw std::invalid_argument("select_limit_state: non-finite index");
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < indices.size(); ++j)
        if (indices[j] > indices[best]) best = j;
    if (!(indices[best] > 0.0)) throw RoutingError("select_limit_state: all total indices vanish");
    return static_cast<std::size_t>(best);
}

}  // namespace sysrel
