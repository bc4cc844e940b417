#include <cmath>
#include <limits>

#include <doctest.h>

#include "sysrel/errors.hpp"
#include "sysrel/input_model.hpp"
#include "sysrel/subset_simulation.hpp"

using namespace sysrel;

namespace {

InputModel standard_normal(std::size_t d) {
    std::vector<std::size_t> map(d);
    for (std::size_t i = 0; i < d; ++i) map[i] = i;
    return InputModel(std::vector<Marginal>(d, Marginal::gaussian(0.0, 1.0)), {map});
}

double phi(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("linear limit state") {
    const InputModel model = standard_normal(2);
    SusConfig cfg;
    cfg.seed = 4;
    const SusResult r = subset_simulation([](const Eigen::VectorXd& x) { return 3.0 - x[0]; }, model, cfg);
    const double exact = phi(-3.0);
    CHECK(r.converged);
    CHECK(r.cov > 0.0);
    CHECK(r.cov < 0.2);
    CHECK(std::abs(r.pf - exact) <= 3.0 * r.cov * exact);
    CHECK(r.levels.size() == 3);
    for (std::size_t k = 1; k + 1 < r.levels.size(); ++k) CHECK(r.levels[k].threshold < r.levels[k - 1].threshold);
    CHECK(r.levels.back().threshold == 0.0);
}

TEST_CASE("frequent failure equals crude Monte Carlo") {
    const InputModel model = standard_normal(1);
    SusConfig cfg;
    cfg.samples_per_level = 5000;
    cfg.seed = 8;
    auto lsf = [](const Eigen::VectorXd& x) { return 0.5244 - x[0]; };
    const SusResult r = subset_simulation(lsf, model, cfg);
    REQUIRE(r.levels.size() == 1);
    std::size_t failures = 0;
    for (Eigen::Index i = 0; i < r.values.size(); ++i) failures += r.values[i] <= 0.0;
    CHECK(r.values.size() == 5000);
    CHECK(r.pf == static_cast<double>(failures) / 5000.0);
    CHECK(r.cov == doctest::Approx(std::sqrt((1.0 - r.pf) / (r.pf * 5000.0))));
}

TEST_CASE("pool holds every evaluated point") {
    const InputModel model(std::vector<Marginal>{Marginal::lognormal(2.0, 0.2), Marginal::gaussian(1.0, 0.5)},
                           {{0, 1}});
    auto lsf = [](const Eigen::VectorXd& x) { return 4.5 - x[0] - x[1]; };
    SusConfig cfg;
    cfg.samples_per_level = 2000;
    cfg.seed = 2;
    const SusResult r = subset_simulation(lsf, model, cfg);
    const std::size_t levels = r.levels.size();
    REQUIRE(levels >= 2);
    const std::size_t expected = 2000 + (levels - 1) * (2000 - 200);
    CHECK(r.evaluations() == expected);
    CHECK(static_cast<std::size_t>(r.samples.cols()) == expected);
    CHECK(static_cast<std::size_t>(r.standard_samples.cols()) == expected);
    for (Eigen::Index k = 0; k < r.samples.cols(); k += 97) {
        CHECK(r.values[k] == lsf(r.samples.col(k)));
        CHECK((from_standard(model, r.standard_samples.col(k)) - r.samples.col(k)).norm() <= 1e-12 * r.samples.col(k).norm());
    }
}

TEST_CASE("deterministic for a fixed seed") {
    const InputModel model = standard_normal(3);
    auto lsf = [](const Eigen::VectorXd& x) { return 3.5 - x.sum() / std::sqrt(3.0); };
    SusConfig cfg;
    cfg.samples_per_level = 1000;
    cfg.seed = 17;
    const SusResult a = subset_simulation(lsf, model, cfg);
    const SusResult b = subset_simulation(lsf, model, cfg);
    CHECK(a.pf == b.pf);
    CHECK(a.values == b.values);
    cfg.seed = 18;
    CHECK(subset_simulation(lsf, model, cfg).pf != a.pf);
}

TEST_CASE("unreachable failure returns an upper bound") {
    const InputModel model = standard_normal(1);
    SusConfig cfg;
    cfg.samples_per_level = 1000;
    cfg.max_levels = 2;
    const SusResult r = subset_simulation([](const Eigen::VectorXd& x) { return 20.0 - x[0]; }, model, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.pf == doctest::Approx(0.1 / 1000.0));
    CHECK(std::isinf(r.cov));
}

TEST_CASE("errors") {
    const InputModel model = standard_normal(1);
    SusConfig cfg;
    cfg.samples_per_level = 1000;
    CHECK_THROWS_AS(subset_simulation([](const Eigen::VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); },
                                      model, cfg),
                    EvaluationError);
    cfg.p0 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SusConfig{};
    cfg.samples_per_level = 50;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(reliability_index(0.0), std::domain_error);
    CHECK(reliability_index(phi(-3.0)) == doctest::Approx(3.0).epsilon(1e-12));
}
