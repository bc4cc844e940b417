#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <doctest.h>

#include "sysrel/input_model.hpp"
#include "sysrel/random.hpp"

using namespace sysrel;

namespace {

constexpr double kPi = 3.14159265358979323846;

double phi(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

// Closed-form lognormal cdf from mean / cov by moment matching.
double lognormal_cdf_oracle(double mean, double cov, double x) {
    const double s2 = std::log1p(cov * cov);
    const double mu = std::log(mean) - 0.5 * s2;
    return phi((std::log(x) - mu) / std::sqrt(s2));
}

double gumbel_cdf_oracle(double mean, double cov, double x) {
    const double beta = cov * std::abs(mean) * std::sqrt(6.0) / kPi;
    const double loc = mean - 0.5772156649015329 * beta;
    return std::exp(-std::exp(-(x - loc) / beta));
}

// Inverts a monotone cdf by bisection.
template <class F>
double bisect(F cdf, double p, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<Marginal> sample_marginals() {
    return {Marginal::gaussian(3.0, 2.0), Marginal::lognormal(20000.0, 0.07), Marginal::lognormal(1.34e7, 0.18),
            Marginal::gumbel(50.0, 0.2), Marginal::uniform(-30.0, 30.0)};
}

}  // namespace

TEST_CASE("quantile examples") {
    CHECK(marginal_quantile(Marginal::gaussian(0.0, 1.0), 0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(marginal_quantile(Marginal::uniform(-30.0, 30.0), 0.25) == doctest::Approx(-15.0).epsilon(1e-14));
    CHECK(marginal_quantile(Marginal::gaussian(0.0, 1.0), 0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("lognormal median and cdf against closed form") {
    const Marginal m = Marginal::lognormal(20000.0, 0.07);
    CHECK(m.median() == doctest::Approx(20000.0 / std::sqrt(1.0 + 0.07 * 0.07)).epsilon(1e-13));
    CHECK(marginal_quantile(m, 0.5) == doctest::Approx(m.median()).epsilon(1e-12));
    for (double x : {15000.0, 18000.0, 20000.0, 23000.0, 26000.0})
        CHECK(marginal_cdf(m, x) == doctest::Approx(lognormal_cdf_oracle(20000.0, 0.07, x)).epsilon(1e-12));
    const double u = 1.0;
    const double x = bisect([](double t) { return lognormal_cdf_oracle(20000.0, 0.07, t); }, phi(u), 1.0, 1e5);
    CHECK(marginal_from_standard(m, u) == doctest::Approx(x).epsilon(1e-10));
}

TEST_CASE("gumbel cdf against closed form") {
    const Marginal m = Marginal::gumbel(50.0, 0.2);
    for (double x : {30.0, 45.0, 50.0, 60.0, 90.0})
        CHECK(marginal_cdf(m, x) == doctest::Approx(gumbel_cdf_oracle(50.0, 0.2, x)).epsilon(1e-12));
}

TEST_CASE("quantile inverts cdf for every kind") {
    for (const Marginal& m : sample_marginals()) {
        for (double p : {1e-10, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
            const double x = marginal_quantile(m, p);
            CHECK(marginal_cdf(m, x) == doctest::Approx(p).epsilon(1e-9));
        }
    }
}

TEST_CASE("isoprobabilistic round trip") {
    const InputModel model(sample_marginals(), {{0, 1, 2, 3, 4}});
    Rng rng(11);
    std::normal_distribution<double> n01;
    for (int k = 0; k < 1000; ++k) {
        Eigen::VectorXd u(5);
        for (int i = 0; i < 5; ++i) u[i] = std::clamp(2.0 * n01(rng), -5.0, 5.0);
        const Eigen::VectorXd back = to_standard(model, from_standard(model, u));
        CHECK((back - u).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, u.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("physical round trip") {
    const InputModel model(sample_marginals(), {{0, 1, 2, 3, 4}});
    Rng rng(12);
    std::uniform_real_distribution<double> unif(1e-6, 1.0 - 1e-6);
    for (int k = 0; k < 1000; ++k) {
        Eigen::VectorXd x(5);
        for (int i = 0; i < 5; ++i) x[i] = marginal_quantile(model.marginal(static_cast<std::size_t>(i)), unif(rng));
        const Eigen::VectorXd back = from_standard(model, to_standard(model, x));
        for (int i = 0; i < 5; ++i) CHECK(std::abs(back[i] - x[i]) <= 1e-10 * std::max(1.0, std::abs(x[i])));
    }
}

TEST_CASE("standard transform at the center") {
    const InputModel model({Marginal::gaussian(3.0, 2.0), Marginal::uniform(-30.0, 30.0)}, {{0, 1}});
    Eigen::VectorXd x(2);
    x << 3.0, 0.0;
    CHECK(to_standard(model, x).norm() <= 1e-14);
}

TEST_CASE("sample moments") {
    Rng rng(5);
    std::normal_distribution<double> n01;
    for (const Marginal& m : sample_marginals()) {
        if (m.kind() == MarginalKind::uniform) continue;
        double s = 0.0, s2 = 0.0;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            const double x = marginal_from_standard(m, n01(rng));
            s += x;
            s2 += x * x;
        }
        const double mean = s / n;
        const double sd = std::sqrt(s2 / n - mean * mean);
        CHECK(std::abs(mean - m.mean()) <= 0.01 * std::abs(m.mean()));
        CHECK(std::abs(sd - m.std_dev()) <= 0.01 * m.std_dev());
    }
}

TEST_CASE("design bounds") {
    const InputModel model({Marginal::gaussian(0.0, 1.0), Marginal::lognormal(20000.0, 0.07),
                            Marginal::uniform(-30.0, 30.0)},
                           {{0, 1, 2}});
    const Hypercube box = initial_design_bounds(model, BoundsMode::five_sigma());
    CHECK(box.lower[0] == doctest::Approx(-5.0));
    CHECK(box.upper[0] == doctest::Approx(5.0));
    CHECK(box.lower[1] == doctest::Approx(13000.0));
    CHECK(box.upper[1] == doctest::Approx(27000.0));
    CHECK(box.lower[2] >= -30.0);
    CHECK(box.upper[2] <= 30.0);

    const Hypercube q = initial_design_bounds(model, BoundsMode::quantile(1e-5, 1.0 - 1e-5));
    CHECK(q.lower[2] == doctest::Approx(-30.0 + 60.0 * 1e-5).epsilon(1e-12));
    CHECK(q.upper[0] == doctest::Approx(4.264890793922825).epsilon(1e-9));
    CHECK(BoundsMode::automatic(8).kind == BoundsMode::Kind::five_sigma);
    CHECK(BoundsMode::automatic(16).kind == BoundsMode::Kind::quantile);
}

TEST_CASE("latin hypercube stratification") {
    Hypercube box{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
    const Eigen::MatrixXd one = lhs_sample(box, 4, 3);
    std::set<int> strata;
    for (Eigen::Index i = 0; i < 4; ++i) strata.insert(static_cast<int>(std::floor(one(0, i) * 4.0)));
    CHECK(strata == std::set<int>{0, 1, 2, 3});

    Hypercube box2{Eigen::Vector2d(-1.0, 10.0), Eigen::Vector2d(1.0, 20.0)};
    const Eigen::MatrixXd pts = lhs_sample(box2, 25, 9);
    REQUIRE(pts.rows() == 2);
    REQUIRE(pts.cols() == 25);
    for (Eigen::Index d = 0; d < 2; ++d) {
        std::vector<int> count(25, 0);
        for (Eigen::Index i = 0; i < 25; ++i) {
            const double t = (pts(d, i) - box2.lower[d]) / (box2.upper[d] - box2.lower[d]);
            ++count[static_cast<std::size_t>(std::floor(t * 25.0))];
        }
        for (int c : count) CHECK(c == 1);
    }
    CHECK(lhs_sample(box2, 25, 9) == pts);
    CHECK(lhs_sample(box2, 25, 10) != pts);
    CHECK_THROWS_AS(lhs_sample(box2, 0, 1), std::invalid_argument);
}

TEST_CASE("domain errors") {
    const Marginal g = Marginal::gaussian(0.0, 1.0);
    CHECK_THROWS_AS(marginal_quantile(g, 0.0), std::domain_error);
    CHECK_THROWS_AS(marginal_quantile(g, 1.5), std::domain_error);
    CHECK_THROWS_AS(marginal_to_standard(g, std::nan("")), std::domain_error);
    CHECK_THROWS_AS(marginal_to_standard(Marginal::lognormal(1.0, 0.1), -1.0), std::domain_error);
    CHECK_THROWS_AS(Marginal::gaussian(0.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(Marginal::lognormal(-1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Marginal::uniform(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(InputModel({g}, {{0, 1}}), std::invalid_argument);
}

TEST_CASE("projection follows the map") {
    Eigen::VectorXd x(4);
    x << 1.0, 2.0, 3.0, 4.0;
    const std::vector<std::size_t> map{3, 0};
    const Eigen::VectorXd p = project(x, map);
    CHECK(p.size() == 2);
    CHECK(p[0] == 4.0);
    CHECK(p[1] == 1.0);
}
