#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <doctest.h>

#include "sysrel/errors.hpp"
#include "sysrel/input_model.hpp"
#include "sysrel/random.hpp"
#include "sysrel/surrogate.hpp"
#include "oracles.hpp"

using namespace sysrel;

namespace {

Eigen::MatrixXd random_points(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    Eigen::MatrixXd p(d, n);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = unif(rng);
    return p;
}

double four_branch_g1(const Eigen::VectorXd& x) {
    return 3.0 + 0.1 * (x[0] - x[1]) * (x[0] - x[1]) - (x[0] + x[1]) / std::sqrt(2.0);
}

double smooth(const Eigen::VectorXd& x) { return std::exp(0.3 * x[0]) + std::sin(x[1]); }

}  // namespace

TEST_CASE("kriging matches the dense oracle") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const bool linear = seed % 2 == 0;
        ExperimentalDesign ed;
        ed.points = random_points(2, 7, seed);
        ed.values.resize(7);
        for (Eigen::Index i = 0; i < 7; ++i)
            ed.values[i] = std::sin(ed.points(0, i)) + 0.5 * ed.points(1, i) * ed.points(1, i);
        FitOptions opts;
        opts.scaling = InputScaling::identity(2);
        opts.fixed_length_scales = Eigen::Vector2d(0.8 + 0.1 * static_cast<double>(seed), 1.3);
        const SurrogateModel m =
            fit_kriging(ed, linear ? TrendKind::linear : TrendKind::constant, KernelFamily::matern52, opts);
        const oracle::DenseKriging oracle(ed.points, ed.values, *opts.fixed_length_scales, m.nugget(), linear);

        CHECK(m.process_variance() == doctest::Approx(oracle.sigma2).epsilon(1e-10));
        const Eigen::MatrixXd test = random_points(2, 20, seed + 100);
        for (Eigen::Index k = 0; k < test.cols(); ++k) {
            const Prediction p = m.predict(test.col(k));
            const auto [mean, var] = oracle.predict(test.col(k), m.process_variance());
            CHECK(std::abs(p.mean - mean) <= 1e-10 * std::max(1.0, std::abs(mean)));
            CHECK(std::abs(p.raw_variance - var) <= 1e-10 * m.process_variance());
            CHECK(p.mean == doctest::Approx(m.predict_mean(test.col(k))).epsilon(1e-12));
        }
    }
}

TEST_CASE("one-dimensional interpolation example") {
    ExperimentalDesign ed;
    ed.points.resize(1, 3);
    ed.points << 0.0, 1.0, 2.0;
    ed.values.resize(3);
    ed.values << 0.0, 1.0, 4.0;
    FitOptions opts;
    opts.scaling = InputScaling::identity(1);
    opts.fixed_length_scales = Eigen::VectorXd::Constant(1, 1.0);
    opts.fixed_process_variance = 2.0;
    const SurrogateModel m = fit_kriging(ed, TrendKind::constant, KernelFamily::matern52, opts);
    const Prediction p = m.predict(Eigen::VectorXd::Constant(1, 1.0));
    CHECK(p.mean == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(p.variance <= 10.0 * m.nugget() * 2.0);
    CHECK(m.process_variance() == 2.0);
}

TEST_CASE("fitted models interpolate the design") {
    ExperimentalDesign ed;
    ed.points = random_points(2, 12, 42);
    ed.values.resize(12);
    for (Eigen::Index i = 0; i < 12; ++i) ed.values[i] = four_branch_g1(ed.points.col(i));
    for (TrendKind t : {TrendKind::constant, TrendKind::linear}) {
        for (KernelFamily k : {KernelFamily::matern52, KernelFamily::gaussian}) {
            FitOptions o;
            o.seed = 3;
            const SurrogateModel m = fit_kriging(ed, t, k, o);
            const double scale = ed.values.cwiseAbs().maxCoeff();
            for (Eigen::Index i = 0; i < 12; ++i) {
                const Prediction p = m.predict(ed.points.col(i));
                CHECK(std::abs(p.mean - ed.values[i]) <= 1e-4 * scale);
                CHECK(p.variance <= 1e-4 * m.process_variance());
            }
        }
    }
}

TEST_CASE("linear trend reproduces a linear function") {
    ExperimentalDesign ed;
    ed.points = random_points(2, 6, 8);
    ed.values.resize(6);
    auto g3 = [](const Eigen::VectorXd& x) { return 7.0 / std::sqrt(2.0) + (x[0] - x[1]); };
    for (Eigen::Index i = 0; i < 6; ++i) ed.values[i] = g3(ed.points.col(i));
    const SurrogateModel m = fit_kriging(ed, TrendKind::linear, KernelFamily::matern52);
    for (double a = -3.0; a <= 3.0; a += 0.6)
        for (double b = -3.0; b <= 3.0; b += 0.6) CHECK(std::abs(m.predict_mean(Eigen::Vector2d(a, b)) - g3(Eigen::Vector2d(a, b))) <= 1e-6);
}

TEST_CASE("variance far from the design reaches the process variance") {
    ExperimentalDesign ed;
    ed.points = random_points(2, 8, 5);
    ed.values = ed.points.row(0).transpose().array().sin().matrix();
    const SurrogateModel m = fit_kriging(ed, TrendKind::constant, KernelFamily::matern52);
    const Eigen::VectorXd far = Eigen::Vector2d(1.0, 1.0) * 1e4 * m.length_scales().maxCoeff();
    CHECK(m.predict(m.scaling().kind == InputScaling::Kind::affine
                        ? Eigen::VectorXd(far.cwiseProduct(m.scaling().scale) + m.scaling().shift)
                        : far)
              .variance >= m.process_variance() * (1.0 - 1e-9));
}

TEST_CASE("likelihood is maximal at the fitted length-scales") {
    ExperimentalDesign ed;
    ed.points = random_points(2, 15, 21);
    ed.values.resize(15);
    for (Eigen::Index i = 0; i < 15; ++i) ed.values[i] = four_branch_g1(ed.points.col(i));
    FitOptions o;
    o.seed = 9;
    const SurrogateModel m = fit_kriging(ed, TrendKind::constant, KernelFamily::matern52, o);
    const double best = profile_log_likelihood(m, m.length_scales());
    CHECK(best == doctest::Approx(m.log_likelihood()).epsilon(1e-12));
    for (Eigen::Index k = 0; k < 2; ++k) {
        for (double f : {0.95, 1.05}) {
            Eigen::VectorXd t = m.length_scales();
            t[k] *= f;
            if (t[k] < o.length_scale_min || t[k] > o.length_scale_max) continue;
            CHECK(profile_log_likelihood(m, t) <= best + 1e-6 * std::max(1.0, std::abs(best)));
        }
    }
}

TEST_CASE("pc-kriging fits a quadratic exactly") {
    ExperimentalDesign ed;
    ed.points.resize(1, 7);
    ed.points << -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0;
    ed.values = ed.points.row(0).transpose().array().square().matrix();
    FitOptions o;
    o.marginals = {Marginal::gaussian(0.0, 1.0)};
    const SurrogateModel m = fit_pck(ed, 3, KernelFamily::matern52, o);
    CHECK(m.trend().kind == TrendKind::pce);
    CHECK(m.trend().indices.size() <= 5);
    for (double x = -3.0; x <= 3.0; x += 0.05)
        CHECK(std::abs(m.predict_mean(Eigen::VectorXd::Constant(1, x)) - x * x) <= 1e-6);

    const SurrogateModel c = fit_pck(ed, 0, KernelFamily::matern52, o);
    REQUIRE(c.trend().indices.size() == 1);
    CHECK(c.trend().indices[0] == MultiIndex{0});
}

TEST_CASE("pc-kriging error shrinks as the design grows") {
    const Eigen::MatrixXd test = random_points(2, 400, 77) * 1.5;
    std::vector<double> medians;
    for (Eigen::Index extra : {0, 5, 10, 20}) {
        std::vector<double> rms;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            Hypercube box{Eigen::Vector2d(-5.0, -5.0), Eigen::Vector2d(5.0, 5.0)};
            ExperimentalDesign ed;
            ed.points = lhs_sample(box, static_cast<std::size_t>(5 + extra), seed);
            ed.values.resize(ed.points.cols());
            for (Eigen::Index i = 0; i < ed.points.cols(); ++i) ed.values[i] = smooth(ed.points.col(i));
            FitOptions o;
            o.marginals = {Marginal::gaussian(0.0, 1.0), Marginal::gaussian(0.0, 1.0)};
            o.seed = seed;
            const SurrogateModel m = fit_pck(ed, 3, KernelFamily::matern52, o);
            double s = 0.0;
            for (Eigen::Index k = 0; k < test.cols(); ++k) {
                const double e = m.predict_mean(test.col(k)) - smooth(test.col(k));
                s += e * e;
            }
            rms.push_back(std::sqrt(s / static_cast<double>(test.cols())));
        }
        std::sort(rms.begin(), rms.end());
        medians.push_back(rms[2]);
    }
    for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] <= medians[i - 1] * (1.0 + 1e-9));
}

TEST_CASE("fit argument errors") {
    ExperimentalDesign ed;
    ed.points = random_points(2, 3, 1);
    ed.values = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(fit_kriging(ed, TrendKind::linear, KernelFamily::matern52), std::invalid_argument);

    ExperimentalDesign dup;
    dup.points = random_points(1, 5, 2);
    dup.points(0, 4) = dup.points(0, 1);
    dup.values = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    CHECK_THROWS_AS(fit_kriging(dup, TrendKind::constant, KernelFamily::matern52), std::invalid_argument);

    const SurrogateModel empty;
    CHECK_FALSE(empty.fitted());
    CHECK_THROWS_AS(empty.predict(Eigen::VectorXd::Zero(1)), StateError);
    CHECK_THROWS_AS(kernel_family_from_string("cubic"), std::invalid_argument);
}
