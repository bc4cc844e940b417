#include <cmath>

#include <doctest.h>

#include "sysrel/composition.hpp"
#include "sysrel/errors.hpp"
#include "sysrel/sensitivity.hpp"

using namespace sysrel;

namespace {

ResponseGaussians gaussians(std::vector<double> means, std::vector<double> stds) {
    ResponseGaussians z;
    z.means = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    z.stds = Eigen::Map<Eigen::VectorXd>(stds.data(), static_cast<Eigen::Index>(stds.size()));
    return z;
}

}  // namespace

TEST_CASE("additive composition has analytic indices") {
    const Eigen::VectorXd s = total_sobol(parse_composition("g1 + 2*g2"), gaussians({0.0, 0.0}, {1.0, 1.0}), 65536, 3);
    CHECK(std::abs(s[0] - 0.2) <= 0.02);
    CHECK(std::abs(s[1] - 0.8) <= 0.02);

    const Eigen::VectorXd t =
        total_sobol(parse_composition("g1 + g2 + g3"), gaussians({1.0, -2.0, 0.5}, {1.0, 2.0, 3.0}), 16384, 4);
    CHECK(std::abs(t[0] - 1.0 / 14.0) <= 0.03);
    CHECK(std::abs(t[1] - 4.0 / 14.0) <= 0.03);
    CHECK(std::abs(t[2] - 9.0 / 14.0) <= 0.03);
    CHECK(std::abs(t.sum() - 1.0) <= 0.05);
}

TEST_CASE("min composition routes to the active component") {
    const Eigen::VectorXd s = total_sobol(parse_composition("min(g1, g2)"), gaussians({10.0, 0.0}, {1.0, 1.0}), 4096, 1);
    CHECK(s[0] <= 0.01);
    CHECK(s[1] >= 0.95);
    CHECK(select_limit_state(s) == 1);
}

TEST_CASE("frozen components get exactly zero") {
    const Eigen::VectorXd s = total_sobol(parse_composition("min(g1, g2, g3)"), gaussians({0.0, 0.2, 3.0}, {0.0, 1.0, 0.5}), 4096, 2);
    CHECK(s[0] == 0.0);
    CHECK(s[1] > 0.0);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        CHECK(s[j] >= 0.0);
        CHECK(s[j] <= 1.05);
    }
}

TEST_CASE("degenerate variance") {
    CHECK_THROWS_AS(total_sobol(parse_composition("min(g1, g2)"), gaussians({1.0, 2.0}, {0.0, 0.0})),
                    DegenerateVarianceError);
    CHECK_THROWS_AS(total_sobol(parse_composition("0*g1 + g2"), gaussians({1.0, 2.0}, {1.0, 0.0})),
                    DegenerateVarianceError);
    CHECK_THROWS_AS(total_sobol(parse_composition("g1"), gaussians({0.0}, {1.0}), 100), std::invalid_argument);
}

TEST_CASE("indices are invariant to scaling of the composition") {
    const auto z = gaussians({0.3, -0.1}, {1.0, 0.7});
    const Eigen::VectorXd a = total_sobol(parse_composition("min(g1, g2)"), z, 4096, 8);
    const Eigen::VectorXd b = total_sobol(parse_composition("3*min(g1, g2)"), z, 4096, 8);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(total_sobol(parse_composition("min(g1, g2)"), z, 4096, 8) == a);
}

TEST_CASE("selection and ties") {
    CHECK(select_limit_state(Eigen::Vector3d(0.1, 0.7, 0.2)) == 1);
    CHECK(select_limit_state(Eigen::Vector2d(0.5, 0.5)) == 0);
    CHECK(select_limit_state(Eigen::Vector3d(0.0, 0.3, 0.3)) == 1);
    CHECK_THROWS_AS(select_limit_state(Eigen::Vector2d(0.0, 0.0)), RoutingError);
    CHECK_THROWS_AS(select_limit_state(Eigen::VectorXd()), std::invalid_argument);
}
