#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "sysrel/input_model.hpp"
#include "sysrel/pce.hpp"
#include "sysrel/random.hpp"

using namespace sysrel;

namespace {

// Gauss-Hermite nodes / weights for the standard normal by Golub-Welsch.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Eigen::VectorXd w = es.eigenvectors().row(0).transpose().array().square();
    return {es.eigenvalues(), w};
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("basis cardinality and ordering") {
    CHECK(build_pce_basis(2, 3).size() == 10);
    CHECK(build_pce_basis(4, 3).size() == static_cast<std::size_t>(binomial(7, 3)));
    CHECK(build_pce_basis(6, 3).size() == static_cast<std::size_t>(binomial(9, 3)));
    const auto b = build_pce_basis(1, 2);
    REQUIRE(b.size() == 3);
    CHECK(b[0] == MultiIndex{0});
    CHECK(b[1] == MultiIndex{1});
    CHECK(b[2] == MultiIndex{2});
    const auto c = build_pce_basis(3, 0);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == MultiIndex{0, 0, 0});
    const auto g = build_pce_basis(3, 3);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(total_degree(g[i - 1]) <= total_degree(g[i]));
}

TEST_CASE("hermite values") {
    CHECK(hermite_orthonormal(0, 0.7) == 1.0);
    CHECK(hermite_orthonormal(1, 0.7) == doctest::Approx(0.7));
    CHECK(hermite_orthonormal(2, 0.7) == doctest::Approx((0.49 - 1.0) / std::sqrt(2.0)));
    CHECK(hermite_orthonormal(3, 0.7) == doctest::Approx((0.343 - 2.1) / std::sqrt(6.0)));
}

TEST_CASE("orthonormality by quadrature") {
    const auto [x, w] = gauss_hermite(12);
    const auto basis = build_pce_basis(2, 4);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()),
                                                 static_cast<Eigen::Index>(basis.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            const Eigen::VectorXd row = pce_row(basis, Eigen::Vector2d(x[i], x[k]));
            gram += w[i] * w[k] * row * row.transpose();
        }
    }
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("orthonormality by Monte Carlo") {
    const auto basis = build_pce_basis(2, 3);
    const Eigen::Index n = 1000000;
    Rng rng(17);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd u(2, n);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = n01(rng);
    const Eigen::MatrixXd psi = pce_design_matrix(basis, u);
    const Eigen::MatrixXd gram = psi.transpose() * psi / static_cast<double>(n);
    const Eigen::MatrixXd second = psi.array().square().matrix().transpose() * psi.array().square().matrix() /
                                   static_cast<double>(n);
    for (Eigen::Index a = 0; a < gram.rows(); ++a) {
        for (Eigen::Index b = 0; b < gram.cols(); ++b) {
            const double target = a == b ? 1.0 : 0.0;
            const double se = std::sqrt(std::max(second(a, b) - gram(a, b) * gram(a, b), 0.0) / static_cast<double>(n));
            CHECK(std::abs(gram(a, b) - target) <= std::max(5e-3, 4.0 * se));
        }
    }
}

TEST_CASE("lar recovers a sparse expansion") {
    const auto basis = build_pce_basis(2, 3);
    Rng rng(4);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd u(2, 20);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = n01(rng);
    Eigen::VectorXd y(20);
    for (Eigen::Index i = 0; i < 20; ++i) y[i] = 1.0 + 2.0 * u(0, i);

    const LarResult r = lar_select(basis, u, y);
    REQUIRE(r.selected.size() >= 2);
    CHECK(r.selected[0] == MultiIndex{0, 0});
    CHECK(r.selected[1] == MultiIndex{1, 0});
    CHECK(r.loo_path[r.best_step] <= 1e-12);
    CHECK(r.best_step == 1);
}

TEST_CASE("lar edge cases") {
    Eigen::MatrixXd u(1, 6);
    u << -1.5, -0.6, 0.1, 0.4, 1.2, 2.0;
    const Eigen::VectorXd y = u.row(0).transpose().array().square();

    const LarResult single = lar_select({MultiIndex{2}}, u, y);
    REQUIRE(single.selected.size() == 1);
    CHECK(single.selected[0] == MultiIndex{2});

    const LarResult none = lar_select({}, u, y);
    REQUIRE(none.selected.size() == 1);
    CHECK(none.selected[0] == MultiIndex{0});
    CHECK_FALSE(none.warnings.empty());

    // Second input is constant, so every regressor involving it is degenerate.
    Eigen::MatrixXd v(2, 6);
    v.row(0) = u.row(0);
    v.row(1).setZero();
    const LarResult degenerate = lar_select(build_pce_basis(2, 2), v, y);
    CHECK_FALSE(degenerate.warnings.empty());
    for (const MultiIndex& a : degenerate.selected) CHECK((a[1] == 0 || a[1] == 2));

    const LarResult capped = lar_select(build_pce_basis(1, 5), u, y, 3);
    CHECK(capped.selected.size() <= 3);
    CHECK_THROWS_AS(lar_select(build_pce_basis(1, 2), u.leftCols(2), y.head(2)), std::invalid_argument);
}
