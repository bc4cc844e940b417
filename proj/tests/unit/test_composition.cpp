#include <cmath>
#include <random>
#include <string>

#include <doctest.h>

#include "sysrel/composition.hpp"
#include "sysrel/errors.hpp"
#include "sysrel/random.hpp"
#include "sysrel/surrogate.hpp"

using namespace sysrel;

namespace {

double eval(const std::string& text, std::vector<double> z) { return parse_composition(text).evaluate(z); }

std::string random_expression(Rng& rng, int depth, std::size_t m) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 6);
    std::uniform_int_distribution<std::size_t> var(1, m);
    switch (pick(rng)) {
        case 0:
            return "g" + std::to_string(var(rng));
        case 1: {
            std::uniform_int_distribution<int> num(0, 40);
            return std::to_string(num(rng) / 8.0).substr(0, 5);
        }
        case 2:
            return "(" + random_expression(rng, depth - 1, m) + " + " + random_expression(rng, depth - 1, m) + ")";
        case 3:
            return "(" + random_expression(rng, depth - 1, m) + " - " + random_expression(rng, depth - 1, m) + ")";
        case 4:
            return random_expression(rng, depth - 1, m) + (depth % 2 ? "*" : "/") + random_expression(rng, depth - 1, m);
        case 5:
            return "min(" + random_expression(rng, depth - 1, m) + ", " + random_expression(rng, depth - 1, m) + ", " +
                   random_expression(rng, depth - 1, m) + ")";
        default:
            return "max(" + random_expression(rng, depth - 1, m) + "," + random_expression(rng, depth - 1, m) + ")";
    }
}

}  // namespace

TEST_CASE("composition examples") {
    CHECK(eval("min(g1, g2)", {1.0, -2.0}) == -2.0);
    CHECK(eval("max(g1, min(g2, g3))", {-1.0, 3.0, 2.0}) == 2.0);
    CHECK(eval("min(g1, g2, g3, g4)", {4.0, 3.0, -0.5, 9.0}) == -0.5);
    CHECK(eval("g1 + 2*g2 - 0.5", {1.0, 2.0}) == 4.5);
    CHECK(eval("g1 - g2 - g3", {1.0, 2.0, 3.0}) == -4.0);
    CHECK(eval("2*(g1 - g2)", {3.0, 1.0}) == 4.0);
    CHECK(parse_composition("max(g1, min(g2, g3))").arity() == 3);
    CHECK(parse_composition("min(g1, g4)").arity() == 4);
}

TEST_CASE("composition errors carry offsets") {
    try {
        parse_composition("min(g1,)");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 7);
        CHECK(std::string(e.what()).find("offset 7") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_composition(""), ParseError);
    CHECK_THROWS_AS(parse_composition("g0"), ParseError);
    CHECK_THROWS_AS(parse_composition("min(g1, g2"), ParseError);
    CHECK_THROWS_AS(parse_composition("g1 g2"), ParseError);
    CHECK_THROWS_AS(parse_composition("x1 + g2"), ParseError);
    CHECK_THROWS_AS(parse_composition("-g1"), ParseError);
    CHECK_THROWS_AS(parse_composition("min(g1, g3)").bind(2), std::invalid_argument);
    CHECK_NOTHROW(parse_composition("min(g1, g3)").bind(3));
}

TEST_CASE("print and parse round trip") {
    Rng rng(2024);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    for (int k = 0; k < 300; ++k) {
        const std::string text = random_expression(rng, 4, 5);
        const CompositionExpr a = parse_composition(text);
        const std::string printed = a.to_string();
        const CompositionExpr b = parse_composition(printed);
        CHECK_MESSAGE(a == b, text << " -> " << printed);
        CHECK(b.to_string() == printed);
        std::vector<double> z(5);
        for (double& v : z) v = unif(rng);
        const double va = a.evaluate(z), vb = b.evaluate(z);
        CHECK(((std::isnan(va) && std::isnan(vb)) || va == vb));
    }
    CHECK(parse_composition("min(g1,g2 ,  g3)").to_string() == "min(g1, g2, g3)");
    CHECK(parse_composition("g1-(g2-g3)").to_string() == "g1 - (g2 - g3)");
    CHECK(parse_composition("(g1-g2)-g3").to_string() == "g1 - g2 - g3");
    CHECK(parse_composition("0.1*g1").to_string() == "0.1 * g1");
    CHECK(parse_composition("g1/(g2*g3)").to_string() == "g1 / (g2 * g3)");
    CHECK(parse_composition("g1/g2*g3").to_string() == "g1 / g2 * g3");
}

TEST_CASE("min composition is monotone") {
    const CompositionExpr e = parse_composition("min(g1, max(g2, g3), g4)");
    Rng rng(5);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::uniform_real_distribution<double> step(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> z(4);
        for (double& v : z) v = unif(rng);
        std::vector<double> w = z;
        for (double& v : w) v += step(rng);
        CHECK(e.evaluate(w) >= e.evaluate(z));
    }
}

TEST_CASE("limit-state mode") {
    const std::vector<std::string> names{"x1", "x2"};
    const CompositionExpr g = parse_limit_state("3 + 0.1*(x1 - x2)^2 - (x1 + x2)/2^0.5", names);
    for (double a : {-2.0, 0.0, 1.5})
        for (double b : {-1.0, 0.5, 3.0})
            CHECK(g.evaluate(std::vector<double>{a, b}) ==
                  doctest::Approx(3.0 + 0.1 * (a - b) * (a - b) - (a + b) / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(parse_limit_state("-x2 + x1^-1", names).evaluate(std::vector<double>{2.0, 3.0}) == doctest::Approx(-2.5));
    CHECK(parse_limit_state("x2", names).arity() == 2);
    CHECK_THROWS_AS(parse_limit_state("x1 + y", names), ParseError);
    CHECK_THROWS_AS(parse_limit_state("x1 ^ x2", names), ParseError);
}

TEST_CASE("system mean limit state") {
    ExperimentalDesign ed;
    ed.points.resize(2, 6);
    ed.points << -2.0, -1.0, 0.0, 1.0, 2.0, 0.5, 1.0, -2.0, 0.3, 2.0, -1.0, -0.4;
    auto g3 = [](const Eigen::VectorXd& x) { return 7.0 / std::sqrt(2.0) + (x[0] - x[1]); };
    auto g4 = [](const Eigen::VectorXd& x) { return 7.0 / std::sqrt(2.0) + (x[1] - x[0]); };
    ExperimentalDesign ed3 = ed, ed4 = ed;
    ed3.values.resize(6);
    ed4.values.resize(6);
    for (Eigen::Index i = 0; i < 6; ++i) {
        ed3.values[i] = g3(ed.points.col(i));
        ed4.values[i] = g4(ed.points.col(i));
    }
    const std::vector<SurrogateModel> models{fit_kriging(ed3, TrendKind::linear, KernelFamily::matern52),
                                             fit_kriging(ed4, TrendKind::linear, KernelFamily::matern52)};
    const std::vector<std::vector<std::size_t>> maps{{0, 1}, {0, 1}};

    const auto single = system_mean_lsf({models[0]}, parse_composition("g1"), {{0, 1}});
    const auto both = system_mean_lsf(models, parse_composition("min(g1, g2)"), maps);
    for (double a = -4.0; a <= 4.0; a += 0.5) {
        for (double b = -4.0; b <= 4.0; b += 0.5) {
            const Eigen::Vector2d x(a, b);
            CHECK(single(x) == models[0].predict_mean(x));
            CHECK(std::abs(both(x) - std::min(g3(x), g4(x))) <= 1e-6);
        }
    }
    CHECK_THROWS_AS(both(Eigen::VectorXd::Zero(1)), std::invalid_argument);
}
