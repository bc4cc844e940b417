#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace sysrel {

class SurrogateModel;

/// Arithmetic expression over component responses g1..gm (composition mode) or
/// over named inputs (limit-state mode, which additionally allows unary minus and
/// `^` with a numeric exponent).
///
/// Nodes live in a flat array; children always precede their parent, so the last
/// node is the root and a left-to-right sweep evaluates the tree.
class CompositionExpr {
public:
    enum class Op { constant, variable, add, sub, mul, div, neg, pow, min, max };

    struct Node {
        Op op = Op::constant;
        double value = 0.0;              // constant value or exponent of pow
        std::size_t variable = 0;        // 0-based index for Op::variable
        std::vector<std::size_t> args;   // child node indices

        bool operator==(const Node&) const = default;
    };

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    /// Highest referenced variable index + 1 (0 when the expression is constant).
    std::size_t arity() const noexcept { return arity_; }
    bool empty() const noexcept { return nodes_.empty(); }

    /// Checks every referenced component exists in a system of `component_count` limit states.
    void bind(std::size_t component_count) const;

    double evaluate(std::span<const double> z) const;
    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& z) const {
        return evaluate(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
    }

    /// Canonical text; component references print as g<k>, inputs by name.
    std::string to_string(const std::vector<std::string>& variable_names = {}) const;

    bool operator==(const CompositionExpr& other) const { return nodes_ == other.nodes_; }

private:
    friend class ExpressionParser;

    std::vector<Node> nodes_;
    std::size_t arity_ = 0;
    std::size_t max_stack_ = 0;
};

/// Parses a composition function such as "min(g1, max(g2, g3))".
CompositionExpr parse_composition(std::string_view text);

/// Parses a limit-state expression over the given input names, e.g.
/// "3 + 0.1*(x1 - x2)^2 - 0.7071067811865476*(x1 + x2)". Variable indices refer to
/// positions in `input_names`.
CompositionExpr parse_limit_state(std::string_view text, const std::vector<std::string>& input_names);

inline double eval_composition(const CompositionExpr& expr, std::span<const double> z) { return expr.evaluate(z); }

/// x -> h(mu_1(x_1), ..., mu_m(x_m)) with posterior means of the component surrogates.
/// The returned function holds its own copy of the models.
std::function<double(const Eigen::VectorXd&)> system_mean_lsf(const std::vector<SurrogateModel>& models,
                                                              const CompositionExpr& expr,
                                                              const std::vector<std::vector<std::size_t>>& maps);

}  // namespace sysrel
