#include "sysrel/composition.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "sysrel/errors.hpp"
#include "sysrel/surrogate.hpp"

namespace sysrel {

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, const std::vector<std::string>* names)
        : text_(text), names_(names) {}

    CompositionExpr parse() {
        if (text_.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError("empty expression", 0);
        parse_expr();
        skip_space();
        if (pos_ < text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
        finish();
        return std::move(expr_);
    }

private:
    bool limit_state_mode() const { return names_ != nullptr; }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
        if (text_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    std::size_t push(CompositionExpr::Node node) {
        expr_.nodes_.push_back(std::move(node));
        return expr_.nodes_.size() - 1;
    }

    std::size_t parse_expr() {
        std::size_t lhs = parse_term();
        while (true) {
            if (accept('+')) {
                const std::size_t rhs = parse_term();
                lhs = push({CompositionExpr::Op::add, 0.0, 0, {lhs, rhs}});
            } else if (accept('-')) {
                const std::size_t rhs = parse_term();
                lhs = push({CompositionExpr::Op::sub, 0.0, 0, {lhs, rhs}});
            } else {
                return lhs;
            }
        }
    }

    std::size_t parse_term() {
        std::size_t lhs = parse_factor();
        while (true) {
            if (accept('*')) {
                const std::size_t rhs = parse_factor();
                lhs = push({CompositionExpr::Op::mul, 0.0, 0, {lhs, rhs}});
            } else if (accept('/')) {
                const std::size_t rhs = parse_factor();
                lhs = push({CompositionExpr::Op::div, 0.0, 0, {lhs, rhs}});
            } else {
                return lhs;
            }
        }
    }

    std::size_t parse_factor() {
        if (limit_state_mode() && accept('-')) {
            const std::size_t operand = parse_factor();
            return push({CompositionExpr::Op::neg, 0.0, 0, {operand}});
        }
        const std::size_t base = parse_primary();
        if (limit_state_mode() && accept('^')) {
            skip_space();
            const std::size_t at = pos_;
            const bool negative = accept('-');
            skip_space();
            double exponent = parse_number_literal();
            if (negative) exponent = -exponent;
            if (!std::isfinite(exponent)) throw ParseError("invalid exponent", at);
            return push({CompositionExpr::Op::pow, exponent, 0, {base}});
        }
        return base;
    }

    double parse_number_literal() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        if (pos_ == start) throw ParseError("expected a number", start);
        double value = 0.0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
            throw ParseError("malformed number '" + std::string(text_.substr(start, pos_ - start)) + "'", start);
        return value;
    }

    std::size_t parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("expected expression but reached end of input", pos_);
        const char c = text_[pos_];
        const std::size_t start = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return push({CompositionExpr::Op::constant, parse_number_literal(), 0, {}});
        }
        if (c == '(') {
            ++pos_;
            const std::size_t inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            const std::string ident(text_.substr(start, pos_ - start));
            skip_space();
            const bool call = pos_ < text_.size() && text_[pos_] == '(';
            if (call && (ident == "min" || ident == "max")) {
                ++pos_;
                std::vector<std::size_t> args{parse_expr()};
                expect(',');
                args.push_back(parse_expr());
                while (accept(',')) args.push_back(parse_expr());
                expect(')');
                return push({ident == "min" ? CompositionExpr::Op::min : CompositionExpr::Op::max, 0.0, 0,
                             std::move(args)});
            }
            return push({CompositionExpr::Op::variable, 0.0, resolve(ident, start), {}});
        }
        throw ParseError("expected expression", start);
    }

    std::size_t resolve(const std::string& ident, std::size_t at) const {
        if (limit_state_mode()) {
            const auto it = std::find(names_->begin(), names_->end(), ident);
            if (it == names_->end()) throw ParseError("unknown identifier '" + ident + "'", at);
            return static_cast<std::size_t>(it - names_->begin());
        }
        const bool component_ref = ident.size() >= 2 && ident[0] == 'g' &&
                                   std::all_of(ident.begin() + 1, ident.end(),
                                               [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
        if (!component_ref) throw ParseError("unknown identifier '" + ident + "' (expected g<k>)", at);
        std::size_t k = 0;
        const auto res = std::from_chars(ident.data() + 1, ident.data() + ident.size(), k);
        if (res.ec != std::errc() || k == 0)
            throw ParseError("component index in '" + ident + "' out of range (components are numbered from 1)", at);
        return k - 1;
    }

    void finish() {
        std::size_t depth = 0;
        std::size_t arity = 0;
        for (const auto& node : expr_.nodes_) {
            depth = depth + 1 - node.args.size();
            expr_.max_stack_ = std::max(expr_.max_stack_, depth);
            if (node.op == CompositionExpr::Op::variable) arity = std::max(arity, node.variable + 1);
        }
        expr_.arity_ = arity;
    }

    std::string_view text_;
    const std::vector<std::string>* names_;
    std::size_t pos_ = 0;
    CompositionExpr expr_;
};

CompositionExpr parse_composition(std::string_view text) {
    return ExpressionParser(text, nullptr).parse();
}

CompositionExpr parse_limit_state(std::string_view text, const std::vector<std::string>& input_names) {
    return ExpressionParser(text, &input_names).parse();
}

void CompositionExpr::bind(std::size_t component_count) const {
    for (const auto& node : nodes_)
        if (node.op == Op::variable && node.variable >= component_count)
            throw std::invalid_argument("composition references g" + std::to_string(node.variable + 1) +
                                        " but the system has " + std::to_string(component_count) + " components");
}

namespace {

double evaluate_with(const std::vector<CompositionExpr::Node>& nodes, std::span<const double> z, double* stack) {
    std::size_t top = 0;
    for (const auto& node : nodes) {
        using Op = CompositionExpr::Op;
        switch (node.op) {
            case Op::constant: stack[top++] = node.value; break;
            case Op::variable: stack[top++] = z[node.variable]; break;
            case Op::add: --top; stack[top - 1] += stack[top]; break;
            case Op::sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::div: --top; stack[top - 1] /= stack[top]; break;
            case Op::neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::pow: {
                const double e = node.value;
                const double b = stack[top - 1];
                stack[top - 1] = e == 2.0 ? b * b : std::pow(b, e);
                break;
            }
            case Op::min:
            case Op::max: {
                const std::size_t k = node.args.size();
                const double* first = stack + top - k;
                double v = first[0];
                for (std::size_t i = 1; i < k; ++i) v = node.op == Op::min ? std::min(v, first[i]) : std::max(v, first[i]);
                top -= k;
                stack[top++] = v;
                break;
            }
        }
    }
    return stack[0];
}

std::string format_number(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    std::string s(buf.data());
    // Shortest representation that still round-trips.
    for (int digits = 1; digits < 17; ++digits) {
        std::snprintf(buf.data(), buf.size(), "%.*g", digits, v);
        if (std::strtod(buf.data(), nullptr) == v) return std::string(buf.data());
    }
    return s;
}

int precedence(CompositionExpr::Op op) {
    using Op = CompositionExpr::Op;
    switch (op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        default: return 5;
    }
}

void print_node(const std::vector<CompositionExpr::Node>& nodes, std::size_t idx,
                const std::vector<std::string>& names, std::string& out) {
    using Op = CompositionExpr::Op;
    const auto& node = nodes[idx];
    auto child = [&](std::size_t c, bool parens) {
        if (parens) out += '(';
        print_node(nodes, c, names, out);
        if (parens) out += ')';
    };
    const int prec = precedence(node.op);
    switch (node.op) {
        case Op::constant: out += format_number(node.value); break;
        case Op::variable:
            out += node.variable < names.size() ? names[node.variable] : "g" + std::to_string(node.variable + 1);
            break;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
            child(node.args[0], precedence(nodes[node.args[0]].op) < prec);
            out += node.op == Op::add ? " + " : node.op == Op::sub ? " - " : node.op == Op::mul ? " * " : " / ";
            child(node.args[1], precedence(nodes[node.args[1]].op) <= prec);
            break;
        }
        case Op::neg:
            out += '-';
            child(node.args[0], precedence(nodes[node.args[0]].op) < prec);
            break;
        case Op::pow:
            child(node.args[0], precedence(nodes[node.args[0]].op) < 5);
            out += '^';
            out += format_number(node.value);
            break;
        case Op::min:
        case Op::max:
            out += node.op == Op::min ? "min(" : "max(";
            for (std::size_t i = 0; i < node.args.size(); ++i) {
                if (i) out += ", ";
                child(node.args[i], false);
            }
            out += ')';
            break;
    }
}

}  // namespace

double CompositionExpr::evaluate(std::span<const double> z) const {
    if (nodes_.empty()) throw StateError("evaluating an empty expression");
    if (z.size() < arity_) throw std::invalid_argument("composition: too few component values");
    if (max_stack_ <= 32) {
        std::array<double, 32> stack;
        return evaluate_with(nodes_, z, stack.data());
    }
    std::vector<double> stack(max_stack_);
    return evaluate_with(nodes_, z, stack.data());
}

std::string CompositionExpr::to_string(const std::vector<std::string>& variable_names) const {
    if (nodes_.empty()) return {};
    std::string out;
    print_node(nodes_, nodes_.size() - 1, variable_names, out);
    return out;
}

std::function<double(const Eigen::VectorXd&)> system_mean_lsf(const std::vector<SurrogateModel>& models,
                                                              const CompositionExpr& expr,
                                                              const std::vector<std::vector<std::size_t>>& maps) {
    if (models.size() != maps.size()) throw std::invalid_argument("system_mean_lsf: one map per model is required");
    expr.bind(models.size());
    for (const auto& m : models)
        if (!m.fitted()) throw StateError("system_mean_lsf: all surrogate models must be fitted");
    std::size_t needed = 0;
    for (const auto& map : maps)
        for (std::size_t i : map) needed = std::max(needed, i + 1);
    return [models, expr, maps, needed](const Eigen::VectorXd& x) {
        if (static_cast<std::size_t>(x.size()) < needed)
            throw std::invalid_argument("system_mean_lsf: input dimension smaller than the component maps require");
        std::vector<double> z(models.size());
        for (std::size_t j = 0; j < models.size(); ++j) z[j] = models[j].predict_mean(project(x, maps[j]));
        return expr.evaluate(z);
    };
}

}  // namespace sysrel
