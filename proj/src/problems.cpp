#include "sysrel/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sysrel/composition.hpp"

namespace sysrel {

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

}  // namespace

std::optional<double> ProblemSpec::reference_beta() const {
    if (!reference_pf) return std::nullopt;
    return -standard_normal_quantile(*reference_pf);
}

void ProblemSpec::validate() const {
    const std::size_t m = model.component_count();
    if (m == 0) throw std::invalid_argument("problem '" + name + "' has no components");
    if (limit_states.size() != m) throw std::invalid_argument("problem '" + name + "': one limit state per component map is required");
    if (!component_ids.empty() && component_ids.size() != m)
        throw std::invalid_argument("problem '" + name + "': component id count does not match the component maps");
    for (const auto& f : limit_states)
        if (!f) throw std::invalid_argument("problem '" + name + "': empty limit state");
    parse_composition(composition).bind(m);
    if (reference_pf && !(*reference_pf > 0.0 && *reference_pf < 1.0))
        throw std::invalid_argument("problem '" + name + "': reference pf must lie in (0, 1)");
}

ComponentFunction builtin_component(const std::string& id, const std::map<std::string, double>& params) {
    using std::numbers::sqrt2;
    if (id.rfind("four_branch.", 0) == 0) {
        const double p = param_or(params, "P", 7.0);
        if (!(p > 0.0)) throw std::invalid_argument("four_branch: P must be positive");
        if (id == "four_branch.g1")
            return [](const Eigen::VectorXd& x) {
                const double d = x[0] - x[1];
                return 3.0 + 0.1 * d * d - (x[0] + x[1]) / sqrt2;
            };
        if (id == "four_branch.g2")
            return [](const Eigen::VectorXd& x) {
                const double d = x[0] - x[1];
                return 3.0 + 0.1 * d * d + (x[0] + x[1]) / sqrt2;
            };
        if (id == "four_branch.g3") return [p](const Eigen::VectorXd& x) { return (x[0] - x[1]) + p / sqrt2; };
        if (id == "four_branch.g4") return [p](const Eigen::VectorXd& x) { return (x[1] - x[0]) + p / sqrt2; };
    }
    // Roof truss inputs in component order: g1 (q, l, As, Ac, Es, Ec), g2 (q, l, Ac, fc), g3 (q, l, As, fs).
    if (id == "roof_truss.g1")
        return [](const Eigen::VectorXd& x) {
            const double q = x[0], l = x[1], as = x[2], ac = x[3], es = x[4], ec = x[5];
            return 0.03 - q * l * l / 2.0 * (3.81 / (ac * ec) + 1.13 / (as * es));
        };
    if (id == "roof_truss.g2")
        return [](const Eigen::VectorXd& x) { return x[3] * x[2] - 1.185 * x[0] * x[1]; };
    if (id == "roof_truss.g3")
        return [](const Eigen::VectorXd& x) { return x[3] * x[2] - 0.75 * x[0] * x[1]; };
    throw std::invalid_argument("unknown builtin limit state '" + id + "'; available: " + join(builtin_component_names()));
}

std::size_t builtin_component_dimension(const std::string& id) {
    if (id.rfind("four_branch.g", 0) == 0) {
        builtin_component(id);
        return 2;
    }
    if (id == "roof_truss.g1") return 6;
    if (id == "roof_truss.g2" || id == "roof_truss.g3") return 4;
    throw std::invalid_argument("unknown builtin limit state '" + id + "'; available: " + join(builtin_component_names()));
}

ProblemSpec four_branch(double p) {
    if (!(p > 0.0)) throw std::invalid_argument("four_branch: P must be positive");
    ProblemSpec spec;
    spec.name = "four_branch";
    spec.model = InputModel({Marginal::gaussian(0.0, 1.0), Marginal::gaussian(0.0, 1.0)},
                            {{0, 1}, {0, 1}, {0, 1}, {0, 1}}, {"x1", "x2"});
    const std::map<std::string, double> params{{"P", p}};
    for (int j = 1; j <= 4; ++j) {
        spec.component_ids.push_back("four_branch.g" + std::to_string(j));
        spec.limit_states.push_back(builtin_component(spec.component_ids.back(), params));
    }
    spec.composition = "min(g1, g2, g3, g4)";
    if (p == 7.0) spec.reference_pf = 2.239e-3;
    if (p == 6.0) spec.reference_pf = 4.484e-3;
    return spec;
}

ProblemSpec roof_truss() {
    ProblemSpec spec;
    spec.name = "roof_truss";
    spec.model = InputModel(
        {Marginal::lognormal(20000.0, 0.07), Marginal::lognormal(12.0, 0.01), Marginal::lognormal(9.82e-4, 0.06),
         Marginal::lognormal(0.04, 0.12), Marginal::lognormal(2e11, 0.06), Marginal::lognormal(3e11, 0.06),
         Marginal::lognormal(3.35e8, 0.12), Marginal::lognormal(1.34e7, 0.18)},
        {{0, 1, 2, 3, 4, 5}, {0, 1, 3, 7}, {0, 1, 2, 6}}, {"q", "l", "As", "Ac", "Es", "Ec", "fs", "fc"});
    for (int j = 1; j <= 3; ++j) {
        spec.component_ids.push_back("roof_truss.g" + std::to_string(j));
        spec.limit_states.push_back(builtin_component(spec.component_ids.back()));
    }
    spec.composition = "min(g1, g2, g3)";
    spec.reference_pf = 3.417e-3;
    return spec;
}

ProblemSpec transmission_tower() {
    throw std::invalid_argument(
        "transmission_tower is not available: it requires a finite-element tower model and "
        "copula-dependent wind and ice loads, which this library does not implement");
}

ProblemSpec builtin_problem(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "four_branch") return four_branch(param_or(params, "P", 7.0));
    if (name == "roof_truss") return roof_truss();
    if (name == "transmission_tower") return transmission_tower();
    throw std::invalid_argument("unknown builtin problem '" + name + "'; available: " + join(builtin_problem_names()));
}

std::vector<std::string> builtin_problem_names() { return {"four_branch", "roof_truss"}; }

std::vector<std::string> builtin_component_names() {
    return {"four_branch.g1", "four_branch.g2", "four_branch.g3", "four_branch.g4",
            "roof_truss.g1",  "roof_truss.g2",  "roof_truss.g3"};
}

}  // namespace sysrel
