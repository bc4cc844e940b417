#include "sysrel/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sysrel/composition.hpp"

namespace sysrel {

using nlohmann::json;

namespace {

std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }
std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "config" : path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
            throw ConfigError(join_path(path, key), "unknown field");
    }
}

double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(p, "missing required field");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(p, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(p, "must be finite");
    return d;
}

std::uint64_t count(const json& obj, const std::string& key, const std::string& path,
                    std::optional<std::uint64_t> fallback = {}) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(p, "missing required field");
    }
    const json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) throw ConfigError(p, "must be non-negative");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(p, "expected a non-negative integer");
}

std::string text(const json& obj, const std::string& key, const std::string& path,
                 std::optional<std::string> fallback = {}) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(p, "missing required field");
    }
    if (!obj.at(key).is_string()) throw ConfigError(p, "expected a string");
    return obj.at(key).get<std::string>();
}

template <class F>
auto wrap(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
}

Marginal parse_marginal(const json& in, const std::string& path) {
    const MarginalKind kind = wrap(join_path(path, "kind"), [&] { return marginal_kind_from_string(text(in, "kind", path)); });
    if (kind == MarginalKind::uniform) {
        allow_keys(in, path, {"name", "kind", "bounds"});
        const std::string bp = join_path(path, "bounds");
        if (!in.contains("bounds")) throw ConfigError(bp, "missing required field");
        const json& b = in.at("bounds");
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
            throw ConfigError(bp, "expected [lower, upper]");
        return wrap(bp, [&] { return Marginal::uniform(b[0].get<double>(), b[1].get<double>()); });
    }
    allow_keys(in, path, {"name", "kind", "mean", "cov", "std"});
    const double mean = number(in, "mean", path);
    if (in.contains("cov") == in.contains("std")) throw ConfigError(path, "give exactly one of 'cov' and 'std'");
    return wrap(path, [&] {
        const double spread = in.contains("cov") ? number(in, "cov", path) : number(in, "std", path);
        const bool cov = in.contains("cov");
        switch (kind) {
            case MarginalKind::gaussian: return cov ? Marginal::gaussian_cov(mean, spread) : Marginal::gaussian(mean, spread);
            case MarginalKind::lognormal: return Marginal::lognormal(mean, cov ? spread : spread / mean);
            case MarginalKind::gumbel: return Marginal::gumbel(mean, cov ? spread : spread / mean);
            default: break;
        }
        throw std::invalid_argument("unsupported marginal");
    });
}

json marginal_json(const std::string& name, const Marginal& m) {
    json j{{"name", name}, {"kind", to_string(m.kind())}};
    switch (m.kind()) {
        case MarginalKind::uniform: j["bounds"] = {m.lower(), m.upper()}; break;
        case MarginalKind::gaussian:
            j["mean"] = m.mean();
            j["std"] = m.std_dev();
            break;
        default:
            j["mean"] = m.mean();
            j["cov"] = m.cov();
            break;
    }
    return j;
}

SusConfig parse_sus(const json& doc, const std::string& key, SusConfig defaults) {
    if (!doc.contains(key)) return defaults;
    const json& s = doc.at(key);
    require_object(s, key);
    allow_keys(s, key, {"n_level", "p0", "rho", "max_levels"});
    SusConfig c = defaults;
    c.samples_per_level = count(s, "n_level", key, defaults.samples_per_level);
    c.p0 = number(s, "p0", key, defaults.p0);
    c.rho = number(s, "rho", key, defaults.rho);
    c.max_levels = count(s, "max_levels", key, defaults.max_levels);
    wrap(key, [&] {
        c.validate();
        return 0;
    });
    return c;
}

json sus_config_json(const SusConfig& c) {
    return {{"n_level", c.samples_per_level}, {"p0", c.p0}, {"rho", c.rho}, {"max_levels", c.max_levels}};
}

SurrogateConfig parse_surrogate(const json& s, const std::string& path) {
    require_object(s, path);
    allow_keys(s, path, {"kind", "degree", "kernel", "trend"});
    SurrogateConfig c;
    c.kind = wrap(join_path(path, "kind"), [&] { return surrogate_kind_from_string(text(s, "kind", path, "pck")); });
    c.degree = static_cast<int>(count(s, "degree", path, 3));
    c.kernel = wrap(join_path(path, "kernel"), [&] { return kernel_family_from_string(text(s, "kernel", path, "matern52")); });
    const std::string trend = text(s, "trend", path, "linear");
    if (trend == "linear")
        c.trend = TrendKind::linear;
    else if (trend == "constant")
        c.trend = TrendKind::constant;
    else
        throw ConfigError(join_path(path, "trend"), "expected 'constant' or 'linear'");
    return c;
}

json surrogate_json(const SurrogateConfig& c) {
    return {{"kind", to_string(c.kind)}, {"degree", c.degree}, {"kernel", to_string(c.kernel)}, {"trend", to_string(c.trend)}};
}

std::vector<std::size_t> parse_map(const json& m, const std::string& path, const std::vector<std::string>& names) {
    if (!m.is_array() || m.empty()) throw ConfigError(path, "expected a non-empty array of input names or indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const json& e = m[i];
        const std::string p = index_path(path, i);
        if (e.is_string()) {
            const auto it = std::find(names.begin(), names.end(), e.get<std::string>());
            if (it == names.end()) throw ConfigError(p, "unknown input '" + e.get<std::string>() + "'");
            out.push_back(static_cast<std::size_t>(it - names.begin()));
        } else if (e.is_number_unsigned() || (e.is_number_integer() && e.get<std::int64_t>() >= 0)) {
            const auto k = e.get<std::size_t>();
            if (k >= names.size()) throw ConfigError(p, "input index out of range");
            out.push_back(k);
        } else {
            throw ConfigError(p, "expected an input name or index");
        }
    }
    return out;
}

Seeds parse_seeds(const json& doc) {
    if (doc.contains("seed")) {
        if (doc.contains("seeds")) throw ConfigError("seed", "give either 'seed' or 'seeds', not both");
        return Seeds::from_master(count(doc, "seed", ""));
    }
    if (!doc.contains("seeds")) return Seeds::from_master(1);
    const json& s = doc.at("seeds");
    require_object(s, "seeds");
    allow_keys(s, "seeds", {"global", "sus", "usys", "sobol"});
    const Seeds base = Seeds::from_master(count(s, "global", "seeds", 1));
    return {base.global, count(s, "sus", "seeds", base.sus), count(s, "usys", "seeds", base.usys),
            count(s, "sobol", "seeds", base.sobol)};
}

json seeds_json(const Seeds& s) { return {{"global", s.global}, {"sus", s.sus}, {"usys", s.usys}, {"sobol", s.sobol}}; }

json learn_json(const LearnConfig& c, const std::vector<std::size_t>& initial) {
    json j{{"alpha", c.alpha},
           {"n_usys", c.n_usys},
           {"eps_bar", c.eps_bar},
           {"streak", c.streak_required},
           {"n_max", c.n_max},
           {"max_iterations", c.max_iterations},
           {"sobol_samples", c.sobol_samples},
           {"duplicate_tolerance", c.duplicate_tolerance}};
    if (!initial.empty()) j["initial_sizes"] = initial;
    if (c.bounds) {
        if (c.bounds->kind == BoundsMode::Kind::five_sigma)
            j["bounds"] = {{"mode", "five_sigma"}};
        else
            j["bounds"] = {{"mode", "quantile"}, {"p_lo", c.bounds->p_lo}, {"p_hi", c.bounds->p_hi}};
    }
    if (c.dbscan) j["dbscan"] = {{"eps", c.dbscan->eps}, {"min_points", c.dbscan->min_points}};
    return j;
}

void parse_learning(const json& doc, LearnConfig& c) {
    if (!doc.contains("learning")) return;
    const std::string path = "learning";
    const json& l = doc.at(path);
    require_object(l, path);
    allow_keys(l, path, {"alpha", "n_usys", "eps_bar", "streak", "n_max", "max_iterations", "sobol_samples",
                         "duplicate_tolerance", "initial_sizes", "bounds", "dbscan"});
    c.alpha = number(l, "alpha", path, c.alpha);
    c.n_usys = count(l, "n_usys", path, c.n_usys);
    c.eps_bar = number(l, "eps_bar", path, c.eps_bar);
    c.streak_required = count(l, "streak", path, c.streak_required);
    c.n_max = count(l, "n_max", path, c.n_max);
    c.max_iterations = count(l, "max_iterations", path, c.max_iterations);
    c.sobol_samples = count(l, "sobol_samples", path, c.sobol_samples);
    c.duplicate_tolerance = number(l, "duplicate_tolerance", path, c.duplicate_tolerance);
    if (l.contains("initial_sizes")) {
        const json& s = l.at("initial_sizes");
        const std::string p = join_path(path, "initial_sizes");
        if (!s.is_array()) throw ConfigError(p, "expected an array of counts");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i].is_number_unsigned() && !(s[i].is_number_integer() && s[i].get<std::int64_t>() > 0))
                throw ConfigError(index_path(p, i), "expected a positive integer");
            c.initial_sizes.push_back(s[i].get<std::size_t>());
        }
    }
    if (l.contains("bounds")) {
        const std::string p = join_path(path, "bounds");
        const json& b = l.at("bounds");
        require_object(b, p);
        allow_keys(b, p, {"mode", "p_lo", "p_hi"});
        const std::string mode = text(b, "mode", p);
        if (mode == "five_sigma")
            c.bounds = BoundsMode::five_sigma();
        else if (mode == "quantile")
            c.bounds = BoundsMode::quantile(number(b, "p_lo", p, 1e-5), number(b, "p_hi", p, 1.0 - 1e-5));
        else if (mode != "auto")
            throw ConfigError(join_path(p, "mode"), "expected 'five_sigma', 'quantile' or 'auto'");
        if (c.bounds && !(c.bounds->p_lo > 0.0 && c.bounds->p_lo < c.bounds->p_hi && c.bounds->p_hi < 1.0))
            throw ConfigError(p, "need 0 < p_lo < p_hi < 1");
    }
    if (l.contains("dbscan")) {
        const std::string p = join_path(path, "dbscan");
        const json& d = l.at("dbscan");
        require_object(d, p);
        allow_keys(d, p, {"eps", "min_points"});
        c.dbscan = DbscanParams{number(d, "eps", p), count(d, "min_points", p)};
    }
}

}  // namespace

RunSetup parse_config(const json& doc) {
    require_object(doc, "");
    allow_keys(doc, "", {"name", "problem", "inputs", "components", "composition", "reference_pf", "surrogate",
                         "learning", "sus", "sus_final", "seeds", "seed"});
    RunSetup setup;
    ProblemSpec& problem = setup.problem;
    json inputs_json = json::array();
    json components_json = json::array();

    if (doc.contains("problem")) {
        for (const char* k : {"inputs", "components", "composition"})
            if (doc.contains(k)) throw ConfigError(k, "cannot be combined with 'problem'");
        const json& p = doc.at("problem");
        require_object(p, "problem");
        std::map<std::string, double> params;
        for (const auto& [key, value] : p.items())
            if (key != "builtin") params[key] = number(p, key, "problem");
        const std::string builtin = text(p, "builtin", "problem");
        problem = wrap("problem.builtin", [&] { return builtin_problem(builtin, params); });
        const InputModel& model = problem.model;
        for (std::size_t i = 0; i < model.dimension(); ++i)
            inputs_json.push_back(marginal_json(model.names()[i], model.marginal(i)));
        for (std::size_t j = 0; j < model.component_count(); ++j) {
            json c{{"id", "g" + std::to_string(j + 1)}, {"builtin", problem.component_ids[j]}, {"map", json::array()}};
            if (!params.empty()) c["params"] = params;
            for (std::size_t i : model.component_map(j)) c["map"].push_back(model.names()[i]);
            components_json.push_back(c);
        }
        problem.component_ids.clear();
        for (std::size_t j = 0; j < model.component_count(); ++j) problem.component_ids.push_back("g" + std::to_string(j + 1));
    } else {
        if (!doc.contains("inputs")) throw ConfigError("inputs", "missing required field");
        if (!doc.contains("components")) throw ConfigError("components", "missing required field");
        if (!doc.contains("composition")) throw ConfigError("composition", "missing required field");
        const json& inputs = doc.at("inputs");
        if (!inputs.is_array() || inputs.empty()) throw ConfigError("inputs", "expected a non-empty array");
        std::vector<Marginal> marginals;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const std::string p = index_path("inputs", i);
            require_object(inputs[i], p);
            const std::string name = text(inputs[i], "name", p, "x" + std::to_string(i + 1));
            if (std::find(names.begin(), names.end(), name) != names.end())
                throw ConfigError(join_path(p, "name"), "duplicate input name '" + name + "'");
            names.push_back(name);
            marginals.push_back(parse_marginal(inputs[i], p));
            inputs_json.push_back(marginal_json(name, marginals.back()));
        }

        const json& comps = doc.at("components");
        if (!comps.is_array() || comps.empty()) throw ConfigError("components", "expected a non-empty array");
        std::vector<std::vector<std::size_t>> maps;
        for (std::size_t j = 0; j < comps.size(); ++j) {
            const std::string p = index_path("components", j);
            const json& c = comps[j];
            require_object(c, p);
            allow_keys(c, p, {"id", "builtin", "expression", "params", "map"});
            const std::string id = text(c, "id", p, "g" + std::to_string(j + 1));
            json out{{"id", id}};
            if (c.contains("builtin") == c.contains("expression"))
                throw ConfigError(p, "give exactly one of 'builtin' and 'expression'");
            if (c.contains("builtin")) {
                const std::string builtin = text(c, "builtin", p);
                std::map<std::string, double> params;
                if (c.contains("params")) {
                    const json& pj = c.at("params");
                    require_object(pj, join_path(p, "params"));
                    for (const auto& [key, value] : pj.items()) {
                        (void)value;
                        params[key] = number(pj, key, join_path(p, "params"));
                    }
                }
                ComponentFunction f = wrap(join_path(p, "builtin"), [&] { return builtin_component(builtin, params); });
                const std::size_t dim = builtin_component_dimension(builtin);
                std::vector<std::size_t> map;
                if (c.contains("map")) {
                    map = parse_map(c.at("map"), join_path(p, "map"), names);
                } else if (dim == names.size()) {
                    map.resize(dim);
                    std::iota(map.begin(), map.end(), std::size_t{0});
                } else {
                    throw ConfigError(join_path(p, "map"), "missing required field");
                }
                if (map.size() != dim)
                    throw ConfigError(join_path(p, "map"), builtin + " takes " + std::to_string(dim) + " inputs");
                out["builtin"] = builtin;
                if (!params.empty()) out["params"] = params;
                problem.limit_states.push_back(std::move(f));
                maps.push_back(std::move(map));
            } else {
                const std::string expr_text = text(c, "expression", p);
                if (c.contains("params")) throw ConfigError(join_path(p, "params"), "only builtin components take params");
                std::vector<std::size_t> map;
                if (c.contains("map")) {
                    map = parse_map(c.at("map"), join_path(p, "map"), names);
                } else {
                    const CompositionExpr all = wrap(join_path(p, "expression"), [&] { return parse_limit_state(expr_text, names); });
                    std::set<std::size_t> used;
                    for (const auto& node : all.nodes())
                        if (node.op == CompositionExpr::Op::variable) used.insert(node.variable);
                    map.assign(used.begin(), used.end());
                    if (map.empty()) throw ConfigError(join_path(p, "expression"), "references no input");
                }
                std::vector<std::string> local;
                for (std::size_t i : map) local.push_back(names[i]);
                const CompositionExpr expr =
                    wrap(join_path(p, "expression"), [&] { return parse_limit_state(expr_text, local); });
                out["expression"] = expr_text;
                problem.limit_states.push_back(
                    [expr](const Eigen::VectorXd& x) { return expr.evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); });
                maps.push_back(std::move(map));
            }
            out["map"] = json::array();
            for (std::size_t i : maps.back()) out["map"].push_back(names[i]);
            components_json.push_back(out);
            problem.component_ids.push_back(id);
        }
        problem.model = wrap("components", [&] { return InputModel(marginals, maps, names); });
        problem.composition = text(doc, "composition", "");
        problem.name = "custom";
    }

    if (doc.contains("name")) problem.name = text(doc, "name", "");
    if (doc.contains("reference_pf")) problem.reference_pf = number(doc, "reference_pf", "");
    wrap("composition", [&] {
        parse_composition(problem.composition).bind(problem.model.component_count());
        return 0;
    });
    wrap("config", [&] {
        problem.validate();
        return 0;
    });

    LearnConfig& learn = setup.learn;
    if (doc.contains("surrogate")) {
        const json& s = doc.at("surrogate");
        learn.surrogates.clear();
        if (s.is_array()) {
            for (std::size_t i = 0; i < s.size(); ++i) learn.surrogates.push_back(parse_surrogate(s[i], index_path("surrogate", i)));
        } else {
            learn.surrogates.push_back(parse_surrogate(s, "surrogate"));
        }
    }
    parse_learning(doc, learn);
    learn.sus = parse_sus(doc, "sus", learn.sus);
    learn.sus_final = parse_sus(doc, "sus_final", learn.sus_final);
    learn.seeds = parse_seeds(doc);
    wrap("learning", [&] {
        learn.validate(problem.model.component_count());
        return 0;
    });

    json& r = setup.resolved;
    r["name"] = problem.name;
    r["inputs"] = inputs_json;
    r["components"] = components_json;
    r["composition"] = problem.composition;
    if (problem.reference_pf) r["reference_pf"] = *problem.reference_pf;
    if (learn.surrogates.size() == 1) {
        r["surrogate"] = surrogate_json(learn.surrogates.front());
    } else {
        r["surrogate"] = json::array();
        for (const auto& s : learn.surrogates) r["surrogate"].push_back(surrogate_json(s));
    }
    r["learning"] = learn_json(learn, learn.initial_sizes);
    r["sus"] = sus_config_json(learn.sus);
    r["sus_final"] = sus_config_json(learn.sus_final);
    r["seeds"] = seeds_json(learn.seeds);
    return setup;
}

RunSetup load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

void apply_master_seed(RunSetup& setup, std::uint64_t seed) {
    setup.learn.seeds = Seeds::from_master(seed);
    setup.resolved["seeds"] = seeds_json(setup.learn.seeds);
}

json sus_to_json(const SusResult& result, bool include_samples) {
    json levels = json::array();
    for (const auto& l : result.levels)
        levels.push_back({{"threshold", l.threshold},
                          {"conditional_probability", l.conditional_probability},
                          {"acceptance_rate", l.acceptance_rate},
                          {"cov", l.cov}});
    json j{{"pf", result.pf},
           {"beta", result.pf > 0.0 && result.pf < 1.0 ? json(reliability_index(result.pf)) : json()},
           {"cov", result.cov},
           {"converged", result.converged},
           {"evaluations", result.evaluations()},
           {"levels", levels}};
    if (include_samples) {
        json s = json::array();
        for (Eigen::Index k = 0; k < result.samples.cols(); ++k) {
            std::vector<double> x(result.samples.col(k).data(), result.samples.col(k).data() + result.samples.rows());
            s.push_back({{"x", x}, {"g", result.values[k]}});
        }
        j["samples"] = s;
    }
    return j;
}

json model_to_json(const SurrogateModel& model) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json j{{"trend", to_string(model.trend().kind)},
           {"kernel", to_string(model.kernel())},
           {"length_scales", vec(model.length_scales())},
           {"process_variance", model.process_variance()},
           {"nugget", model.nugget()},
           {"log_likelihood", model.log_likelihood()},
           {"trend_coefficients", vec(model.trend_coefficients())},
           {"scaling", model.scaling().kind == InputScaling::Kind::affine ? "affine" : "standard_normal"}};
    if (model.trend().kind == TrendKind::pce) j["trend_indices"] = model.trend().indices;
    json pts = json::array();
    const auto& ed = model.design();
    for (Eigen::Index k = 0; k < ed.points.cols(); ++k) pts.push_back(vec(ed.points.col(k)));
    j["design"] = {{"points", pts}, {"values", vec(ed.values)}};
    if (!model.warnings().empty()) j["warnings"] = model.warnings();
    return j;
}

json report_to_json(const RunReport& report, const RunSetup& setup) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json j;
    j["problem"] = report.problem;
    j["converged"] = report.converged;
    j["pf"] = report.pf;
    j["beta"] = report.beta;
    j["cov"] = report.cov;
    j["final_sus_converged"] = report.final_sus_converged;
    if (report.reference_pf) {
        const double ref_beta = reliability_index(*report.reference_pf);
        j["reference"] = {{"pf", *report.reference_pf},
                          {"beta", ref_beta},
                          {"relative_error_beta", std::abs(report.beta - ref_beta) / std::abs(ref_beta)}};
    }
    j["iterations"] = report.iterations;
    j["evaluations"] = {{"per_component", report.evaluations},
                        {"initial", report.initial_sizes},
                        {"total", report.total_evaluations}};
    j["component_ids"] = report.component_ids;
    j["composition_canonical"] = parse_composition(setup.problem.composition).to_string();
    json history = json::array();
    for (const auto& h : report.history)
        history.push_back({{"iteration", h.iteration},
                           {"pf", h.pf},
                           {"beta", h.beta},
                           {"epsilon", std::isnan(h.epsilon) ? json() : json(h.epsilon)},
                           {"sus_cov", h.sus_cov},
                           {"pool_size", h.pool_size},
                           {"candidates", h.candidates},
                           {"clusters", h.clusters},
                           {"added", h.added},
                           {"alpha", h.alpha},
                           {"design_sizes", h.design_sizes}});
    j["history"] = history;
    json enr = json::array();
    for (const auto& e : report.enrichments)
        enr.push_back({{"iteration", e.iteration},
                       {"point", vec(e.point)},
                       {"usys", e.usys},
                       {"cluster", e.cluster},
                       {"sobol", vec(e.sobol)},
                       {"component", e.component + 1},
                       {"value", e.value},
                       {"routing", e.routing}});
    j["enrichments"] = enr;
    j["log"] = report.log;
    j["seeds"] = {{"global", report.seeds.global}, {"sus", report.seeds.sus}, {"usys", report.seeds.usys},
                  {"sobol", report.seeds.sobol}};
    j["wall_seconds"] = report.wall_seconds;
    json models = json::array();
    for (const auto& m : report.models) models.push_back(model_to_json(m));
    j["models"] = models;
    j["config"] = setup.resolved;
    return j;
}

std::string history_csv(const RunReport& report) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "iteration,pf,beta,epsilon,sus_cov,pool_size,candidates,clusters,added,alpha";
    for (std::size_t j = 0; j < report.evaluations.size(); ++j) os << ",N_" << (j + 1);
    os << '\n';
    for (const auto& h : report.history) {
        os << h.iteration << ',' << num(h.pf) << ',' << num(h.beta) << ',' << (std::isnan(h.epsilon) ? "" : num(h.epsilon))
           << ',' << num(h.sus_cov) << ',' << h.pool_size << ',' << h.candidates << ',' << h.clusters << ',' << h.added
           << ',' << num(h.alpha);
        for (std::size_t n : h.design_sizes) os << ',' << n;
        os << '\n';
    }
    return os.str();
}

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("quartiles: no values");
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

json to_json(const Quartiles& q) {
    return {{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}};
}

}  // namespace sysrel
