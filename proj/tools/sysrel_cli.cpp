// Command-line front end: run, reference, repeat and validate analyses described by a JSON config.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sysrel/active_learning.hpp"
#include "sysrel/composition.hpp"
#include "sysrel/config.hpp"
#include "sysrel/random.hpp"
#include "sysrel/subset_simulation.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
    std::size_t repetitions = 15;
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
}

sysrel::RunSetup load(const Options& o) {
    sysrel::RunSetup setup = sysrel::load_config(o.config);
    if (o.seed) sysrel::apply_master_seed(setup, *o.seed);
    return setup;
}

int cmd_run(const Options& o) {
    const sysrel::RunSetup setup = load(o);
    const sysrel::RunReport report = sysrel::run(setup.problem, setup.learn);
    if (o.format == "csv")
        emit(sysrel::history_csv(report), o.out);
    else
        emit(sysrel::report_to_json(report, setup).dump(2) + "\n", o.out);
    std::fprintf(stderr, "pf = %.6e  beta = %.6f  evaluations = %zu  iterations = %zu  %s\n", report.pf, report.beta,
                 report.total_evaluations, report.iterations, report.converged ? "converged" : "NOT converged");
    return report.converged ? kExitConverged : kExitNotConverged;
}

int cmd_reference(const Options& o) {
    const sysrel::RunSetup setup = load(o);
    const auto& problem = setup.problem;
    const sysrel::CompositionExpr expr = sysrel::parse_composition(problem.composition);
    const auto& maps = problem.model.component_maps();
    auto lsf = [&](const Eigen::VectorXd& x) {
        std::vector<double> z(maps.size());
        for (std::size_t j = 0; j < maps.size(); ++j) z[j] = problem.limit_states[j](sysrel::project(x, maps[j]));
        return expr.evaluate(z);
    };
    sysrel::SusConfig cfg = setup.learn.sus_final;
    cfg.seed = sysrel::derive_seed(setup.learn.seeds.sus, 0x4ef);
    const sysrel::SusResult res = sysrel::subset_simulation(lsf, problem.model, cfg);
    json j = sysrel::sus_to_json(res);
    j["problem"] = problem.name;
    j["limit_state_calls"] = res.evaluations() * maps.size();
    j["config"] = setup.resolved;
    if (o.format == "csv") {
        char buf[160];
        std::snprintf(buf, sizeof buf, "pf,beta,cov,evaluations\n%.17g,%.17g,%.17g,%zu\n", res.pf,
                      res.pf > 0.0 && res.pf < 1.0 ? sysrel::reliability_index(res.pf) : 0.0, res.cov,
                      res.evaluations());
        emit(buf, o.out);
    } else {
        emit(j.dump(2) + "\n", o.out);
    }
    return res.converged ? kExitConverged : kExitNotConverged;
}

int cmd_repeat(const Options& o) {
    sysrel::RunSetup setup = load(o);
    const std::uint64_t base = o.seed ? *o.seed : setup.learn.seeds.global;
    json runs = json::array();
    std::vector<double> betas, pfs, totals;
    std::vector<std::vector<double>> per_component(setup.problem.model.component_count());
    bool all_converged = true;
    std::string csv = "seed,pf,beta,total_evaluations,iterations,converged\n";
    for (std::size_t r = 0; r < o.repetitions; ++r) {
        sysrel::apply_master_seed(setup, base + r);
        const sysrel::RunReport rep = sysrel::run(setup.problem, setup.learn);
        all_converged = all_converged && rep.converged;
        betas.push_back(rep.beta);
        pfs.push_back(rep.pf);
        totals.push_back(static_cast<double>(rep.total_evaluations));
        for (std::size_t j = 0; j < per_component.size(); ++j)
            per_component[j].push_back(static_cast<double>(rep.evaluations[j]));
        runs.push_back({{"seed", base + r},
                        {"pf", rep.pf},
                        {"beta", rep.beta},
                        {"evaluations", rep.evaluations},
                        {"total_evaluations", rep.total_evaluations},
                        {"iterations", rep.iterations},
                        {"converged", rep.converged}});
        char buf[200];
        std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%zu,%zu,%d\n", static_cast<unsigned long long>(base + r), rep.pf,
                      rep.beta, rep.total_evaluations, rep.iterations, rep.converged ? 1 : 0);
        csv += buf;
        std::fprintf(stderr, "[%zu/%zu] seed %llu: beta = %.6f  evaluations = %zu\n", r + 1, o.repetitions,
                     static_cast<unsigned long long>(base + r), rep.beta, rep.total_evaluations);
    }
    json summary{{"beta", sysrel::to_json(sysrel::quartiles(betas))},
                 {"pf", sysrel::to_json(sysrel::quartiles(pfs))},
                 {"total_evaluations", sysrel::to_json(sysrel::quartiles(totals))}};
    json comp = json::array();
    for (const auto& v : per_component) comp.push_back(sysrel::to_json(sysrel::quartiles(v)));
    summary["evaluations_per_component"] = comp;
    if (setup.problem.reference_pf) {
        const double ref = sysrel::reliability_index(*setup.problem.reference_pf);
        std::vector<double> err;
        for (double b : betas) err.push_back(std::abs(b - ref) / ref);
        summary["relative_error_beta"] = sysrel::to_json(sysrel::quartiles(err));
    }
    setup.resolved.erase("seeds");
    json out{{"problem", setup.problem.name}, {"repetitions", o.repetitions}, {"base_seed", base},
             {"summary", summary}, {"runs", runs}, {"config", setup.resolved}};
    emit(o.format == "csv" ? csv : out.dump(2) + "\n", o.out);
    return all_converged ? kExitConverged : kExitNotConverged;
}

int cmd_validate(const Options& o) {
    const sysrel::RunSetup setup = sysrel::load_config(o.config);
    std::cout << "ok: " << setup.problem.name << " with " << setup.problem.model.dimension() << " inputs and "
              << setup.problem.model.component_count() << " components\n";
    return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active-learning system reliability analysis"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool runs) {
        sub->add_option("config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
        if (!runs) return;
        sub->add_option("--seed", o.seed, "master seed; derives the global, sus, usys and sobol seeds");
        sub->add_option("--out", o.out, "output file (default: stdout)");
        sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };
    CLI::App* run = app.add_subcommand("run", "active-learning analysis");
    add_common(run, true);
    CLI::App* reference = app.add_subcommand("reference", "plain subset simulation on the true limit states");
    add_common(reference, true);
    CLI::App* repeat = app.add_subcommand("repeat", "repeat the analysis over consecutive seeds and summarize");
    add_common(repeat, true);
    repeat->add_option("--n", o.repetitions, "number of repetitions")->check(CLI::PositiveNumber);
    CLI::App* validate = app.add_subcommand("validate", "check a configuration file");
    add_common(validate, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (*run) return cmd_run(o);
        if (*reference) return cmd_reference(o);
        if (*repeat) return cmd_repeat(o);
        if (*validate) return cmd_validate(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
