#include "sysrel/active_learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "sysrel/errors.hpp"
#include "sysrel/random.hpp"
#include "sysrel/sensitivity.hpp"

namespace sysrel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream tags for derive_seed.
constexpr std::uint64_t kTagDesign = 0xED;
constexpr std::uint64_t kTagFit = 0xF17;
constexpr std::uint64_t kTagFinal = 0xF1A1;

std::string describe(const Eigen::VectorXd& x) {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ']';
    return os.str();
}

double beta_of(double pf) {
    return -standard_normal_quantile(std::clamp(pf, std::numeric_limits<double>::min(), 1.0 - 1e-16));
}

std::size_t initial_size(const ProblemSpec& problem, const LearnConfig& config, std::size_t j) {
    if (!config.initial_sizes.empty()) return config.initial_sizes[j];
    const std::size_t d = problem.model.component_map(j).size();
    std::size_t n = 2 * d + 1;
    const SurrogateConfig& sc = config.surrogate(j);
    if (sc.kind == SurrogateKind::kriging) {
        const std::size_t p = sc.trend == TrendKind::linear ? d + 1 : 1;
        n = std::max(n, p + 2);
    }
    return std::max<std::size_t>(n, 3);
}

SurrogateModel fit_component(const ExperimentalDesign& ed, std::size_t j, const ProblemSpec& problem,
                             const LearnConfig& config, std::size_t refit, const SurrogateModel* previous) {
    const SurrogateConfig& sc = config.surrogate(j);
    FitOptions opts;
    opts.kernel = sc.kernel;
    opts.seed = derive_seed(config.seeds.global, kTagFit, j, refit);
    opts.marginals = problem.model.component_marginals(j);
    if (previous && previous->fitted()) opts.warm_start = previous->length_scales();
    if (sc.kind == SurrogateKind::pck) return fit_pck(ed, sc.degree, sc.kernel, opts);
    return fit_kriging(ed, sc.trend, sc.kernel, opts);
}

Eigen::VectorXd component_standard(const InputModel& model, std::size_t j, const Eigen::VectorXd& xj) {
    const auto& map = model.component_map(j);
    Eigen::VectorXd u(xj.size());
    for (Eigen::Index i = 0; i < xj.size(); ++i)
        u[i] = marginal_to_standard(model.marginal(map[static_cast<std::size_t>(i)]), xj[i]);
    return u;
}

void predict_all(const std::vector<SurrogateModel>& models, const std::vector<std::vector<std::size_t>>& maps,
                 const Eigen::VectorXd& x, Eigen::VectorXd& means, Eigen::VectorXd& stds) {
    const auto m = static_cast<Eigen::Index>(models.size());
    means.resize(m);
    stds.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Prediction p = models[static_cast<std::size_t>(j)].predict(project(x, maps[static_cast<std::size_t>(j)]));
        means[j] = p.mean;
        stds[j] = std::sqrt(p.variance);
    }
}

}  // namespace

const char* to_string(SurrogateKind kind) { return kind == SurrogateKind::pck ? "pck" : "kriging"; }

SurrogateKind surrogate_kind_from_string(const std::string& name) {
    if (name == "pck" || name == "pc-kriging") return SurrogateKind::pck;
    if (name == "kriging") return SurrogateKind::kriging;
    throw std::invalid_argument("unknown surrogate kind '" + name + "' (expected kriging or pck)");
}

Seeds Seeds::from_master(std::uint64_t s) { return {s, derive_seed(s, 1), derive_seed(s, 2), derive_seed(s, 3)}; }

const SurrogateConfig& LearnConfig::surrogate(std::size_t j) const {
    if (surrogates.empty()) throw std::invalid_argument("learning config: no surrogate configuration");
    return surrogates.size() == 1 ? surrogates.front() : surrogates.at(j);
}

void LearnConfig::validate(std::size_t component_count) const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("learning.alpha must lie in (0, 1]");
    if (n_usys < 16) throw std::invalid_argument("learning.n_usys must be at least 16");
    if (!(eps_bar > 0.0)) throw std::invalid_argument("learning.eps_bar must be positive");
    if (streak_required < 1) throw std::invalid_argument("learning.streak must be at least 1");
    if (max_iterations < 1) throw std::invalid_argument("learning.max_iterations must be at least 1");
    if (sobol_samples < 256) throw std::invalid_argument("learning.sobol_samples must be at least 256");
    if (surrogates.size() != 1 && surrogates.size() != component_count)
        throw std::invalid_argument("surrogate: give one configuration or one per component");
    for (const auto& s : surrogates) {
        if (s.degree < 0) throw std::invalid_argument("surrogate.degree must be non-negative");
        if (s.kind == SurrogateKind::kriging && s.trend == TrendKind::pce)
            throw std::invalid_argument("surrogate: kriging takes a constant or linear trend");
    }
    if (!initial_sizes.empty() && initial_sizes.size() != component_count)
        throw std::invalid_argument("learning.initial_sizes must list one size per component");
    if (dbscan && !(dbscan->eps > 0.0 && dbscan->min_points >= 1))
        throw std::invalid_argument("learning.dbscan needs eps > 0 and min_points >= 1");
    if (!(duplicate_tolerance >= 0.0)) throw std::invalid_argument("learning.duplicate_tolerance must be >= 0");
    sus.validate();
    sus_final.validate();
}

void ConvergenceTracker::push(double beta) {
    if (!betas_.empty()) {
        const double prev = betas_.back();
        const double delta = std::abs(beta - prev);
        epsilons_.push_back(prev != 0.0 ? delta / std::abs(prev) : delta);
    }
    betas_.push_back(beta);
}

std::size_t ConvergenceTracker::streak(double eps_bar) const {
    std::size_t s = 0;
    for (auto it = epsilons_.rbegin(); it != epsilons_.rend() && *it < eps_bar; ++it) ++s;
    return s;
}

bool check_convergence(const ConvergenceTracker& tracker, double eps_bar, std::size_t streak_required) {
    if (tracker.betas().size() < 2) return false;
    return tracker.streak(eps_bar) >= streak_required;
}

double usys_from_gaussians(const CompositionExpr& expr, const Eigen::VectorXd& means, const Eigen::VectorXd& stds,
                           std::size_t n, std::uint64_t seed, double absolute_tolerance) {
    if (n < 16) throw std::invalid_argument("usys: at least 16 draws are required");
    if (means.size() != stds.size()) throw std::invalid_argument("usys: means and stds differ in length");
    if ((stds.array() == 0.0).all()) return kInf;
    Rng rng(seed);
    boost::random::normal_distribution<double> normal;
    const Eigen::Index m = means.size();
    Eigen::VectorXd z(m);
    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) z[j] = means[j] + stds[j] * normal(rng);
        h[i] = expr.evaluate(z);
        if (!std::isfinite(h[i])) throw EvaluationError("usys: composition produced a non-finite value");
        sum += h[i];
    }
    const double mean = sum / static_cast<double>(n);
    for (double v : h) sum_sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sum_sq / static_cast<double>(n - 1));
    if (!(sd >= 1e-12 * std::abs(mean)) || sd <= absolute_tolerance) return kInf;
    return std::abs(mean) / sd;
}

double usys(const std::vector<SurrogateModel>& models, const CompositionExpr& expr,
            const std::vector<std::vector<std::size_t>>& maps, const Eigen::VectorXd& x, std::size_t n,
            std::uint64_t seed) {
    if (models.size() != maps.size()) throw std::invalid_argument("usys: one map per model is required");
    expr.bind(models.size());
    Eigen::VectorXd means;
    Eigen::VectorXd stds;
    predict_all(models, maps, x, means, stds);
    if (!means.allFinite() || !stds.allFinite())
        throw EvaluationError("usys: non-finite surrogate prediction at x = " + describe(x));
    try {
        return usys_from_gaussians(expr, means, stds, n, seed);
    } catch (const EvaluationError&) {
        throw EvaluationError("usys: composition produced a non-finite value at x = " + describe(x));
    }
}

std::vector<std::size_t> filter_candidates(const Eigen::VectorXd& usys_values, double alpha) {
    const auto n = static_cast<std::size_t>(usys_values.size());
    if (n == 0) throw std::invalid_argument("filter_candidates: empty pool");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("filter_candidates: alpha must lie in (0, 1]");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return usys_values[a] < usys_values[b]; });
    const auto rank = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) - 1e-9)),
                                              1, n);
    const double cut = usys_values[order[rank - 1]];
    std::size_t keep = rank;
    while (keep < n && usys_values[order[keep]] <= cut) ++keep;
    order.resize(keep);
    return order;
}

std::vector<std::size_t> select_enrichment(const Eigen::VectorXd& candidate_usys, const ClusterLabels& labels,
                                           std::size_t n_max) {
    const auto n = static_cast<std::size_t>(candidate_usys.size());
    if (labels.labels.size() != n) throw std::invalid_argument("select_enrichment: labels do not cover the candidates");
    std::vector<std::size_t> reps(labels.count, n);
    std::vector<std::size_t> noise;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = labels.labels[i];
        if (c == ClusterLabels::noise) {
            noise.push_back(i);
            continue;
        }
        if (c < 0 || static_cast<std::size_t>(c) >= labels.count)
            throw std::invalid_argument("select_enrichment: cluster label out of range");
        std::size_t& r = reps[static_cast<std::size_t>(c)];
        if (r == n || candidate_usys[i] < candidate_usys[r]) r = i;
    }
    reps.erase(std::remove(reps.begin(), reps.end(), n), reps.end());
    auto by_usys = [&](std::size_t a, std::size_t b) {
        return candidate_usys[a] < candidate_usys[b] || (candidate_usys[a] == candidate_usys[b] && a < b);
    };
    std::sort(reps.begin(), reps.end(), by_usys);
    std::sort(noise.begin(), noise.end(), by_usys);
    reps.insert(reps.end(), noise.begin(), noise.end());
    if (reps.size() > n_max) reps.resize(n_max);
    return reps;
}

bool is_duplicate(const SystemState& state, std::size_t j, const Eigen::VectorXd& x, const InputModel& model,
                  double tolerance) {
    const Eigen::VectorXd u = component_standard(model, j, project(x, model.component_map(j)));
    const Eigen::MatrixXd& design = state.standard_designs.at(j);
    for (Eigen::Index k = 0; k < design.cols(); ++k)
        if ((design.col(k) - u).norm() <= tolerance) return true;
    return false;
}

double enrich_and_refit(SystemState& state, std::size_t j, const Eigen::VectorXd& x, const ProblemSpec& problem,
                        const LearnConfig& config) {
    const InputModel& model = problem.model;
    if (j >= state.models.size()) throw std::invalid_argument("enrich_and_refit: component index out of range");
    if (static_cast<std::size_t>(x.size()) != model.dimension())
        throw std::invalid_argument("enrich_and_refit: point dimension does not match the input model");
    if (is_duplicate(state, j, x, model, config.duplicate_tolerance))
        throw std::invalid_argument("enrich_and_refit: point duplicates an existing design point of component " +
                                    std::to_string(j + 1));
    const Eigen::VectorXd xj = project(x, model.component_map(j));
    const double value = problem.limit_states[j](xj);
    if (!std::isfinite(value))
        throw EvaluationError("limit state " + std::to_string(j + 1) + " returned a non-finite value at x = " +
                              describe(xj));
    state.designs[j].add(xj, value);
    Eigen::MatrixXd& sd = state.standard_designs[j];
    sd.conservativeResize(xj.size(), sd.cols() + 1);
    sd.col(sd.cols() - 1) = component_standard(model, j, xj);
    ++state.refits[j];
    state.models[j] = fit_component(state.designs[j], j, problem, config, state.refits[j], &state.models[j]);
    return value;
}

RunReport run(const ProblemSpec& problem_in, const LearnConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    problem_in.validate();
    const std::size_t m = problem_in.model.component_count();
    config.validate(m);
    const InputModel& model = problem_in.model;
    const auto& maps = model.component_maps();
    const CompositionExpr expr = parse_composition(problem_in.composition);
    expr.bind(m);

    // Every true limit-state call goes through a counter.
    auto counters = std::make_shared<std::vector<std::size_t>>(m, 0);
    ProblemSpec problem = problem_in;
    for (std::size_t j = 0; j < m; ++j) {
        problem.limit_states[j] = [f = problem_in.limit_states[j], counters, j](const Eigen::VectorXd& x) {
            ++(*counters)[j];
            return f(x);
        };
    }

    RunReport report;
    report.problem = problem.name;
    report.component_ids = problem.component_ids;
    report.reference_pf = problem.reference_pf;
    report.seeds = config.seeds;

    // Initial designs: Latin hypercube in each component's slice of the sampling box.
    SystemState state;
    state.designs.resize(m);
    state.standard_designs.resize(m);
    state.models.resize(m);
    state.refits.assign(m, 0);
    const Hypercube box = initial_design_bounds(model, config.bounds ? *config.bounds : BoundsMode::automatic(model.dimension()));
    for (std::size_t j = 0; j < m; ++j) {
        const auto& map = maps[j];
        const std::size_t n0 = initial_size(problem, config, j);
        Hypercube sub{project(box.lower, map), project(box.upper, map)};
        const Eigen::MatrixXd pts = lhs_sample(sub, n0, derive_seed(config.seeds.global, kTagDesign, j));
        ExperimentalDesign& ed = state.designs[j];
        ed.points = pts;
        ed.values.resize(pts.cols());
        state.standard_designs[j].resize(pts.rows(), pts.cols());
        for (Eigen::Index k = 0; k < pts.cols(); ++k) {
            const Eigen::VectorXd xk = pts.col(k);
            const double v = problem.limit_states[j](xk);
            if (!std::isfinite(v))
                throw EvaluationError("limit state " + std::to_string(j + 1) + " returned a non-finite value at x = " +
                                      describe(xk));
            ed.values[k] = v;
            state.standard_designs[j].col(k) = component_standard(model, j, xk);
        }
        report.initial_sizes.push_back(n0);
        state.models[j] = fit_component(ed, j, problem, config, 0, nullptr);
    }

    const std::size_t n_max = config.n_max > 0 ? config.n_max : model.dimension();
    SusConfig sus_cfg = config.sus;
    sus_cfg.seed = config.seeds.sus;  // common random numbers across iterations
    ConvergenceTracker tracker;
    double alpha = config.alpha;
    bool alpha_doubled = false;
    std::size_t stalls = 0;

    for (std::size_t k = 1; k <= config.max_iterations; ++k) {
        const SusResult sus = subset_simulation(system_mean_lsf(state.models, expr, maps), model, sus_cfg);
        const double beta = beta_of(sus.pf);
        tracker.push(beta);

        IterationRecord rec;
        rec.iteration = k;
        rec.pf = sus.pf;
        rec.beta = beta;
        rec.epsilon = tracker.epsilons().empty() ? std::numeric_limits<double>::quiet_NaN() : tracker.epsilons().back();
        rec.sus_cov = sus.cov;
        rec.pool_size = sus.evaluations();
        rec.alpha = alpha;
        report.iterations = k;

        auto finish_iteration = [&] {
            for (const auto& d : state.designs) rec.design_sizes.push_back(d.size());
            report.history.push_back(rec);
        };
        if (check_convergence(tracker, config.eps_bar, config.streak_required)) {
            report.converged = true;
            finish_iteration();
            break;
        }
        if (k == config.max_iterations) {
            report.log.push_back("iteration " + std::to_string(k) + ": iteration limit reached before convergence");
            finish_iteration();
            break;
        }

        // System learning function over the whole candidate pool.
        const auto pool = static_cast<Eigen::Index>(sus.evaluations());
        Eigen::VectorXd u_sys(pool);
        Eigen::VectorXd means;
        Eigen::VectorXd stds;
        // Spreads this small relative to the response scale carry no classification doubt.
        const double pool_mean = sus.values.mean();
        const double certain = 1e-6 * std::sqrt((sus.values.array() - pool_mean).square().mean());
        for (Eigen::Index i = 0; i < pool; ++i) {
            const Eigen::VectorXd x = sus.samples.col(i);
            predict_all(state.models, maps, x, means, stds);
            if (!means.allFinite() || !stds.allFinite())
                throw EvaluationError("non-finite surrogate prediction at x = " + describe(x));
            u_sys[i] = usys_from_gaussians(expr, means, stds, config.n_usys, derive_seed(config.seeds.usys, k, i), certain);
        }

        std::vector<std::size_t> cand = filter_candidates(u_sys, alpha);
        cand.erase(std::remove_if(cand.begin(), cand.end(), [&](std::size_t i) { return !std::isfinite(u_sys[static_cast<Eigen::Index>(i)]); }),
                   cand.end());
        rec.candidates = cand.size();

        std::size_t added = 0;
        if (!cand.empty()) {
            Eigen::MatrixXd cand_u(model.dimension(), static_cast<Eigen::Index>(cand.size()));
            Eigen::VectorXd cand_usys(static_cast<Eigen::Index>(cand.size()));
            for (std::size_t c = 0; c < cand.size(); ++c) {
                cand_u.col(static_cast<Eigen::Index>(c)) = sus.standard_samples.col(static_cast<Eigen::Index>(cand[c]));
                cand_usys[static_cast<Eigen::Index>(c)] = u_sys[static_cast<Eigen::Index>(cand[c])];
            }
            const DbscanParams params = config.dbscan ? *config.dbscan : default_params(cand_u);
            const ClusterLabels labels = dbscan(cand_u, params);
            rec.clusters = labels.count;

            std::vector<std::size_t> chosen;
            for (std::size_t c : select_enrichment(cand_usys, labels, cand.size())) {
                if (chosen.size() == n_max) break;
                const Eigen::VectorXd x = sus.samples.col(static_cast<Eigen::Index>(cand[c]));
                bool fresh = false;
                for (std::size_t j = 0; j < m && !fresh; ++j)
                    fresh = !is_duplicate(state, j, x, model, config.duplicate_tolerance);
                if (fresh)
                    chosen.push_back(c);
                else
                    report.log.push_back("iteration " + std::to_string(k) + ": candidate " + describe(x) +
                                         " already in every design, skipped");
            }

            // Route each point to one limit state and refit before handling the next.
            for (std::size_t p = 0; p < chosen.size(); ++p) {
                const std::size_t c = chosen[p];
                const Eigen::VectorXd x = sus.samples.col(static_cast<Eigen::Index>(cand[c]));
                predict_all(state.models, maps, x, means, stds);

                EnrichmentRecord er;
                er.iteration = k;
                er.point = x;
                er.usys = cand_usys[static_cast<Eigen::Index>(c)];
                er.cluster = labels.labels[c];
                std::vector<std::size_t> ranking(m);
                std::iota(ranking.begin(), ranking.end(), std::size_t{0});
                try {
                    er.sobol = total_sobol(expr, {means, stds}, config.sobol_samples,
                                           derive_seed(config.seeds.sobol, k, p));
                    std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
                        return er.sobol[static_cast<Eigen::Index>(a)] > er.sobol[static_cast<Eigen::Index>(b)];
                    });
                    ranking.erase(std::remove_if(ranking.begin(), ranking.end(),
                                                 [&](std::size_t j) { return !(er.sobol[static_cast<Eigen::Index>(j)] > 0.0); }),
                                  ranking.end());
                    if (ranking.empty()) throw RoutingError("all total indices vanish");
                    er.routing = "sobol";
                } catch (const std::runtime_error& e) {
                    if (!dynamic_cast<const DegenerateVarianceError*>(&e) && !dynamic_cast<const RoutingError*>(&e)) throw;
                    // Route by the smallest deviation number instead.
                    er.sobol = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
                    std::vector<double> dev(m);
                    for (std::size_t j = 0; j < m; ++j) {
                        const auto jj = static_cast<Eigen::Index>(j);
                        dev[j] = stds[jj] > 0.0 ? std::abs(means[jj]) / stds[jj] : kInf;
                    }
                    ranking.resize(m);
                    std::iota(ranking.begin(), ranking.end(), std::size_t{0});
                    std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) { return dev[a] < dev[b]; });
                    er.routing = "fallback";
                    report.log.push_back("iteration " + std::to_string(k) + ": Sobol' routing degenerate at " +
                                         describe(x) + " (" + e.what() + "), routed by deviation number");
                }

                bool done = false;
                for (std::size_t r = 0; r < ranking.size() && !done; ++r) {
                    const std::size_t j = ranking[r];
                    if (is_duplicate(state, j, x, model, config.duplicate_tolerance)) continue;
                    if (r > 0 && er.routing == "sobol") er.routing = "next_best";
                    er.component = j;
                    er.value = enrich_and_refit(state, j, x, problem, config);
                    report.enrichments.push_back(er);
                    ++added;
                    done = true;
                }
                if (!done)
                    report.log.push_back("iteration " + std::to_string(k) + ": no routable component for " +
                                         describe(x) + ", skipped");
            }
        }
        rec.added = added;
        finish_iteration();

        if (added == 0) {
            ++stalls;
            if (!alpha_doubled) {
                alpha = std::min(1.0, 2.0 * alpha);
                alpha_doubled = true;
                report.log.push_back("iteration " + std::to_string(k) + ": no new points, alpha doubled to " +
                                     std::to_string(alpha));
            } else if (stalls > config.streak_required) {
                // Frozen surrogates repeat beta exactly, so the streak should already have completed.
                report.log.push_back("iteration " + std::to_string(k) + ": no new points after widening the filter; stopping");
                break;
            }
        } else {
            stalls = 0;
        }
    }

    // Final estimate with the last surrogates, a fresh seed and the fine configuration.
    SusConfig final_cfg = config.sus_final;
    final_cfg.seed = derive_seed(config.seeds.sus, kTagFinal);
    const SusResult final_sus = subset_simulation(system_mean_lsf(state.models, expr, maps), model, final_cfg);
    report.pf = final_sus.pf;
    report.beta = beta_of(final_sus.pf);
    report.cov = final_sus.cov;
    report.final_sus_converged = final_sus.converged;

    report.evaluations = *counters;
    report.total_evaluations = std::accumulate(counters->begin(), counters->end(), std::size_t{0});
    for (std::size_t j = 0; j < m; ++j)
        if (state.designs[j].size() != (*counters)[j])
            throw std::logic_error("run: evaluation counter disagrees with design size");
    report.models = state.models;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace sysrel
