#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sysrel/clustering.hpp"
#include "sysrel/composition.hpp"
#include "sysrel/problems.hpp"
#include "sysrel/subset_simulation.hpp"
#include "sysrel/surrogate.hpp"

namespace sysrel {

enum class SurrogateKind { kriging, pck };

const char* to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(const std::string& name);

struct SurrogateConfig {
    SurrogateKind kind = SurrogateKind::pck;
    int degree = 3;
    KernelFamily kernel = KernelFamily::matern52;
    /// Trend of plain Kriging.
    TrendKind trend = TrendKind::linear;
};

/// The four independent random streams of a run.
struct Seeds {
    std::uint64_t global = 0;
    std::uint64_t sus = 0;
    std::uint64_t usys = 0;
    std::uint64_t sobol = 0;

    /// global = s, sus = derive_seed(s, 1), usys = derive_seed(s, 2), sobol = derive_seed(s, 3).
    static Seeds from_master(std::uint64_t s);
    bool operator==(const Seeds&) const = default;
};

struct LearnConfig {
    double alpha = 0.01;
    std::size_t n_usys = 256;
    double eps_bar = 5e-3;
    std::size_t streak_required = 3;
    std::size_t n_max = 0;  // 0: input dimension M
    std::size_t max_iterations = 100;
    std::size_t sobol_samples = 4096;

    /// One entry for every component, or a single entry shared by all.
    std::vector<SurrogateConfig> surrogates{SurrogateConfig{}};
    /// Initial design sizes; empty means 2 M_j + 1.
    std::vector<std::size_t> initial_sizes;
    std::optional<BoundsMode> bounds;
    std::optional<DbscanParams> dbscan;
    double duplicate_tolerance = 1e-8;

    SusConfig sus{};
    SusConfig sus_final{100000, 0.1, 10, 0.8, 0};
    Seeds seeds{};

    const SurrogateConfig& surrogate(std::size_t j) const;
    void validate(std::size_t component_count) const;
};

/// Reliability-index history and relative changes between iterations.
class ConvergenceTracker {
public:
    void push(double beta);

    const std::vector<double>& betas() const noexcept { return betas_; }
    /// epsilons()[k] compares betas()[k + 1] with betas()[k].
    const std::vector<double>& epsilons() const noexcept { return epsilons_; }
    /// Number of trailing epsilons strictly below eps_bar.
    std::size_t streak(double eps_bar) const;

private:
    std::vector<double> betas_;
    std::vector<double> epsilons_;
};

/// True iff the last `streak_required` relative changes are all below eps_bar.
bool check_convergence(const ConvergenceTracker& tracker, double eps_bar, std::size_t streak_required);

/// |mean| / std of h(Z) over n Monte Carlo draws of the component predictive
/// Gaussians at x; +inf when the spread is negligible.
double usys(const std::vector<SurrogateModel>& models, const CompositionExpr& expr,
            const std::vector<std::vector<std::size_t>>& maps, const Eigen::VectorXd& x, std::size_t n,
            std::uint64_t seed);

/// Same quantity from the component means and standard deviations directly. A spread
/// at or below `absolute_tolerance` also counts as negligible.
double usys_from_gaussians(const CompositionExpr& expr, const Eigen::VectorXd& means, const Eigen::VectorXd& stds,
                           std::size_t n, std::uint64_t seed, double absolute_tolerance = 0.0);

/// Indices of the points with U_sys at or below the empirical alpha-quantile
/// (nearest rank, at least one point), in ascending order of U_sys.
std::vector<std::size_t> filter_candidates(const Eigen::VectorXd& usys_values, double alpha);

/// One representative per cluster (smallest U_sys), then noise points as singletons;
/// each group sorted by U_sys and the list cut to n_max. Returns indices into the
/// candidate arrays.
std::vector<std::size_t> select_enrichment(const Eigen::VectorXd& candidate_usys, const ClusterLabels& labels,
                                           std::size_t n_max);

struct EnrichmentRecord {
    std::size_t iteration = 0;
    Eigen::VectorXd point;  // physical, full input vector
    double usys = 0.0;
    int cluster = ClusterLabels::noise;
    Eigen::VectorXd sobol;
    std::size_t component = 0;
    double value = 0.0;
    /// How the component was chosen: "sobol", "fallback" (degenerate variance) or
    /// "next_best" (the top choice already had the point).
    std::string routing = "sobol";
};

struct IterationRecord {
    std::size_t iteration = 0;
    double pf = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;  // NaN for the first iteration
    double sus_cov = 0.0;
    std::size_t pool_size = 0;
    std::size_t candidates = 0;
    std::size_t clusters = 0;
    std::size_t added = 0;
    double alpha = 0.0;
    std::vector<std::size_t> design_sizes;
};

struct RunReport {
    std::string problem;
    double pf = 0.0;
    double beta = 0.0;
    double cov = 0.0;
    bool converged = false;
    bool final_sus_converged = false;
    std::size_t iterations = 0;
    std::vector<std::string> component_ids;
    std::vector<std::size_t> initial_sizes;
    std::vector<std::size_t> evaluations;
    std::size_t total_evaluations = 0;
    std::vector<EnrichmentRecord> enrichments;
    std::vector<IterationRecord> history;
    std::vector<std::string> log;
    std::optional<double> reference_pf;
    Seeds seeds;
    double wall_seconds = 0.0;
    std::vector<SurrogateModel> models;
};

/// Component surrogates and experimental designs of a run in progress.
struct SystemState {
    std::vector<ExperimentalDesign> designs;
    std::vector<Eigen::MatrixXd> standard_designs;  // same points, standard-normal coordinates
    std::vector<SurrogateModel> models;
    std::vector<std::size_t> refits;
};

/// Adds (x_j, g_j(x_j)) to component j's design and refits only that surrogate.
/// `x` is the full physical input vector. Returns the observed value.
double enrich_and_refit(SystemState& state, std::size_t j, const Eigen::VectorXd& x, const ProblemSpec& problem,
                        const LearnConfig& config);

/// True when x_j lies within the duplicate tolerance of a design point of component j
/// (standard-normal coordinates).
bool is_duplicate(const SystemState& state, std::size_t j, const Eigen::VectorXd& x, const InputModel& model,
                  double tolerance);

/// Active-learning reliability analysis of the system; deterministic given config.seeds.
RunReport run(const ProblemSpec& problem, const LearnConfig& config);

}  // namespace sysrel
