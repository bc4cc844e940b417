#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sysrel/input_model.hpp"
#include "sysrel/pce.hpp"

namespace sysrel {

/// Input points (one per column, component space) and their limit-state values.
struct ExperimentalDesign {
    Eigen::MatrixXd points;
    Eigen::VectorXd values;

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
    Eigen::Index dimension() const noexcept { return points.rows(); }
    void add(const Eigen::VectorXd& x, double value);
};

enum class KernelFamily { matern52, gaussian };
enum class TrendKind { constant, linear, pce };

const char* to_string(KernelFamily family);
const char* to_string(TrendKind kind);
KernelFamily kernel_family_from_string(const std::string& name);

struct TrendSpec {
    TrendKind kind = TrendKind::linear;
    /// Selected multi-indices for pce trends.
    std::vector<MultiIndex> indices;

    std::size_t size(std::size_t dimension) const;
    /// Regressor values f(z) at one point in fitting coordinates.
    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& z) const;
};

/// Map from physical component inputs to the coordinates the model is fitted in:
/// an affine standardization, or the isoprobabilistic map to standard-normal space.
struct InputScaling {
    enum class Kind { affine, standard_normal };

    Kind kind = Kind::affine;
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;
    std::vector<Marginal> marginals;

    static InputScaling identity(Eigen::Index dimension);
    /// Zero mean / unit variance over the design points.
    static InputScaling standardize(const Eigen::MatrixXd& points);
    static InputScaling isoprobabilistic(std::vector<Marginal> marginals);

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& points) const;
};

/// Correlation between two points already in fitting coordinates, given the
/// inverse length-scales.
template <class DerivedA, class DerivedB, class DerivedT>
double correlation(KernelFamily family, const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                   const Eigen::MatrixBase<DerivedT>& inv_length_scales) {
    const double h2 = ((a - b).cwiseProduct(inv_length_scales)).squaredNorm();
    if (family == KernelFamily::gaussian) return std::exp(-0.5 * h2);
    const double s = std::sqrt(5.0 * h2);
    return (1.0 + s + 5.0 * h2 / 3.0) * std::exp(-s);
}

struct FitOptions {
    KernelFamily kernel = KernelFamily::matern52;
    /// Multi-start bounded search on log length-scales.
    std::size_t starts = 5;
    double length_scale_min = 1e-2;
    double length_scale_max = 1e2;
    int evaluations_per_start = 0;  // 0: 60 * (dimension + 1)
    std::uint64_t seed = 0;
    /// Extra start point (fitting coordinates), typically the previous fit's length-scales.
    std::optional<Eigen::VectorXd> warm_start;

    std::optional<Eigen::VectorXd> fixed_length_scales;
    std::optional<double> fixed_process_variance;
    std::optional<InputScaling> scaling;
    /// Marginals of the component inputs; PC-Kriging maps through them to standard-normal space.
    std::vector<Marginal> marginals;

    double nugget_start = 1e-10;
    double nugget_max = 1e-4;
    double duplicate_tolerance = 1e-8;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;      // clamped at zero
    double raw_variance = 0.0;  // before clamping
};

/// Fitted Kriging / PC-Kriging posterior. Immutable after fitting; prediction is
/// const and thread-safe.
class SurrogateModel {
public:
    SurrogateModel() = default;

    bool fitted() const noexcept { return fitted_; }

    Prediction predict(const Eigen::VectorXd& x) const;
    double predict_mean(const Eigen::VectorXd& x) const;

    const TrendSpec& trend() const noexcept { return trend_; }
    const Eigen::VectorXd& trend_coefficients() const noexcept { return beta_; }
    KernelFamily kernel() const noexcept { return kernel_; }
    /// Length-scales in fitting coordinates.
    const Eigen::VectorXd& length_scales() const noexcept { return length_scales_; }
    double process_variance() const noexcept { return sigma2_; }
    double nugget() const noexcept { return nugget_; }
    double log_likelihood() const noexcept { return log_likelihood_; }
    const InputScaling& scaling() const noexcept { return scaling_; }
    const ExperimentalDesign& design() const noexcept { return design_; }
    /// Warnings raised during basis selection or fitting.
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    friend SurrogateModel fit_with_trend(const ExperimentalDesign&, TrendSpec, InputScaling, const FitOptions&,
                                         std::vector<std::string>);

    void require_fitted() const;

    bool fitted_ = false;
    TrendSpec trend_;
    KernelFamily kernel_ = KernelFamily::matern52;
    InputScaling scaling_;
    ExperimentalDesign design_;
    Eigen::MatrixXd z_;  // design points in fitting coordinates
    Eigen::VectorXd length_scales_;
    Eigen::VectorXd inv_length_scales_;
    Eigen::VectorXd beta_;
    Eigen::VectorXd alpha_;        // R^-1 (G - F beta)
    Eigen::MatrixXd chol_;         // lower Cholesky factor of R + nugget I
    Eigen::MatrixXd whitened_f_;   // L^-1 F
    Eigen::MatrixXd trend_r_;      // upper factor of L^-1 F = Q R
    double sigma2_ = 0.0;
    double nugget_ = 0.0;
    double log_likelihood_ = 0.0;
    std::vector<std::string> warnings_;
};

/// Universal Kriging with a constant or linear trend.
SurrogateModel fit_kriging(const ExperimentalDesign& ed, TrendKind trend, KernelFamily kernel,
                           const FitOptions& options = {});

/// PC-Kriging: Kriging whose trend is the LAR-selected sparse Hermite basis.
SurrogateModel fit_pck(const ExperimentalDesign& ed, int max_degree, KernelFamily kernel,
                       const FitOptions& options = {});

/// Kriging with an explicit trend and scaling; the two fitters above delegate here.
SurrogateModel fit_with_trend(const ExperimentalDesign& ed, TrendSpec trend, InputScaling scaling,
                              const FitOptions& options, std::vector<std::string> warnings = {});

inline Prediction predict(const SurrogateModel& model, const Eigen::VectorXd& x) { return model.predict(x); }

/// Concentrated (profile) log-likelihood of the model's design and trend at the given
/// length-scales; -infinity when the correlation matrix cannot be factorized.
double profile_log_likelihood(const SurrogateModel& model, const Eigen::VectorXd& length_scales);

}  // namespace sysrel
