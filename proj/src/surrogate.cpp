#include "sysrel/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "sysrel/errors.hpp"
#include "sysrel/optimize.hpp"

namespace sysrel {

namespace {

struct Factorization {
    double nugget = 0.0;
    Eigen::MatrixXd chol;
    Eigen::MatrixXd whitened_f;
    Eigen::MatrixXd trend_r;
    Eigen::VectorXd beta;
    Eigen::VectorXd alpha;
    double sigma2 = 0.0;
    double log_likelihood = -std::numeric_limits<double>::infinity();
};

Eigen::MatrixXd trend_matrix(const TrendSpec& trend, const Eigen::MatrixXd& z) {
    const auto p = static_cast<Eigen::Index>(trend.size(static_cast<std::size_t>(z.rows())));
    Eigen::MatrixXd F(z.cols(), p);
    for (Eigen::Index i = 0; i < z.cols(); ++i) F.row(i) = trend.evaluate(z.col(i)).transpose();
    return F;
}

Eigen::MatrixXd correlation_matrix(KernelFamily family, const Eigen::MatrixXd& z, const Eigen::VectorXd& inv_theta) {
    const Eigen::Index n = z.cols();
    Eigen::MatrixXd R(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        R(j, j) = 1.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double c = correlation(family, z.col(i), z.col(j), inv_theta);
            R(i, j) = c;
            R(j, i) = c;
        }
    }
    return R;
}

double sigma2_floor(const Eigen::VectorXd& values) {
    const double n = static_cast<double>(values.size());
    const double mean = values.mean();
    const double var = (values.array() - mean).square().sum() / n;
    return 1e-12 * std::max({var, 1e-200});
}

std::optional<Factorization> factorize(const Eigen::MatrixXd& z, const Eigen::VectorXd& G, const Eigen::MatrixXd& F,
                                       KernelFamily family, const Eigen::VectorXd& inv_theta,
                                       const FitOptions& options, double floor) {
    const Eigen::Index n = z.cols();
    const Eigen::Index p = F.cols();
    const Eigen::MatrixXd R = correlation_matrix(family, z, inv_theta);

    Factorization out;
    bool ok = false;
    for (double tau = options.nugget_start; tau <= options.nugget_max * (1.0 + 1e-9); tau *= 10.0) {
        Eigen::LLT<Eigen::MatrixXd> llt(R + tau * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() != Eigen::Success) continue;
        Eigen::MatrixXd L = llt.matrixL();
        const double min_diag = L.diagonal().minCoeff();
        if (!(min_diag * min_diag >= 0.1 * tau) || !L.allFinite()) continue;
        out.chol = std::move(L);
        out.nugget = tau;
        ok = true;
        break;
    }
    if (!ok) return std::nullopt;

    const auto lower = out.chol.triangularView<Eigen::Lower>();
    out.whitened_f = lower.solve(F);
    const Eigen::VectorXd g_white = lower.solve(G);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.whitened_f);
    out.trend_r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Eigen::VectorXd d = out.trend_r.diagonal().cwiseAbs();
    if (!(d.minCoeff() > 1e-10 * d.maxCoeff())) return std::nullopt;
    const Eigen::VectorXd qtg = (qr.householderQ().transpose() * g_white).head(p);
    out.beta = out.trend_r.triangularView<Eigen::Upper>().solve(qtg);
    const Eigen::VectorXd resid = g_white - out.whitened_f * out.beta;
    out.sigma2 = std::max(resid.squaredNorm() / static_cast<double>(n), floor);
    out.alpha = out.chol.transpose().triangularView<Eigen::Upper>().solve(resid);
    out.log_likelihood =
        -0.5 * static_cast<double>(n) * std::log(out.sigma2) - out.chol.diagonal().array().log().sum();
    if (!std::isfinite(out.log_likelihood) || !out.beta.allFinite() || !out.alpha.allFinite()) return std::nullopt;
    return out;
}

void check_design(const ExperimentalDesign& ed) {
    if (ed.values.size() < 1 || ed.points.cols() != ed.values.size())
        throw std::invalid_argument("experimental design: points and values must have equal, non-zero length");
    if (!ed.points.allFinite() || !ed.values.allFinite())
        throw std::invalid_argument("experimental design: non-finite entries");
}

void check_duplicates(const Eigen::MatrixXd& z, double tolerance) {
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = j + 1; i < z.cols(); ++i)
            if ((z.col(i) - z.col(j)).norm() <= tolerance)
                throw std::invalid_argument("experimental design: points " + std::to_string(j) + " and " +
                                            std::to_string(i) + " are duplicates");
}

// Space-filling start points in the log10 length-scale box.
std::vector<Eigen::VectorXd> start_points(Eigen::Index d, const FitOptions& options) {
    Hypercube box{Eigen::VectorXd::Constant(d, std::log10(options.length_scale_min)),
                  Eigen::VectorXd::Constant(d, std::log10(options.length_scale_max))};
    std::vector<Eigen::VectorXd> starts;
    if (options.starts > 0) {
        const Eigen::MatrixXd lhs = lhs_sample(box, options.starts, options.seed);
        for (Eigen::Index k = 0; k < lhs.cols(); ++k) starts.push_back(lhs.col(k));
    }
    if (options.warm_start && options.warm_start->size() == d)
        starts.push_back(options.warm_start->array().max(options.length_scale_min).min(options.length_scale_max).log10().matrix());
    return starts;
}

}  // namespace

void ExperimentalDesign::add(const Eigen::VectorXd& x, double value) {
    if (points.cols() > 0 && x.size() != points.rows())
        throw std::invalid_argument("ExperimentalDesign::add: dimension mismatch");
    if (points.cols() == 0) points.resize(x.size(), 0);
    points.conservativeResize(x.size(), points.cols() + 1);
    points.col(points.cols() - 1) = x;
    values.conservativeResize(values.size() + 1);
    values[values.size() - 1] = value;
}

const char* to_string(KernelFamily family) {
    return family == KernelFamily::gaussian ? "gaussian" : "matern52";
}

const char* to_string(TrendKind kind) {
    switch (kind) {
        case TrendKind::constant: return "constant";
        case TrendKind::linear: return "linear";
        case TrendKind::pce: return "pce";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "matern52" || name == "matern-5/2") return KernelFamily::matern52;
    if (name == "gaussian") return KernelFamily::gaussian;
    throw std::invalid_argument("unknown kernel '" + name + "' (expected matern52 or gaussian)");
}

std::size_t TrendSpec::size(std::size_t dimension) const {
    switch (kind) {
        case TrendKind::constant: return 1;
        case TrendKind::linear: return dimension + 1;
        case TrendKind::pce: return indices.size();
    }
    return 0;
}

Eigen::VectorXd TrendSpec::evaluate(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    switch (kind) {
        case TrendKind::constant: return Eigen::VectorXd::Ones(1);
        case TrendKind::linear: {
            Eigen::VectorXd f(z.size() + 1);
            f[0] = 1.0;
            f.tail(z.size()) = z;
            return f;
        }
        case TrendKind::pce: return pce_row(indices, z);
    }
    return {};
}

InputScaling InputScaling::identity(Eigen::Index dimension) {
    return {Kind::affine, Eigen::VectorXd::Zero(dimension), Eigen::VectorXd::Ones(dimension), {}};
}

InputScaling InputScaling::standardize(const Eigen::MatrixXd& points) {
    InputScaling s = identity(points.rows());
    if (points.cols() == 0) return s;
    s.shift = points.rowwise().mean();
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double var = (points.row(i).array() - s.shift[i]).square().mean();
        s.scale[i] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

InputScaling InputScaling::isoprobabilistic(std::vector<Marginal> marginals) {
    InputScaling s;
    s.kind = Kind::standard_normal;
    s.marginals = std::move(marginals);
    return s;
}

Eigen::VectorXd InputScaling::apply(const Eigen::VectorXd& x) const {
    if (kind == Kind::affine) return (x - shift).cwiseQuotient(scale);
    Eigen::VectorXd u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) u[i] = marginal_to_standard(marginals[static_cast<std::size_t>(i)], x[i]);
    return u;
}

Eigen::MatrixXd InputScaling::apply_columns(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index k = 0; k < points.cols(); ++k) out.col(k) = apply(points.col(k));
    return out;
}

void SurrogateModel::require_fitted() const {
    if (!fitted_) throw StateError("surrogate model used before fitting");
}

Prediction SurrogateModel::predict(const Eigen::VectorXd& x) const {
    require_fitted();
    if (x.size() != z_.rows()) throw std::invalid_argument("predict: dimension mismatch");
    const Eigen::VectorXd z = scaling_.apply(x);
    const Eigen::Index n = z_.cols();
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = correlation(kernel_, z_.col(i), z, inv_length_scales_);
    const Eigen::VectorXd f = trend_.evaluate(z);

    Prediction out;
    out.mean = f.dot(beta_) + r.dot(alpha_);
    const Eigen::VectorXd rt = chol_.triangularView<Eigen::Lower>().solve(r);
    const Eigen::VectorXd u = whitened_f_.transpose() * rt - f;
    const Eigen::VectorXd v = trend_r_.transpose().triangularView<Eigen::Lower>().solve(u);
    out.raw_variance = sigma2_ * (1.0 - rt.squaredNorm() + v.squaredNorm());
    out.variance = std::max(out.raw_variance, 0.0);
    return out;
}

double SurrogateModel::predict_mean(const Eigen::VectorXd& x) const {
    require_fitted();
    if (x.size() != z_.rows()) throw std::invalid_argument("predict: dimension mismatch");
    const Eigen::VectorXd z = scaling_.apply(x);
    double mean = trend_.evaluate(z).dot(beta_);
    for (Eigen::Index i = 0; i < z_.cols(); ++i) mean += alpha_[i] * correlation(kernel_, z_.col(i), z, inv_length_scales_);
    return mean;
}

SurrogateModel fit_with_trend(const ExperimentalDesign& ed, TrendSpec trend, InputScaling scaling,
                              const FitOptions& options, std::vector<std::string> warnings) {
    check_design(ed);
    const Eigen::Index d = ed.dimension();
    const std::size_t n = ed.size();
    const std::size_t p = trend.size(static_cast<std::size_t>(d));
    if (n < p + 2)
        throw std::invalid_argument("fit: " + std::to_string(n) + " observations are too few for a trend with " +
                                    std::to_string(p) + " terms (need at least " + std::to_string(p + 2) + ")");

    const Eigen::MatrixXd z = scaling.apply_columns(ed.points);
    check_duplicates(z, options.duplicate_tolerance);
    const Eigen::MatrixXd F = trend_matrix(trend, z);
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(F);
        if (qr.rank() < F.cols()) throw std::invalid_argument("fit: trend basis is rank deficient on the design");
    }
    const double floor = sigma2_floor(ed.values);

    Eigen::VectorXd log_theta;
    if (options.fixed_length_scales) {
        if (options.fixed_length_scales->size() != d) throw std::invalid_argument("fit: fixed length-scales have wrong size");
        if (!(options.fixed_length_scales->array() > 0.0).all()) throw std::invalid_argument("fit: length-scales must be > 0");
        log_theta = options.fixed_length_scales->array().log10().matrix();
    } else {
        const Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, std::log10(options.length_scale_min));
        const Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, std::log10(options.length_scale_max));
        auto objective = [&](const Eigen::VectorXd& lt) {
            const Eigen::VectorXd inv = (-lt.array() * std::log(10.0)).exp().matrix();
            const auto fac = factorize(z, ed.values, F, options.kernel, inv, options, floor);
            return fac ? -fac->log_likelihood : std::numeric_limits<double>::infinity();
        };
        NelderMeadOptions nm;
        nm.initial_step = 0.25 * (hi[0] - lo[0]);
        nm.max_evaluations = options.evaluations_per_start > 0 ? options.evaluations_per_start
                                                                : 60 * static_cast<int>(d + 1);
        nm.value_tolerance = 1e-10;
        nm.step_tolerance = 1e-5;
        double best = std::numeric_limits<double>::infinity();
        for (const Eigen::VectorXd& start : start_points(d, options)) {
            const MinimizeResult res = nelder_mead_box(objective, start, lo, hi, nm);
            if (res.value < best) {
                best = res.value;
                log_theta = res.x;
            }
        }
        if (!std::isfinite(best)) throw ConditioningError("fit: correlation matrix is singular for every length-scale tried");
    }

    const Eigen::VectorXd theta = (log_theta.array() * std::log(10.0)).exp().matrix();
    const Eigen::VectorXd inv = theta.cwiseInverse();
    const auto fac = factorize(z, ed.values, F, options.kernel, inv, options, floor);
    if (!fac) throw ConditioningError("fit: correlation matrix is singular even with the maximum nugget");

    SurrogateModel model;
    model.fitted_ = true;
    model.trend_ = std::move(trend);
    model.kernel_ = options.kernel;
    model.scaling_ = std::move(scaling);
    model.design_ = ed;
    model.z_ = z;
    model.length_scales_ = theta;
    model.inv_length_scales_ = inv;
    model.beta_ = fac->beta;
    model.alpha_ = fac->alpha;
    model.chol_ = fac->chol;
    model.whitened_f_ = fac->whitened_f;
    model.trend_r_ = fac->trend_r;
    model.sigma2_ = options.fixed_process_variance ? *options.fixed_process_variance : fac->sigma2;
    model.nugget_ = fac->nugget;
    model.log_likelihood_ = fac->log_likelihood;
    model.warnings_ = std::move(warnings);
    if (!(model.sigma2_ > 0.0)) throw std::invalid_argument("fit: process variance must be > 0");
    return model;
}

SurrogateModel fit_kriging(const ExperimentalDesign& ed, TrendKind trend, KernelFamily kernel, const FitOptions& options) {
    if (trend == TrendKind::pce) throw std::invalid_argument("fit_kriging: use fit_pck for polynomial-chaos trends");
    check_design(ed);
    FitOptions opts = options;
    opts.kernel = kernel;
    InputScaling scaling = options.scaling ? *options.scaling : InputScaling::standardize(ed.points);
    return fit_with_trend(ed, TrendSpec{trend, {}}, std::move(scaling), opts);
}

SurrogateModel fit_pck(const ExperimentalDesign& ed, int max_degree, KernelFamily kernel, const FitOptions& options) {
    check_design(ed);
    FitOptions opts = options;
    opts.kernel = kernel;
    InputScaling scaling;
    if (options.scaling) {
        scaling = *options.scaling;
    } else if (!options.marginals.empty()) {
        if (static_cast<Eigen::Index>(options.marginals.size()) != ed.dimension())
            throw std::invalid_argument("fit_pck: marginals do not match the design dimension");
        scaling = InputScaling::isoprobabilistic(options.marginals);
    } else {
        scaling = InputScaling::standardize(ed.points);
    }
    const Eigen::MatrixXd z = scaling.apply_columns(ed.points);
    const std::size_t n = ed.size();
    if (n < 3) throw std::invalid_argument("fit_pck: at least 3 observations are required");
    // The Kriging fit needs N >= p + 2, so the selected basis is capped at N - 2 terms.
    const LarResult lar = lar_select(build_pce_basis(static_cast<std::size_t>(ed.dimension()), max_degree), z,
                                     ed.values, n - 2);
    TrendSpec trend{TrendKind::pce, lar.selected};
    return fit_with_trend(ed, std::move(trend), std::move(scaling), opts, lar.warnings);
}

double profile_log_likelihood(const SurrogateModel& model, const Eigen::VectorXd& length_scales) {
    const Eigen::MatrixXd z = model.scaling().apply_columns(model.design().points);
    const Eigen::MatrixXd F = trend_matrix(model.trend(), z);
    FitOptions options;
    options.kernel = model.kernel();
    const auto fac = factorize(z, model.design().values, F, model.kernel(), length_scales.cwiseInverse(), options,
                               sigma2_floor(model.design().values));
    return fac ? fac->log_likelihood : -std::numeric_limits<double>::infinity();
}

}  // namespace sysrel
