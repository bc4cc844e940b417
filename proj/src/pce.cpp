#include "sysrel/pce.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace sysrel {

int total_degree(const MultiIndex& alpha) {
    return std::accumulate(alpha.begin(), alpha.end(), 0);
}

namespace {

void compositions(std::size_t pos, int remaining, MultiIndex& current, std::vector<MultiIndex>& out) {
    if (pos + 1 == current.size()) {
        current[pos] = remaining;
        out.push_back(current);
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        current[pos] = k;
        compositions(pos + 1, remaining - k, current, out);
    }
    current[pos] = 0;
}

// Relative leave-one-out error of the least-squares fit on the given columns.
double loo_error(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    const Eigen::Index n = A.rows();
    if (A.cols() >= n) return std::numeric_limits<double>::infinity();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    const double rmax = R.diagonal().cwiseAbs().maxCoeff();
    if (!(R.diagonal().cwiseAbs().minCoeff() > 1e-12 * rmax)) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, A.cols());
    const Eigen::VectorXd fitted = Q * (Q.transpose() * y);
    const Eigen::VectorXd leverage = Q.rowwise().squaredNorm();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = leverage[i];
        if (h >= 1.0 - 1e-10) return std::numeric_limits<double>::infinity();
        const double e = (y[i] - fitted[i]) / (1.0 - h);
        sum += e * e;
    }
    const double var = n > 1 ? (y.array() - y.mean()).square().sum() / static_cast<double>(n - 1) : 0.0;
    const double mse = sum / static_cast<double>(n);
    return var > 0.0 ? mse / var : mse;
}

}  // namespace

std::vector<MultiIndex> build_pce_basis(std::size_t dimension, int max_degree) {
    if (max_degree < 0) throw std::invalid_argument("build_pce_basis: max_degree must be >= 0");
    if (dimension == 0) throw std::invalid_argument("build_pce_basis: dimension must be >= 1");
    std::vector<MultiIndex> basis;
    MultiIndex current(dimension, 0);
    for (int degree = 0; degree <= max_degree; ++degree) compositions(0, degree, current, basis);
    return basis;
}

Eigen::VectorXd pce_row(const std::vector<MultiIndex>& basis, const Eigen::Ref<const Eigen::VectorXd>& u) {
    int max_degree = 0;
    for (const auto& alpha : basis) max_degree = std::max(max_degree, *std::max_element(alpha.begin(), alpha.end()));
    const Eigen::Index d = u.size();
    Eigen::MatrixXd univariate(max_degree + 1, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (int k = 0; k <= max_degree; ++k) univariate(k, i) = hermite_orthonormal(k, u[i]);
    Eigen::VectorXd row(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
        double value = 1.0;
        for (Eigen::Index i = 0; i < d; ++i) value *= univariate(basis[a][static_cast<std::size_t>(i)], i);
        row[static_cast<Eigen::Index>(a)] = value;
    }
    return row;
}

Eigen::MatrixXd pce_design_matrix(const std::vector<MultiIndex>& basis, const Eigen::MatrixXd& points) {
    Eigen::MatrixXd psi(points.cols(), static_cast<Eigen::Index>(basis.size()));
    for (Eigen::Index n = 0; n < points.cols(); ++n) psi.row(n) = pce_row(basis, points.col(n)).transpose();
    return psi;
}

LarResult lar_select(const std::vector<MultiIndex>& candidates, const Eigen::MatrixXd& points,
                     const Eigen::VectorXd& values, std::size_t max_terms) {
    const Eigen::Index n = points.cols();
    if (values.size() != n) throw std::invalid_argument("lar_select: points and values differ in length");
    LarResult result;
    if (candidates.empty()) {
        result.selected.push_back(MultiIndex(static_cast<std::size_t>(points.rows()), 0));
        result.warnings.push_back("no candidate regressors; falling back to a constant trend");
        return result;
    }
    if (candidates.size() == 1) {
        result.selected = candidates;
        return result;
    }
    if (n < 3) throw std::invalid_argument("lar_select: at least 3 observations are required");
    if (max_terms == 0) max_terms = static_cast<std::size_t>(n - 1);
    max_terms = std::min(max_terms, static_cast<std::size_t>(n - 1));

    const Eigen::MatrixXd psi = pce_design_matrix(candidates, points);
    const auto constant_it = std::find_if(candidates.begin(), candidates.end(),
                                          [](const MultiIndex& a) { return total_degree(a) == 0; });
    const bool has_constant = constant_it != candidates.end();
    const auto constant_col = static_cast<Eigen::Index>(constant_it - candidates.begin());

    // Working regressors: non-constant candidates, centred when a constant term is
    // available, scaled to unit norm.
    std::vector<Eigen::Index> columns;
    Eigen::MatrixXd X(n, 0);
    {
        std::vector<Eigen::VectorXd> kept;
        for (Eigen::Index c = 0; c < psi.cols(); ++c) {
            if (has_constant && c == constant_col) continue;
            Eigen::VectorXd col = psi.col(c);
            if (has_constant) col.array() -= col.mean();
            const double norm = col.norm();
            if (!(norm > 1e-12 * std::sqrt(static_cast<double>(n)))) {
                result.warnings.push_back("dropped degenerate regressor " + std::to_string(c));
                continue;
            }
            kept.push_back(col / norm);
            columns.push_back(c);
        }
        X.resize(n, static_cast<Eigen::Index>(kept.size()));
        for (std::size_t k = 0; k < kept.size(); ++k) X.col(static_cast<Eigen::Index>(k)) = kept[k];
    }

    Eigen::VectorXd residual = values;
    if (has_constant) residual.array() -= values.mean();
    const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);

    std::vector<Eigen::Index> active;  // indices into X / columns
    std::vector<bool> in_active(static_cast<std::size_t>(X.cols()), false);
    std::vector<std::vector<Eigen::Index>> path;  // candidate columns selected after each step

    auto refit_columns = [&](const std::vector<Eigen::Index>& act) {
        std::vector<Eigen::Index> cols;
        if (has_constant) cols.push_back(constant_col);
        for (Eigen::Index a : act) cols.push_back(columns[static_cast<std::size_t>(a)]);
        return cols;
    };
    auto loo_for = [&](const std::vector<Eigen::Index>& cols) {
        Eigen::MatrixXd A(n, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) A.col(static_cast<Eigen::Index>(k)) = psi.col(cols[k]);
        return loo_error(A, values);
    };

    if (has_constant) {
        path.push_back(refit_columns(active));
        result.loo_path.push_back(loo_for(path.back()));
    }

    const std::size_t regressor_budget = has_constant ? max_terms - 1 : max_terms;
    const std::size_t max_steps = std::min(regressor_budget, static_cast<std::size_t>(X.cols()));
    while (active.size() < max_steps) {
        const Eigen::VectorXd corr = X.transpose() * residual;
        Eigen::Index best = -1;
        double big = 0.0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (in_active[static_cast<std::size_t>(j)]) continue;
            if (std::abs(corr[j]) > big) {
                big = std::abs(corr[j]);
                best = j;
            }
        }
        if (best < 0 || big <= 1e-12 * scale) break;  // residual already explained
        active.push_back(best);
        in_active[static_cast<std::size_t>(best)] = true;

        // Equiangular direction for the signed active set.
        const auto k = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd XA(n, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const Eigen::Index j = active[static_cast<std::size_t>(a)];
            XA.col(a) = (corr[j] >= 0.0 ? 1.0 : -1.0) * X.col(j);
        }
        const Eigen::MatrixXd gram = XA.transpose() * XA;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        const Eigen::VectorXd w0 = ldlt.solve(Eigen::VectorXd::Ones(k));
        const double denom = w0.sum();
        if (ldlt.info() != Eigen::Success || !(denom > 0.0) || !w0.allFinite()) {
            // Collinear with the active set: discard it for good.
            active.pop_back();
            result.warnings.push_back("dropped collinear regressor " + std::to_string(columns[static_cast<std::size_t>(best)]));
            continue;
        }
        const double A = 1.0 / std::sqrt(denom);
        const Eigen::VectorXd u = XA * (A * w0);
        const Eigen::VectorXd a = X.transpose() * u;
        const double C = big;
        double gamma = C / A;
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (in_active[static_cast<std::size_t>(j)]) continue;
            for (double g : {(C - corr[j]) / (A - a[j]), (C + corr[j]) / (A + a[j])})
                if (g > 1e-14 && g < gamma) gamma = g;
        }
        residual -= gamma * u;

        path.push_back(refit_columns(active));
        result.loo_path.push_back(loo_for(path.back()));
    }

    if (path.empty()) {
        // No usable regressor at all.
        result.selected.push_back(MultiIndex(static_cast<std::size_t>(points.rows()), 0));
        result.warnings.push_back("no usable regressors; falling back to a constant trend");
        return result;
    }
    std::size_t best_step = 0;
    for (std::size_t s = 1; s < result.loo_path.size(); ++s)
        if (result.loo_path[s] < result.loo_path[best_step]) best_step = s;
    result.best_step = best_step;
    for (Eigen::Index c : path[best_step]) result.selected.push_back(candidates[static_cast<std::size_t>(c)]);
    return result;
}

}  // namespace sysrel
