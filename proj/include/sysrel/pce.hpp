#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sysrel {

/// Polynomial degree per input dimension.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& alpha);

/// All multi-indices of dimension `dimension` with total degree <= max_degree,
/// graded by total degree then reverse-lexicographic; the constant term comes first.
std::vector<MultiIndex> build_pce_basis(std::size_t dimension, int max_degree);

/// Probabilists' Hermite polynomial He_n(x) / sqrt(n!), orthonormal under N(0, 1).
template <class Scalar>
Scalar hermite_orthonormal(int degree, Scalar x) {
    if (degree == 0) return Scalar(1);
    Scalar prev = Scalar(1);
    Scalar curr = x;
    for (int n = 1; n < degree; ++n) {
        Scalar next = x * curr - Scalar(n) * prev;
        prev = curr;
        curr = next;
    }
    Scalar factorial = Scalar(1);
    for (int n = 2; n <= degree; ++n) factorial *= Scalar(n);
    return curr / std::sqrt(factorial);
}

/// Values of every basis polynomial at one standard-normal point.
Eigen::VectorXd pce_row(const std::vector<MultiIndex>& basis, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Regression matrix (N x P) for points stored column-wise (d x N).
Eigen::MatrixXd pce_design_matrix(const std::vector<MultiIndex>& basis, const Eigen::MatrixXd& points);

struct LarResult {
    /// Selected multi-indices in order of entry (constant term first when offered).
    std::vector<MultiIndex> selected;
    /// Relative leave-one-out error after each step of the path; entry 0 is the
    /// model with only the constant term (or the first regressor without one).
    std::vector<double> loo_path;
    std::size_t best_step = 0;
    std::vector<std::string> warnings;
};

/// Least-angle regression over the candidate basis. The path is followed up to
/// min(candidate count, max_terms) regressors and truncated at the step with the
/// smallest leave-one-out error of the ordinary least-squares refit on the active set.
/// max_terms = 0 means N - 1.
///
/// `points` are in standard-normal coordinates, one point per column.
LarResult lar_select(const std::vector<MultiIndex>& candidates, const Eigen::MatrixXd& points,
                     const Eigen::VectorXd& values, std::size_t max_terms = 0);

}  // namespace sysrel
