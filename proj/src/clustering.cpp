#include "sysrel/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace sysrel {

namespace {

constexpr double kEpsFloor = 1e-6;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& points) {
    const Eigen::VectorXd norms = points.colwise().squaredNorm().transpose();
    Eigen::MatrixXd d2 = (-2.0 * points.transpose() * points).colwise() + norms;
    d2.rowwise() += norms.transpose();
    d2 = d2.cwiseMax(0.0);
    d2.diagonal().setZero();
    return d2;
}

}  // namespace

ClusterLabels dbscan(const Eigen::MatrixXd& points, double eps, std::size_t min_points) {
    if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be positive");
    if (min_points < 1) throw std::invalid_argument("dbscan: min_points must be at least 1");
    if (!points.allFinite()) throw std::invalid_argument("dbscan: points must be finite");
    const Eigen::Index n = points.cols();
    ClusterLabels out;
    out.labels.assign(static_cast<std::size_t>(n), ClusterLabels::noise);
    if (n == 0) return out;

    // Exact distances decide membership; the Gram-matrix form is only a filter.
    const Eigen::MatrixXd d2 = squared_distances(points);
    const double eps2 = eps * eps;
    auto neighbors = [&](Eigen::Index i) {
        std::vector<Eigen::Index> nb;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (d2(i, k) > 4.0 * eps2 + 1e-12) continue;
            if ((points.col(i) - points.col(k)).squaredNorm() <= eps2) nb.push_back(k);
        }
        return nb;
    };

    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    int cluster = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (visited[static_cast<std::size_t>(i)]) continue;
        visited[static_cast<std::size_t>(i)] = 1;
        const auto nb = neighbors(i);
        if (nb.size() < min_points) continue;  // noise unless a later cluster reaches it

        out.labels[static_cast<std::size_t>(i)] = cluster;
        std::deque<Eigen::Index> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            const Eigen::Index q = queue.front();
            queue.pop_front();
            const auto qi = static_cast<std::size_t>(q);
            if (out.labels[qi] == ClusterLabels::noise) out.labels[qi] = cluster;
            if (visited[qi]) continue;
            visited[qi] = 1;
            const auto qnb = neighbors(q);
            if (qnb.size() >= min_points) queue.insert(queue.end(), qnb.begin(), qnb.end());
        }
        ++cluster;
    }
    out.count = static_cast<std::size_t>(cluster);
    return out;
}

DbscanParams default_params(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.cols();
    if (n < 2) return {kEpsFloor, 1};
    DbscanParams params;
    params.min_points = std::min<std::size_t>(static_cast<std::size_t>(points.rows()) + 1, static_cast<std::size_t>(n));
    const std::size_t k = params.min_points - 1;

    std::vector<double> kdist(static_cast<std::size_t>(n));
    std::vector<double> row;
    for (Eigen::Index i = 0; i < n; ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) row.push_back((points.col(i) - points.col(j)).norm());
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        kdist[static_cast<std::size_t>(i)] = row[k - 1];
    }
    std::sort(kdist.begin(), kdist.end());

    double eps = kdist.back();
    if (kdist.size() >= 3) {
        std::size_t knee = 1;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i + 1 < kdist.size(); ++i) {
            const double second = kdist[i - 1] - 2.0 * kdist[i] + kdist[i + 1];
            if (second > best) {
                best = second;
                knee = i;
            }
        }
        eps = kdist[knee];
    }
    params.eps = std::max(eps, kEpsFloor);
    return params;
}

}  // namespace sysrel
