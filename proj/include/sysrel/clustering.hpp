#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace sysrel {

struct ClusterLabels {
    static constexpr int noise = -1;

    /// Cluster id in [0, count) or `noise`, one per input point.
    std::vector<int> labels;
    std::size_t count = 0;
};

struct DbscanParams {
    double eps = 0.0;
    std::size_t min_points = 1;
};

/// DBSCAN on points stored column-wise. Neighborhoods use Euclidean distance <= eps
/// and contain the point itself. Points are visited in ascending index order, so a
/// border point joins the lowest-numbered cluster that reaches it.
ClusterLabels dbscan(const Eigen::MatrixXd& points, double eps, std::size_t min_points);

inline ClusterLabels dbscan(const Eigen::MatrixXd& points, const DbscanParams& params) {
    return dbscan(points, params.eps, params.min_points);
}

/// min_points = dimension + 1 (capped at the point count); eps is the knee (largest
/// second difference) of the sorted distances to the (min_points - 1)-th nearest
/// other point, floored at 1e-6.
DbscanParams default_params(const Eigen::MatrixXd& points);

}  // namespace sysrel
