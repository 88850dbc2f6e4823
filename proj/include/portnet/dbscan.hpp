#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "portnet/geo.hpp"
#include "portnet/kernels.hpp"

namespace portnet {

struct DbscanParams {
    double eps = 0.005;        // degrees, Euclidean in the lon/lat plane
    std::size_t min_pts = 20;  // neighborhood includes the point itself
};

/// Per-point cluster id, or kNoise. Ids are contiguous from 0 in the order in
/// which each cluster's first core point appears in the input.
struct ClusterAssignment {
    static constexpr int kNoise = -1;

    std::vector<int> labels;
    int cluster_count = 0;

    bool is_noise(std::size_t i) const { return labels[i] == kNoise; }
};

/// Density-based clustering over points. Core points are grouped by
/// density-connectivity; a border point joins the cluster of its lowest-index
/// core neighbor.
ClusterAssignment dbscan(std::span<const LonLat> points, const DbscanParams& params,
                         Exec exec = Exec::Parallel);

}  // namespace portnet
