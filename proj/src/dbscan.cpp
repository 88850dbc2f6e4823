#include "portnet/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "portnet/error.hpp"

namespace portnet {
namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

struct CoreBox {
    double lon_min = INFINITY, lon_max = -INFINITY, lat_min = INFINITY, lat_max = -INFINITY;
    bool empty() const { return lon_min > lon_max; }
};

double box_gap2(const CoreBox& a, const CoreBox& b) {
    const double dx = std::max({0.0, a.lon_min - b.lon_max, b.lon_min - a.lon_max});
    const double dy = std::max({0.0, a.lat_min - b.lat_max, b.lat_min - a.lat_max});
    return dx * dx + dy * dy;
}

}  // namespace

ClusterAssignment dbscan(std::span<const LonLat> points, const DbscanParams& params, Exec exec) {
    if (!(params.eps > 0.0) || !std::isfinite(params.eps)) throw InvalidInput("eps must be > 0", "eps");
    if (params.min_pts < 1) throw InvalidInput("min_pts must be >= 1", "min_pts");
    for (auto p : points)
        if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) throw InvalidInput("non-finite coordinate", "point");

    ClusterAssignment out;
    out.labels.assign(points.size(), ClusterAssignment::kNoise);
    if (points.empty()) return out;

    // Cell diagonal < eps: core points sharing a cell are directly connected.
    const PointGrid grid(points, params.eps / 1.5);
    const auto core = core_flags(points, grid, params.eps, params.min_pts, exec);

    const auto& keys = grid.keys();
    std::vector<CoreBox> boxes(keys.size());
    std::vector<std::size_t> slot(points.size());
    for (std::size_t s = 0; s < keys.size(); ++s) {
        for (auto i : grid.members_at(s)) {
            slot[i] = s;
            if (!core[i]) continue;
            auto& b = boxes[s];
            b.lon_min = std::min(b.lon_min, points[i].lon);
            b.lon_max = std::max(b.lon_max, points[i].lon);
            b.lat_min = std::min(b.lat_min, points[i].lat);
            b.lat_max = std::max(b.lat_max, points[i].lat);
        }
    }

    // Neighbor cell offsets, nearest first, so most links are found through
    // adjacent cells before the expensive far pairs are examined.
    const int radius = static_cast<int>(std::ceil(params.eps / grid.cell_size()));
    std::vector<std::pair<int, int>> offsets;
    for (int dx = -radius; dx <= radius; ++dx)
        for (int dy = -radius; dy <= radius; ++dy)
            if (dx > 0 || (dx == 0 && dy > 0)) offsets.emplace_back(dx, dy);
    std::stable_sort(offsets.begin(), offsets.end(), [](auto a, auto b) {
        return a.first * a.first + a.second * a.second < b.first * b.first + b.second * b.second;
    });

    const double eps2 = params.eps * params.eps;
    DisjointSets sets(keys.size());
    for (auto [dx, dy] : offsets) {
        for (std::size_t s = 0; s < keys.size(); ++s) {
            if (boxes[s].empty()) continue;
            const auto members = grid.members_at(s);
            const LonLat probe = points[members[0]];
            const auto t = grid.slot_of(grid.cell_x(probe.lon) + dx, grid.cell_y(probe.lat) + dy);
            if (t == PointGrid::npos || boxes[t].empty()) continue;
            if (sets.find(s) == sets.find(t) || box_gap2(boxes[s], boxes[t]) > eps2) continue;
            const auto other = grid.members_at(t);
            bool linked = false;
            for (auto i : members) {
                if (!core[i]) continue;
                for (auto j : other) {
                    if (!core[j]) continue;
                    const double ddx = points[i].lon - points[j].lon, ddy = points[i].lat - points[j].lat;
                    if (ddx * ddx + ddy * ddy <= eps2) {
                        linked = true;
                        break;
                    }
                }
                if (linked) break;
            }
            if (linked) sets.unite(s, t);
        }
    }

    std::vector<int> component_label(keys.size(), ClusterAssignment::kNoise);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!core[i]) continue;
        auto& lbl = component_label[sets.find(slot[i])];
        if (lbl == ClusterAssignment::kNoise) lbl = out.cluster_count++;
        out.labels[i] = lbl;
    }

    const auto border = nearest_core_index(points, grid, core, params.eps, exec);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (core[i] || border[i] < 0) continue;
        out.labels[i] = component_label[sets.find(slot[static_cast<std::size_t>(border[i])])];
    }
    return out;
}

}  // namespace portnet
