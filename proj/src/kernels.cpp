#include "portnet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace portnet {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double dist2(LonLat a, LonLat b) {
    const double dx = a.lon - b.lon, dy = a.lat - b.lat;
    return dx * dx + dy * dy;
}

int search_radius(const PointGrid& grid, double eps) {
    return std::max(1, static_cast<int>(std::ceil(eps / grid.cell_size())));
}

std::uint8_t core_flag_at(std::size_t i, std::span<const LonLat> points, const PointGrid& grid,
                          double eps, std::size_t min_pts, int radius, bool cell_within_eps) {
    const LonLat p = points[i];
    const auto own = grid.cell_members(grid.cell_x(p.lon), grid.cell_y(p.lat));
    if (cell_within_eps && own.size() >= min_pts) return 1;
    const double eps2 = eps * eps;
    std::size_t count = 0;
    const auto cx = grid.cell_x(p.lon), cy = grid.cell_y(p.lat);
    for (std::int64_t dx = -radius; dx <= radius; ++dx) {
        for (std::int64_t dy = -radius; dy <= radius; ++dy) {
            for (auto j : grid.cell_members(cx + dx, cy + dy)) {
                if (dist2(p, points[j]) <= eps2 && ++count >= min_pts) return 1;
            }
        }
    }
    return 0;
}

std::int64_t first_core_at(std::size_t i, std::span<const LonLat> points, const PointGrid& grid,
                           std::span<const std::uint8_t> core, double eps, int radius) {
    if (core[i]) return -1;
    const double eps2 = eps * eps;
    std::int64_t best = -1;
    grid.for_each_near(points[i], radius, [&](std::uint32_t j) {
        if (core[j] && (best < 0 || j < best) && dist2(points[i], points[j]) <= eps2) best = j;
    });
    return best;
}

struct BoundingBox {
    double lon_min, lon_max, lat_min, lat_max;
};

BoundingBox bbox(const Ring& r) {
    BoundingBox b{r[0].lon, r[0].lon, r[0].lat, r[0].lat};
    for (auto v : r) {
        b.lon_min = std::min(b.lon_min, v.lon);
        b.lon_max = std::max(b.lon_max, v.lon);
        b.lat_min = std::min(b.lat_min, v.lat);
        b.lat_max = std::max(b.lat_max, v.lat);
    }
    return b;
}

}  // namespace

PointGrid::PointGrid(std::span<const LonLat> points, double cell_size) : cell_(cell_size) {
    if (!points.empty()) {
        lon0_ = points[0].lon;
        lat0_ = points[0].lat;
        for (auto p : points) {
            lon0_ = std::min(lon0_, p.lon);
            lat0_ = std::min(lat0_, p.lat);
        }
    }
    std::vector<std::uint64_t> point_keys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        point_keys[i] = key(cell_x(points[i].lon), cell_y(points[i].lat));
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0u);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return point_keys[a] < point_keys[b]; });
    for (std::size_t k = 0; k < order_.size(); ++k) {
        const auto key_k = point_keys[order_[k]];
        if (keys_.empty() || keys_.back() != key_k) {
            keys_.push_back(key_k);
            offsets_.push_back(static_cast<std::uint32_t>(k));
        }
    }
    offsets_.push_back(static_cast<std::uint32_t>(order_.size()));
}

std::uint64_t PointGrid::key(std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) << 32) | static_cast<std::uint32_t>(cy);
}

std::int64_t PointGrid::cell_x(double lon) const {
    return static_cast<std::int64_t>(std::floor((lon - lon0_) / cell_));
}

std::int64_t PointGrid::cell_y(double lat) const {
    return static_cast<std::int64_t>(std::floor((lat - lat0_) / cell_));
}

std::size_t PointGrid::slot_of(std::int64_t cx, std::int64_t cy) const {
    if (cx < 0 || cy < 0 || cx > 0xffffffffLL || cy > 0xffffffffLL) return npos;
    const auto k = key(cx, cy);
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    if (it == keys_.end() || *it != k) return npos;
    return static_cast<std::size_t>(it - keys_.begin());
}

std::span<const std::uint32_t> PointGrid::members_at(std::size_t slot) const {
    return std::span<const std::uint32_t>(order_).subspan(offsets_[slot], offsets_[slot + 1] - offsets_[slot]);
}

std::span<const std::uint32_t> PointGrid::cell_members(std::int64_t cx, std::int64_t cy) const {
    const auto slot = slot_of(cx, cy);
    if (slot == npos) return {};
    return members_at(slot);
}

std::vector<std::uint8_t> core_flags_serial(std::span<const LonLat> points, const PointGrid& grid,
                                            double eps, std::size_t min_pts) {
    const int radius = search_radius(grid, eps);
    const bool fast = grid.cell_size() * kSqrt2 <= eps;
    std::vector<std::uint8_t> core(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        core[i] = core_flag_at(i, points, grid, eps, min_pts, radius, fast);
    return core;
}

std::vector<std::uint8_t> core_flags_omp(std::span<const LonLat> points, const PointGrid& grid,
                                         double eps, std::size_t min_pts) {
    const int radius = search_radius(grid, eps);
    const bool fast = grid.cell_size() * kSqrt2 <= eps;
    std::vector<std::uint8_t> core(points.size());
    const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(dynamic, 512)
    for (std::int64_t i = 0; i < n; ++i)
        core[i] = core_flag_at(static_cast<std::size_t>(i), points, grid, eps, min_pts, radius, fast);
    return core;
}

std::vector<std::uint8_t> core_flags(std::span<const LonLat> points, const PointGrid& grid, double eps,
                                     std::size_t min_pts, Exec exec) {
    return exec == Exec::Parallel ? core_flags_omp(points, grid, eps, min_pts)
                                  : core_flags_serial(points, grid, eps, min_pts);
}

std::vector<std::int64_t> nearest_core_index(std::span<const LonLat> points, const PointGrid& grid,
                                             std::span<const std::uint8_t> core, double eps, Exec exec) {
    const int radius = search_radius(grid, eps);
    std::vector<std::int64_t> out(points.size(), -1);
    const auto n = static_cast<std::int64_t>(points.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 512)
        for (std::int64_t i = 0; i < n; ++i)
            out[i] = first_core_at(static_cast<std::size_t>(i), points, grid, core, eps, radius);
    } else {
        for (std::int64_t i = 0; i < n; ++i)
            out[i] = first_core_at(static_cast<std::size_t>(i), points, grid, core, eps, radius);
    }
    return out;
}

std::vector<int> locate_points(std::span<const LonLat> points, std::span<const Ring> polygons, Exec exec) {
    std::vector<BoundingBox> boxes;
    boxes.reserve(polygons.size());
    for (const auto& r : polygons) boxes.push_back(bbox(r));
    auto locate = [&](LonLat p) {
        for (std::size_t k = 0; k < polygons.size(); ++k) {
            const auto& b = boxes[k];
            if (p.lon < b.lon_min || p.lon > b.lon_max || p.lat < b.lat_min || p.lat > b.lat_max) continue;
            if (point_in_polygon(p, polygons[k])) return static_cast<int>(k);
        }
        return -1;
    };
    std::vector<int> out(points.size(), -1);
    const auto n = static_cast<std::int64_t>(points.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) out[i] = locate(points[i]);
    } else {
        for (std::int64_t i = 0; i < n; ++i) out[i] = locate(points[i]);
    }
    return out;
}

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace portnet
