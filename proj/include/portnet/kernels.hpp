#pragma once

// Data-parallel inner loops. Every kernel has a serial reference with the same
// signature; the OpenMP variant must produce identical output.

#include <cstdint>
#include <span>
#include <vector>

#include "portnet/geo.hpp"

namespace portnet {

enum class Exec { Serial, Parallel };

/// Uniform grid over lon/lat with square cells, used for eps-neighborhood queries.
class PointGrid {
public:
    PointGrid(std::span<const LonLat> points, double cell_size);

    double cell_size() const { return cell_; }

    /// Calls fn(index) for every point within `radius` cells of the cell holding p.
    template <class Fn>
    void for_each_near(LonLat p, int radius, Fn&& fn) const;

    std::span<const std::uint32_t> cell_members(std::int64_t cx, std::int64_t cy) const;
    std::int64_t cell_x(double lon) const;
    std::int64_t cell_y(double lat) const;

    /// Occupied cells in ascending key order.
    const std::vector<std::uint64_t>& keys() const { return keys_; }
    std::span<const std::uint32_t> members_at(std::size_t slot) const;
    std::size_t slot_of(std::int64_t cx, std::int64_t cy) const;  // npos if empty
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    static std::uint64_t key(std::int64_t cx, std::int64_t cy);

    double cell_;
    double lon0_ = 0.0, lat0_ = 0.0;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> order_;
};

/// core[i] = 1 iff |{j : ||p_i - p_j|| <= eps}| >= min_pts (the point counts itself).
std::vector<std::uint8_t> core_flags_serial(std::span<const LonLat> points, const PointGrid& grid,
                                            double eps, std::size_t min_pts);
std::vector<std::uint8_t> core_flags_omp(std::span<const LonLat> points, const PointGrid& grid,
                                         double eps, std::size_t min_pts);
std::vector<std::uint8_t> core_flags(std::span<const LonLat> points, const PointGrid& grid,
                                     double eps, std::size_t min_pts, Exec exec);

/// For each non-core point, the lowest index core point within eps, or -1.
std::vector<std::int64_t> nearest_core_index(std::span<const LonLat> points, const PointGrid& grid,
                                             std::span<const std::uint8_t> core, double eps,
                                             Exec exec);

/// Polygon membership for every point; result[i] = lowest polygon index containing
/// point i, or -1.
std::vector<int> locate_points(std::span<const LonLat> points,
                               std::span<const Ring> polygons, Exec exec);

bool openmp_enabled();
int max_threads();

// --- template implementation ---

template <class Fn>
void PointGrid::for_each_near(LonLat p, int radius, Fn&& fn) const {
    const auto cx = cell_x(p.lon);
    const auto cy = cell_y(p.lat);
    for (std::int64_t dx = -radius; dx <= radius; ++dx) {
        for (std::int64_t dy = -radius; dy <= radius; ++dy) {
            for (auto idx : cell_members(cx + dx, cy + dy)) fn(idx);
        }
    }
}

}  // namespace portnet
