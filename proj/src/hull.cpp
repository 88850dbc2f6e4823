#include "portnet/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "portnet/error.hpp"

namespace portnet {
namespace {

double cross(LonLat o, LonLat a, LonLat b) {
    return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

int orientation(LonLat a, LonLat b, LonLat c) {
    const double v = cross(a, b, c);
    return (v > 0) - (v < 0);
}

bool within_box(LonLat p, LonLat a, LonLat b) {
    return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
           std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

bool segments_intersect(LonLat p1, LonLat p2, LonLat q1, LonLat q2) {
    const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && within_box(q1, p1, p2)) return true;
    if (o2 == 0 && within_box(q2, p1, p2)) return true;
    if (o3 == 0 && within_box(p1, q1, q2)) return true;
    if (o4 == 0 && within_box(p2, q1, q2)) return true;
    return false;
}

void project(std::span<const LonLat> ring, double nx, double ny, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (auto v : ring) {
        const double d = v.lon * nx + v.lat * ny;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
}

bool separated_along_edges(std::span<const LonLat> a, std::span<const LonLat> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const LonLat p = a[i], q = a[(i + 1) % a.size()];
        const double nx = q.lat - p.lat, ny = -(q.lon - p.lon);
        double alo, ahi, blo, bhi;
        project(a, nx, ny, alo, ahi);
        project(b, nx, ny, blo, bhi);
        if (ahi < blo || bhi < alo) return true;
    }
    return false;
}

}  // namespace

Ring convex_hull(std::span<const LonLat> input) {
    std::vector<LonLat> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(), [](LonLat a, LonLat b) {
        return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw DegenerateGeometry("convex hull needs at least 3 distinct points", "points");

    Ring hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw DegenerateGeometry("all points are collinear", "points");
    return hull;
}

Ring buffer_ring(std::span<const LonLat> ring, double buffer) {
    if (buffer < 0.0) throw InvalidInput("buffer must be >= 0", "buffer");
    Ring src(ring.begin(), ring.end());
    if (buffer == 0.0 || src.size() < 3) return src;
    const bool ccw = signed_area(src) > 0;
    if (!ccw) std::reverse(src.begin(), src.end());

    const std::size_t n = src.size();
    std::vector<LonLat> normals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const LonLat a = src[i], b = src[(i + 1) % n];
        const double dx = b.lon - a.lon, dy = b.lat - a.lat;
        const double len = std::hypot(dx, dy);
        normals[i] = {dy / len, -dx / len};
    }
    Ring out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const LonLat n1 = normals[(i + n - 1) % n], n2 = normals[i];
        const double denom = 1.0 + n1.lon * n2.lon + n1.lat * n2.lat;
        out[i] = {src[i].lon + buffer * (n1.lon + n2.lon) / denom,
                  src[i].lat + buffer * (n1.lat + n2.lat) / denom};
    }
    if (!ccw) std::reverse(out.begin(), out.end());
    return out;
}

LonLat ring_centroid(std::span<const LonLat> ring) {
    LonLat c{};
    for (auto v : ring) {
        c.lon += v.lon;
        c.lat += v.lat;
    }
    c.lon /= static_cast<double>(ring.size());
    c.lat /= static_cast<double>(ring.size());
    return c;
}

double signed_area(std::span<const LonLat> ring) {
    double a = 0.0;
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
        const LonLat p = ring[i], q = ring[(i + 1) % n];
        a += p.lon * q.lat - q.lon * p.lat;
    }
    return 0.5 * a;
}

bool is_convex_ccw(std::span<const LonLat> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (cross(ring[i], ring[(i + 1) % n], ring[(i + 2) % n]) <= 0) return false;
    return signed_area(ring) > 0;
}

bool convex_rings_intersect(std::span<const LonLat> a, std::span<const LonLat> b) {
    return !separated_along_edges(a, b) && !separated_along_edges(b, a);
}

bool is_simple_ring(std::span<const LonLat> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (ring[i] == ring[(i + 1) % n]) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const LonLat a1 = ring[i], a2 = ring[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const LonLat b1 = ring[j], b2 = ring[(j + 1) % n];
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (!adjacent) {
                if (segments_intersect(a1, a2, b1, b2)) return false;
                continue;
            }
            // Adjacent edges may only share their common vertex.
            const LonLat shared = (j == i + 1) ? a2 : a1;
            const LonLat a_far = (j == i + 1) ? a1 : a2;
            const LonLat b_far = (j == i + 1) ? b2 : b1;
            if (orientation(a_far, shared, b_far) == 0) {
                const bool overlap = within_box(b_far, a_far, shared) || within_box(a_far, shared, b_far);
                if (overlap) return false;
            }
        }
    }
    return true;
}

double segment_distance(LonLat p, LonLat a, LonLat b) {
    const double dx = b.lon - a.lon, dy = b.lat - a.lat;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.lon - a.lon) * dx + (p.lat - a.lat) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.lon - (a.lon + t * dx), p.lat - (a.lat + t * dy));
}

}  // namespace portnet
