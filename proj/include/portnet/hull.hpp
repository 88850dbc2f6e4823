#pragma once

#include <span>

#include "portnet/geo.hpp"

namespace portnet {

/// Counter-clockwise convex hull with collinear vertices dropped.
/// Throws DegenerateGeometry for < 3 points or all-collinear input.
Ring convex_hull(std::span<const LonLat> points);

/// Outward offset of a convex CCW ring: every edge moves `buffer` along its
/// outward normal and vertices are re-formed at the intersections of adjacent
/// offset edges. Every original vertex ends up at least `buffer` inside.
Ring buffer_ring(std::span<const LonLat> ring, double buffer);

/// Vertex average.
LonLat ring_centroid(std::span<const LonLat> ring);

/// Shoelace area, positive for CCW.
double signed_area(std::span<const LonLat> ring);

bool is_convex_ccw(std::span<const LonLat> ring);

/// True when the rings share at least one point (touching counts).
/// Both rings must be convex.
bool convex_rings_intersect(std::span<const LonLat> a, std::span<const LonLat> b);

/// O(n^2) edge-pair check for a simple (non-self-intersecting) ring.
bool is_simple_ring(std::span<const LonLat> ring);

/// Distance from p to the segment [a, b] in degrees.
double segment_distance(LonLat p, LonLat a, LonLat b);

}  // namespace portnet
