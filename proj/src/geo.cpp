#include "portnet/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "portnet/error.hpp"
#include "portnet/hull.hpp"

namespace portnet {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bool on_segment(LonLat p, LonLat a, LonLat b) {
    const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if (cross != 0.0) return false;
    return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
           std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

}  // namespace

void validate_coordinate(LonLat p) {
    if (!std::isfinite(p.lon) || p.lon < -180.0 || p.lon > 180.0)
        throw InvalidInput("longitude out of range [-180, 180]", "lon");
    if (!std::isfinite(p.lat) || p.lat < -90.0 || p.lat > 90.0)
        throw InvalidInput("latitude out of range [-90, 90]", "lat");
}

void validate(const AisMessage& m) {
    validate_coordinate(m.position());
    if (!std::isfinite(m.sog) || m.sog < 0.0) throw InvalidInput("sog must be finite and >= 0", "sog");
}

double haversine_km(LonLat a, LonLat b) {
    validate_coordinate(a);
    validate_coordinate(b);
    const double dlat = (b.lat - a.lat) * kDeg;
    const double dlon = (b.lon - a.lon) * kDeg;
    const double s1 = std::sin(dlat / 2), s2 = std::sin(dlon / 2);
    const double h = s1 * s1 + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

bool point_in_polygon(LonLat pt, std::span<const LonLat> ring) {
    const std::size_t n = ring.size();
    if (n < 3) throw DegenerateGeometry("polygon needs at least 3 vertices", "polygon");
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const LonLat a = ring[i], b = ring[j];
        if (on_segment(pt, a, b)) return true;
        if ((a.lat > pt.lat) != (b.lat > pt.lat)) {
            const double x = a.lon + (pt.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if (pt.lon < x) inside = !inside;
        }
    }
    return inside;
}

std::vector<Trajectory> to_trajectories(std::span<const AisMessage> sorted) {
    std::vector<Trajectory> out;
    for (const auto& m : sorted) {
        if (out.empty() || out.back().vessel_id != m.vessel_id) {
            out.push_back({m.vessel_id, {}});
        } else if (out.back().points.back().timestamp > m.timestamp) {
            throw PreconditionError("messages not sorted by (vessel_id, timestamp)");
        }
        out.back().points.push_back({m.position(), m.timestamp});
    }
    return out;
}

void validate(const Port& port) {
    if (port.id < 0) throw InvalidInput("port id must be non-negative", "id");
    if (port.polygon.size() < 3) throw DegenerateGeometry("port polygon needs >= 3 vertices", "polygon");
    validate_coordinate(port.centroid);
    for (auto v : port.polygon) validate_coordinate(v);
    if (!is_simple_ring(port.polygon)) throw InvalidInput("port polygon is self-intersecting", "polygon");
    if (!point_in_polygon(port.centroid, port.polygon))
        throw InvalidInput("port centroid lies outside its polygon", "centroid");
}

void validate_registry(std::span<const Port> ports) {
    std::set<PortId> ids;
    for (const auto& p : ports) {
        validate(p);
        if (!ids.insert(p.id).second) throw InvalidInput("duplicate port id " + std::to_string(p.id), "id");
    }
}

const Port* find_port(std::span<const Port> ports, PortId id) {
    for (const auto& p : ports)
        if (p.id == id) return &p;
    return nullptr;
}

}  // namespace portnet
