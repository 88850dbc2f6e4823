#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "portnet/timeutil.hpp"

namespace portnet {

/// Mean Earth radius (IUGG), kilometers.
constexpr double kEarthRadiusKm = 6371.0088;

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Closed ring stored without a duplicated closing vertex.
using Ring = std::vector<LonLat>;

struct AisMessage {
    std::string vessel_id;
    Timestamp timestamp = 0;
    double lon = 0.0;
    double lat = 0.0;
    double sog = 0.0;  // knots
    std::size_t line = 0;  // source line, 0 when synthesized

    LonLat position() const { return {lon, lat}; }

    friend bool operator==(const AisMessage& a, const AisMessage& b) {
        return a.vessel_id == b.vessel_id && a.timestamp == b.timestamp && a.lon == b.lon &&
               a.lat == b.lat && a.sog == b.sog;
    }
};

struct TrackPoint {
    LonLat pos;
    Timestamp timestamp = 0;
};

struct Trajectory {
    std::string vessel_id;
    std::vector<TrackPoint> points;
};

enum class PortLabel { Unlabeled, Actual, Gateway };

using PortId = int;

struct Port {
    PortId id = 0;
    LonLat centroid;
    Ring polygon;
    PortLabel label = PortLabel::Unlabeled;
};

struct Visit {
    PortId port_id = 0;
    std::string vessel_id;
    Timestamp enter_time = 0;
    Timestamp exit_time = 0;
};

struct Voyage {
    std::string vessel_id;
    PortId origin_port_id = 0;
    PortId dest_port_id = 0;
    Timestamp depart_time = 0;
    Timestamp arrive_time = 0;
    double mean_sog_underway = 0.0;
};

void validate_coordinate(LonLat p);
void validate(const AisMessage& m);

/// Great-circle distance on the mean-radius sphere.
double haversine_km(LonLat a, LonLat b);

/// Boundary-inclusive test, evaluated in raw lon/lat degrees.
bool point_in_polygon(LonLat pt, std::span<const LonLat> ring);

/// Splits a (vessel, timestamp)-sorted message list into per-vessel trajectories.
std::vector<Trajectory> to_trajectories(std::span<const AisMessage> sorted);

/// Checks the Port invariants: >= 3 vertices, simple ring, centroid inside.
void validate(const Port& port);
/// Ids unique, every port valid.
void validate_registry(std::span<const Port> ports);

const Port* find_port(std::span<const Port> ports, PortId id);

}  // namespace portnet
