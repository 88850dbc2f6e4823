#pragma once

#include <span>
#include <string>
#include <vector>

#include "portnet/dbscan.hpp"
#include "portnet/geo.hpp"

namespace portnet {

struct PortExtractionParams {
    DbscanParams dbscan;
    double sog_max = 0.5;   // knots; stationary pre-filter
    double buffer = 0.001;  // degrees
};

std::vector<LonLat> select_stationary_points(std::span<const AisMessage> messages, double sog_max);

/// Stationary filter, density clustering, buffered hull per cluster, then the
/// merge pass that fuses intersecting regions until none intersect.
std::vector<Port> extract_ports(std::span<const AisMessage> messages,
                                const PortExtractionParams& params = {},
                                Exec exec = Exec::Parallel);

/// Buffered hull of a point set; collinear or tiny sets fall back to an
/// axis-aligned square around the mean that also covers every point.
Ring port_polygon(std::span<const LonLat> points, double buffer);

/// Copies labels from a reference registry onto `ports`: each port takes the
/// label of the reference port with the nearest centroid, if within `tolerance`
/// degrees (Euclidean). Ports without a match stay Unlabeled.
void transfer_labels(std::vector<Port>& ports, std::span<const Port> reference, double tolerance);

// Registry JSON: [{id, centroid:[lon,lat], polygon:[[lon,lat],...], label}]
std::string registry_to_json(std::span<const Port> ports);
std::vector<Port> registry_from_json(const std::string& text);
std::vector<Port> read_registry(const std::string& path);
void write_registry(const std::string& path, std::span<const Port> ports);

const char* label_name(PortLabel l);  // "actual" | "gateway" | "unlabeled"

}  // namespace portnet
