#include "portnet/ports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "portnet/error.hpp"
#include "portnet/hull.hpp"

namespace portnet {
namespace {

using nlohmann::json;

LonLat mean_of(std::span<const LonLat> pts) {
    LonLat c{};
    for (auto p : pts) {
        c.lon += p.lon;
        c.lat += p.lat;
    }
    c.lon /= static_cast<double>(pts.size());
    c.lat /= static_cast<double>(pts.size());
    return c;
}

struct Region {
    std::vector<LonLat> points;
    Ring polygon;
};

}  // namespace

const char* label_name(PortLabel l) {
    switch (l) {
        case PortLabel::Actual: return "actual";
        case PortLabel::Gateway: return "gateway";
        case PortLabel::Unlabeled: break;
    }
    return "unlabeled";
}

std::vector<LonLat> select_stationary_points(std::span<const AisMessage> messages, double sog_max) {
    std::vector<LonLat> out;
    for (const auto& m : messages)
        if (m.sog <= sog_max) out.push_back(m.position());
    return out;
}

Ring port_polygon(std::span<const LonLat> points, double buffer) {
    try {
        return buffer_ring(convex_hull(points), buffer);
    } catch (const DegenerateGeometry&) {
        const LonLat c = mean_of(points);
        double half = buffer;
        for (auto p : points) half = std::max(half, buffer + std::max(std::abs(p.lon - c.lon), std::abs(p.lat - c.lat)));
        half = std::max(half, 1e-6);
        return {{c.lon - half, c.lat - half}, {c.lon + half, c.lat - half},
                {c.lon + half, c.lat + half}, {c.lon - half, c.lat + half}};
    }
}

std::vector<Port> extract_ports(std::span<const AisMessage> messages, const PortExtractionParams& params,
                                Exec exec) {
    if (params.sog_max < 0.0) throw InvalidInput("sog_max must be >= 0", "sog_max");
    if (params.buffer < 0.0) throw InvalidInput("buffer must be >= 0", "buffer");
    const auto points = select_stationary_points(messages, params.sog_max);
    const auto clusters = dbscan(points, params.dbscan, exec);

    std::vector<Region> regions(static_cast<std::size_t>(clusters.cluster_count));
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!clusters.is_noise(i)) regions[static_cast<std::size_t>(clusters.labels[i])].points.push_back(points[i]);
    for (auto& r : regions) r.polygon = port_polygon(r.points, params.buffer);

    // Fuse intersecting regions until the registry is pairwise disjoint.
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < regions.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < regions.size() && !merged; ++j) {
                if (!convex_rings_intersect(regions[i].polygon, regions[j].polygon)) continue;
                auto& keep = regions[i];
                keep.points.insert(keep.points.end(), regions[j].points.begin(), regions[j].points.end());
                keep.polygon = port_polygon(keep.points, params.buffer);
                regions.erase(regions.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
        }
    }

    std::vector<Port> ports;
    ports.reserve(regions.size());
    for (std::size_t k = 0; k < regions.size(); ++k) {
        Port p;
        p.id = static_cast<PortId>(k);
        p.centroid = mean_of(regions[k].points);
        p.polygon = std::move(regions[k].polygon);
        ports.push_back(std::move(p));
    }
    return ports;
}

void transfer_labels(std::vector<Port>& ports, std::span<const Port> reference, double tolerance) {
    for (auto& p : ports) {
        double best = tolerance;
        p.label = PortLabel::Unlabeled;
        for (const auto& r : reference) {
            const double d = std::hypot(p.centroid.lon - r.centroid.lon, p.centroid.lat - r.centroid.lat);
            if (d <= best) {
                best = d;
                p.label = r.label;
            }
        }
    }
}

std::string registry_to_json(std::span<const Port> ports) {
    json arr = json::array();
    for (const auto& p : ports) {
        json poly = json::array();
        for (auto v : p.polygon) poly.push_back({v.lon, v.lat});
        json label = p.label == PortLabel::Unlabeled ? json(nullptr) : json(label_name(p.label));
        arr.push_back({{"id", p.id},
                       {"centroid", {p.centroid.lon, p.centroid.lat}},
                       {"polygon", std::move(poly)},
                       {"label", std::move(label)}});
    }
    return arr.dump(1) + "\n";
}

std::vector<Port> registry_from_json(const std::string& text) {
    std::vector<Port> ports;
    try {
        const json arr = json::parse(text);
        if (!arr.is_array()) throw InvalidInput("port registry must be a JSON array", "registry");
        for (const auto& e : arr) {
            Port p;
            p.id = e.at("id").get<int>();
            const auto& c = e.at("centroid");
            p.centroid = {c.at(0).get<double>(), c.at(1).get<double>()};
            for (const auto& v : e.at("polygon")) p.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            const auto& l = e.at("label");
            if (l.is_null()) {
                p.label = PortLabel::Unlabeled;
            } else {
                const auto s = l.get<std::string>();
                if (s == "actual") p.label = PortLabel::Actual;
                else if (s == "gateway") p.label = PortLabel::Gateway;
                else throw InvalidInput("unknown port label '" + s + "'", "label");
            }
            ports.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed port registry: ") + e.what(), "registry");
    }
    validate_registry(ports);
    return ports;
}

std::vector<Port> read_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open port registry: " + path, "path");
    std::ostringstream ss;
    ss << in.rdbuf();
    return registry_from_json(ss.str());
}

void write_registry(const std::string& path, std::span<const Port> ports) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write port registry: " + path, "path");
    out << registry_to_json(ports);
}

}  // namespace portnet
