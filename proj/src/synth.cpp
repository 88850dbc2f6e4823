#include "portnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "portnet/ais_csv.hpp"
#include "portnet/error.hpp"
#include "portnet/hull.hpp"

namespace portnet {
namespace {

constexpr double kKmPerNm = 1.852;
constexpr int kPlacementAttempts = 1000;
constexpr int kRingVertices = 8;
constexpr double kBerthFraction = 0.6;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int index(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        while (u <= 0.0) u = uniform();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * std::numbers::pi * v);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * v);
    }

private:
    std::mt19937_64 g_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

double deg_distance(LonLat a, LonLat b) { return std::hypot(a.lon - b.lon, a.lat - b.lat); }

Ring octagon(LonLat c, double r) {
    Ring ring;
    for (int k = 0; k < kRingVertices; ++k) {
        const double a = 2.0 * std::numbers::pi * k / kRingVertices;
        ring.push_back({c.lon + r * std::cos(a), c.lat + r * std::sin(a)});
    }
    return ring;
}

LonLat berth(Rng& rng, LonLat c, double r) {
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double d = kBerthFraction * r * std::sqrt(rng.uniform());
    return {c.lon + d * std::cos(a), c.lat + d * std::sin(a)};
}

struct Leg {
    Timestamp t0 = 0;
    Timestamp t1 = 0;
    LonLat from;
    LonLat to;
    double speed_kn = 0.0;  // 0 while moored
};

struct Placement {
    std::vector<LonLat> centers;
    std::vector<PortLabel> labels;
    std::vector<std::pair<PortId, PortId>> gateway_pairs;
    std::vector<int> gateway_of;  // per actual port, -1 if none
    std::vector<double> dwell_median_h;  // per actual port
    std::vector<double> popularity;      // per actual port, sums to 1
    std::vector<double> phase;           // per actual port, radians
};

Placement place_ports(const ScenarioConfig& c, Rng& rng) {
    Placement p;
    const double min_sep = 5.0 * c.gateway_radius_deg;
    const double margin = c.gateway_radius_deg + c.port_radius_deg;
    const auto& box = c.box;
    auto far_enough = [&](LonLat q, int skip) {
        for (std::size_t i = 0; i < p.centers.size(); ++i)
            if (static_cast<int>(i) != skip && deg_distance(q, p.centers[i]) < min_sep) return false;
        return true;
    };
    for (int k = 0; k < c.n_actual_ports; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            const LonLat q{rng.uniform(box.lon_min + margin, box.lon_max - margin),
                           rng.uniform(box.lat_min + margin, box.lat_max - margin)};
            if (far_enough(q, -1)) {
                p.centers.push_back(q);
                p.labels.push_back(PortLabel::Actual);
                placed = true;
            }
        }
        if (!placed) throw InvalidInput("bounding box too small for the requested ports", "box");
    }
    p.gateway_of.assign(static_cast<std::size_t>(c.n_actual_ports), -1);
    for (int k = 0; k < c.n_gateway_ports; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            const int host = rng.index(c.n_actual_ports);
            if (p.gateway_of[static_cast<std::size_t>(host)] >= 0) continue;
            const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double d = rng.uniform(0.75, 1.0) * c.gateway_radius_deg;
            const auto& h = p.centers[static_cast<std::size_t>(host)];
            const LonLat q{h.lon + d * std::cos(a), h.lat + d * std::sin(a)};
            if (q.lon < box.lon_min || q.lon > box.lon_max || q.lat < box.lat_min || q.lat > box.lat_max) continue;
            if (!far_enough(q, host)) continue;
            const int id = static_cast<int>(p.centers.size());
            p.centers.push_back(q);
            p.labels.push_back(PortLabel::Gateway);
            p.gateway_of[static_cast<std::size_t>(host)] = id;
            p.gateway_pairs.emplace_back(id, host);
            placed = true;
        }
        if (!placed) throw InvalidInput("bounding box too small for the requested ports", "box");
    }
    // Popularity ranks: hosts of gateways and plain actual ports are each
    // spread evenly over the ranking, so both kinds include quiet ports.
    std::vector<std::pair<double, int>> order;
    const int hosts = c.n_gateway_ports, plain = c.n_actual_ports - c.n_gateway_ports;
    const double offset_host = rng.uniform(), offset_plain = rng.uniform();
    int seen_host = 0, seen_plain = 0;
    for (int k = 0; k < c.n_actual_ports; ++k) {
        const bool host = p.gateway_of[static_cast<std::size_t>(k)] >= 0;
        const double key = host ? (seen_host++ + offset_host) / hosts : (seen_plain++ + offset_plain) / std::max(plain, 1);
        order.emplace_back(key, k);
    }
    std::sort(order.begin(), order.end());
    std::vector<int> rank(static_cast<std::size_t>(c.n_actual_ports));
    for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r].second)] = static_cast<int>(r);
    double total = 0.0;
    for (int k = 0; k < c.n_actual_ports; ++k) {
        p.dwell_median_h.push_back(c.dwell_median_h * std::exp(c.port_dwell_log_sd * rng.normal()));
        p.popularity.push_back(std::pow(1.0 + rank[static_cast<std::size_t>(k)], -c.popularity_skew));
        p.phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
        total += p.popularity.back();
    }
    for (auto& w : p.popularity) w /= total;
    return p;
}

int pick_destination(const ScenarioConfig& c, const Placement& p, Rng& rng, int here, double day) {
    std::vector<double> w(p.popularity.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (static_cast<int>(i) == here) continue;
        const double season = std::sin(2.0 * std::numbers::pi * day / c.seasonal_period_days + p.phase[i]);
        w[i] = p.popularity[i] * std::exp(c.seasonal_amplitude * season);
        total += w[i];
    }
    double u = rng.uniform() * total;
    int last = -1;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (static_cast<int>(i) == here) continue;
        last = static_cast<int>(i);
        if ((u -= w[i]) < 0.0) break;
    }
    return last;
}

std::vector<Leg> plan_vessel(const ScenarioConfig& c, const Placement& p, Rng& rng, Timestamp origin, Timestamp begin,
                             Timestamp end) {
    std::vector<Leg> legs;
    const double port_r = c.port_radius_deg;
    int here = rng.index(c.n_actual_ports);
    LonLat pos = berth(rng, p.centers[static_cast<std::size_t>(here)], port_r);
    Timestamp t = begin;
    const Timestamp step = c.report_interval_s;
    // Leg boundaries fall on report ticks, so each report's sog describes the
    // displacement to the next one.
    auto ticks = [&](double hours) { return std::max<Timestamp>(1, std::llround(hours * 3600.0 / static_cast<double>(step))) * step; };
    auto moor = [&](double hours) {
        const Timestamp t1 = t + ticks(hours);
        legs.push_back({t, t1, pos, pos, 0.0});
        t = t1;
    };
    auto sail = [&](int port) {
        const LonLat to = berth(rng, p.centers[static_cast<std::size_t>(port)], port_r);
        const double speed = rng.uniform(c.speed_min_kn, c.speed_max_kn);
        const double hours = haversine_km(pos, to) / (speed * kKmPerNm);
        const Timestamp t1 = t + ticks(hours);
        const double actual = haversine_km(pos, to) / kKmPerNm / (static_cast<double>(t1 - t) / 3600.0);
        legs.push_back({t, t1, pos, to, actual});
        pos = to;
        t = t1;
        here = port;
    };
    auto dwell = [&](double median) { return median * std::exp(c.dwell_log_sd * rng.normal()); };
    auto median = [&](int port) { return p.dwell_median_h[static_cast<std::size_t>(port)]; };
    moor(rng.uniform(0.0, dwell(median(here))));
    while (t < end) {
        const int dest = pick_destination(c, p, rng, here, static_cast<double>(t - origin) / 86400.0);
        const int gateway = p.gateway_of[static_cast<std::size_t>(dest)];
        if (gateway >= 0 && rng.uniform() < c.gateway_queue_probability) {
            sail(gateway);
            moor(dwell(c.gateway_dwell_multiplier * median(dest)));
        }
        sail(dest);
        moor(dwell(median(dest)));
    }
    return legs;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (n_actual_ports < 2) throw InvalidInput("need at least two actual ports", "n_actual_ports");
    if (n_gateway_ports < 1) throw InvalidInput("n_gateway_ports must be >= 1", "n_gateway_ports");
    if (n_gateway_ports > n_actual_ports)
        throw InvalidInput("each gateway needs its own actual port", "n_gateway_ports");
    if (n_vessels < 1) throw InvalidInput("n_vessels must be >= 1", "n_vessels");
    if (days < 1) throw InvalidInput("days must be >= 1", "days");
    if (report_interval_s < 1) throw InvalidInput("report_interval must be >= 1 s", "report_interval");
    if (!(box.lon_min < box.lon_max && box.lat_min < box.lat_max)) throw InvalidInput("empty bounding box", "box");
    validate_coordinate({box.lon_min, box.lat_min});
    validate_coordinate({box.lon_max, box.lat_max});
    if (!(gateway_dwell_multiplier > 0)) throw InvalidInput("dwell multiplier must be > 0", "gateway_dwell_multiplier");
    if (!(gateway_radius_deg > 0)) throw InvalidInput("gateway radius must be > 0", "gateway_radius");
    if (!(gateway_queue_probability >= 0 && gateway_queue_probability <= 1))
        throw InvalidInput("queue probability must be in [0, 1]", "gateway_queue_probability");
    if (!(dwell_median_h > 0)) throw InvalidInput("dwell median must be > 0", "dwell_median");
    if (!(dwell_log_sd >= 0)) throw InvalidInput("dwell spread must be >= 0", "dwell_log_sd");
    if (!(port_dwell_log_sd >= 0)) throw InvalidInput("port dwell spread must be >= 0", "port_dwell_log_sd");
    if (!(popularity_skew >= 0)) throw InvalidInput("popularity skew must be >= 0", "popularity_skew");
    if (!(seasonal_amplitude >= 0)) throw InvalidInput("seasonal amplitude must be >= 0", "seasonal_amplitude");
    if (!(seasonal_period_days > 0)) throw InvalidInput("seasonal period must be > 0", "seasonal_period");
    if (!(speed_min_kn > 0 && speed_min_kn <= speed_max_kn)) throw InvalidInput("bad speed range", "speed_kn");
    if (!(position_noise_deg >= 0)) throw InvalidInput("noise must be >= 0", "position_noise");
    if (!(noise_correlation >= 0 && noise_correlation < 1)) throw InvalidInput("correlation must be in [0, 1)", "noise_correlation");
    if (!(port_radius_deg > 0)) throw InvalidInput("port radius must be > 0", "port_radius");
    parse_iso8601(start);
}

Scenario simulate(const ScenarioConfig& c) {
    c.validate();
    Rng rng(c.seed);
    const Placement placement = place_ports(c, rng);

    Scenario sc;
    for (std::size_t i = 0; i < placement.centers.size(); ++i) {
        Port port;
        port.id = static_cast<PortId>(i);
        port.centroid = placement.centers[i];
        port.polygon = octagon(port.centroid, c.port_radius_deg);
        port.label = placement.labels[i];
        sc.ports.push_back(std::move(port));
    }
    sc.gateway_pairs = placement.gateway_pairs;

    const Timestamp begin = parse_iso8601(c.start);
    const Timestamp end = begin + static_cast<Timestamp>(c.days) * 86400;
    const double innovation = c.position_noise_deg * std::sqrt(1.0 - c.noise_correlation * c.noise_correlation);
    const int width = std::max(3, static_cast<int>(std::to_string(c.n_vessels - 1).size()));

    for (int v = 0; v < c.n_vessels; ++v) {
        std::string id = std::to_string(v);
        id = "V" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
        const Timestamp first = begin + rng.index(c.report_interval_s);
        const auto legs = plan_vessel(c, placement, rng, begin, first, end);
        double nx = c.position_noise_deg * rng.normal(), ny = c.position_noise_deg * rng.normal();
        std::size_t leg = 0;
        for (Timestamp t = first; t < end; t += c.report_interval_s) {
            while (leg + 1 < legs.size() && legs[leg].t1 <= t) ++leg;
            const Leg& l = legs[leg];
            const double f = l.t1 > l.t0 ? std::clamp(static_cast<double>(t - l.t0) / static_cast<double>(l.t1 - l.t0), 0.0, 1.0) : 0.0;
            nx = c.noise_correlation * nx + innovation * rng.normal();
            ny = c.noise_correlation * ny + innovation * rng.normal();
            AisMessage m;
            m.vessel_id = id;
            m.timestamp = t;
            m.lon = l.from.lon + f * (l.to.lon - l.from.lon) + nx;
            m.lat = l.from.lat + f * (l.to.lat - l.from.lat) + ny;
            m.sog = l.speed_kn > 0 ? std::max(0.0, l.speed_kn + 0.1 * rng.normal()) : std::abs(0.15 * rng.normal());
            m.sog = std::round(m.sog * 100.0) / 100.0;
            m.lon = std::round(m.lon * 1e6) / 1e6;
            m.lat = std::round(m.lat * 1e6) / 1e6;
            sc.messages.push_back(std::move(m));
        }
    }
    return sc;
}

GeneratedScenario generate(const ScenarioConfig& config) {
    Scenario sc = simulate(config);
    return {serialize_ais_csv(sc.messages), std::move(sc.ports)};
}

}  // namespace portnet
