#include "portnet/segmentation.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include "portnet/ais_csv.hpp"
#include "portnet/error.hpp"

namespace portnet {
namespace {

std::vector<std::string_view> split(std::string_view row, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= row.size(); ++i) {
        if (i == row.size() || row[i] == sep) {
            out.push_back(row.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t pos = 0, line = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto l = text.substr(pos, nl - pos);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        pos = nl + 1;
        ++line;
        fn(l, line);
    }
}

template <class T>
T parse_field(std::string_view f, const char* name, std::size_t line) {
    T v{};
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size())
        throw InvalidInput("cannot parse '" + std::string(f) + "'", name, line);
    return v;
}

Timestamp parse_time_field(std::string_view f, const char* name, std::size_t line) {
    try {
        return parse_iso8601(f);
    } catch (const InvalidInput& e) {
        throw InvalidInput(e.what(), name, line);
    }
}

struct SeaSpeedIndex {
    std::vector<Timestamp> times;
    std::vector<double> prefix;  // prefix[k] = sum of the first k speeds

    double mean_between(Timestamp lo, Timestamp hi) const {
        const auto a = std::upper_bound(times.begin(), times.end(), lo) - times.begin();
        const auto b = std::lower_bound(times.begin(), times.end(), hi) - times.begin();
        if (b <= a) return 0.0;
        return (prefix[b] - prefix[a]) / static_cast<double>(b - a);
    }
};

}  // namespace

std::vector<LabeledMessage> annotate(std::span<const AisMessage> messages, std::span<const Port> ports,
                                     Exec exec) {
    std::vector<const Port*> by_id;
    for (const auto& p : ports) by_id.push_back(&p);
    std::sort(by_id.begin(), by_id.end(), [](const Port* a, const Port* b) { return a->id < b->id; });
    std::vector<Ring> polygons;
    for (const auto* p : by_id) {
        if (p->polygon.size() < 3) throw DegenerateGeometry("port polygon needs >= 3 vertices", "polygon");
        polygons.push_back(p->polygon);
    }

    std::vector<LonLat> pts(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) pts[i] = messages[i].position();
    const auto where = locate_points(pts, polygons, exec);

    std::vector<LabeledMessage> out(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) {
        out[i].message = messages[i];
        if (where[i] >= 0) out[i].label.port = by_id[static_cast<std::size_t>(where[i])]->id;
    }
    return out;
}

std::vector<Visit> extract_visits(std::span<const LabeledMessage> labeled) {
    std::vector<Visit> visits;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const auto& m = labeled[i].message;
        if (i > 0) {
            const auto& prev = labeled[i - 1].message;
            if (prev.vessel_id > m.vessel_id || (prev.vessel_id == m.vessel_id && prev.timestamp > m.timestamp))
                throw PreconditionError("labeled messages must be sorted by (vessel_id, timestamp)");
        }
        const auto label = labeled[i].label;
        if (label.is_seapoint()) continue;
        const bool continues = i > 0 && labeled[i - 1].label == label &&
                               labeled[i - 1].message.vessel_id == m.vessel_id;
        if (continues) {
            visits.back().exit_time = m.timestamp;
        } else {
            visits.push_back({label.port, m.vessel_id, m.timestamp, m.timestamp});
        }
    }
    return visits;
}

std::vector<Voyage> extract_voyages(std::span<const Visit> visits, std::span<const LabeledMessage> labeled) {
    for (std::size_t i = 1; i < visits.size(); ++i) {
        const auto& a = visits[i - 1];
        const auto& b = visits[i];
        if (a.vessel_id > b.vessel_id || (a.vessel_id == b.vessel_id && a.enter_time > b.enter_time))
            throw PreconditionError("visits must be sorted by (vessel_id, enter_time)");
    }

    std::map<std::string, SeaSpeedIndex, std::less<>> sea;
    for (const auto& lm : labeled) {
        if (!lm.label.is_seapoint()) continue;
        auto& idx = sea[lm.message.vessel_id];
        if (idx.prefix.empty()) idx.prefix.push_back(0.0);
        idx.times.push_back(lm.message.timestamp);
        idx.prefix.push_back(idx.prefix.back() + lm.message.sog);
    }

    std::vector<Voyage> voyages;
    for (std::size_t i = 1; i < visits.size(); ++i) {
        const auto& v1 = visits[i - 1];
        const auto& v2 = visits[i];
        if (v1.vessel_id != v2.vessel_id || v1.port_id == v2.port_id) continue;
        // Duplicate timestamps across a port boundary leave no underway interval.
        if (v2.enter_time <= v1.exit_time) continue;
        Voyage voy{v1.vessel_id, v1.port_id, v2.port_id, v1.exit_time, v2.enter_time, 0.0};
        if (auto it = sea.find(v1.vessel_id); it != sea.end())
            voy.mean_sog_underway = it->second.mean_between(voy.depart_time, voy.arrive_time);
        voyages.push_back(std::move(voy));
    }
    return voyages;
}

std::string serialize_labeled_csv(std::span<const LabeledMessage> labeled) {
    std::string out = std::string(kAisHeader) + ",label\n";
    out.reserve(labeled.size() * 72);
    for (const auto& lm : labeled) {
        const auto& m = lm.message;
        out += m.vessel_id + ',' + format_iso8601(m.timestamp) + ',' + format_double(m.lat) + ',' +
               format_double(m.lon) + ',' + format_double(m.sog) + ',';
        out += lm.label.is_seapoint() ? std::string("seapoint") : std::to_string(lm.label.port);
        out += '\n';
    }
    return out;
}

std::vector<LabeledMessage> parse_labeled_csv(std::string_view text) {
    std::vector<LabeledMessage> out;
    const std::string header = std::string(kAisHeader) + ",label";
    for_each_line(text, [&](std::string_view l, std::size_t line) {
        if (line == 1) {
            if (l != header) throw InvalidInput("expected header '" + header + "'", "header", line);
            return;
        }
        if (l.empty()) return;
        const auto f = split(l);
        if (f.size() != 6) throw InvalidInput("expected 6 fields", "row", line);
        LabeledMessage lm;
        auto& m = lm.message;
        m.vessel_id = std::string(f[0]);
        m.timestamp = parse_time_field(f[1], "timestamp", line);
        m.lat = parse_field<double>(f[2], "lat", line);
        m.lon = parse_field<double>(f[3], "lon", line);
        m.sog = parse_field<double>(f[4], "sog", line);
        m.line = line;
        try {
            validate(m);
        } catch (const InvalidInput& e) {
            throw InvalidInput(e.what(), e.field(), line);
        }
        if (f[5] != "seapoint") lm.label.port = parse_field<int>(f[5], "label", line);
        out.push_back(std::move(lm));
    });
    if (out.empty() && text.empty()) throw InvalidInput("missing header", "header", 1);
    return out;
}

std::string serialize_voyages_csv(std::span<const Voyage> voyages) {
    std::string out = "vessel_id,origin,dest,depart,arrive,mean_sog_underway\n";
    for (const auto& v : voyages) {
        out += v.vessel_id + ',' + std::to_string(v.origin_port_id) + ',' + std::to_string(v.dest_port_id) + ',' +
               format_iso8601(v.depart_time) + ',' + format_iso8601(v.arrive_time) + ',' +
               format_double(v.mean_sog_underway) + '\n';
    }
    return out;
}

std::vector<Voyage> parse_voyages_csv(std::string_view text) {
    std::vector<Voyage> out;
    for_each_line(text, [&](std::string_view l, std::size_t line) {
        if (line == 1) {
            if (l != "vessel_id,origin,dest,depart,arrive,mean_sog_underway")
                throw InvalidInput("unexpected voyage header", "header", line);
            return;
        }
        if (l.empty()) return;
        const auto f = split(l);
        if (f.size() != 6) throw InvalidInput("expected 6 fields", "row", line);
        out.push_back({std::string(f[0]), parse_field<int>(f[1], "origin", line), parse_field<int>(f[2], "dest", line),
                       parse_time_field(f[3], "depart", line), parse_time_field(f[4], "arrive", line),
                       parse_field<double>(f[5], "mean_sog_underway", line)});
    });
    return out;
}

std::string serialize_visits_csv(std::span<const Visit> visits) {
    std::string out = "vessel_id,port,enter,exit\n";
    for (const auto& v : visits)
        out += v.vessel_id + ',' + std::to_string(v.port_id) + ',' + format_iso8601(v.enter_time) + ',' +
               format_iso8601(v.exit_time) + '\n';
    return out;
}

}  // namespace portnet
