#include "portnet/ais_csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "portnet/error.hpp"

namespace portnet {
namespace {

std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

double parse_number(std::string_view field, const char* name, std::size_t line) {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc{} || ptr != end)
        throw InvalidInput("not a number: '" + std::string(field) + "'", name, line);
    return v;
}

AisMessage parse_row(std::string_view row, std::size_t line) {
    std::array<std::string_view, 5> f;
    std::size_t n = 0, start = 0;
    for (std::size_t i = 0; i <= row.size(); ++i) {
        if (i == row.size() || row[i] == ',') {
            if (n == f.size()) throw InvalidInput("too many fields (expected 5)", "row", line);
            f[n++] = row.substr(start, i - start);
            start = i + 1;
        }
    }
    if (n != f.size()) throw InvalidInput("expected 5 fields, got " + std::to_string(n), "row", line);

    AisMessage m;
    m.line = line;
    if (f[0].empty()) throw InvalidInput("empty vessel id", "vessel_id", line);
    m.vessel_id = std::string(f[0]);
    try {
        m.timestamp = parse_iso8601(f[1]);
    } catch (const InvalidInput& e) {
        throw InvalidInput(e.what(), "timestamp", line);
    }
    m.lat = parse_number(f[2], "lat", line);
    m.lon = parse_number(f[3], "lon", line);
    m.sog = parse_number(f[4], "sog", line);
    if (!std::isfinite(m.lat) || m.lat < -90.0 || m.lat > 90.0) throw InvalidInput("latitude out of range [-90, 90]", "lat", line);
    if (!std::isfinite(m.lon) || m.lon < -180.0 || m.lon > 180.0) throw InvalidInput("longitude out of range [-180, 180]", "lon", line);
    if (!std::isfinite(m.sog) || m.sog < 0.0) throw InvalidInput("sog must be finite and >= 0", "sog", line);
    return m;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::vector<AisMessage> parse_ais_csv(std::string_view text) {
    std::vector<AisMessage> out;
    std::size_t pos = 0, line_no = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = trim_cr(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (!header_seen) {
            if (line != kAisHeader)
                throw InvalidInput("expected header '" + std::string(kAisHeader) + "'", "header", line_no);
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        out.push_back(parse_row(line, line_no));
    }
    if (!header_seen) throw InvalidInput("missing header", "header", 1);
    sort_messages(out);
    return out;
}

std::vector<AisMessage> parse_ais_csv(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ais_csv(std::string_view(ss.str()));
}

std::vector<AisMessage> read_ais_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open AIS file: " + path, "path");
    return parse_ais_csv(in);
}

void sort_messages(std::vector<AisMessage>& messages) {
    std::stable_sort(messages.begin(), messages.end(), [](const AisMessage& a, const AisMessage& b) {
        if (a.vessel_id != b.vessel_id) return a.vessel_id < b.vessel_id;
        return a.timestamp < b.timestamp;
    });
}

bool is_sorted_by_vessel_time(std::span<const AisMessage> messages) {
    for (std::size_t i = 1; i < messages.size(); ++i) {
        const auto& a = messages[i - 1];
        const auto& b = messages[i];
        if (a.vessel_id > b.vessel_id || (a.vessel_id == b.vessel_id && a.timestamp > b.timestamp))
            return false;
    }
    return true;
}

std::string serialize_ais_csv(std::span<const AisMessage> messages) {
    std::string out;
    out.reserve(messages.size() * 64 + 40);
    out += kAisHeader;
    out += '\n';
    for (const auto& m : messages) {
        out += m.vessel_id;
        out += ',';
        out += format_iso8601(m.timestamp);
        out += ',';
        out += format_double(m.lat);
        out += ',';
        out += format_double(m.lon);
        out += ',';
        out += format_double(m.sog);
        out += '\n';
    }
    return out;
}

void write_ais_csv(const std::string& path, std::span<const AisMessage> messages) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write AIS file: " + path, "path");
    out << serialize_ais_csv(messages);
}

}  // namespace portnet
