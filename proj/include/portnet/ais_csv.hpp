#pragma once

#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "portnet/geo.hpp"

namespace portnet {

inline constexpr std::string_view kAisHeader = "vessel_id,timestamp,lat,lon,sog";

/// Parses the AIS CSV format. Rows are validated in file order; the result is
/// then stably sorted by (vessel_id, timestamp).
std::vector<AisMessage> parse_ais_csv(std::istream& in);
std::vector<AisMessage> parse_ais_csv(std::string_view text);
std::vector<AisMessage> read_ais_csv(const std::string& path);

std::string serialize_ais_csv(std::span<const AisMessage> messages);
void write_ais_csv(const std::string& path, std::span<const AisMessage> messages);

void sort_messages(std::vector<AisMessage>& messages);
bool is_sorted_by_vessel_time(std::span<const AisMessage> messages);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace portnet
