#pragma once

#include <span>
#include <string>
#include <vector>

#include "portnet/geo.hpp"
#include "portnet/kernels.hpp"

namespace portnet {

/// Segment label: a port id, or seapoint.
struct SegmentLabel {
    static constexpr PortId kSeapoint = -1;
    PortId port = kSeapoint;

    bool is_seapoint() const { return port == kSeapoint; }
    friend bool operator==(SegmentLabel, SegmentLabel) = default;
};

struct LabeledMessage {
    AisMessage message;
    SegmentLabel label;
};

/// Labels each message with the lowest port id whose polygon contains it.
std::vector<LabeledMessage> annotate(std::span<const AisMessage> messages,
                                     std::span<const Port> ports, Exec exec = Exec::Parallel);

/// Maximal same-port runs per vessel. Requires (vessel_id, timestamp) order.
std::vector<Visit> extract_visits(std::span<const LabeledMessage> labeled);

/// Consecutive visit pairs to different ports. Requires visits sorted by
/// (vessel_id, enter_time) and `labeled` sorted by (vessel_id, timestamp).
std::vector<Voyage> extract_voyages(std::span<const Visit> visits,
                                    std::span<const LabeledMessage> labeled);

// Labeled messages CSV: vessel_id,timestamp,lat,lon,sog,label  (label = id | seapoint)
std::string serialize_labeled_csv(std::span<const LabeledMessage> labeled);
std::vector<LabeledMessage> parse_labeled_csv(std::string_view text);

// Voyage CSV: vessel_id,origin,dest,depart,arrive,mean_sog_underway
std::string serialize_voyages_csv(std::span<const Voyage> voyages);
std::vector<Voyage> parse_voyages_csv(std::string_view text);

// Visit CSV: vessel_id,port,enter,exit
std::string serialize_visits_csv(std::span<const Visit> visits);

}  // namespace portnet
