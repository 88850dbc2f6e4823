#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "portnet/geo.hpp"

namespace portnet {

struct BoundingBox {
    double lon_min = -64.2;
    double lon_max = -63.0;
    double lat_min = 44.2;
    double lat_max = 44.9;
};

struct ScenarioConfig {
    int n_actual_ports = 10;
    int n_gateway_ports = 5;
    int n_vessels = 10;
    int days = 120;
    int report_interval_s = 60;
    std::uint64_t seed = 7;
    BoundingBox box;
    double gateway_dwell_multiplier = 4.0;
    double gateway_radius_deg = 0.02;
    double gateway_queue_probability = 0.8;
    double dwell_median_h = 6.0;  // actual ports; gateways scale it by the multiplier
    double dwell_log_sd = 1.4;    // log-normal spread of individual stays
    double port_dwell_log_sd = 1.0;  // spread of the median across actual ports
    double popularity_skew = 2.5;    // destination weight of the k-th most popular port is 1 / k^skew
    double seasonal_amplitude = 0.0;  // log-weight swing of each port's popularity
    double seasonal_period_days = 30.0;
    double speed_min_kn = 9.0;
    double speed_max_kn = 14.0;
    double position_noise_deg = 0.0005;
    double noise_correlation = 0.995;  // AR(1) coefficient between consecutive reports
    double port_radius_deg = 0.004;    // ground-truth polygon radius
    std::string start = "2019-03-01T00:00:00Z";

    void validate() const;
};

struct Scenario {
    std::vector<AisMessage> messages;  // sorted by (vessel_id, timestamp)
    std::vector<Port> ports;           // ground truth, labeled
    /// For each gateway port, the actual port it queues for.
    std::vector<std::pair<PortId, PortId>> gateway_pairs;
};

/// Simulated fleet. Deterministic given the config.
Scenario simulate(const ScenarioConfig& config);

struct GeneratedScenario {
    std::string ais_csv;
    std::vector<Port> registry;
};

GeneratedScenario generate(const ScenarioConfig& config);

}  // namespace portnet
