#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "portnet/geo.hpp"
#include "portnet/kernels.hpp"
#include "portnet/segmentation.hpp"

namespace portnet {

constexpr std::size_t kFeatureDim = 5;

/// Column layout of the node feature matrix.
enum Feature : std::size_t {
    kArrivals = 0,
    kDepartures = 1,
    kWaitingMinutes = 2,
    kMeanArrivalSog = 3,
    kMeanInportSog = 4,
};

using FeatureRow = std::array<double, kFeatureDim>;

struct GraphEdge {
    std::size_t src = 0;  // node index, src < dst
    std::size_t dst = 0;
    double distance_km = 0.0;

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Label index used by the classifier; -1 = no ground truth for this node.
constexpr int kClassActual = 0;
constexpr int kClassGateway = 1;
constexpr int kClassUnknown = -1;

struct GraphSnapshot {
    DayIndex day = 0;
    std::vector<PortId> node_ids;
    std::vector<FeatureRow> features;  // one row per node
    std::vector<GraphEdge> edges;      // one entry per unordered pair
    std::vector<int> labels;

    std::size_t node_count() const { return node_ids.size(); }
};

struct FeatureStats {
    FeatureRow mean{};
    FeatureRow stddev{1, 1, 1, 1, 1};
};

struct TemporalDataset {
    std::vector<GraphSnapshot> snapshots;
    FeatureStats normalization;
    bool normalized = false;
};

int class_index(PortLabel l);

/// One snapshot per UTC day between the first and last message day.
std::vector<GraphSnapshot> build_snapshots(std::span<const Voyage> voyages,
                                           std::span<const Visit> visits,
                                           std::span<const LabeledMessage> labeled,
                                           std::span<const Port> ports, Exec exec = Exec::Parallel);

/// Visits are derived from `labeled` via extract_visits.
std::vector<GraphSnapshot> build_snapshots(std::span<const Voyage> voyages,
                                           std::span<const LabeledMessage> labeled,
                                           std::span<const Port> ports, Exec exec = Exec::Parallel);

/// Per-feature population mean/std over snapshots[0, cutoff).
FeatureStats compute_stats(std::span<const GraphSnapshot> snapshots, std::size_t cutoff);

/// z-scores every snapshot with stats fitted on snapshots[0, train_cutoff).
/// A zero std is replaced by 1. Throws PreconditionError for cutoff 0 or > size.
TemporalDataset normalize(std::span<const GraphSnapshot> snapshots, std::size_t train_cutoff);
TemporalDataset apply_stats(std::span<const GraphSnapshot> snapshots, const FeatureStats& stats);
/// Pass-through (no scaling) for raw-feature runs.
TemporalDataset raw_dataset(std::span<const GraphSnapshot> snapshots);

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::size_t size() const { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct Fold {
    IndexRange train;
    IndexRange val;
};

/// Expanding-window splits with block = n / (n_splits + 1).
std::vector<Fold> time_series_splits(std::size_t n_snapshots, std::size_t n_splits = 8);

// Newline-delimited JSON, one snapshot per line.
std::string snapshot_to_json_line(const GraphSnapshot& s);
GraphSnapshot snapshot_from_json_line(const std::string& line);
std::string snapshots_to_ndjson(std::span<const GraphSnapshot> snapshots);
std::vector<GraphSnapshot> snapshots_from_ndjson(std::string_view text);

}  // namespace portnet
