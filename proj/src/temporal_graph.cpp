#include "portnet/temporal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "portnet/error.hpp"

namespace portnet {
namespace {

using nlohmann::json;

struct DayBuckets {
    std::vector<std::vector<std::size_t>> arriving;   // voyage indices by arrival day
    std::vector<std::vector<std::size_t>> departing;  // voyage indices by departure day
    std::vector<std::vector<std::size_t>> visits;     // visits overlapping the day
    std::vector<std::vector<std::size_t>> inport;     // in-port message indices
};

}  // namespace

int class_index(PortLabel l) {
    switch (l) {
        case PortLabel::Actual: return kClassActual;
        case PortLabel::Gateway: return kClassGateway;
        case PortLabel::Unlabeled: break;
    }
    return kClassUnknown;
}

std::vector<GraphSnapshot> build_snapshots(std::span<const Voyage> voyages, std::span<const Visit> visits,
                                           std::span<const LabeledMessage> labeled, std::span<const Port> ports,
                                           Exec exec) {
    if (labeled.empty()) return {};
    std::vector<const Port*> nodes;
    for (const auto& p : ports) nodes.push_back(&p);
    std::sort(nodes.begin(), nodes.end(), [](const Port* a, const Port* b) { return a->id < b->id; });
    std::map<PortId, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]->id] = i;
    auto node_of = [&](PortId id) {
        auto it = index.find(id);
        if (it == index.end()) throw InvalidInput("port id " + std::to_string(id) + " not in registry", "port_id");
        return it->second;
    };

    DayIndex first = day_of(labeled.front().message.timestamp), last = first;
    for (const auto& lm : labeled) {
        first = std::min(first, day_of(lm.message.timestamp));
        last = std::max(last, day_of(lm.message.timestamp));
    }
    const auto n_days = static_cast<std::size_t>(last - first + 1);
    auto slot = [&](Timestamp t) -> std::ptrdiff_t { return day_of(t) - first; };
    auto in_range = [&](std::ptrdiff_t d) { return d >= 0 && d < static_cast<std::ptrdiff_t>(n_days); };

    DayBuckets b;
    b.arriving.resize(n_days);
    b.departing.resize(n_days);
    b.visits.resize(n_days);
    b.inport.resize(n_days);
    for (std::size_t v = 0; v < voyages.size(); ++v) {
        node_of(voyages[v].origin_port_id);
        node_of(voyages[v].dest_port_id);
        if (auto d = slot(voyages[v].arrive_time); in_range(d)) b.arriving[d].push_back(v);
        if (auto d = slot(voyages[v].depart_time); in_range(d)) b.departing[d].push_back(v);
    }
    for (std::size_t v = 0; v < visits.size(); ++v) {
        node_of(visits[v].port_id);
        for (auto d = slot(visits[v].enter_time); d <= slot(visits[v].exit_time); ++d)
            if (in_range(d)) b.visits[d].push_back(v);
    }
    for (std::size_t i = 0; i < labeled.size(); ++i)
        if (!labeled[i].label.is_seapoint()) {
            node_of(labeled[i].label.port);
            b.inport[slot(labeled[i].message.timestamp)].push_back(i);
        }

    std::vector<PortId> node_ids;
    std::vector<int> labels;
    for (const auto* p : nodes) {
        node_ids.push_back(p->id);
        labels.push_back(class_index(p->label));
    }
    const std::size_t n = nodes.size();

    std::vector<GraphSnapshot> out(n_days);
    auto build_day = [&](std::size_t d) {
        GraphSnapshot& s = out[d];
        s.day = first + static_cast<DayIndex>(d);
        s.node_ids = node_ids;
        s.labels = labels;
        s.features.assign(n, FeatureRow{});
        std::vector<double> arrival_sog(n, 0.0), inport_sog(n, 0.0);
        std::vector<std::size_t> inport_count(n, 0);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;

        for (auto v : b.arriving[d]) {
            const auto k = node_of(voyages[v].dest_port_id);
            s.features[k][kArrivals] += 1.0;
            arrival_sog[k] += voyages[v].mean_sog_underway;
        }
        for (auto v : b.departing[d]) s.features[node_of(voyages[v].origin_port_id)][kDepartures] += 1.0;
        for (auto list : {&b.arriving[d], &b.departing[d]}) {
            for (auto v : *list) {
                auto i = node_of(voyages[v].origin_port_id), j = node_of(voyages[v].dest_port_id);
                pairs.emplace_back(std::min(i, j), std::max(i, j));
            }
        }
        const Timestamp start = day_start(s.day), end = day_start(s.day + 1);
        for (auto v : b.visits[d]) {
            const auto& vis = visits[v];
            const auto overlap = std::min(vis.exit_time, end) - std::max(vis.enter_time, start);
            if (overlap > 0) s.features[node_of(vis.port_id)][kWaitingMinutes] += static_cast<double>(overlap) / 60.0;
        }
        for (auto i : b.inport[d]) {
            const auto k = node_of(labeled[i].label.port);
            inport_sog[k] += labeled[i].message.sog;
            ++inport_count[k];
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double arrivals = s.features[k][kArrivals];
            s.features[k][kMeanArrivalSog] = arrivals > 0 ? arrival_sog[k] / arrivals : 0.0;
            s.features[k][kMeanInportSog] =
                inport_count[k] > 0 ? inport_sog[k] / static_cast<double>(inport_count[k]) : 0.0;
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        for (auto [i, j] : pairs)
            s.edges.push_back({i, j, haversine_km(nodes[i]->centroid, nodes[j]->centroid)});
    };

    const auto days = static_cast<std::int64_t>(n_days);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::int64_t d = 0; d < days; ++d) build_day(static_cast<std::size_t>(d));
    } else {
        for (std::int64_t d = 0; d < days; ++d) build_day(static_cast<std::size_t>(d));
    }
    return out;
}

std::vector<GraphSnapshot> build_snapshots(std::span<const Voyage> voyages, std::span<const LabeledMessage> labeled,
                                           std::span<const Port> ports, Exec exec) {
    const auto visits = extract_visits(labeled);
    return build_snapshots(voyages, visits, labeled, ports, exec);
}

FeatureStats compute_stats(std::span<const GraphSnapshot> snapshots, std::size_t cutoff) {
    if (cutoff == 0) throw PreconditionError("normalization cutoff 0 leaves no training snapshots");
    if (cutoff > snapshots.size()) throw PreconditionError("normalization cutoff beyond the snapshot count");
    FeatureStats st;
    st.mean.fill(0.0);
    double count = 0.0;
    for (std::size_t s = 0; s < cutoff; ++s) {
        for (const auto& row : snapshots[s].features) {
            for (std::size_t f = 0; f < kFeatureDim; ++f) st.mean[f] += row[f];
            count += 1.0;
        }
    }
    if (count == 0.0) throw PreconditionError("training snapshots have no nodes");
    for (auto& m : st.mean) m /= count;
    FeatureRow var{};
    for (std::size_t s = 0; s < cutoff; ++s)
        for (const auto& row : snapshots[s].features)
            for (std::size_t f = 0; f < kFeatureDim; ++f) var[f] += (row[f] - st.mean[f]) * (row[f] - st.mean[f]);
    for (std::size_t f = 0; f < kFeatureDim; ++f) {
        const double sd = std::sqrt(var[f] / count);
        st.stddev[f] = sd > 0.0 ? sd : 1.0;
    }
    return st;
}

TemporalDataset apply_stats(std::span<const GraphSnapshot> snapshots, const FeatureStats& stats) {
    TemporalDataset ds;
    ds.snapshots.assign(snapshots.begin(), snapshots.end());
    ds.normalization = stats;
    ds.normalized = true;
    for (auto& s : ds.snapshots)
        for (auto& row : s.features)
            for (std::size_t f = 0; f < kFeatureDim; ++f) row[f] = (row[f] - stats.mean[f]) / stats.stddev[f];
    return ds;
}

TemporalDataset normalize(std::span<const GraphSnapshot> snapshots, std::size_t train_cutoff) {
    return apply_stats(snapshots, compute_stats(snapshots, train_cutoff));
}

TemporalDataset raw_dataset(std::span<const GraphSnapshot> snapshots) {
    TemporalDataset ds;
    ds.snapshots.assign(snapshots.begin(), snapshots.end());
    return ds;
}

std::vector<Fold> time_series_splits(std::size_t n_snapshots, std::size_t n_splits) {
    if (n_splits < 1) throw PreconditionError("need at least one split");
    if (n_snapshots < n_splits + 1)
        throw PreconditionError("time-series split needs >= " + std::to_string(n_splits + 1) + " snapshots, got " +
                                std::to_string(n_snapshots));
    const std::size_t block = n_snapshots / (n_splits + 1);
    std::vector<Fold> folds;
    for (std::size_t k = 1; k <= n_splits; ++k) folds.push_back({{0, k * block}, {k * block, (k + 1) * block}});
    return folds;
}

std::string snapshot_to_json_line(const GraphSnapshot& s) {
    json features = json::array();
    for (const auto& row : s.features) features.push_back(json(std::vector<double>(row.begin(), row.end())));
    json edges = json::array();
    for (const auto& e : s.edges) edges.push_back({e.src, e.dst, e.distance_km});
    json labels = json::array();
    for (int l : s.labels) labels.push_back(l < 0 ? json(nullptr) : json(l));
    json j = {{"day", format_date(s.day)},
              {"node_ids", s.node_ids},
              {"features", std::move(features)},
              {"edges", std::move(edges)},
              {"labels", std::move(labels)}};
    return j.dump();
}

GraphSnapshot snapshot_from_json_line(const std::string& line) {
    GraphSnapshot s;
    try {
        const json j = json::parse(line);
        s.day = parse_date(j.at("day").get<std::string>());
        s.node_ids = j.at("node_ids").get<std::vector<PortId>>();
        for (const auto& row : j.at("features")) {
            if (row.size() != kFeatureDim) throw InvalidInput("feature row must have 5 entries", "features");
            FeatureRow r;
            for (std::size_t f = 0; f < kFeatureDim; ++f) r[f] = row.at(f).get<double>();
            s.features.push_back(r);
        }
        for (const auto& e : j.at("edges"))
            s.edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
        for (const auto& l : j.at("labels")) s.labels.push_back(l.is_null() ? kClassUnknown : l.get<int>());
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed snapshot: ") + e.what(), "snapshot");
    }
    const auto n = s.node_ids.size();
    if (s.features.size() != n || s.labels.size() != n)
        throw InvalidInput("snapshot arrays disagree with node count", "snapshot");
    for (const auto& e : s.edges)
        if (e.src >= n || e.dst >= n || e.src == e.dst) throw InvalidInput("edge index out of range", "edges");
    return s;
}

std::string snapshots_to_ndjson(std::span<const GraphSnapshot> snapshots) {
    std::string out;
    for (const auto& s : snapshots) {
        out += snapshot_to_json_line(s);
        out += '\n';
    }
    return out;
}

std::vector<GraphSnapshot> snapshots_from_ndjson(std::string_view text) {
    std::vector<GraphSnapshot> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        out.push_back(snapshot_from_json_line(std::string(line)));
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].day <= out[i - 1].day) throw InvalidInput("snapshot days must be strictly increasing", "day");
        if (out[i].node_ids != out[0].node_ids) throw InvalidInput("node ordering differs between snapshots", "node_ids");
    }
    return out;
}

}  // namespace portnet
