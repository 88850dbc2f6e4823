#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "oracles.hpp"
#include "portnet/dbscan.hpp"
#include "portnet/error.hpp"
#include "portnet/hull.hpp"
#include "portnet/ports.hpp"
#include "property.hpp"

using namespace portnet;

namespace {

AisMessage stationary(LonLat p, int i) {
    AisMessage m;
    m.vessel_id = "V";
    m.timestamp = i;
    m.lon = p.lon;
    m.lat = p.lat;
    m.sog = 0.1;
    return m;
}

}  // namespace

TEST_CASE("dbscan examples") {
    SUBCASE("copies of one point") {
        const std::vector<LonLat> pts(25, LonLat{-63.5, 44.6});
        const auto a = dbscan(pts, {0.005, 20});
        CHECK(a.cluster_count == 1);
        for (int l : a.labels) CHECK(l == 0);
    }
    SUBCASE("isolated points are noise") {
        std::vector<LonLat> pts;
        for (int i = 0; i < 5; ++i) pts.push_back({i * 0.1, 0.0});
        const auto a = dbscan(pts, {0.005, 2});
        CHECK(a.cluster_count == 0);
        for (int l : a.labels) CHECK(l == ClusterAssignment::kNoise);
    }
    SUBCASE("two blobs") {
        prop::Gen g(11);
        std::vector<LonLat> pts;
        for (int i = 0; i < 20; ++i) pts.push_back({g.uniform(0, 0.004), g.uniform(0, 0.004)});
        for (int i = 0; i < 20; ++i) pts.push_back({0.1 + g.uniform(0, 0.004), g.uniform(0, 0.004)});
        const auto a = dbscan(pts, {0.005, 5});
        CHECK(a.cluster_count == 2);
        CHECK(oracle::same_partition(a.labels, oracle::dbscan(pts, 0.005, 5)));
    }
    SUBCASE("empty input") { CHECK(dbscan({}, {}).cluster_count == 0); }
}

TEST_CASE("dbscan serial and parallel agree") {
    prop::Gen g(3);
    const auto pts = gen::blobs(g, 5000, 6, 0.003);
    const auto a = dbscan(pts, {0.005, 20}, Exec::Serial);
    const auto b = dbscan(pts, {0.005, 20}, Exec::Parallel);
    CHECK(a.labels == b.labels);
}

TEST_CASE("property: dbscan matches the reachability oracle") {
    prop::for_all("dbscan oracle", [](prop::Gen& g, int) {
        const auto inst = gen::dbscan_instance(g);
        CHECK(oracle::same_partition(dbscan(inst.points, {inst.eps, inst.min_pts}).labels,
                                     oracle::dbscan(inst.points, inst.eps, inst.min_pts)));
    }, 200);
}

TEST_CASE("property: dbscan is permutation invariant") {
    prop::for_all("dbscan permutation", [](prop::Gen& g, int) {
        const auto pts = gen::blobs(g, g.integer(5, 200), g.integer(1, 4), g.uniform(0.001, 0.005));
        const DbscanParams params{g.uniform(0.002, 0.006), static_cast<std::size_t>(g.integer(2, 10))};
        std::vector<std::size_t> perm(pts.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), g.g);
        std::vector<LonLat> shuffled;
        for (auto i : perm) shuffled.push_back(pts[i]);

        const auto a = dbscan(pts, params);
        const auto b = dbscan(shuffled, params);
        CHECK(a.cluster_count == b.cluster_count);
        // Core points keep their partition; border points may join any
        // adjacent cluster, so only noise is compared for them.
        std::vector<int> core_a, core_b;
        for (std::size_t k = 0; k < perm.size(); ++k) {
            const auto i = perm[k];
            CHECK(a.is_noise(i) == b.is_noise(k));
            std::size_t count = 0;
            for (const auto& q : pts)
                count += std::hypot(q.lon - pts[i].lon, q.lat - pts[i].lat) <= params.eps ? 1 : 0;
            core_a.push_back(count >= params.min_pts ? a.labels[i] : -1);
            core_b.push_back(count >= params.min_pts ? b.labels[k] : -1);
        }
        CHECK(oracle::same_partition(core_a, core_b));
    });
}

TEST_CASE("convex hull examples") {
    const auto tri = convex_hull(std::vector<LonLat>{{0, 0}, {0, 1}, {1, 0}});
    CHECK(tri.size() == 3);
    CHECK(signed_area(tri) > 0);
    const auto sq = convex_hull(std::vector<LonLat>{{0, 0}, {1, 0}, {0.5, 0.5}, {1, 1}, {0, 1}});
    CHECK(sq.size() == 4);
    CHECK(std::find(sq.begin(), sq.end(), LonLat{0.5, 0.5}) == sq.end());
    CHECK(is_convex_ccw(sq));
    CHECK_THROWS_AS(convex_hull(std::vector<LonLat>{{0, 0}, {1, 1}, {2, 2}}), DegenerateGeometry);
    CHECK_THROWS_AS(convex_hull(std::vector<LonLat>{{0, 0}, {1, 1}}), DegenerateGeometry);
}

TEST_CASE("property: hull matches the triangle-containment oracle") {
    prop::for_all("hull oracle", [](prop::Gen& g, int) {
        std::vector<LonLat> pts;
        const int n = g.integer(3, 20);
        while (static_cast<int>(pts.size()) < n) {
            const double r = std::sqrt(g.uniform()), a = g.uniform(0, 2 * std::numbers::pi);
            pts.push_back({r * std::cos(a), r * std::sin(a)});
        }
        auto hull = convex_hull(pts);
        auto expect = oracle::hull_vertices(pts);
        auto less = [](LonLat a, LonLat b) { return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat); };
        CHECK(is_convex_ccw(hull));
        std::sort(hull.begin(), hull.end(), less);
        std::sort(expect.begin(), expect.end(), less);
        CHECK(hull == expect);
    });
}

TEST_CASE("buffer ring") {
    const Ring square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(buffer_ring(square, 0.0) == square);
    const auto big = buffer_ring(square, 0.1);
    REQUIRE(big.size() == 4);
    double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
    for (const auto& v : big) {
        lo_x = std::min(lo_x, v.lon);
        hi_x = std::max(hi_x, v.lon);
        lo_y = std::min(lo_y, v.lat);
        hi_y = std::max(hi_y, v.lat);
    }
    CHECK(hi_x - lo_x == doctest::Approx(1.2));
    CHECK(hi_y - lo_y == doctest::Approx(1.2));
    CHECK(ring_centroid(big).lon == doctest::Approx(0.5));
    CHECK(ring_centroid(big).lat == doctest::Approx(0.5));

    const Ring tri{{0, 0}, {0.01, 0}, {0, 0.01}};
    const auto grown = buffer_ring(tri, 0.001);
    for (const auto& v : tri) {
        CHECK(point_in_polygon(v, grown));
        for (std::size_t k = 0; k < grown.size(); ++k)
            CHECK(segment_distance(v, grown[k], grown[(k + 1) % grown.size()]) > 0.0);
    }
    CHECK_THROWS_AS(buffer_ring(tri, -1.0), InvalidInput);
}

TEST_CASE("extract ports examples") {
    CHECK(extract_ports(std::vector<AisMessage>{}).empty());

    prop::Gen g(5);
    std::vector<AisMessage> msgs;
    int t = 0;
    for (int i = 0; i < 60; ++i) msgs.push_back(stationary({-63.5 + 0.001 * g.normal(), 44.6 + 0.001 * g.normal()}, t++));
    for (int i = 0; i < 60; ++i) msgs.push_back(stationary({-63.0 + 0.001 * g.normal(), 44.6 + 0.001 * g.normal()}, t++));

    SUBCASE("far blobs stay apart") {
        const auto ports = extract_ports(msgs);
        REQUIRE(ports.size() == 2);
        CHECK(!convex_rings_intersect(ports[0].polygon, ports[1].polygon));
        for (const auto& m : msgs) {
            int inside = 0;
            for (const auto& p : ports) inside += point_in_polygon(m.position(), p.polygon) ? 1 : 0;
            CHECK(inside == 1);
        }
    }
    SUBCASE("overlapping blobs merge") {
        for (int i = 0; i < 60; ++i) msgs.push_back(stationary({-63.5 + 0.0075 + 0.0005 * g.normal(), 44.6 + 0.0005 * g.normal()}, t++));
        PortExtractionParams params;
        params.dbscan.eps = 0.0015;
        params.dbscan.min_pts = 5;
        params.buffer = 0.003;
        const auto ports = extract_ports(msgs, params);
        REQUIRE(ports.size() == 2);
        const auto& merged = ports[0].centroid.lon < ports[1].centroid.lon ? ports[0] : ports[1];
        for (std::size_t i = 0; i < msgs.size(); ++i)
            if (msgs[i].lon < -63.2) CHECK(point_in_polygon(msgs[i].position(), merged.polygon));
    }
    SUBCASE("moving messages are ignored") {
        for (auto& m : msgs) m.sog = 10.0;
        CHECK(extract_ports(msgs).empty());
    }
}

TEST_CASE("stationary filter") {
    std::vector<AisMessage> msgs(3);
    msgs[0].sog = 0.2;
    msgs[1].sog = 3.0;
    msgs[2].sog = 0.4;
    msgs[2].lon = 1.0;
    const auto pts = select_stationary_points(msgs, 0.5);
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].lon == 1.0);
}

TEST_CASE("property: extracted ports cover their points and never overlap") {
    prop::for_all("extract ports", [](prop::Gen& g, int) {
        std::vector<AisMessage> msgs;
        const int centers = g.integer(1, 5);
        int t = 0;
        for (int c = 0; c < centers; ++c) {
            const LonLat m{g.uniform(-63.1, -63.0), g.uniform(44.5, 44.6)};
            const int n = g.integer(10, 80);
            const double spread = g.uniform(0.0003, 0.002);
            for (int i = 0; i < n; ++i) msgs.push_back(stationary({m.lon + spread * g.normal(), m.lat + spread * g.normal()}, t++));
        }
        PortExtractionParams params;
        params.dbscan.min_pts = static_cast<std::size_t>(g.integer(3, 12));
        const auto ports = extract_ports(msgs, params);
        for (std::size_t i = 0; i < ports.size(); ++i) {
            CHECK(ports[i].id == static_cast<PortId>(i));
            CHECK_NOTHROW(validate(ports[i]));
            for (std::size_t j = i + 1; j < ports.size(); ++j)
                CHECK_FALSE(convex_rings_intersect(ports[i].polygon, ports[j].polygon));
        }
        const auto pts = select_stationary_points(msgs, params.sog_max);
        const auto a = dbscan(pts, params.dbscan);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (a.is_noise(i)) continue;
            int inside = 0;
            for (const auto& p : ports) inside += point_in_polygon(pts[i], p.polygon) ? 1 : 0;
            CHECK(inside >= 1);
        }
        CHECK(registry_to_json(extract_ports(msgs, params)) == registry_to_json(ports));
    });
}

TEST_CASE("registry json round-trips") {
    std::vector<Port> ports(1);
    ports[0].polygon = {{0, 0}, {1, 0}, {0, 1}};
    ports[0].centroid = {0.25, 0.25};
    ports[0].label = PortLabel::Gateway;
    const auto back = registry_from_json(registry_to_json(ports));
    REQUIRE(back.size() == 1);
    CHECK(back[0].polygon == ports[0].polygon);
    CHECK(back[0].label == PortLabel::Gateway);
    CHECK_THROWS_AS(registry_from_json("[{\"id\":0}]"), InvalidInput);
}

TEST_CASE("label transfer takes the nearest reference within tolerance") {
    std::vector<Port> found(2), ref(2);
    found[0].centroid = {0, 0};
    found[1].centroid = {1, 1};
    ref[0].centroid = {0.004, 0};
    ref[0].label = PortLabel::Gateway;
    ref[1].centroid = {1.5, 1.5};
    ref[1].label = PortLabel::Actual;
    transfer_labels(found, ref, 0.01);
    CHECK(found[0].label == PortLabel::Gateway);
    CHECK(found[1].label == PortLabel::Unlabeled);
}
