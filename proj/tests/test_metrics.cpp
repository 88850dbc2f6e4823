#include <doctest.h>

#include "oracles.hpp"
#include "portnet/error.hpp"
#include "portnet/experiments.hpp"
#include "portnet/metrics.hpp"
#include "property.hpp"

using namespace portnet;

TEST_CASE("confusion examples") {
    const std::vector<int> t{0, 0, 1, 1};
    const auto perfect = confusion(t, t);
    CHECK(perfect.normalized[0][0] == 1.0);
    CHECK(perfect.normalized[1][1] == 1.0);
    CHECK(perfect.normalized[0][1] == 0.0);
    const auto flipped = confusion(t, std::vector<int>{1, 1, 0, 0});
    CHECK(flipped.normalized[0][1] == 1.0);
    CHECK(flipped.normalized[1][0] == 1.0);
    const auto worked = confusion(t, std::vector<int>{0, 1, 1, 1});
    CHECK(worked.normalized[0][0] == 0.5);
    CHECK(worked.normalized[0][1] == 0.5);
    CHECK(worked.normalized[1][0] == 0.0);
    CHECK(worked.normalized[1][1] == 1.0);
    CHECK(worked.diagonal_mean() == 0.75);
    CHECK_THROWS_AS(confusion(t, std::vector<int>{0}), InvalidInput);
    CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{0}), InvalidInput);
}

TEST_CASE("weighted prf examples") {
    const std::vector<int> t{0, 0, 1, 1};
    const auto perfect = weighted_prf(t, t);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.fscore == 1.0);
    const auto w = weighted_prf(t, std::vector<int>{0, 1, 1, 1});
    CHECK(std::abs(w.precision - 0.8333) < 1e-4);
    CHECK(std::abs(w.recall - 0.75) < 1e-4);
    CHECK(std::abs(w.fscore - 0.7333) < 1e-4);
    const std::vector<int> ones{1, 1, 1};
    CHECK(weighted_prf(ones, ones).fscore == 1.0);
    CHECK_THROWS_AS(weighted_prf(std::vector<int>{}, std::vector<int>{}), InvalidInput);
}

TEST_CASE("property: weighted prf matches per-class counting") {
    prop::for_all("prf oracle", [](prop::Gen& g, int) {
        const int n = g.integer(1, 40);
        std::vector<int> t, y;
        const double bias = g.uniform();
        for (int i = 0; i < n; ++i) {
            t.push_back(g.coin(bias) ? 1 : 0);
            y.push_back(g.coin(0.7) ? t.back() : 1 - t.back());
        }
        const auto got = weighted_prf(t, y);
        const auto want = oracle::weighted_prf(t, y);
        CHECK(got.precision == doctest::Approx(want.p).epsilon(1e-12));
        CHECK(got.recall == doctest::Approx(want.r).epsilon(1e-12));
        CHECK(got.fscore == doctest::Approx(want.f).epsilon(1e-12));
        const auto cm = confusion(t, y);
        for (int r = 0; r < 2; ++r) {
            const auto support = cm.counts[r][0] + cm.counts[r][1];
            if (support > 0) CHECK(cm.normalized[r][0] + cm.normalized[r][1] == doctest::Approx(1.0).epsilon(1e-15));
        }
    });
}

TEST_CASE("fold aggregation") {
    const std::vector<Prf> same(4, Prf{0.8, 0.7, 0.75});
    const auto r = aggregate(same);
    CHECK(r.fscore.mean == doctest::Approx(0.75));
    CHECK(r.fscore.sd == 0.0);
    const std::vector<double> v{1.0, 3.0};
    CHECK(mean_std(v).sd == 1.0);
}

TEST_CASE("property: report csv round-trips") {
    prop::for_all("report round trip", [](prop::Gen& g, int) {
        std::vector<ReportRow> rows;
        for (const char* key : {"alpha", "t", "alpha+t"}) {
            ReportRow r{key, {}};
            r.scores.precision = {g.uniform(), g.uniform(0, 0.2)};
            r.scores.recall = {g.uniform(), g.uniform(0, 0.2)};
            r.scores.fscore = {g.uniform(), g.uniform(0, 0.2)};
            rows.push_back(r);
        }
        const auto text = report_to_csv("flags", rows);
        std::string key;
        const auto back = report_from_csv(text, &key);
        CHECK(key == "flags");
        REQUIRE(back.size() == 3);
        CHECK(back[2].scores.fscore.mean == rows[2].scores.fscore.mean);
        CHECK(back[0].scores.precision.sd == rows[0].scores.precision.sd);
        CHECK(report_to_csv("flags", back) == text);
        CHECK(report_to_text("flags", back) == report_to_text("flags", rows));
    });
    CHECK_THROWS_AS(report_from_csv("a,b\n"), InvalidInput);
}

namespace {

std::vector<GraphSnapshot> tiny_dataset() {
    prop::Gen g(12);
    std::vector<GraphSnapshot> out;
    for (int d = 0; d < 12; ++d) {
        GraphSnapshot s;
        s.day = d;
        for (int i = 0; i < 4; ++i) {
            s.node_ids.push_back(i);
            s.labels.push_back(i == 3 ? 1 : 0);
            s.features.push_back(FeatureRow{g.uniform(), g.uniform(), i == 3 ? 1000.0 : g.uniform(0, 200), 10, 0.1});
        }
        s.edges = {{0, 3, 3.0}, {1, 2, 4.0}};
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("ablation and sweep tables are reproducible") {
    const auto data = tiny_dataset();
    tgnn::TrainConfig c;
    c.hidden_dim = 4;
    c.max_epochs = 3;
    c.n_splits = 3;
    const auto a = ablation_report(data, c);
    const auto b = ablation_report(data, c);
    REQUIRE(a.size() == 3);
    CHECK(a[0].flags == "alpha");
    CHECK_FALSE(a[0].use_temporal);
    CHECK_FALSE(a[1].use_attention);
    CHECK(report_to_csv("flags", rows_of(a)) == report_to_csv("flags", rows_of(b)));
    CHECK(a[2].cv.folds.size() == 3);
    CHECK(loss_history_all_csv(a[2].cv) == loss_history_all_csv(b[2].cv));

    const auto sweep = dropout_sweep(data, c, kDropoutGrid);
    REQUIRE(sweep.size() == 4);
    const auto text = report_to_csv("p", rows_of(sweep));
    CHECK(text.find("\n0.1,") != std::string::npos);
}
