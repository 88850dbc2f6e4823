#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "portnet/error.hpp"
#include "portnet/tgnn.hpp"
#include "property.hpp"

using namespace portnet;
using namespace portnet::tgnn;

namespace {

GraphSnapshot path_snapshot() {
    GraphSnapshot s;
    s.node_ids = {0, 1, 2};
    s.features.assign(3, FeatureRow{});
    s.labels = {0, 1, 0};
    s.edges = {{0, 1, 2.0}, {1, 2, 1.0}};
    return s;
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

/// Plain GRU cell on one row vector, the reference for K = 1 without edges.
Matrix plain_gru(const Matrix& x, const Matrix& h, const GruT<Matrix>& p) {
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const auto in = x.cols(), hid = h.cols();
    Matrix out(x.rows(), hid);
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
        std::vector<double> z(static_cast<std::size_t>(hid)), r(z.size()), c(z.size());
        for (Eigen::Index k = 0; k < hid; ++k) {
            double az = p.update.bias(0, k), ar = p.reset.bias(0, k);
            for (Eigen::Index i = 0; i < in; ++i) {
                az += x(n, i) * p.update.theta[0](i, k);
                ar += x(n, i) * p.reset.theta[0](i, k);
            }
            for (Eigen::Index i = 0; i < hid; ++i) {
                az += h(n, i) * p.update.theta[0](in + i, k);
                ar += h(n, i) * p.reset.theta[0](in + i, k);
            }
            z[static_cast<std::size_t>(k)] = sig(az);
            r[static_cast<std::size_t>(k)] = sig(ar);
        }
        for (Eigen::Index k = 0; k < hid; ++k) {
            double ac = p.candidate.bias(0, k);
            for (Eigen::Index i = 0; i < in; ++i) ac += x(n, i) * p.candidate.theta[0](i, k);
            for (Eigen::Index i = 0; i < hid; ++i) ac += r[static_cast<std::size_t>(i)] * h(n, i) * p.candidate.theta[0](in + i, k);
            c[static_cast<std::size_t>(k)] = std::tanh(ac);
            const double zk = z[static_cast<std::size_t>(k)];
            out(n, k) = zk * h(n, k) + (1 - zk) * c[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

GraphSnapshot permuted(const GraphSnapshot& s, const std::vector<std::size_t>& perm) {
    // perm[new] = old
    GraphSnapshot out = s;
    std::vector<std::size_t> inv(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        inv[perm[k]] = k;
        out.node_ids[k] = s.node_ids[perm[k]];
        out.features[k] = s.features[perm[k]];
        out.labels[k] = s.labels[perm[k]];
    }
    out.edges.clear();
    for (const auto& e : s.edges) {
        const auto a = inv[e.src], b = inv[e.dst];
        out.edges.push_back({std::min(a, b), std::max(a, b), e.distance_km});
    }
    return out;
}

ModelParameters scaled_params(prop::Gen& g, const TrainConfig& c, double scale) {
    auto p = init_parameters(static_cast<int>(kFeatureDim), c, g.g());
    p.visit([&](const std::string&, Matrix& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * m.data()[i] + 0.1 * g.normal();
    });
    return p;
}

}  // namespace

TEST_CASE("attention on an isolated node is the node itself") {
    GraphSnapshot s;
    s.node_ids = {0};
    s.labels = {0};
    s.features = {FeatureRow{0.3, -1.2, 0.5, 2.0, 0.1}};
    const auto g = prepare(s);
    TrainConfig c;
    c.hidden_dim = 3;
    c.heads = 1;
    prop::Gen gen(1);
    const auto p = scaled_params(gen, c, 1.0);
    ad::Tape tape;
    const auto v = bind(tape, p);
    GatTrace trace;
    const auto out = gat_forward(tape.constant(g.features), g, v.gat1, true, 0.2, &trace);
    CHECK(trace.attention[0](0, 0) == 1.0);
    const Matrix lin = g.features * p.gat1.heads[0].weight;
    for (Eigen::Index k = 0; k < 3; ++k) {
        const double e = lin(0, k) > 0 ? lin(0, k) : std::exp(lin(0, k)) - 1;
        CHECK(out.value()(0, k) == doctest::Approx(e).epsilon(1e-14));
    }
}

TEST_CASE("symmetric pair gets uniform attention") {
    GraphSnapshot s;
    s.node_ids = {0, 1};
    s.labels = {0, 0};
    s.features = {FeatureRow{1, 2, 3, 4, 5}, FeatureRow{1, 2, 3, 4, 5}};
    s.edges = {{0, 1, 7.0}};
    const auto g = prepare(s);
    TrainConfig c;
    c.hidden_dim = 4;
    prop::Gen gen(2);
    auto p = scaled_params(gen, c, 1.0);
    for (auto& h : p.gat1.heads) h.attention(0, h.attention.cols() - 1) = 0.0;
    ad::Tape tape;
    const auto v = bind(tape, p);
    GatTrace trace;
    gat_forward(tape.constant(g.features), g, v.gat1, true, 0.2, &trace);
    for (const auto& a : trace.attention) {
        CHECK(a(0, 0) == doctest::Approx(0.5));
        CHECK(a(0, 1) == doctest::Approx(0.5));
        CHECK(a(1, 0) == doctest::Approx(0.5));
    }
}

TEST_CASE("three-node path attention golden values") {
    auto g = prepare(path_snapshot());
    g.features = mat({{1, 0}, {0, 1}, {1, 1}});
    ad::Tape tape;
    GatLayerT<Var> layer;
    layer.heads.push_back({tape.constant(mat({{0.5, -0.2}, {0.1, 0.3}})), tape.constant(mat({{0.2, -0.1, 0.4, 0.3, 0.05}}))});
    GatTrace trace;
    const auto out = gat_forward(tape.constant(g.features), g, layer, true, 0.2, &trace).value();
    const Matrix alpha = mat({{0.47751517520819986, 0.5224848247918001, 0.0},
                              {0.33566945816187765, 0.3007041587978998, 0.3636263830402226},
                              {0.0, 0.47751517520819986, 0.5224848247918001}});
    const Matrix expected = mat({{0.29100607008327994, 0.06124241239590005},
                                 {0.41608097478486233, 0.05943999431101666},
                                 {0.36124241239590005, 0.19550303504163996}});
    CHECK((trace.attention[0] - alpha).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gru with zero weights halves the state") {
    TrainConfig c;
    c.hidden_dim = 3;
    c.cheb_order = 2;
    auto p = zeros_like(init_parameters(static_cast<int>(kFeatureDim), c, 1));
    const auto g = prepare(path_snapshot());
    ad::Tape tape;
    const auto v = bind(tape, p);
    const Matrix h = mat({{1, -2, 3}, {0.5, 0, -1}, {4, 4, 4}});
    const auto out = gconv_gru_forward(tape.constant(Matrix::Ones(3, 3)), tape.constant(h), g, v.gru).value();
    CHECK((out - 0.5 * h).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-node scalar gru golden value") {
    GraphSnapshot s;
    s.node_ids = {0};
    s.labels = {0};
    s.features = {FeatureRow{}};
    const auto g = prepare(s);
    ad::Tape tape;
    GruT<Var> gru;
    auto gate = [&](double wx, double wh, double b) {
        return ChebGateT<Var>{{tape.constant(mat({{wx}, {wh}}))}, tape.constant(mat({{b}}))};
    };
    gru.update = gate(0.3, -0.4, 0.1);
    gru.reset = gate(0.2, 0.5, 0.0);
    gru.candidate = gate(0.7, -0.6, 0.05);
    GruTrace trace;
    const auto h = gconv_gru_forward(tape.constant(mat({{0.5}})), tape.constant(mat({{0.2}})), g, gru, &trace);
    CHECK(h.scalar() == doctest::Approx(0.25588612302133473).epsilon(1e-14));
    CHECK(trace.update(0, 0) == doctest::Approx(0.542397940774351));
}

TEST_CASE("property: first-order filter without edges is a plain gru") {
    prop::for_all("plain gru", [](prop::Gen& g, int) {
        GraphSnapshot s;
        const int n = g.integer(1, 5);
        for (int i = 0; i < n; ++i) {
            s.node_ids.push_back(i);
            s.labels.push_back(0);
            s.features.push_back(FeatureRow{});
        }
        const auto graph = prepare(s);
        TrainConfig c;
        c.hidden_dim = g.integer(1, 6);
        c.cheb_order = 1;
        const auto p = scaled_params(g, c, 1.0);
        Matrix x(n, c.hidden_dim), h(n, c.hidden_dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x.data()[i] = g.normal();
            h.data()[i] = g.normal();
        }
        ad::Tape tape;
        const auto v = bind(tape, p);
        const auto out = gconv_gru_forward(tape.constant(x), tape.constant(h), graph, v.gru).value();
        CHECK((out - plain_gru(x, h, p.gru)).cwiseAbs().maxCoeff() < 1e-12);
    });
}

TEST_CASE("prediction rule") {
    const auto p = predict_node(mat({{2.0, -1.0}}));
    CHECK(p.cls == kClassActual);
    CHECK(p.prob_actual == doctest::Approx(0.9525741268224334).epsilon(1e-12));
    CHECK(predict_node(mat({{0.3, 0.3}})).cls == kClassActual);
    CHECK(predict_node(mat({{0.0, 0.0}})).prob_gateway == 0.5);
    CHECK(predict_node(mat({{-1.0, 1.0}})).cls == kClassGateway);
}

TEST_CASE("class weights") {
    GraphSnapshot s;
    for (int i = 0; i < 15; ++i) {
        s.node_ids.push_back(i);
        s.labels.push_back(i < 12 ? 0 : 1);
        s.features.push_back(FeatureRow{});
    }
    const std::vector<SnapshotGraph> graphs{prepare(s)};
    const auto w = class_weights(graphs);
    CHECK(w[0] == doctest::Approx(0.625));
    CHECK(w[1] == doctest::Approx(2.5));
    s.labels.assign(15, 0);
    const std::vector<SnapshotGraph> one_class{prepare(s)};
    CHECK_THROWS_AS(class_weights(one_class), PreconditionError);
}

TEST_CASE("parameter count for the reference configuration") {
    const TrainConfig c;
    CHECK(parameter_count(init_parameters(static_cast<int>(kFeatureDim), c, 0)) == 58822);
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.max_epochs = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.dropout = 1.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.edge_dim = 2;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("adam") {
    TrainConfig c;
    c.hidden_dim = 2;
    const auto p0 = init_parameters(static_cast<int>(kFeatureDim), c, 4);
    SUBCASE("zero gradient leaves parameters") {
        auto p = p0;
        auto st = make_optimizer(p);
        adam_step(p, zeros_like(p), st, 1e-4);
        CHECK(p.dense.weight == p0.dense.weight);
    }
    SUBCASE("first unit step") {
        auto p = p0;
        auto st = make_optimizer(p);
        auto grads = zeros_like(p);
        grads.visit([](const std::string&, Matrix& m) { m.setOnes(); });
        adam_step(p, grads, st, 1e-4);
        const double delta = p.dense.bias(0, 0) - p0.dense.bias(0, 0);
        CHECK(delta == doctest::Approx(-1e-4 / (1.0 + 1e-8)).epsilon(1e-10));
    }
    SUBCASE("constant gradient steps approach lr") {
        auto p = p0;
        auto st = make_optimizer(p);
        auto grads = zeros_like(p);
        grads.visit([](const std::string&, Matrix& m) { m.setConstant(-3.0); });
        double last = 0.0;
        for (int k = 0; k < 500; ++k) {
            const double before = p.dense.bias(0, 1);
            adam_step(p, grads, st, 1e-3);
            last = p.dense.bias(0, 1) - before;
        }
        CHECK(last == doctest::Approx(1e-3).epsilon(1e-6));
    }
}

TEST_CASE("model forward contracts") {
    prop::Gen g(21);
    TrainConfig c;
    c.hidden_dim = 6;
    const auto p = scaled_params(g, c, 1.0);
    auto s = gradcheck::random_snapshot(g, 5, {0, 1, 0, -1, 1});
    const std::vector<SnapshotGraph> twice{prepare(s), prepare(s)};

    const auto a = model_forward(twice, p, c);
    const auto b = model_forward(twice, p, c);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
    CHECK(a[0] != a[1]);

    c.use_temporal = false;
    const auto stateless = model_forward(twice, p, c);
    CHECK(stateless[0] == stateless[1]);

    ad::Tape tape;
    const auto vars = bind(tape, p);
    const auto taped = model_forward(tape, twice, vars, c, nullptr);
    CHECK((taped[1].value() - stateless[1]).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("gradient of a four-node two-day instance") {
    prop::Gen g(77);
    gradcheck::Instance in;
    in.config.hidden_dim = 4;
    in.config.dropout = 0.2;
    for (int k = 0; k < 2; ++k) in.graphs.push_back(prepare(gradcheck::random_snapshot(g, 4, {0, 1, 1, 0})));
    in.params = scaled_params(g, in.config, 1.0);
    in.weights = {0.8, 1.4};
    in.dropout_seed = 5;
    CHECK(gradcheck::max_relative_error(in) < 1e-4);
}

TEST_CASE("attention parameters are inert with fixed weights") {
    prop::Gen g(8);
    gradcheck::Instance in = gradcheck::random_instance(g);
    in.config.use_attention = false;
    ModelParameters grads;
    gradcheck::loss_of(in, in.params, &grads);
    for (const auto& h : grads.gat1.heads) CHECK(h.attention.isZero(0.0));
    for (const auto& h : grads.gat2.heads) CHECK(h.attention.isZero(0.0));
    CHECK_FALSE(grads.dense.weight.isZero(0.0));
}

TEST_CASE("property: attention rows are normalized") {
    prop::for_all("attention normalization", [](prop::Gen& g, int) {
        const int n = g.integer(1, 8);
        std::vector<int> labels(static_cast<std::size_t>(n), 0);
        const auto graph = prepare(gradcheck::random_snapshot(g, n, labels));
        TrainConfig c;
        c.hidden_dim = g.integer(1, 8);
        c.heads = g.integer(1, 3);
        const auto p = scaled_params(g, c, g.uniform(0.5, 3.0));
        ad::Tape tape;
        const auto v = bind(tape, p);
        GatTrace t1, t2;
        const auto x1 = gat_forward(tape.constant(graph.features), graph, v.gat1, true, 0.2, &t1);
        gat_forward(x1, graph, v.gat2, g.coin(0.8), 0.2, &t2);
        for (const auto* trace : {&t1, &t2})
            for (const auto& a : trace->attention)
                for (Eigen::Index i = 0; i < a.rows(); ++i) {
                    CHECK(std::abs(a.row(i).sum() - 1.0) < 1e-6);
                    for (Eigen::Index j = 0; j < a.cols(); ++j)
                        if (!graph.neighborhood(i, j)) CHECK(a(i, j) == 0.0);
                }
    });
}

TEST_CASE("property: gru gates stay in range") {
    prop::for_all("gate ranges", [](prop::Gen& g, int) {
        const int n = g.integer(1, 8);
        const auto graph = prepare(gradcheck::random_snapshot(g, n, std::vector<int>(static_cast<std::size_t>(n), 0)));
        TrainConfig c;
        c.hidden_dim = g.integer(1, 8);
        c.cheb_order = g.integer(1, 3);
        const auto p = scaled_params(g, c, g.uniform(0.5, 2.0));
        Matrix x(n, c.hidden_dim), h(n, c.hidden_dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x.data()[i] = g.normal();
            h.data()[i] = std::tanh(g.normal());
        }
        ad::Tape tape;
        const auto v = bind(tape, p);
        GruTrace trace;
        const auto out = gconv_gru_forward(tape.constant(x), tape.constant(h), graph, v.gru, &trace).value();
        CHECK(trace.update.minCoeff() > 0.0);
        CHECK(trace.update.maxCoeff() < 1.0);
        CHECK(trace.reset.minCoeff() > 0.0);
        CHECK(trace.reset.maxCoeff() < 1.0);
        CHECK(trace.candidate.minCoeff() > -1.0);
        CHECK(trace.candidate.maxCoeff() < 1.0);
        CHECK(out.cwiseAbs().maxCoeff() < 1.0);
    });
}

TEST_CASE("property: model is permutation equivariant") {
    prop::for_all("permutation equivariance", [](prop::Gen& g, int) {
        const int n = g.integer(1, 8);
        const int days = g.integer(1, 3);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& y : labels) y = g.integer(-1, 1);
        std::vector<GraphSnapshot> snaps;
        for (int d = 0; d < days; ++d) snaps.push_back(gradcheck::random_snapshot(g, n, labels));
        std::vector<std::size_t> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), g.g);
        std::vector<GraphSnapshot> shuffled;
        for (const auto& s : snaps) shuffled.push_back(permuted(s, perm));

        TrainConfig c;
        c.hidden_dim = g.integer(1, 8);
        c.heads = g.integer(1, 2);
        c.cheb_order = g.integer(1, 3);
        c.use_attention = g.coin(0.7);
        c.use_temporal = g.coin(0.7);
        const auto p = scaled_params(g, c, 1.0);
        const auto a = model_forward(prepare(snaps), p, c);
        const auto b = model_forward(prepare(shuffled), p, c);
        for (int d = 0; d < days; ++d)
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < 2; ++j)
                    CHECK(std::abs(b[static_cast<std::size_t>(d)](k, j) - a[static_cast<std::size_t>(d)](static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)]), j)) < 1e-6);
    });
}

TEST_CASE("property: without temporal state snapshot order does not matter") {
    prop::for_all("stateless reorder", [](prop::Gen& g, int) {
        const int n = g.integer(1, 6);
        const int days = g.integer(2, 5);
        std::vector<int> labels(static_cast<std::size_t>(n), 0);
        std::vector<SnapshotGraph> graphs;
        for (int d = 0; d < days; ++d) graphs.push_back(prepare(gradcheck::random_snapshot(g, n, labels)));
        TrainConfig c;
        c.hidden_dim = g.integer(1, 6);
        c.use_temporal = false;
        c.use_attention = g.coin();
        const auto p = scaled_params(g, c, 1.0);
        std::vector<std::size_t> order(graphs.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), g.g);
        std::vector<SnapshotGraph> reordered;
        for (auto k : order) reordered.push_back(graphs[k]);
        const auto a = model_forward(graphs, p, c);
        const auto b = model_forward(reordered, p, c);
        for (std::size_t k = 0; k < order.size(); ++k) CHECK(b[k] == a[order[k]]);
    });
}

TEST_CASE("property: random small instances pass the gradient check") {
    prop::for_all("gradient check", [](prop::Gen& g, int) {
        const auto in = gradcheck::random_instance(g);
        CHECK(gradcheck::max_relative_error(in) < 1e-4);
    }, 20);
}

TEST_CASE("inverted dropout preserves the expectation") {
    std::mt19937_64 rng(3);
    const DropoutSampler d{0.2, &rng};
    const Matrix act = mat({{0.7, -1.3, 2.0}});
    Matrix acc = Matrix::Zero(1, 3);
    const int trials = 100000;
    for (int k = 0; k < trials; ++k) acc += act.cwiseProduct(d.mask(1, 3));
    acc /= trials;
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(acc(0, j) - act(0, j)) < 0.01 * std::abs(act(0, j)));
}
