#include "portnet/tgnn.hpp"

#include <array>
#include <cmath>

#include "portnet/error.hpp"

namespace portnet::tgnn {
namespace {

bool is_bias(const std::string& name) { return name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0; }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class T>
std::vector<T*> tensors(ParamsT<T>& p) {
    std::vector<T*> out;
    p.visit([&](const std::string&, T& t) { out.push_back(&t); });
    return out;
}

ChebGateT<Matrix> gate_shape(int in, int hidden, int order) {
    ChebGateT<Matrix> g;
    for (int k = 0; k < order; ++k) g.theta.push_back(Matrix::Zero(in + hidden, hidden));
    g.bias = Matrix::Zero(1, hidden);
    return g;
}

GatLayerT<Matrix> gat_shape(int in, int hidden, int heads, int edge_dim) {
    GatLayerT<Matrix> l;
    for (int h = 0; h < heads; ++h) l.heads.push_back({Matrix::Zero(in, hidden), Matrix::Zero(1, 2 * hidden + edge_dim)});
    return l;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be > 0", "learning_rate");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("dropout must be in [0, 1)", "dropout");
    if (patience < 1) throw InvalidInput("patience must be >= 1", "patience");
    if (heads < 1) throw InvalidInput("heads must be >= 1", "heads");
    if (edge_dim != 1) throw InvalidInput("only scalar edge attributes are supported", "edge_dim");
    if (hidden_dim < 1) throw InvalidInput("hidden_dim must be >= 1", "hidden_dim");
    if (cheb_order < 1) throw InvalidInput("cheb_order must be >= 1", "cheb_order");
    if (max_epochs < 1) throw InvalidInput("max_epochs must be >= 1", "max_epochs");
    if (n_splits < 1) throw InvalidInput("n_splits must be >= 1", "n_splits");
}

ModelParameters init_parameters(int in_dim, const TrainConfig& c, std::uint64_t seed) {
    c.validate();
    ModelParameters p;
    p.gat1 = gat_shape(in_dim, c.hidden_dim, c.heads, c.edge_dim);
    p.gat2 = gat_shape(c.hidden_dim, c.hidden_dim, c.heads, c.edge_dim);
    p.gru.update = gate_shape(c.hidden_dim, c.hidden_dim, c.cheb_order);
    p.gru.reset = gate_shape(c.hidden_dim, c.hidden_dim, c.cheb_order);
    p.gru.candidate = gate_shape(c.hidden_dim, c.hidden_dim, c.cheb_order);
    p.dense.weight = Matrix::Zero(c.hidden_dim, kClasses);
    p.dense.bias = Matrix::Zero(1, kClasses);

    std::mt19937_64 rng(seed);
    p.visit([&](const std::string& name, Matrix& t) {
        if (is_bias(name)) return;
        // Attention vectors are treated as a (2H+1) x 1 projection.
        const double fan = name.ends_with(".attention") ? static_cast<double>(t.cols() + 1)
                                                         : static_cast<double>(t.rows() + t.cols());
        const double limit = std::sqrt(6.0 / fan);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = (2.0 * uniform01(rng) - 1.0) * limit;
    });
    return p;
}

ModelParameters zeros_like(const ModelParameters& p) {
    ModelParameters z = p;
    z.visit([](const std::string&, Matrix& t) { t.setZero(); });
    return z;
}

std::size_t parameter_count(const ModelParameters& p) {
    std::size_t n = 0;
    p.visit([&](const std::string&, const Matrix& t) { n += static_cast<std::size_t>(t.size()); });
    return n;
}

ParamVars bind(ad::Tape& tape, const ModelParameters& p, bool trainable) {
    auto bind_gate = [&](const ChebGateT<Matrix>& g, const std::string& name) {
        ChebGateT<Var> v;
        for (std::size_t k = 0; k < g.theta.size(); ++k)
            v.theta.push_back(trainable ? tape.leaf(g.theta[k], name + ".theta" + std::to_string(k)) : tape.constant(g.theta[k]));
        v.bias = trainable ? tape.leaf(g.bias, name + ".bias") : tape.constant(g.bias);
        return v;
    };
    auto bind_layer = [&](const GatLayerT<Matrix>& l, const std::string& name) {
        GatLayerT<Var> v;
        for (std::size_t h = 0; h < l.heads.size(); ++h) {
            const auto n = name + ".head" + std::to_string(h);
            v.heads.push_back({trainable ? tape.leaf(l.heads[h].weight, n + ".weight") : tape.constant(l.heads[h].weight),
                               trainable ? tape.leaf(l.heads[h].attention, n + ".attention")
                                         : tape.constant(l.heads[h].attention)});
        }
        return v;
    };
    ParamVars v;
    v.gat1 = bind_layer(p.gat1, "gat1");
    v.gat2 = bind_layer(p.gat2, "gat2");
    v.gru.update = bind_gate(p.gru.update, "gru.update");
    v.gru.reset = bind_gate(p.gru.reset, "gru.reset");
    v.gru.candidate = bind_gate(p.gru.candidate, "gru.candidate");
    v.dense.weight = trainable ? tape.leaf(p.dense.weight, "dense.weight") : tape.constant(p.dense.weight);
    v.dense.bias = trainable ? tape.leaf(p.dense.bias, "dense.bias") : tape.constant(p.dense.bias);
    return v;
}

ModelParameters gradients(const ad::Tape& tape, const ParamVars& vars) {
    ModelParameters g;
    auto grad_gate = [&](const ChebGateT<Var>& v) {
        ChebGateT<Matrix> out;
        for (auto t : v.theta) out.theta.push_back(tape.gradient(t));
        out.bias = tape.gradient(v.bias);
        return out;
    };
    auto grad_layer = [&](const GatLayerT<Var>& l) {
        GatLayerT<Matrix> out;
        for (const auto& h : l.heads) out.heads.push_back({tape.gradient(h.weight), tape.gradient(h.attention)});
        return out;
    };
    g.gat1 = grad_layer(vars.gat1);
    g.gat2 = grad_layer(vars.gat2);
    g.gru.update = grad_gate(vars.gru.update);
    g.gru.reset = grad_gate(vars.gru.reset);
    g.gru.candidate = grad_gate(vars.gru.candidate);
    g.dense.weight = tape.gradient(vars.dense.weight);
    g.dense.bias = tape.gradient(vars.dense.bias);
    return g;
}

void check_finite(const ModelParameters& p, const char* what) {
    p.visit([&](const std::string& name, const Matrix& t) {
        if (!t.allFinite()) throw NumericError(std::string("non-finite ") + what + " for parameter '" + name + "'");
    });
}

SnapshotGraph prepare(const GraphSnapshot& s) {
    const auto n = static_cast<Eigen::Index>(s.node_count());
    SnapshotGraph g;
    g.features.resize(n, static_cast<Eigen::Index>(kFeatureDim));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(kFeatureDim); ++f)
            g.features(i, f) = s.features[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
    g.neighborhood = ad::Mask::Identity(n, n);
    g.edge_attr = Matrix::Zero(n, n);
    Matrix w = Matrix::Zero(n, n);
    for (const auto& e : s.edges) {
        const auto i = static_cast<Eigen::Index>(e.src), j = static_cast<Eigen::Index>(e.dst);
        g.neighborhood(i, j) = g.neighborhood(j, i) = true;
        g.edge_attr(i, j) = g.edge_attr(j, i) = e.distance_km;
        w(i, j) = w(j, i) = 1.0 / (1.0 + e.distance_km);
    }
    g.uniform_attention = g.neighborhood.cast<double>();
    for (Eigen::Index i = 0; i < n; ++i) g.uniform_attention.row(i) /= g.uniform_attention.row(i).sum();
    const Eigen::VectorXd deg = w.rowwise().sum();
    g.scaled_laplacian = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (w(i, j) != 0.0) g.scaled_laplacian(i, j) = -w(i, j) / std::sqrt(deg(i) * deg(j));
    g.labels = s.labels;
    return g;
}

std::vector<SnapshotGraph> prepare(std::span<const GraphSnapshot> snapshots) {
    std::vector<SnapshotGraph> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) out.push_back(prepare(s));
    return out;
}

Var gat_forward(Var x, const SnapshotGraph& g, const GatLayerT<Var>& layer, bool use_attention, double leaky_slope,
                GatTrace* trace) {
    ad::Tape& tape = *x.tape;
    Var acc{};
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
        const auto& head = layer.heads[h];
        const Var wh = matmul(x, head.weight);
        Var out{};
        if (use_attention) {
            const auto hid = head.weight.cols();
            const Var a = head.attention;
            const Var target = matmul(wh, transpose(ad::columns(a, 0, hid)));
            const Var source = matmul(wh, transpose(ad::columns(a, hid, hid)));
            const Var edge = scale_by(tape.constant(g.edge_attr), ad::columns(a, 2 * hid, 1));
            const Var scores = ad::leaky_relu(add(outer_sum(target, source), edge), leaky_slope);
            const Var alpha = masked_row_softmax(scores, g.neighborhood);
            if (trace) trace->attention.push_back(alpha.value());
            out = matmul(alpha, wh);
        } else {
            if (trace) trace->attention.push_back(g.uniform_attention);
            out = lmul_const(g.uniform_attention, wh);
        }
        acc = h == 0 ? out : add(acc, out);
    }
    return ad::elu(scale(acc, 1.0 / static_cast<double>(layer.heads.size())));
}

std::vector<Var> chebyshev_basis(Var y, const Matrix& lap, int order) {
    std::vector<Var> basis{y};
    if (order > 1) basis.push_back(lmul_const(lap, y));
    for (int k = 2; k < order; ++k)
        basis.push_back(sub(scale(lmul_const(lap, basis[k - 1]), 2.0), basis[k - 2]));
    return basis;
}

Var cheb_conv(const std::vector<Var>& basis, const ChebGateT<Var>& gate) {
    if (basis.size() != gate.theta.size()) throw PreconditionError("Chebyshev order mismatch");
    Var acc = matmul(basis[0], gate.theta[0]);
    for (std::size_t k = 1; k < basis.size(); ++k) acc = add(acc, matmul(basis[k], gate.theta[k]));
    return add_row(acc, gate.bias);
}

Var gconv_gru_forward(Var x, Var h_prev, const SnapshotGraph& g, const GruT<Var>& gru, GruTrace* trace) {
    if (x.rows() != h_prev.rows()) throw PreconditionError("gconv_gru: node counts differ");
    const int order = static_cast<int>(gru.update.theta.size());
    const auto basis = chebyshev_basis(hcat(x, h_prev), g.scaled_laplacian, order);
    const Var z = ad::sigmoid(cheb_conv(basis, gru.update));
    const Var r = ad::sigmoid(cheb_conv(basis, gru.reset));
    const auto basis_c = chebyshev_basis(hcat(x, hadamard(r, h_prev)), g.scaled_laplacian, order);
    const Var c = ad::tanh(cheb_conv(basis_c, gru.candidate));
    if (trace) *trace = {z.value(), r.value(), c.value()};
    return add(hadamard(z, h_prev), hadamard(one_minus(z), c));
}

Matrix DropoutSampler::mask(Eigen::Index rows, Eigen::Index cols) const {
    Matrix m(rows, cols);
    const double keep = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(*rng) < p ? 0.0 : keep;
    return m;
}

std::vector<Var> model_forward(ad::Tape& tape, std::span<const SnapshotGraph> graphs, const ParamVars& params,
                               const TrainConfig& config, const DropoutSampler* dropout) {
    std::vector<Var> logits;
    logits.reserve(graphs.size());
    const auto hidden = params.dense.weight.rows();
    Var h{};
    for (const auto& g : graphs) {
        const auto n = g.features.rows();
        if (!config.use_temporal || h.tape == nullptr || h.rows() != n) h = tape.constant(Matrix::Zero(n, hidden));
        tape.set_scope("gat1");
        const Var x1 = gat_forward(tape.constant(g.features), g, params.gat1, config.use_attention, config.leaky_slope);
        tape.set_scope("gat2");
        const Var x2 = gat_forward(x1, g, params.gat2, config.use_attention, config.leaky_slope);
        tape.set_scope("gru");
        h = gconv_gru_forward(x2, h, g, params.gru);
        tape.set_scope("dense");
        Var d = h;
        if (dropout && dropout->p > 0.0) d = mul_const(h, dropout->mask(n, hidden));
        logits.push_back(add_row(matmul(d, params.dense.weight), params.dense.bias));
    }
    tape.set_scope({});
    return logits;
}

std::vector<Matrix> model_forward(std::span<const SnapshotGraph> graphs, const ModelParameters& params,
                                  const TrainConfig& config) {
    std::vector<Matrix> out;
    out.reserve(graphs.size());
    Matrix h;
    ad::Tape tape;
    const ParamVars vars = bind(tape, params, false);
    for (const auto& g : graphs) {
        const auto n = g.features.rows();
        if (!config.use_temporal || h.rows() != n) h = Matrix::Zero(n, params.dense.weight.rows());
        tape.set_scope("gat1");
        const Var x1 = gat_forward(tape.constant(g.features), g, vars.gat1, config.use_attention, config.leaky_slope);
        tape.set_scope("gat2");
        const Var x2 = gat_forward(x1, g, vars.gat2, config.use_attention, config.leaky_slope);
        tape.set_scope("gru");
        const Var hn = gconv_gru_forward(x2, tape.constant(h), g, vars.gru);
        h = hn.value();
        tape.set_scope("dense");
        out.push_back(add_row(matmul(hn, vars.dense.weight), vars.dense.bias).value());
    }
    return out;
}

NodePrediction predict_node(const Eigen::Ref<const Matrix>& row) {
    const Matrix p = ad::softmax_rows(row);
    NodePrediction np;
    np.prob_actual = p(0, 0);
    np.prob_gateway = p(0, 1);
    np.cls = row(0, 1) > row(0, 0) ? kClassGateway : kClassActual;
    return np;
}

std::vector<std::vector<NodePrediction>> predict(std::span<const SnapshotGraph> graphs, const ModelParameters& params,
                                                 const TrainConfig& config) {
    const auto logits = model_forward(graphs, params, config);
    std::vector<std::vector<NodePrediction>> out;
    for (const auto& z : logits) {
        std::vector<NodePrediction> row;
        for (Eigen::Index i = 0; i < z.rows(); ++i) row.push_back(predict_node(z.row(i)));
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<double> class_weights(std::span<const SnapshotGraph> graphs) {
    std::array<double, kClasses> count{};
    for (const auto& g : graphs)
        for (int y : g.labels)
            if (y >= 0 && y < kClasses) count[static_cast<std::size_t>(y)] += 1.0;
    const double total = count[0] + count[1];
    for (int c = 0; c < kClasses; ++c)
        if (count[static_cast<std::size_t>(c)] == 0.0)
            throw PreconditionError("class " + std::to_string(c) +
                                    " is absent from the training labels; supply explicit class weights");
    return {total / (2.0 * count[0]), total / (2.0 * count[1])};
}

Var weighted_loss(std::span<const Var> logits, std::span<const SnapshotGraph> graphs, IndexRange score,
                  std::span<const double> weights) {
    if (score.end > logits.size() || score.end > graphs.size() || score.begin >= score.end)
        throw PreconditionError("loss range outside the forward pass");
    double wsum = 0.0;
    Var total{};
    for (std::size_t s = score.begin; s < score.end; ++s) {
        wsum += ad::label_weight_sum(graphs[s].labels, weights);
        const Var part = ad::weighted_nll_sum(logits[s], graphs[s].labels, weights);
        total = s == score.begin ? part : add(total, part);
    }
    if (!(wsum > 0.0)) throw PreconditionError("no labeled nodes in the loss range");
    return scale(total, 1.0 / wsum);
}

double weighted_loss(std::span<const Matrix> logits, std::span<const SnapshotGraph> graphs, IndexRange score,
                     std::span<const double> weights) {
    ad::Tape tape;
    std::vector<Var> vars;
    for (const auto& z : logits) vars.push_back(tape.constant(z));
    return weighted_loss(vars, graphs, score, weights).scalar();
}

OptimizerState make_optimizer(const ModelParameters& params) {
    OptimizerState s;
    s.m = zeros_like(params);
    s.v = zeros_like(params);
    return s;
}

void adam_step(ModelParameters& params, const ModelParameters& grads, OptimizerState& state, double lr) {
    auto p = tensors(params);
    auto g = tensors(const_cast<ModelParameters&>(grads));
    auto m = tensors(state.m);
    auto v = tensors(state.v);
    if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size())
        throw PreconditionError("adam_step: parameter structure mismatch");
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i]->rows() != g[i]->rows() || p[i]->cols() != g[i]->cols())
            throw PreconditionError("adam_step: gradient shape mismatch");
        *m[i] = state.beta1 * *m[i] + (1.0 - state.beta1) * *g[i];
        *v[i] = state.beta2 * *v[i] + (1.0 - state.beta2) * g[i]->cwiseProduct(*g[i]);
        p[i]->array() -= lr * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + state.eps);
    }
}

}  // namespace portnet::tgnn
