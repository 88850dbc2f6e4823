#pragma once

// Temporal graph classifier: two graph-attention layers, a Chebyshev-filter
// GRU carried across daily snapshots, dropout, and a dense two-class head.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "portnet/autodiff.hpp"
#include "portnet/temporal_graph.hpp"

namespace portnet::tgnn {

using ad::Matrix;
using ad::Var;

constexpr int kClasses = 2;

struct TrainConfig {
    double learning_rate = 1e-3;
    double dropout = 0.2;
    int patience = 10;
    int heads = 2;
    int edge_dim = 1;
    int hidden_dim = 64;
    int cheb_order = 2;  // number of Chebyshev terms T_0..T_{K-1}
    int max_epochs = 1000;
    std::uint64_t seed = 7;
    bool use_attention = true;
    bool use_temporal = true;
    bool normalize = true;
    int n_splits = 8;
    double leaky_slope = 0.2;

    void validate() const;
};

template <class T>
struct GatHeadT {
    T weight;     // in_dim x hidden
    T attention;  // 1 x (2 * hidden + edge_dim): [target | source | edge]
};

template <class T>
struct GatLayerT {
    std::vector<GatHeadT<T>> heads;
};

template <class T>
struct ChebGateT {
    std::vector<T> theta;  // K matrices of (in_dim + hidden) x hidden
    T bias;                // 1 x hidden
};

template <class T>
struct GruT {
    ChebGateT<T> update;
    ChebGateT<T> reset;
    ChebGateT<T> candidate;
};

template <class T>
struct DenseT {
    T weight;  // hidden x 2
    T bias;    // 1 x 2
};

template <class T>
struct ParamsT {
    GatLayerT<T> gat1;
    GatLayerT<T> gat2;
    GruT<T> gru;
    DenseT<T> dense;

    /// Visits every tensor in a fixed order with a stable name.
    template <class F>
    void visit(F&& f) {
        visit_layer("gat1", gat1, f);
        visit_layer("gat2", gat2, f);
        visit_gate("gru.update", gru.update, f);
        visit_gate("gru.reset", gru.reset, f);
        visit_gate("gru.candidate", gru.candidate, f);
        f(std::string("dense.weight"), dense.weight);
        f(std::string("dense.bias"), dense.bias);
    }
    template <class F>
    void visit(F&& f) const {
        const_cast<ParamsT*>(this)->visit([&](const std::string& n, T& t) { f(n, std::as_const(t)); });
    }

private:
    template <class F>
    static void visit_layer(const std::string& p, GatLayerT<T>& l, F& f) {
        for (std::size_t h = 0; h < l.heads.size(); ++h) {
            f(p + ".head" + std::to_string(h) + ".weight", l.heads[h].weight);
            f(p + ".head" + std::to_string(h) + ".attention", l.heads[h].attention);
        }
    }
    template <class F>
    static void visit_gate(const std::string& p, ChebGateT<T>& g, F& f) {
        for (std::size_t k = 0; k < g.theta.size(); ++k) f(p + ".theta" + std::to_string(k), g.theta[k]);
        f(p + ".bias", g.bias);
    }
};

using ModelParameters = ParamsT<Matrix>;
using ParamVars = ParamsT<Var>;

/// Glorot-uniform weights, zero biases.
ModelParameters init_parameters(int in_dim, const TrainConfig& config, std::uint64_t seed);
/// Same shapes, all zeros.
ModelParameters zeros_like(const ModelParameters& p);
std::size_t parameter_count(const ModelParameters& p);

/// Registers every tensor on the tape: as leaves, or as constants when
/// `trainable` is false.
ParamVars bind(ad::Tape& tape, const ModelParameters& p, bool trainable = true);
ModelParameters gradients(const ad::Tape& tape, const ParamVars& vars);
/// Throws NumericError naming the first tensor with a non-finite entry.
void check_finite(const ModelParameters& p, const char* what);

/// Per-snapshot constants derived once from a (normalized) snapshot.
struct SnapshotGraph {
    Matrix features;           // N x F
    ad::Mask neighborhood;     // adjacency plus self-loops
    Matrix edge_attr;          // raw distance_km, 0 on the diagonal and non-edges
    Matrix uniform_attention;  // row-normalized neighborhood
    Matrix scaled_laplacian;   // -D^{-1/2} W D^{-1/2}, W = 1 / (1 + km)
    std::vector<int> labels;
};

SnapshotGraph prepare(const GraphSnapshot& snapshot);
std::vector<SnapshotGraph> prepare(std::span<const GraphSnapshot> snapshots);

/// Attention coefficients per head, for inspection.
struct GatTrace {
    std::vector<Matrix> attention;
};

/// One attention layer: per-head LeakyReLU scores over N(i) + {i}, softmax,
/// weighted sum of W h_j, mean over heads, ELU. With use_attention = false
/// the coefficients are the fixed uniform weights.
Var gat_forward(Var x, const SnapshotGraph& g, const GatLayerT<Var>& layer, bool use_attention,
                double leaky_slope = 0.2, GatTrace* trace = nullptr);

struct GruTrace {
    Matrix update;
    Matrix reset;
    Matrix candidate;
};

/// Order-K Chebyshev filter sum_k T_k(L) y Theta_k + b.
Var cheb_conv(const std::vector<Var>& basis, const ChebGateT<Var>& gate);
/// T_0 y .. T_{K-1} y.
std::vector<Var> chebyshev_basis(Var y, const Matrix& scaled_laplacian, int order);

Var gconv_gru_forward(Var x, Var h_prev, const SnapshotGraph& g, const GruT<Var>& gru,
                      GruTrace* trace = nullptr);

/// Inverted dropout source. p = 0 disables it.
struct DropoutSampler {
    double p = 0.0;
    std::mt19937_64* rng = nullptr;

    Matrix mask(Eigen::Index rows, Eigen::Index cols) const;
};

/// Logits (N x 2) for every snapshot in order. `dropout` null means eval mode.
std::vector<Var> model_forward(ad::Tape& tape, std::span<const SnapshotGraph> graphs,
                               const ParamVars& params, const TrainConfig& config,
                               const DropoutSampler* dropout);

/// Eval-mode forward without gradient bookkeeping.
std::vector<Matrix> model_forward(std::span<const SnapshotGraph> graphs, const ModelParameters& params,
                                  const TrainConfig& config);

struct NodePrediction {
    int cls = 0;
    double prob_actual = 0.0;
    double prob_gateway = 0.0;
};

/// argmax of the softmax; ties go to class 0.
NodePrediction predict_node(const Eigen::Ref<const Matrix>& logits_row);
std::vector<std::vector<NodePrediction>> predict(std::span<const SnapshotGraph> graphs,
                                                 const ModelParameters& params,
                                                 const TrainConfig& config);

/// N_total / (2 N_c) over labeled nodes. Throws PreconditionError if a class is absent.
std::vector<double> class_weights(std::span<const SnapshotGraph> graphs);

/// Weighted mean cross-entropy over graphs[score.begin, score.end) of `logits`.
Var weighted_loss(std::span<const Var> logits, std::span<const SnapshotGraph> graphs,
                  IndexRange score, std::span<const double> weights);
double weighted_loss(std::span<const Matrix> logits, std::span<const SnapshotGraph> graphs,
                     IndexRange score, std::span<const double> weights);

struct OptimizerState {
    ModelParameters m;
    ModelParameters v;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

OptimizerState make_optimizer(const ModelParameters& params);
/// Bias-corrected Adam update in place.
void adam_step(ModelParameters& params, const ModelParameters& grads, OptimizerState& state,
               double lr);

}  // namespace portnet::tgnn
