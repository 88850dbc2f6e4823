#pragma once

// Reverse-mode differentiation over dense matrices. A Tape records every
// operation of one forward pass; backward() walks it in reverse and
// accumulates adjoints into each recorded node.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace portnet::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    double scalar() const { return value()(0, 0); }
};

class Tape {
public:
    using Backward = std::function<void(Tape&, std::size_t self)>;

    /// Node whose adjoint is tracked (trainable input).
    Var leaf(Matrix value, std::string name = {});
    /// Node excluded from differentiation.
    Var constant(Matrix value);

    /// Records an op output. `backward` receives the tape and the node id; it
    /// reads grad(self) and accumulates into parents via accumulate().
    Var record(Matrix value, bool needs_grad, Backward backward, const char* op);

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
    bool has_grad(std::size_t id) const { return nodes_[id].grad.size() != 0; }
    bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
    const std::string& name(std::size_t id) const { return nodes_[id].name; }

    /// grad(id) += delta, allocating zeros on first touch. No-op for constants.
    template <class Derived>
    void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& delta) {
        auto& n = nodes_[id];
        if (!n.needs_grad) return;
        if (n.grad.size() == 0) {
            n.grad = delta;
        } else {
            n.grad += delta;
        }
    }

    /// Seeds d(output)/d(output) = 1 for a 1x1 output and runs the reverse sweep.
    void backward(Var output);

    /// Returns the adjoint of a leaf (zeros if the output did not depend on it).
    Matrix gradient(Var leaf) const;

    std::size_t size() const { return nodes_.size(); }

    /// Optional tag prefixed to non-finite diagnostics ("gat1", "gru", ...).
    void set_scope(std::string scope) { scope_ = std::move(scope); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        Backward backward;
        bool needs_grad = false;
        std::string name;
    };
    std::vector<Node> nodes_;
    std::string scope_;
};

// Binary ops
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
/// a (r x c) + row (1 x c) broadcast over rows.
Var add_row(Var a, Var row);
/// a * s where s is 1x1.
Var scale_by(Var a, Var s);
/// Horizontal concatenation [a | b].
Var hcat(Var a, Var b);
Var transpose(Var a);
/// Column block [col, col + n) of a.
Var columns(Var a, Eigen::Index col, Eigen::Index n);
/// S(i, j) = u(i) + v(j) for column vectors u, v.
Var outer_sum(Var u, Var v);

// Constant-operand ops
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var one_minus(Var a);
Var mul_const(Var a, const Matrix& m);
Var add_const(Var a, const Matrix& m);
/// c * a for a constant left factor.
Var lmul_const(const Matrix& c, Var a);

// Elementwise nonlinearities
Var sigmoid(Var a);
Var tanh(Var a);
Var elu(Var a, double alpha = 1.0);
Var leaky_relu(Var a, double slope = 0.2);
Var square(Var a);

/// Row-wise softmax restricted to entries where mask is true; masked entries
/// are exactly 0 in the output. Every row needs at least one unmasked entry.
Var masked_row_softmax(Var scores, const Mask& mask);

/// Sum of all entries (1x1).
Var sum(Var a);

/// Weighted mean cross-entropy over rows with label >= 0:
///   sum_i w[y_i] * -log softmax(logits_i)[y_i]  /  sum_i w[y_i]
/// Rows with negative labels are ignored. Returns a 1x1 node.
Var weighted_cross_entropy(Var logits, std::span<const int> labels,
                           std::span<const double> class_weights);

/// Unnormalized form: sum_i w[y_i] * -log softmax(logits_i)[y_i]. Pair with
/// label_weight_sum() to average over several blocks of rows.
Var weighted_nll_sum(Var logits, std::span<const int> labels, std::span<const double> class_weights);
double label_weight_sum(std::span<const int> labels, std::span<const double> class_weights);

/// Row-wise softmax of a plain matrix.
Matrix softmax_rows(const Matrix& logits);

}  // namespace portnet::ad
