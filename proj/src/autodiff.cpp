#include "portnet/autodiff.hpp"

#include <cmath>

#include "portnet/error.hpp"

namespace portnet::ad {

const Matrix& Var::value() const { return tape->value(id); }

Var Tape::leaf(Matrix value, std::string name) {
    if (!value.allFinite()) throw NumericError("non-finite value in leaf '" + name + "'");
    nodes_.push_back({std::move(value), Matrix{}, nullptr, true, std::move(name)});
    return {this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
    if (!value.allFinite()) throw NumericError("non-finite value in constant input");
    nodes_.push_back({std::move(value), Matrix{}, nullptr, false, {}});
    return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, bool needs_grad, Backward backward, const char* op) {
    if (!value.allFinite()) {
        throw NumericError("non-finite value produced by " + (scope_.empty() ? std::string() : scope_ + "/") + op);
    }
    nodes_.push_back({std::move(value), Matrix{}, needs_grad ? std::move(backward) : nullptr, needs_grad, {}});
    return {this, nodes_.size() - 1};
}

void Tape::backward(Var output) {
    if (output.tape != this) throw PreconditionError("output belongs to a different tape");
    auto& out = nodes_[output.id];
    if (out.value.size() != 1) throw PreconditionError("backward() needs a 1x1 output");
    if (!out.needs_grad) return;
    out.grad = Matrix::Ones(1, 1);
    for (std::size_t i = output.id + 1; i-- > 0;) {
        auto& n = nodes_[i];
        if (!n.backward || n.grad.size() == 0) continue;
        n.backward(*this, i);
    }
}

Matrix Tape::gradient(Var leaf) const {
    const auto& n = nodes_[leaf.id];
    if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

namespace {

bool any_grad(Var a) { return a.tape->needs_grad(a.id); }
bool any_grad(Var a, Var b) { return any_grad(a) || any_grad(b); }

void same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw PreconditionError("operands recorded on different tapes");
}

void same_shape(Var a, Var b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw PreconditionError(std::string(op) + ": shape mismatch");
}

}  // namespace

Var matmul(Var a, Var b) {
    same_tape(a, b);
    if (a.cols() != b.rows()) throw PreconditionError("matmul: inner dimensions differ");
    Matrix v = a.value() * b.value();
    return a.tape->record(std::move(v), any_grad(a, b), [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(a)) t.accumulate(a, g * t.value(b).transpose());
        if (t.needs_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
    }, "matmul");
}

Var add(Var a, Var b) {
    same_tape(a, b);
    same_shape(a, b, "add");
    return a.tape->record(a.value() + b.value(), any_grad(a, b), [a = a.id, b = b.id](Tape& t, std::size_t self) {
        t.accumulate(a, t.grad(self));
        t.accumulate(b, t.grad(self));
    }, "add");
}

Var sub(Var a, Var b) {
    same_tape(a, b);
    same_shape(a, b, "sub");
    return a.tape->record(a.value() - b.value(), any_grad(a, b), [a = a.id, b = b.id](Tape& t, std::size_t self) {
        t.accumulate(a, t.grad(self));
        t.accumulate(b, -t.grad(self));
    }, "sub");
}

Var hadamard(Var a, Var b) {
    same_tape(a, b);
    same_shape(a, b, "hadamard");
    Matrix v = a.value().cwiseProduct(b.value());
    return a.tape->record(std::move(v), any_grad(a, b), [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
        if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
    }, "hadamard");
}

Var add_row(Var a, Var row) {
    same_tape(a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) throw PreconditionError("add_row: row must be 1 x cols");
    Matrix v = a.value().rowwise() + row.value().row(0);
    return a.tape->record(std::move(v), any_grad(a, row), [a = a.id, r = row.id](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        t.accumulate(a, g);
        if (t.needs_grad(r)) t.accumulate(r, g.colwise().sum());
    }, "add_row");
}

Var scale_by(Var a, Var s) {
    same_tape(a, s);
    if (s.value().size() != 1) throw PreconditionError("scale_by: scalar must be 1x1");
    Matrix v = a.value() * s.scalar();
    return a.tape->record(std::move(v), any_grad(a, s), [a = a.id, s = s.id](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(a)) t.accumulate(a, g * t.value(s)(0, 0));
        if (t.needs_grad(s)) t.accumulate(s, Matrix::Constant(1, 1, g.cwiseProduct(t.value(a)).sum()));
    }, "scale_by");
}

Var hcat(Var a, Var b) {
    same_tape(a, b);
    if (a.rows() != b.rows()) throw PreconditionError("hcat: row counts differ");
    Matrix v(a.rows(), a.cols() + b.cols());
    v << a.value(), b.value();
    const auto ca = a.cols(), cb = b.cols();
    return a.tape->record(std::move(v), any_grad(a, b), [a = a.id, b = b.id, ca, cb](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(a)) t.accumulate(a, g.leftCols(ca));
        if (t.needs_grad(b)) t.accumulate(b, g.rightCols(cb));
    }, "hcat");
}

Var transpose(Var a) {
    Matrix v = a.value().transpose();
    return a.tape->record(std::move(v), any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        t.accumulate(a, t.grad(self).transpose());
    }, "transpose");
}

Var columns(Var a, Eigen::Index col, Eigen::Index n) {
    if (col < 0 || n < 0 || col + n > a.cols()) throw PreconditionError("columns: block out of range");
    Matrix v = a.value().middleCols(col, n);
    return a.tape->record(std::move(v), any_grad(a), [a = a.id, col, n](Tape& t, std::size_t self) {
        Matrix d = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
        d.middleCols(col, n) = t.grad(self);
        t.accumulate(a, d);
    }, "columns");
}

Var outer_sum(Var u, Var v) {
    same_tape(u, v);
    if (u.cols() != 1 || v.cols() != 1) throw PreconditionError("outer_sum: operands must be column vectors");
    Matrix s = u.value() * Matrix::Ones(1, v.rows()) + Matrix::Ones(u.rows(), 1) * v.value().transpose();
    return u.tape->record(std::move(s), any_grad(u, v), [u = u.id, v = v.id](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(u)) t.accumulate(u, g.rowwise().sum());
        if (t.needs_grad(v)) t.accumulate(v, g.colwise().sum().transpose());
    }, "outer_sum");
}

Var scale(Var a, double s) {
    return a.tape->record(a.value() * s, any_grad(a), [a = a.id, s](Tape& t, std::size_t self) {
        t.accumulate(a, t.grad(self) * s);
    }, "scale");
}

Var add_scalar(Var a, double s) {
    Matrix v = a.value().array() + s;
    return a.tape->record(std::move(v), any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        t.accumulate(a, t.grad(self));
    }, "add_scalar");
}

Var one_minus(Var a) {
    Matrix v = 1.0 - a.value().array();
    return a.tape->record(std::move(v), any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        t.accumulate(a, -t.grad(self));
    }, "one_minus");
}

Var mul_const(Var a, const Matrix& m) {
    if (m.rows() != a.rows() || m.cols() != a.cols()) throw PreconditionError("mul_const: shape mismatch");
    return a.tape->record(a.value().cwiseProduct(m), any_grad(a), [a = a.id, m](Tape& t, std::size_t self) {
        t.accumulate(a, t.grad(self).cwiseProduct(m));
    }, "mul_const");
}

Var add_const(Var a, const Matrix& m) {
    if (m.rows() != a.rows() || m.cols() != a.cols()) throw PreconditionError("add_const: shape mismatch");
    return a.tape->record(a.value() + m, any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        t.accumulate(a, t.grad(self));
    }, "add_const");
}

Var lmul_const(const Matrix& c, Var a) {
    if (c.cols() != a.rows()) throw PreconditionError("lmul_const: inner dimensions differ");
    return a.tape->record(c * a.value(), any_grad(a), [a = a.id, c](Tape& t, std::size_t self) {
        t.accumulate(a, c.transpose() * t.grad(self));
    }, "lmul_const");
}

Var sigmoid(Var a) {
    Matrix v = (1.0 + (-a.value().array()).exp()).inverse();
    return a.tape->record(std::move(v), any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        const auto y = t.value(self).array();
        t.accumulate(a, (t.grad(self).array() * y * (1.0 - y)).matrix());
    }, "sigmoid");
}

Var tanh(Var a) {
    Matrix v = a.value().array().tanh();
    return a.tape->record(std::move(v), any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        const auto y = t.value(self).array();
        t.accumulate(a, (t.grad(self).array() * (1.0 - y * y)).matrix());
    }, "tanh");
}

Var elu(Var a, double alpha) {
    const auto x = a.value().array();
    Matrix v = (x > 0.0).select(x, alpha * (x.exp() - 1.0));
    return a.tape->record(std::move(v), any_grad(a), [a = a.id, alpha](Tape& t, std::size_t self) {
        const auto x = t.value(a).array();
        const auto y = t.value(self).array();
        Matrix d = (x > 0.0).select(Eigen::ArrayXXd::Ones(x.rows(), x.cols()), y + alpha).matrix();
        t.accumulate(a, t.grad(self).cwiseProduct(d));
    }, "elu");
}

Var leaky_relu(Var a, double slope) {
    const auto x = a.value().array();
    Matrix v = (x > 0.0).select(x, slope * x);
    return a.tape->record(std::move(v), any_grad(a), [a = a.id, slope](Tape& t, std::size_t self) {
        const auto x = t.value(a).array();
        Matrix d = (x > 0.0).select(Eigen::ArrayXXd::Ones(x.rows(), x.cols()),
                                    Eigen::ArrayXXd::Constant(x.rows(), x.cols(), slope)).matrix();
        t.accumulate(a, t.grad(self).cwiseProduct(d));
    }, "leaky_relu");
}

Var square(Var a) {
    return a.tape->record(a.value().cwiseProduct(a.value()), any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        t.accumulate(a, 2.0 * t.grad(self).cwiseProduct(t.value(a)));
    }, "square");
}

Var masked_row_softmax(Var scores, const Mask& mask) {
    const Matrix& s = scores.value();
    if (mask.rows() != s.rows() || mask.cols() != s.cols()) throw PreconditionError("masked_row_softmax: mask shape");
    Matrix y = Matrix::Zero(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        double mx = -INFINITY;
        for (Eigen::Index j = 0; j < s.cols(); ++j)
            if (mask(i, j)) mx = std::max(mx, s(i, j));
        if (mx == -INFINITY) throw PreconditionError("masked_row_softmax: row with no unmasked entry");
        double z = 0.0;
        for (Eigen::Index j = 0; j < s.cols(); ++j) {
            if (!mask(i, j)) continue;
            y(i, j) = std::exp(s(i, j) - mx);
            z += y(i, j);
        }
        y.row(i) /= z;
    }
    return scores.tape->record(std::move(y), any_grad(scores), [a = scores.id](Tape& t, std::size_t self) {
        const Matrix& y = t.value(self);
        const Matrix& g = t.grad(self);
        const Eigen::VectorXd dot = y.cwiseProduct(g).rowwise().sum();
        Matrix d = y.cwiseProduct(g - dot * Eigen::RowVectorXd::Ones(y.cols()));
        t.accumulate(a, d);
    }, "masked_row_softmax");
}

Var sum(Var a) {
    return a.tape->record(Matrix::Constant(1, 1, a.value().sum()), any_grad(a), [a = a.id](Tape& t, std::size_t self) {
        const auto& v = t.value(a);
        t.accumulate(a, Matrix::Constant(v.rows(), v.cols(), t.grad(self)(0, 0)));
    }, "sum");
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        p.row(i) = (logits.row(i).array() - mx).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

double label_weight_sum(std::span<const int> labels, std::span<const double> class_weights) {
    double w = 0.0;
    for (int y : labels) {
        if (y < 0) continue;
        if (static_cast<std::size_t>(y) >= class_weights.size()) throw PreconditionError("label without class weight");
        w += class_weights[static_cast<std::size_t>(y)];
    }
    return w;
}

Var weighted_nll_sum(Var logits, std::span<const int> labels, std::span<const double> class_weights) {
    const Matrix& z = logits.value();
    if (static_cast<Eigen::Index>(labels.size()) != z.rows())
        throw PreconditionError("weighted_nll_sum: one label per row required");
    double loss = 0.0;
    Matrix grad = Matrix::Zero(z.rows(), z.cols());
    const Matrix p = softmax_rows(z);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0) continue;
        if (y >= z.cols() || static_cast<std::size_t>(y) >= class_weights.size())
            throw PreconditionError("label out of range");
        const double w = class_weights[static_cast<std::size_t>(y)];
        const double mx = z.row(i).maxCoeff();
        const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
        loss += w * (lse - z(i, y));
        grad.row(i) = w * p.row(i);
        grad(i, y) -= w;
    }
    return logits.tape->record(Matrix::Constant(1, 1, loss), any_grad(logits),
                               [a = logits.id, grad = std::move(grad)](Tape& t, std::size_t self) {
                                   t.accumulate(a, grad * t.grad(self)(0, 0));
                               }, "cross_entropy");
}

Var weighted_cross_entropy(Var logits, std::span<const int> labels, std::span<const double> class_weights) {
    const double w = label_weight_sum(labels, class_weights);
    if (!(w > 0.0)) throw PreconditionError("weighted_cross_entropy: no labeled rows");
    return scale(weighted_nll_sum(logits, labels, class_weights), 1.0 / w);
}

}  // namespace portnet::ad
