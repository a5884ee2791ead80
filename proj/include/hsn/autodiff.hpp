#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hsn/graph.hpp"
#include "hsn/matrix.hpp"
#include "hsn/nonlinearity.hpp"
#include "hsn/wavelets.hpp"

// Minimal reverse-mode differentiation over dense matrices. A Tape records
// every operation of one forward pass; Tape::backward walks it once in
// reverse and accumulates gradients into the ParamTensors that were used.

namespace hsn {

/// Trainable array with an accumulated gradient of the same shape.
class ParamTensor {
public:
    ParamTensor() : id_(next_id()) {}
    ParamTensor(std::string name, Matrix init)
        : name_(std::move(name)), value_(std::move(init)), grad_(value_.rows(), value_.cols()), id_(next_id()) {}

    const std::string& name() const noexcept { return name_; }
    std::size_t id() const noexcept { return id_; }

    Matrix& value() noexcept { return value_; }
    const Matrix& value() const noexcept { return value_; }
    Matrix& grad() noexcept { return grad_; }
    const Matrix& grad() const noexcept { return grad_; }

    std::size_t rows() const noexcept { return value_.rows(); }
    std::size_t cols() const noexcept { return value_.cols(); }

    void zero_grad() { grad_ = Matrix(value_.rows(), value_.cols()); }

private:
    static std::size_t next_id() {
        static std::atomic<std::size_t> counter{0};
        return counter++;
    }

    std::string name_;
    Matrix value_;
    Matrix grad_;
    std::size_t id_;
};

class Tape;

/// Handle to a recorded value.
struct Var {
    Tape* tape = nullptr;
    std::size_t index = 0;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix m) {
        nodes_.push_back(Node{std::move(m), {}, nullptr, nullptr, false});
        return {this, nodes_.size() - 1};
    }

    Var param(ParamTensor& p) {
        nodes_.push_back(Node{p.value(), {}, nullptr, &p, true});
        return {this, nodes_.size() - 1};
    }

    /// Records an op result. The backward closure only runs when some parent
    /// requires a gradient.
    Var record(Matrix value, std::initializer_list<Var> parents, BackwardFn fn) {
        return record(std::move(value), std::vector<Var>(parents), std::move(fn));
    }
    Var record(Matrix value, const std::vector<Var>& parents, BackwardFn fn) {
        bool needs = false;
        for (const Var& p : parents) {
            if (p.tape != this) throw InvalidArgument("Tape: operands recorded on different tapes");
            needs = needs || nodes_[p.index].needs_grad;
        }
        nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : BackwardFn{}, nullptr, needs});
        return {this, nodes_.size() - 1};
    }

    const Matrix& value(std::size_t i) const { return nodes_.at(i).value; }
    const Matrix& value(Var v) const { return value(v.index); }
    bool needs_grad(Var v) const { return nodes_.at(v.index).needs_grad; }

    /// Gradient buffer of node i, allocated on first use.
    Matrix& grad(std::size_t i) {
        Node& n = nodes_.at(i);
        if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
        return n.grad;
    }

    /// Adds `g` into the gradient of `v` when `v` needs one.
    void accumulate(Var v, const Matrix& g) {
        if (!nodes_[v.index].needs_grad) return;
        grad(v.index) += g;
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    bool consumed() const noexcept { return consumed_; }

    /// Reverse sweep from a scalar (1x1) output. Parameter gradients are added
    /// to ParamTensor::grad(). A tape can be swept only once.
    void backward(Var output) {
        if (consumed_) throw TapeConsumed("Tape::backward called twice on the same tape");
        if (output.tape != this) throw InvalidArgument("Tape::backward: output belongs to another tape");
        const Matrix& out = value(output);
        if (out.rows() != 1 || out.cols() != 1) throw DimensionMismatch("Tape::backward: output must be 1x1");
        consumed_ = true;
        grad(output.index)(0, 0) += 1.0;
        for (std::size_t i = output.index + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (!n.needs_grad || n.grad.empty()) continue;
            if (n.backward) n.backward(*this, i);
            if (n.param) n.param->grad() += n.grad;
        }
    }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        BackwardFn backward;
        ParamTensor* param = nullptr;
        bool needs_grad = false;
    };
    std::deque<Node> nodes_;
    bool consumed_ = false;
};

inline const Matrix& Var::value() const { return tape->value(index); }

namespace ad {

inline Var matmul(Var a, Var b) {
    Tape& t = *a.tape;
    return t.record(hsn::matmul(a.value(), b.value()), {a, b}, [a, b](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(a)) t.accumulate(a, matmul_nt(g, b.value()));
        if (t.needs_grad(b)) t.accumulate(b, matmul_tn(a.value(), g));
    });
}

inline Var add(Var a, Var b) {
    Tape& t = *a.tape;
    return t.record(a.value() + b.value(), {a, b}, [a, b](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

inline Var sub(Var a, Var b) {
    Tape& t = *a.tape;
    return t.record(a.value() - b.value(), {a, b}, [a, b](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.accumulate(a, g);
        t.accumulate(b, g * -1.0);
    });
}

inline Var scale(Var a, double s) {
    Tape& t = *a.tape;
    return t.record(a.value() * s, {a}, [a, s](Tape& t, std::size_t self) { t.accumulate(a, t.grad(self) * s); });
}

/// x + 1 b, with b a 1 x d row broadcast over all rows.
inline Var add_bias(Var x, Var b) {
    Tape& t = *x.tape;
    const Matrix& xv = x.value();
    const Matrix& bv = b.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols()) throw DimensionMismatch("add_bias: bias must be 1 x cols");
    Matrix out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
    return t.record(std::move(out), {x, b}, [x, b](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        t.accumulate(x, g);
        if (t.needs_grad(b)) t.accumulate(b, column_sums(g));
    });
}

/// op^power applied to x for a fixed graph operator.
inline Var graph_op(const Graph& g, OperatorKind kind, std::size_t power, Var x) {
    Tape& t = *x.tape;
    const Graph* gp = &g;
    return t.record(operator_power_apply(g, kind, power, x.value()), {x},
                    [gp, kind, power, x](Tape& t, std::size_t self) {
                        t.accumulate(x, operator_power_apply_transpose(*gp, kind, power, t.grad(self)));
                    });
}

inline Var wavelet(const WaveletBank& bank, std::size_t k, Var x) {
    Tape& t = *x.tape;
    // The bank is a small handle; copy it so the tape may outlive the caller's bank.
    return t.record(wavelet_apply(bank, k, x.value()), {x}, [bank, k, x](Tape& t, std::size_t self) {
        t.accumulate(x, wavelet_apply_transpose(bank, k, t.grad(self)));
    });
}

inline Var activation(Var x, Nonlinearity sigma) {
    Tape& t = *x.tape;
    if (sigma.kind == Nonlinearity::Kind::Identity) return x;
    return t.record(sigma.apply(x.value()), {x}, [x, sigma](Tape& t, std::size_t self) {
        Matrix g = t.grad(self);
        const Matrix& xv = x.value();
        for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] *= sigma.derivative(xv.data()[i]);
        t.accumulate(x, g);
    });
}

inline Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw InvalidArgument("concat_cols: nothing to concatenate");
    Tape& t = *parts.front().tape;
    std::vector<Matrix> values;
    values.reserve(parts.size());
    for (const Var& p : parts) values.push_back(p.value());
    return t.record(hconcat(values), parts, [parts](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        std::size_t off = 0;
        for (const Var& p : parts) {
            const std::size_t w = p.value().cols();
            if (t.needs_grad(p)) {
                Matrix gp(g.rows(), w);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < w; ++c) gp(r, c) = g(r, off + c);
                t.accumulate(p, gp);
            }
            off += w;
        }
    });
}

inline Var slice_cols(Var x, std::size_t begin, std::size_t count) {
    Tape& t = *x.tape;
    const Matrix& xv = x.value();
    if (begin + count > xv.cols()) throw DimensionMismatch("slice_cols: range exceeds width");
    Matrix out(xv.rows(), count);
    for (std::size_t r = 0; r < xv.rows(); ++r)
        for (std::size_t c = 0; c < count; ++c) out(r, c) = xv(r, begin + c);
    return t.record(std::move(out), {x}, [x, begin, count](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        Matrix gx(x.value().rows(), x.value().cols());
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < count; ++c) gx(r, begin + c) = g(r, c);
        t.accumulate(x, gx);
    });
}

inline Var slice_rows(Var x, std::size_t begin, std::size_t count) {
    Tape& t = *x.tape;
    const Matrix& xv = x.value();
    if (begin + count > xv.rows()) throw DimensionMismatch("slice_rows: range exceeds height");
    Matrix out(count, xv.cols());
    for (std::size_t r = 0; r < count; ++r)
        for (std::size_t c = 0; c < xv.cols(); ++c) out(r, c) = xv(begin + r, c);
    return t.record(std::move(out), {x}, [x, begin, count](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        Matrix gx(x.value().rows(), x.value().cols());
        for (std::size_t r = 0; r < count; ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) gx(begin + r, c) = g(r, c);
        t.accumulate(x, gx);
    });
}

inline Var sum(const std::vector<Var>& parts) {
    if (parts.empty()) throw InvalidArgument("sum: empty operand list");
    Tape& t = *parts.front().tape;
    Matrix acc = parts.front().value();
    for (std::size_t i = 1; i < parts.size(); ++i) acc += parts[i].value();
    return t.record(std::move(acc), parts, [parts](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        for (const Var& p : parts) t.accumulate(p, g);
    });
}

/// Softmax along each row, with per-row max subtraction.
inline Var row_softmax(Var x) {
    Tape& t = *x.tape;
    const Matrix& xv = x.value();
    Matrix out(xv.rows(), xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        auto row = xv.row(r);
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : row) mx = std::max(mx, v);
        double z = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) z += (out(r, c) = std::exp(row[c] - mx));
        for (std::size_t c = 0; c < row.size(); ++c) out(r, c) /= z;
    }
    const std::size_t self_index = t.size();
    return t.record(std::move(out), {x}, [x, self_index](Tape& t, std::size_t self) {
        const Matrix& s = t.value(self_index);
        const Matrix& g = t.grad(self);
        Matrix gx(s.rows(), s.cols());
        for (std::size_t r = 0; r < s.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < s.cols(); ++c) dot += g(r, c) * s(r, c);
            for (std::size_t c = 0; c < s.cols(); ++c) gx(r, c) = s(r, c) * (g(r, c) - dot);
        }
        t.accumulate(x, gx);
    });
}

/// diag(alpha) x, where alpha is n x 1: every row of x is scaled by its node weight.
inline Var row_scale(Var alpha, Var x) {
    Tape& t = *x.tape;
    const Matrix& av = alpha.value();
    const Matrix& xv = x.value();
    if (av.cols() != 1 || av.rows() != xv.rows()) throw DimensionMismatch("row_scale: alpha must be n x 1");
    Matrix out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= av(r, 0);
    return t.record(std::move(out), {alpha, x}, [alpha, x](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        const Matrix& av = alpha.value();
        const Matrix& xv = x.value();
        if (t.needs_grad(alpha)) {
            Matrix ga(av.rows(), 1);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) ga(r, 0) += g(r, c) * xv(r, c);
            t.accumulate(alpha, ga);
        }
        if (t.needs_grad(x)) {
            Matrix gx = g;
            for (std::size_t r = 0; r < gx.rows(); ++r)
                for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) *= av(r, 0);
            t.accumulate(x, gx);
        }
    });
}

/// sum_ij w_ij x_ij as a 1x1 value.
inline Var weighted_sum(Var x, const Matrix& weights) {
    Tape& t = *x.tape;
    if (!weights.same_shape(x.value())) throw DimensionMismatch("weighted_sum: weight shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights.data()[i] * x.value().data()[i];
    return t.record(Matrix(1, 1, s), {x}, [x, weights](Tape& t, std::size_t self) {
        t.accumulate(x, weights * t.grad(self)(0, 0));
    });
}

/// ||x||_F^2 as a 1x1 value.
inline Var squared_norm(Var x) {
    Tape& t = *x.tape;
    double s = 0.0;
    for (double v : x.value().data()) s += v * v;
    return t.record(Matrix(1, 1, s), {x}, [x](Tape& t, std::size_t self) {
        t.accumulate(x, x.value() * (2.0 * t.grad(self)(0, 0)));
    });
}

/// Softmax cross-entropy of `logits` rows against `labels`, averaged over
/// the nodes in `mask`.
inline Var masked_cross_entropy(Var logits, std::span<const int> labels, std::span<const Node> mask) {
    Tape& t = *logits.tape;
    const Matrix& z = logits.value();
    if (mask.empty()) throw EmptyMask("masked_cross_entropy: empty mask");
    if (labels.size() != z.rows()) throw DimensionMismatch("masked_cross_entropy: label count != rows");
    Matrix probs(mask.size(), z.cols());
    double loss = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const Node v = mask[i];
        const int y = labels[v];
        if (y < 0 || static_cast<std::size_t>(y) >= z.cols()) {
            throw BadClassIds("masked_cross_entropy: label of node " + std::to_string(v) + " out of range");
        }
        auto row = z.row(v);
        double mx = -std::numeric_limits<double>::infinity();
        for (double x : row) mx = std::max(mx, x);
        double sum = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) sum += (probs(i, c) = std::exp(row[c] - mx));
        for (std::size_t c = 0; c < row.size(); ++c) probs(i, c) /= sum;
        loss += -(row[static_cast<std::size_t>(y)] - mx - std::log(sum));
    }
    loss /= static_cast<double>(mask.size());
    if (!std::isfinite(loss)) throw NonFiniteLoss("masked_cross_entropy: loss is not finite");
    std::vector<Node> m(mask.begin(), mask.end());
    std::vector<int> lab(labels.begin(), labels.end());
    return t.record(Matrix(1, 1, loss), {logits},
                    [logits, probs = std::move(probs), m = std::move(m), lab = std::move(lab)](Tape& t,
                                                                                             std::size_t self) {
                        const double scale = t.grad(self)(0, 0) / static_cast<double>(m.size());
                        Matrix g(logits.value().rows(), logits.value().cols());
                        for (std::size_t i = 0; i < m.size(); ++i) {
                            for (std::size_t c = 0; c < g.cols(); ++c) g(m[i], c) += scale * probs(i, c);
                            g(m[i], static_cast<std::size_t>(lab[m[i]])) -= scale;
                        }
                        t.accumulate(logits, g);
                    });
}

}  // namespace ad
}  // namespace hsn
