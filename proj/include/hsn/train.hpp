#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hsn/autodiff.hpp"
#include "hsn/model.hpp"

namespace hsn {

struct SplitMasks {
    std::vector<Node> train;
    std::vector<Node> val;
    std::vector<Node> test;

    /// Pairwise disjoint, in range, nonempty train and test.
    void validate(std::size_t n) const {
        if (train.empty()) throw EmptyMask("train mask is empty");
        if (test.empty()) throw EmptyMask("test mask is empty");
        std::vector<char> seen(n, 0);
        for (const auto* m : {&train, &val, &test}) {
            for (Node v : *m) {
                if (v >= n) throw InvalidArgument("split index " + std::to_string(v) + " out of range");
                if (seen[v]) throw InvalidArgument("split index " + std::to_string(v) + " appears twice");
                seen[v] = 1;
            }
        }
    }
};

struct TrainConfig {
    enum class Optimizer { SGD, Adam };

    double learning_rate = 1e-2;
    double weight_decay = 5e-4;
    std::size_t max_epochs = 200;
    std::size_t patience = 30;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (!(learning_rate >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
        if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be >= 0");
        if (max_epochs == 0) throw InvalidArgument("max_epochs must be >= 1");
        if (patience == 0) throw InvalidArgument("patience must be >= 1");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
            throw InvalidArgument("Adam betas must lie in [0, 1)");
        }
        if (!(epsilon > 0.0)) throw InvalidArgument("Adam epsilon must be > 0");
    }
};

inline TrainConfig::Optimizer parse_optimizer(const std::string& s) {
    if (s == "adam") return TrainConfig::Optimizer::Adam;
    if (s == "sgd") return TrainConfig::Optimizer::SGD;
    throw ParseError("unknown optimizer '" + s + "' (expected adam or sgd)");
}

/// Gradient step on a fixed parameter list. Weight decay is added to the
/// gradient (L2 regularization) before the update.
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, std::vector<ParamTensor*> params) : cfg_(cfg), params_(std::move(params)) {
        for (auto* p : params_) {
            m_.emplace_back(p->rows(), p->cols());
            v_.emplace_back(p->rows(), p->cols());
        }
    }

    void zero_grad() {
        for (auto* p : params_) p->zero_grad();
    }

    void step() {
        ++t_;
        const double lr = cfg_.learning_rate;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& w = params_[i]->value().data();
            const auto& g = params_[i]->grad().data();
            auto& m = m_[i].data();
            auto& v = v_[i].data();
            for (std::size_t j = 0; j < w.size(); ++j) {
                const double gj = g[j] + cfg_.weight_decay * w[j];
                if (cfg_.optimizer == TrainConfig::Optimizer::SGD) {
                    w[j] -= lr * gj;
                } else {
                    m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
                    v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
                    w[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.epsilon);
                }
            }
        }
    }

private:
    TrainConfig cfg_;
    std::vector<ParamTensor*> params_;
    std::vector<Matrix> m_, v_;
    std::size_t t_ = 0;
};

/// A recorded forward pass ending in the masked loss.
struct LossTape {
    std::unique_ptr<Tape> tape;
    Var logits;
    Var loss;
    double value = 0.0;
};

inline LossTape forward_loss(Model& model, const Graph& g, const FeatureMatrix& x, std::span<const int> labels,
                             std::span<const Node> mask) {
    if (mask.empty()) throw EmptyMask("forward_loss: empty mask");
    LossTape out;
    out.tape = std::make_unique<Tape>();
    out.logits = model.forward(*out.tape, g, x);
    out.loss = ad::masked_cross_entropy(out.logits, labels, mask);
    out.value = out.loss.value()(0, 0);
    return out;
}

/// Accumulates d loss / d parameter into every ParamTensor used by the pass.
inline void backward(LossTape& lt) { lt.tape->backward(lt.loss); }

/// Row argmax with ties broken toward the lowest class index.
inline std::vector<int> argmax_rows(const Matrix& logits) {
    std::vector<int> out(logits.rows(), 0);
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[best]) best = c;
        out[r] = static_cast<int>(best);
    }
    return out;
}

inline double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const Node> mask) {
    if (mask.empty()) throw EmptyMask("accuracy: empty mask");
    const auto pred = argmax_rows(logits);
    std::size_t hits = 0;
    for (Node v : mask) hits += pred.at(v) == labels[v] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(mask.size());
}

inline double evaluate(Model& model, const Graph& g, const FeatureMatrix& x, std::span<const int> labels,
                       std::span<const Node> mask) {
    if (mask.empty()) throw EmptyMask("evaluate: empty mask");
    return accuracy(model.predict(g, x), labels, mask);
}

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();
    double val_acc = std::numeric_limits<double>::quiet_NaN();
};

struct FitResult {
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
    bool stopped_early = false;
};

/// Full-batch training. Metrics of epoch e are measured before the e-th
/// update. Early stopping watches the validation loss (training loss when the
/// validation mask is empty); the parameters of the best epoch are restored.
inline FitResult fit(Model& model, const Graph& g, const FeatureMatrix& x, std::span<const int> labels,
                     const SplitMasks& masks, const TrainConfig& cfg) {
    cfg.validate();
    masks.validate(x.rows());
    Optimizer opt(cfg, model.parameters());
    FitResult result;
    double best = std::numeric_limits<double>::infinity();
    std::vector<Matrix> best_params = model.snapshot();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        opt.zero_grad();
        LossTape lt = forward_loss(model, g, x, labels, masks.train);
        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = lt.value;
        m.train_acc = accuracy(lt.logits.value(), labels, masks.train);
        double monitor = m.train_loss;
        if (!masks.val.empty()) {
            Tape scratch;
            Var l = ad::masked_cross_entropy(scratch.constant(lt.logits.value()), labels, masks.val);
            m.val_loss = l.value()(0, 0);
            m.val_acc = accuracy(lt.logits.value(), labels, masks.val);
            monitor = m.val_loss;
        }
        result.history.push_back(m);

        if (monitor < best) {
            best = monitor;
            best_params = model.snapshot();
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            result.stopped_early = true;
            break;
        }
        backward(lt);
        opt.step();
    }
    model.restore(best_params);
    return result;
}

inline void write_metrics_csv(std::ostream& out, const FitResult& r) {
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    out.precision(10);
    for (const auto& m : r.history)
        out << m.epoch << ',' << m.train_loss << ',' << m.train_acc << ',' << m.val_loss << ',' << m.val_acc << '\n';
}

}  // namespace hsn
