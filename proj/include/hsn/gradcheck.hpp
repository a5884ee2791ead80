#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hsn/autodiff.hpp"
#include "hsn/fixtures.hpp"
#include "hsn/layers.hpp"
#include "hsn/model.hpp"
#include "hsn/scattering.hpp"

// Finite-difference checks of the reverse-mode gradients.

namespace hsn {

/// Builds the op under test from its differentiable inputs.
using GradFn = std::function<Var(Tape&, const std::vector<Var>&)>;

namespace detail {

/// Scalar probe: the op output contracted with fixed random weights.
inline double probe_value(const GradFn& f, const std::vector<Matrix>& inputs, const Matrix& weights) {
    Tape t;
    std::vector<Var> vars;
    for (const auto& m : inputs) vars.push_back(t.constant(m));
    const Matrix& out = f(t, vars).value();
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += weights.data()[i] * out.data()[i];
    return s;
}

}  // namespace detail

/// Relative error ||g_analytic - g_numeric|| / max(||g_analytic||, ||g_numeric||)
/// over all inputs, with central differences of step h. The norms are taken
/// over the concatenation of every input gradient; a floor of 1e-7 keeps the
/// ratio meaningful when the gradient itself vanishes.
inline double gradient_error(const GradFn& f, std::vector<Matrix> inputs, std::mt19937_64& rng, double h = 1e-5) {
    std::vector<ParamTensor> params;
    params.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) params.emplace_back("input" + std::to_string(i), inputs[i]);

    Tape t;
    std::vector<Var> vars;
    for (auto& p : params) vars.push_back(t.param(p));
    Var out = f(t, vars);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix weights(out.value().rows(), out.value().cols());
    for (double& w : weights.data()) w = normal(rng);
    t.backward(ad::weighted_sum(out, weights));

    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            const double orig = inputs[i].data()[j];
            inputs[i].data()[j] = orig + h;
            const double up = detail::probe_value(f, inputs, weights);
            inputs[i].data()[j] = orig - h;
            const double down = detail::probe_value(f, inputs, weights);
            inputs[i].data()[j] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = params[i].grad().data()[j];
            diff2 += (analytic - numeric) * (analytic - numeric);
            a2 += analytic * analytic;
            n2 += numeric * numeric;
        }
    }
    return std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-7});
}

struct GradCheckCase {
    std::string op;
    std::size_t instances = 0;
    double max_error = 0.0;
};

namespace detail {

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(r, c);
    for (double& x : m.data()) x = normal(rng);
    return m;
}

/// One op family: `make` draws a random instance (graph, op closure, inputs).
struct GradOp {
    std::string name;
    std::function<void(std::mt19937_64&, Graph&, GradFn&, std::vector<Matrix>&)> make;
};

inline std::vector<GradOp> gradient_ops() {
    using Inputs = std::vector<Matrix>;
    std::vector<GradOp> ops;
    auto graph = [](std::mt19937_64& rng) {
        std::uniform_int_distribution<std::size_t> size(5, 8);
        return fixtures::random_connected_graph(size(rng), 0.3, rng);
    };
    auto simple = [&](std::string name, std::function<void(std::mt19937_64&, GradFn&, Inputs&)> make) {
        ops.push_back({std::move(name), [make](std::mt19937_64& rng, Graph&, GradFn& f, Inputs& in) {
                           make(rng, f, in);
                       }});
    };

    simple("matmul", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 3, rng), random_matrix(3, 5, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::matmul(v[0], v[1]); };
    });
    simple("add", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 3, rng), random_matrix(4, 3, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::add(v[0], v[1]); };
    });
    simple("sub", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 3, rng), random_matrix(4, 3, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::sub(v[0], v[1]); };
    });
    simple("scale", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 3, rng)};
        const double s = std::normal_distribution<double>(0.0, 2.0)(rng);
        f = [s](Tape&, const std::vector<Var>& v) { return ad::scale(v[0], s); };
    });
    simple("add_bias", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(5, 3, rng), random_matrix(1, 3, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::add_bias(v[0], v[1]); };
    });
    const std::vector<std::pair<std::string, OperatorKind>> kinds{
        {"lazy_walk", OperatorKind::lazy_walk()},
        {"renorm_adjacency", OperatorKind::renorm_adjacency()},
        {"random_walk", OperatorKind::random_walk()},
        {"residual", OperatorKind::residual(0.35)},
        {"sym_norm_adjacency", OperatorKind::sym_norm_adjacency()},
    };
    for (const auto& [label, kind] : kinds) {
        ops.push_back({"graph_op:" + label, [kind, graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                           g = graph(rng);
                           in = {random_matrix(g.num_nodes(), 3, rng)};
                           const std::size_t power = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
                           const Graph* gp = &g;
                           f = [gp, kind, power](Tape&, const std::vector<Var>& v) {
                               return ad::graph_op(*gp, kind, power, v[0]);
                           };
                       }});
    }
    for (std::size_t k = 0; k <= 3; ++k) {
        ops.push_back({"wavelet:" + std::to_string(k), [k, graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                           g = graph(rng);
                           in = {random_matrix(g.num_nodes(), 2, rng)};
                           const Graph* gp = &g;
                           f = [gp, k](Tape&, const std::vector<Var>& v) {
                               return ad::wavelet(WaveletBank(*gp, 3), k, v[0]);
                           };
                       }});
    }
    const std::vector<Nonlinearity> sigmas{Nonlinearity::abs(), Nonlinearity::abs_pow(4.0), Nonlinearity::relu(),
                                           Nonlinearity::leaky_relu(0.2), Nonlinearity::identity()};
    for (const auto& s : sigmas) {
        simple("activation:" + s.name(), [s](auto& rng, GradFn& f, Inputs& in) {
            in = {random_matrix(5, 4, rng)};
            f = [s](Tape&, const std::vector<Var>& v) { return ad::activation(v[0], s); };
        });
    }
    simple("concat_cols", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 2, rng), random_matrix(4, 3, rng), random_matrix(4, 1, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::concat_cols(v); };
    });
    simple("slice_cols", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 6, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::slice_cols(v[0], 2, 3); };
    });
    simple("slice_rows", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(6, 3, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::slice_rows(v[0], 1, 4); };
    });
    simple("sum", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 3, rng), random_matrix(4, 3, rng), random_matrix(4, 3, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::sum(v); };
    });
    simple("row_softmax", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(5, 6, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::row_softmax(v[0]); };
    });
    simple("row_scale", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(5, 1, rng), random_matrix(5, 3, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::row_scale(v[0], v[1]); };
    });
    simple("squared_norm", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 3, rng)};
        f = [](Tape&, const std::vector<Var>& v) { return ad::squared_norm(v[0]); };
    });
    simple("weighted_sum", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(4, 3, rng)};
        const Matrix w = random_matrix(4, 3, rng);
        f = [w](Tape&, const std::vector<Var>& v) { return ad::weighted_sum(v[0], w); };
    });
    simple("masked_cross_entropy", [](auto& rng, GradFn& f, Inputs& in) {
        in = {random_matrix(8, 3, rng)};
        std::vector<int> labels(8);
        std::uniform_int_distribution<int> cls(0, 2);
        for (int& y : labels) y = cls(rng);
        const std::vector<Node> mask{0, 2, 3, 5, 7};
        f = [labels, mask](Tape&, const std::vector<Var>& v) {
            return ad::masked_cross_entropy(v[0], labels, mask);
        };
    });

    ops.push_back({"gcn_channel", [graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                       g = graph(rng);
                       in = {random_matrix(g.num_nodes(), 3, rng), random_matrix(3, 4, rng), random_matrix(1, 4, rng)};
                       const Graph* gp = &g;
                       f = [gp](Tape&, const std::vector<Var>& v) {
                           return ad::gcn_channel(*gp, 2, v[1], v[2], Nonlinearity::relu(), v[0]);
                       };
                   }});
    ops.push_back({"scatter_layer", [graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                       g = graph(rng);
                       in = {random_matrix(g.num_nodes(), 3, rng), random_matrix(3, 2, rng), random_matrix(1, 2, rng)};
                       const Graph* gp = &g;
                       f = [gp](Tape&, const std::vector<Var>& v) {
                           return ad::scatter_layer(WaveletBank(*gp, 3), ScatteringPath{1, 2}, v[1], v[2],
                                                    Nonlinearity::abs(), Nonlinearity::abs_pow(4.0), v[0]);
                       };
                   }});
    ops.push_back({"attention_head", [graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                       g = graph(rng);
                       in = {random_matrix(g.num_nodes(), 3, rng), random_matrix(3, 4, rng), random_matrix(8, 1, rng)};
                       const Graph* gp = &g;
                       f = [gp](Tape&, const std::vector<Var>& v) {
                           const auto cfg = HybridLayerConfig::gsan(1, 4);
                           return ad::attention_head(*gp, WaveletBank(*gp, 3), cfg, v[1], v[2], v[0]);
                       };
                   }});
    ops.push_back({"residual_conv", [graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                       g = graph(rng);
                       in = {random_matrix(g.num_nodes(), 3, rng), random_matrix(3, 2, rng), random_matrix(1, 2, rng)};
                       const double alpha = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
                       const Graph* gp = &g;
                       f = [gp, alpha](Tape&, const std::vector<Var>& v) {
                           return ad::residual_conv(*gp, alpha, v[1], v[2], v[0]);
                       };
                   }});
    // Whole hybrid layers: every parameter of a one-layer Sc-GCN and a two-head GSAN layer.
    ops.push_back({"sc_gcn_layer", [graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                       g = graph(rng);
                       const auto cfg = HybridLayerConfig::sc_gcn({1}, {3}, {2, 2, 2, 2, 1});
                       in = {random_matrix(g.num_nodes(), 3, rng)};
                       for (const auto* group : {&cfg.low, &cfg.band})
                           for (const auto& c : *group) in.push_back(random_matrix(3, c.width, rng) * 0.5);
                       for (const auto* group : {&cfg.low, &cfg.band})
                           for (const auto& c : *group) in.push_back(random_matrix(1, c.width, rng) * 0.1);
                       const Graph* gp = &g;
                       f = [gp, cfg](Tape&, const std::vector<Var>& v) {
                           const std::size_t c = cfg.num_channels();
                           std::vector<Var> theta(v.begin() + 1, v.begin() + 1 + static_cast<long>(c));
                           std::vector<Var> bias(v.begin() + 1 + static_cast<long>(c), v.end());
                           return ad::hybrid_forward_concat(*gp, WaveletBank(*gp, cfg.max_scale()), cfg, theta, bias,
                                                            v[0]);
                       };
                   }});
    ops.push_back({"gsan_layer", [graph](std::mt19937_64& rng, Graph& g, GradFn& f, Inputs& in) {
                       g = graph(rng);
                       const auto cfg = HybridLayerConfig::gsan(2, 3);
                       in = {random_matrix(g.num_nodes(), 3, rng)};
                       for (std::size_t h = 0; h < 2; ++h) in.push_back(random_matrix(3, 3, rng));
                       for (std::size_t h = 0; h < 2; ++h) in.push_back(random_matrix(6, 1, rng));
                       const Graph* gp = &g;
                       f = [gp, cfg](Tape&, const std::vector<Var>& v) {
                           return ad::gsan_layer(*gp, WaveletBank(*gp, cfg.max_scale()), cfg, {v[1], v[2]},
                                                 {v[3], v[4]}, v[0]);
                       };
                   }});
    return ops;
}

}  // namespace detail

/// Runs every differentiable op on `instances` random draws each.
inline std::vector<GradCheckCase> gradient_suite(std::size_t instances = 20, std::uint64_t seed = 0,
                                                 double h = 1e-5) {
    std::mt19937_64 rng(seed);
    std::vector<GradCheckCase> out;
    for (const auto& op : detail::gradient_ops()) {
        GradCheckCase c;
        c.op = op.name;
        for (std::size_t i = 0; i < instances; ++i) {
            Graph g;
            GradFn f;
            std::vector<Matrix> inputs;
            op.make(rng, g, f, inputs);
            c.max_error = std::max(c.max_error, gradient_error(f, inputs, rng, h));
            ++c.instances;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace hsn
