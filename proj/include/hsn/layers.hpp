#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hsn/autodiff.hpp"
#include "hsn/graph.hpp"
#include "hsn/scattering.hpp"
#include "hsn/wavelets.hpp"

namespace hsn {

/// One channel of a hybrid layer: a low-pass A^r channel or a band-pass
/// scattering channel U_p.
struct ChannelSpec {
    enum class Kind { LowPass, BandPass };

    Kind kind = Kind::LowPass;
    std::size_t r = 1;        ///< power of A (LowPass)
    ScatteringPath path;      ///< wavelet cascade (BandPass)
    std::size_t width = 1;    ///< output width d_out
    Nonlinearity sigma = Nonlinearity::relu();
    double q = 1.0;           ///< outer |.|^q exponent for band-pass channels

    static ChannelSpec low(std::size_t r, std::size_t width, Nonlinearity sigma = Nonlinearity::relu()) {
        if (r < 1) throw InvalidArgument("LowPass channel requires r >= 1");
        if (width < 1) throw InvalidArgument("channel width must be >= 1");
        return {Kind::LowPass, r, {}, width, sigma, 1.0};
    }
    static ChannelSpec band(ScatteringPath p, std::size_t width, double q = 1.0,
                            Nonlinearity sigma = Nonlinearity::abs()) {
        if (width < 1) throw InvalidArgument("channel width must be >= 1");
        if (!(q >= 1.0)) throw InvalidArgument("band-pass moment exponent q must be >= 1");
        return {Kind::BandPass, 0, std::move(p), width, sigma, q};
    }

    /// The activation applied after the bias: sigma, raised to the q-th power
    /// for absolute-value band-pass channels.
    Nonlinearity outer_activation() const {
        if (kind == Kind::BandPass && q != 1.0 &&
            (sigma.kind == Nonlinearity::Kind::AbsVal || sigma.kind == Nonlinearity::Kind::AbsValPow)) {
            return Nonlinearity::abs_pow(q);
        }
        return sigma;
    }

    std::string label() const {
        return kind == Kind::LowPass ? "A^" + std::to_string(r) : "U" + path.to_string();
    }
};

struct HybridLayerConfig {
    enum class Aggregation { Concat, Attention };

    std::vector<ChannelSpec> low;
    std::vector<ChannelSpec> band;
    Aggregation aggregation = Aggregation::Concat;
    std::size_t heads = 1;           ///< Gamma, attention only
    std::size_t head_width = 16;     ///< d' per head, attention only
    bool shared_weights = false;     ///< required (true) for attention
    Nonlinearity cascade_sigma = Nonlinearity::abs();  ///< between wavelets inside U_p
    double attention_slope = 0.2;    ///< LeakyReLU slope of the attention scores

    std::size_t num_channels() const noexcept { return low.size() + band.size(); }

    std::size_t max_scale() const noexcept {
        std::size_t m = 0;
        for (const auto& c : band) m = std::max(m, c.path.max_scale());
        return m;
    }

    std::size_t output_width() const noexcept {
        if (aggregation == Aggregation::Attention) return heads * head_width;
        std::size_t w = 0;
        for (const auto& c : low) w += c.width;
        for (const auto& c : band) w += c.width;
        return w;
    }

    void validate() const {
        for (const auto& c : low)
            if (c.kind != ChannelSpec::Kind::LowPass || c.r < 1) throw InvalidArgument("invalid low-pass channel");
        for (const auto& c : band)
            if (c.kind != ChannelSpec::Kind::BandPass) throw InvalidArgument("invalid band-pass channel");
        if (num_channels() == 0) throw InvalidArgument("hybrid layer needs at least one channel");
        if (aggregation == Aggregation::Attention) {
            if (!shared_weights) throw InvalidArgument("attention aggregation requires shared weights");
            if (heads < 1 || head_width < 1) throw InvalidArgument("attention needs heads >= 1 and width >= 1");
        }
    }

    /// Three low-pass channels A, A^2, A^3 and two band-pass channels, as in Sc-GCN.
    static HybridLayerConfig sc_gcn(ScatteringPath p1 = {1}, ScatteringPath p2 = {3},
                                    std::vector<std::size_t> widths = {10, 10, 10, 11, 6}, double q = 4.0) {
        if (widths.size() != 5) throw InvalidArgument("sc_gcn preset needs five channel widths");
        HybridLayerConfig cfg;
        for (std::size_t r = 1; r <= 3; ++r) cfg.low.push_back(ChannelSpec::low(r, widths[r - 1]));
        cfg.band.push_back(ChannelSpec::band(std::move(p1), widths[3], q));
        cfg.band.push_back(ChannelSpec::band(std::move(p2), widths[4], q));
        return cfg;
    }

    /// C_low = C_band = 3 with A, A^2, A^3 and Psi_1, Psi_2, Psi_3, shared per-head weights.
    static HybridLayerConfig gsan(std::size_t heads, std::size_t head_width) {
        HybridLayerConfig cfg;
        for (std::size_t r = 1; r <= 3; ++r) cfg.low.push_back(ChannelSpec::low(r, head_width));
        for (std::size_t k = 1; k <= 3; ++k) cfg.band.push_back(ChannelSpec::band({k}, head_width));
        cfg.aggregation = Aggregation::Attention;
        cfg.heads = heads;
        cfg.head_width = head_width;
        cfg.shared_weights = true;
        return cfg;
    }
};

/// Glorot-uniform initialization on +-sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = dist(rng);
    return m;
}

/// Trainable parameters of one hybrid layer. Concat layers hold one
/// (Theta, B) pair per channel, low channels first. Attention layers hold one
/// (Theta, a) pair per head.
struct HybridLayerParams {
    std::vector<ParamTensor> theta;
    std::vector<ParamTensor> bias;
    std::vector<ParamTensor> attention;

    static HybridLayerParams init(const HybridLayerConfig& cfg, std::size_t d_in, std::mt19937_64& rng) {
        cfg.validate();
        HybridLayerParams p;
        if (cfg.aggregation == HybridLayerConfig::Aggregation::Concat) {
            std::size_t i = 0;
            for (const auto* group : {&cfg.low, &cfg.band}) {
                for (const auto& c : *group) {
                    p.theta.emplace_back("theta_" + std::to_string(i), glorot_uniform(d_in, c.width, rng));
                    p.bias.emplace_back("bias_" + std::to_string(i), Matrix(1, c.width));
                    ++i;
                }
            }
        } else {
            for (std::size_t h = 0; h < cfg.heads; ++h) {
                p.theta.emplace_back("head_theta_" + std::to_string(h), glorot_uniform(d_in, cfg.head_width, rng));
                p.attention.emplace_back("head_attn_" + std::to_string(h),
                                         glorot_uniform(2 * cfg.head_width, 1, rng));
            }
        }
        return p;
    }

    std::vector<ParamTensor*> all() {
        std::vector<ParamTensor*> out;
        for (auto& t : theta) out.push_back(&t);
        for (auto& b : bias) out.push_back(&b);
        for (auto& a : attention) out.push_back(&a);
        return out;
    }
};

/// Attention weights of one head: column j of `alpha` is the weight of filter
/// j at every node (low-pass filters first, then band-pass).
struct AttentionHeadState {
    Matrix scores;  ///< e, n x C
    Matrix alpha;   ///< softmax(e) across the C filters of each node
    std::size_t c_low = 0;
    std::size_t c_band = 0;
};

struct AttentionState {
    std::vector<AttentionHeadState> heads;
};

namespace ad {

/// sigma(A^r X Theta + B).
inline Var gcn_channel(const Graph& g, std::size_t r, Var theta, Var bias, Nonlinearity sigma, Var x) {
    if (r < 1) throw InvalidArgument("gcn_channel: r must be >= 1");
    if (x.value().cols() != theta.value().rows()) throw DimensionMismatch("gcn_channel: X / Theta mismatch");
    Var h = graph_op(g, OperatorKind::renorm_adjacency(), r, matmul(x, theta));
    return activation(add_bias(h, bias), sigma);
}

/// Concatenation aggregation [X_low,1 | ... | X_low,Cl | X_band,1 | ... | X_band,Cb].
inline Var hybrid_forward_concat(const Graph& g, const WaveletBank& bank, const HybridLayerConfig& cfg,
                                 const std::vector<Var>& theta, const std::vector<Var>& bias, Var x) {
    if (cfg.aggregation != HybridLayerConfig::Aggregation::Concat) {
        throw InvalidArgument("hybrid_forward_concat: config does not use concatenation");
    }
    if (theta.size() != cfg.num_channels() || bias.size() != cfg.num_channels()) {
        throw DimensionMismatch("hybrid_forward_concat: one (Theta, B) pair per channel expected");
    }
    std::vector<Var> blocks;
    std::size_t i = 0;
    for (const auto& c : cfg.low) {
        blocks.push_back(gcn_channel(g, c.r, theta[i], bias[i], c.sigma, x));
        ++i;
    }
    for (const auto& c : cfg.band) {
        blocks.push_back(scatter_layer(bank, c.path, theta[i], bias[i], cfg.cascade_sigma, c.outer_activation(), x));
        ++i;
    }
    return concat_cols(blocks);
}

/// One attention head: shared X_bar = X Theta, filter responses A^r X_bar and
/// |U_p X_bar|, scores LeakyReLU([X_bar | X_f] a), softmax across all filters
/// of a node, output C^-1 ReLU(sum_f alpha_f * X_f).
inline Var attention_head(const Graph& g, const WaveletBank& bank, const HybridLayerConfig& cfg, Var theta, Var a,
                          Var x, AttentionHeadState* state = nullptr) {
    const std::size_t dprime = theta.value().cols();
    if (x.value().cols() != theta.value().rows()) throw DimensionMismatch("attention_head: X / Theta mismatch");
    if (a.value().rows() != 2 * dprime || a.value().cols() != 1) {
        throw DimensionMismatch("attention_head: attention vector must be 2d' x 1");
    }
    Var xbar = matmul(x, theta);
    std::vector<Var> responses;
    for (const auto& c : cfg.low) responses.push_back(graph_op(g, OperatorKind::renorm_adjacency(), c.r, xbar));
    for (const auto& c : cfg.band)
        responses.push_back(activation(cascade(bank, c.path, cfg.cascade_sigma, xbar), Nonlinearity::abs()));

    Var a_self = slice_rows(a, 0, dprime);
    Var a_filter = slice_rows(a, dprime, dprime);
    Var self_score = matmul(xbar, a_self);
    std::vector<Var> scores;
    for (Var r : responses)
        scores.push_back(activation(add(self_score, matmul(r, a_filter)), Nonlinearity::leaky_relu(cfg.attention_slope)));
    Var e = concat_cols(scores);
    Var alpha = row_softmax(e);

    std::vector<Var> weighted;
    for (std::size_t f = 0; f < responses.size(); ++f) weighted.push_back(row_scale(slice_cols(alpha, f, 1), responses[f]));
    Var out = scale(activation(sum(weighted), Nonlinearity::relu()), 1.0 / static_cast<double>(responses.size()));

    if (state) {
        state->scores = e.value();
        state->alpha = alpha.value();
        state->c_low = cfg.low.size();
        state->c_band = cfg.band.size();
    }
    return out;
}

/// Horizontal concatenation of Gamma attention heads.
inline Var gsan_layer(const Graph& g, const WaveletBank& bank, const HybridLayerConfig& cfg,
                      const std::vector<Var>& theta, const std::vector<Var>& a, Var x,
                      AttentionState* state = nullptr) {
    if (cfg.aggregation != HybridLayerConfig::Aggregation::Attention) {
        throw InvalidArgument("gsan_layer: config does not use attention");
    }
    if (theta.size() != cfg.heads || a.size() != cfg.heads) {
        throw DimensionMismatch("gsan_layer: one (Theta, a) pair per head expected");
    }
    std::vector<Var> heads;
    if (state) state->heads.assign(cfg.heads, {});
    for (std::size_t h = 0; h < cfg.heads; ++h)
        heads.push_back(attention_head(g, bank, cfg, theta[h], a[h], x, state ? &state->heads[h] : nullptr));
    return heads.size() == 1 ? heads.front() : concat_cols(heads);
}

/// A_res(alpha) X Theta_res + B_res with A_res(alpha) = (I + alpha W D^-1) / (alpha + 1).
inline Var residual_conv(const Graph& g, double alpha, Var theta, Var bias, Var x) {
    Var h = graph_op(g, OperatorKind::residual(alpha), 1, x);
    return add_bias(matmul(h, theta), bias);
}

}  // namespace ad

// ---------------------------------------------------------------------------
// Value-level entry points (no gradients recorded for the caller).

inline FeatureMatrix gcn_channel(const Graph& g, std::size_t r, const Matrix& theta, const Matrix& bias,
                                 Nonlinearity sigma, const FeatureMatrix& x) {
    Tape t;
    return ad::gcn_channel(g, r, t.constant(theta), t.constant(bias), sigma, t.constant(x)).value();
}

inline FeatureMatrix hybrid_forward_concat(const Graph& g, const HybridLayerConfig& cfg,
                                           const HybridLayerParams& params, const FeatureMatrix& x) {
    Tape t;
    WaveletBank bank(g, cfg.max_scale());
    std::vector<Var> theta, bias;
    for (const auto& p : params.theta) theta.push_back(t.constant(p.value()));
    for (const auto& p : params.bias) bias.push_back(t.constant(p.value()));
    return ad::hybrid_forward_concat(g, bank, cfg, theta, bias, t.constant(x)).value();
}

inline FeatureMatrix attention_head(const Graph& g, const HybridLayerConfig& cfg, const Matrix& theta,
                                    const Matrix& a, const FeatureMatrix& x, AttentionHeadState* state = nullptr) {
    Tape t;
    WaveletBank bank(g, cfg.max_scale());
    return ad::attention_head(g, bank, cfg, t.constant(theta), t.constant(a), t.constant(x), state).value();
}

inline FeatureMatrix gsan_layer(const Graph& g, const HybridLayerConfig& cfg, const HybridLayerParams& params,
                                const FeatureMatrix& x, AttentionState* state = nullptr) {
    Tape t;
    WaveletBank bank(g, cfg.max_scale());
    std::vector<Var> theta, a;
    for (const auto& p : params.theta) theta.push_back(t.constant(p.value()));
    for (const auto& p : params.attention) a.push_back(t.constant(p.value()));
    return ad::gsan_layer(g, bank, cfg, theta, a, t.constant(x), state).value();
}

inline FeatureMatrix residual_conv(const Graph& g, double alpha, const Matrix& theta, const Matrix& bias,
                                   const FeatureMatrix& x) {
    Tape t;
    return ad::residual_conv(g, alpha, t.constant(theta), t.constant(bias), t.constant(x)).value();
}

// ---------------------------------------------------------------------------
// Band-pass / low-pass attention ratios

struct AttentionRatios {
    std::vector<double> ratio;  ///< zeta_v; NaN where the low-pass attention is zero
    std::vector<Node> skipped;  ///< nodes with zero low-pass attention
};

/// zeta_v = alpha_band[v] / alpha_low[v], each summed over all heads and channels.
inline AttentionRatios attention_ratio(const AttentionState& state) {
    AttentionRatios out;
    if (state.heads.empty()) return out;
    const std::size_t n = state.heads.front().alpha.rows();
    std::vector<double> low(n, 0.0), band(n, 0.0);
    for (const auto& h : state.heads) {
        if (h.alpha.rows() != n || h.alpha.cols() != h.c_low + h.c_band) {
            throw DimensionMismatch("attention_ratio: inconsistent head state");
        }
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t j = 0; j < h.c_low; ++j) low[v] += h.alpha(v, j);
            for (std::size_t j = 0; j < h.c_band; ++j) band[v] += h.alpha(v, h.c_low + j);
        }
    }
    out.ratio.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (low[v] > 0.0) {
            out.ratio[v] = band[v] / low[v];
        } else {
            out.ratio[v] = std::numeric_limits<double>::quiet_NaN();
            out.skipped.push_back(v);
        }
    }
    return out;
}

/// CSV "node,ratio" with one row per node that has a defined ratio.
inline void write_attention_ratios_csv(std::ostream& out, const AttentionRatios& r) {
    out << "node,ratio\n";
    out.precision(17);
    for (std::size_t v = 0; v < r.ratio.size(); ++v)
        if (std::isfinite(r.ratio[v])) out << v << ',' << r.ratio[v] << '\n';
}

}  // namespace hsn
