#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hsn/autodiff.hpp"
#include "hsn/graph.hpp"
#include "hsn/layers.hpp"
#include "hsn/wavelets.hpp"

namespace hsn {

/// A node classifier: maps (graph, features) to n x classes logits on a tape.
class Model {
public:
    virtual ~Model() = default;

    /// Records the forward pass. When `state` is given, attention models fill it.
    virtual Var forward(Tape& tape, const Graph& g, const FeatureMatrix& x, AttentionState* state = nullptr) = 0;
    virtual std::vector<ParamTensor*> parameters() = 0;
    virtual std::string name() const = 0;

    /// Logits without recording gradients.
    Matrix predict(const Graph& g, const FeatureMatrix& x, AttentionState* state = nullptr) {
        Tape tape;
        return forward(tape, g, x, state).value();
    }

    std::vector<Matrix> snapshot() {
        std::vector<Matrix> out;
        for (auto* p : parameters()) out.push_back(p->value());
        return out;
    }
    void restore(const std::vector<Matrix>& values) {
        auto ps = parameters();
        if (ps.size() != values.size()) throw DimensionMismatch("Model::restore: parameter count mismatch");
        for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value() = values[i];
    }
};

/// Two-layer GCN: A ReLU(A X Theta_1 + B_1) Theta_2 + B_2.
class GcnModel final : public Model {
public:
    GcnModel(std::size_t d_in, std::size_t hidden, std::size_t classes, std::mt19937_64& rng)
        : theta1_("gcn_theta1", glorot_uniform(d_in, hidden, rng)),
          bias1_("gcn_bias1", Matrix(1, hidden)),
          theta2_("gcn_theta2", glorot_uniform(hidden, classes, rng)),
          bias2_("gcn_bias2", Matrix(1, classes)) {}

    Var forward(Tape& t, const Graph& g, const FeatureMatrix& x, AttentionState* = nullptr) override {
        Var h = ad::gcn_channel(g, 1, t.param(theta1_), t.param(bias1_), Nonlinearity::relu(), t.constant(x));
        return ad::gcn_channel(g, 1, t.param(theta2_), t.param(bias2_), Nonlinearity::identity(), h);
    }
    std::vector<ParamTensor*> parameters() override { return {&theta1_, &bias1_, &theta2_, &bias2_}; }
    std::string name() const override { return "gcn-baseline"; }

private:
    ParamTensor theta1_, bias1_, theta2_, bias2_;
};

/// One hybrid layer (concatenation or attention) followed by the graph
/// residual convolution A_res(alpha) H Theta_res + B_res producing the logits.
class HybridModel final : public Model {
public:
    HybridModel(HybridLayerConfig cfg, double alpha, std::size_t d_in, std::size_t classes, std::mt19937_64& rng,
                std::string name)
        : cfg_(std::move(cfg)),
          alpha_(alpha),
          params_(HybridLayerParams::init(cfg_, d_in, rng)),
          theta_res_("res_theta", glorot_uniform(cfg_.output_width(), classes, rng)),
          bias_res_("res_bias", Matrix(1, classes)),
          name_(std::move(name)) {
        if (!(alpha >= 0.0)) throw InvalidArgument("residual alpha must be >= 0");
    }

    Var forward(Tape& t, const Graph& g, const FeatureMatrix& x, AttentionState* state = nullptr) override {
        WaveletBank bank(g, cfg_.max_scale());
        Var xv = t.constant(x);
        std::vector<Var> theta, second;
        for (auto& p : params_.theta) theta.push_back(t.param(p));
        Var h;
        if (cfg_.aggregation == HybridLayerConfig::Aggregation::Concat) {
            for (auto& p : params_.bias) second.push_back(t.param(p));
            h = ad::hybrid_forward_concat(g, bank, cfg_, theta, second, xv);
        } else {
            for (auto& p : params_.attention) second.push_back(t.param(p));
            h = ad::gsan_layer(g, bank, cfg_, theta, second, xv, state);
        }
        return ad::residual_conv(g, alpha_, t.param(theta_res_), t.param(bias_res_), h);
    }

    std::vector<ParamTensor*> parameters() override {
        auto ps = params_.all();
        ps.push_back(&theta_res_);
        ps.push_back(&bias_res_);
        return ps;
    }
    std::string name() const override { return name_; }

    const HybridLayerConfig& config() const noexcept { return cfg_; }
    double alpha() const noexcept { return alpha_; }
    HybridLayerParams& layer_params() noexcept { return params_; }

private:
    HybridLayerConfig cfg_;
    double alpha_;
    HybridLayerParams params_;
    ParamTensor theta_res_, bias_res_;
    std::string name_;
};

/// Logistic regression on fixed features: F Theta + B. Convex in its parameters.
class LinearHead final : public Model {
public:
    LinearHead(std::size_t d_in, std::size_t classes, std::mt19937_64& rng)
        : theta_("head_theta", glorot_uniform(d_in, classes, rng)), bias_("head_bias", Matrix(1, classes)) {}

    Var forward(Tape& t, const Graph&, const FeatureMatrix& x, AttentionState* = nullptr) override {
        return ad::add_bias(ad::matmul(t.constant(x), t.param(theta_)), t.param(bias_));
    }
    std::vector<ParamTensor*> parameters() override { return {&theta_, &bias_}; }
    std::string name() const override { return "linear-head"; }

private:
    ParamTensor theta_, bias_;
};

enum class Preset { GcnBaseline, ScGcn, Gsan };

inline std::string preset_name(Preset p) {
    switch (p) {
        case Preset::GcnBaseline: return "gcn-baseline";
        case Preset::ScGcn: return "sc-gcn";
        case Preset::Gsan: return "gsan";
    }
    return "?";
}

inline Preset parse_preset(const std::string& s) {
    if (s == "gcn-baseline" || s == "gcn") return Preset::GcnBaseline;
    if (s == "sc-gcn" || s == "scgcn") return Preset::ScGcn;
    if (s == "gsan") return Preset::Gsan;
    throw ParseError("unknown model preset '" + s + "' (expected gcn-baseline, sc-gcn or gsan)");
}

/// Architecture settings shared by the presets.
struct ModelConfig {
    Preset preset = Preset::GcnBaseline;
    std::size_t hidden = 16;                         ///< GCN hidden width
    double alpha = 0.35;                             ///< residual convolution strength (hybrid presets)
    std::vector<std::size_t> low_powers{1, 2, 3};    ///< r of each low-pass channel
    std::vector<ScatteringPath> band_paths{{1}, {3}};  ///< p of each band-pass channel
    std::vector<std::size_t> widths{10, 10, 10, 11, 6};  ///< Sc-GCN channel widths, low then band
    double q = 4.0;                                  ///< Sc-GCN band-pass moment exponent
    std::size_t heads = 4;                           ///< GSAN heads
    std::size_t head_width = 16;                     ///< GSAN per-head width

    static ModelConfig defaults(Preset p) {
        ModelConfig c;
        c.preset = p;
        if (p == Preset::Gsan) {
            c.alpha = 0.1;
            c.band_paths = {{1}, {2}, {3}};
        }
        return c;
    }

    HybridLayerConfig layer_config() const {
        HybridLayerConfig cfg;
        if (preset == Preset::ScGcn) {
            if (widths.size() != low_powers.size() + band_paths.size()) {
                throw InvalidArgument("sc-gcn: expected " + std::to_string(low_powers.size() + band_paths.size()) +
                                      " channel widths, got " + std::to_string(widths.size()));
            }
            std::size_t i = 0;
            for (auto r : low_powers) cfg.low.push_back(ChannelSpec::low(r, widths[i++]));
            for (const auto& p : band_paths) cfg.band.push_back(ChannelSpec::band(p, widths[i++], q));
        } else {
            for (auto r : low_powers) cfg.low.push_back(ChannelSpec::low(r, head_width));
            for (const auto& p : band_paths) cfg.band.push_back(ChannelSpec::band(p, head_width));
            cfg.aggregation = HybridLayerConfig::Aggregation::Attention;
            cfg.heads = heads;
            cfg.head_width = head_width;
            cfg.shared_weights = true;
        }
        cfg.validate();
        return cfg;
    }
};

inline std::unique_ptr<Model> make_model(const ModelConfig& c, std::size_t d_in, std::size_t classes,
                                         std::mt19937_64& rng) {
    if (c.preset == Preset::GcnBaseline) return std::make_unique<GcnModel>(d_in, c.hidden, classes, rng);
    return std::make_unique<HybridModel>(c.layer_config(), c.alpha, d_in, classes, rng, preset_name(c.preset));
}

}  // namespace hsn
