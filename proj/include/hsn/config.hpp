#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hsn/dataset.hpp"
#include "hsn/model.hpp"
#include "hsn/train.hpp"

// Experiment configuration: one "key = value" per line, '#' starts a comment.
//
//   dataset        = sbm | <directory with edges.tsv, features.csv, labels.csv, splits.json>
//   sbm.blocks     = 200,200          block sizes
//   sbm.p_in       = 0.1
//   sbm.p_out      = 0.01
//   sbm.feature_dim = 16
//   sbm.mean_scale = 1.0
//   sbm.noise      = 1.0
//   sbm.seed       = 0
//   sbm.split      = 5,1,1
//   model          = gcn-baseline | sc-gcn | gsan
//   model.hidden   = 16               GCN hidden width
//   model.alpha    = 0.35             residual convolution strength
//   model.low      = 1,2,3            powers r of the low-pass channels
//   model.band     = 1;3              band-pass paths, ';' between paths, ' ' or ',' within one
//   model.widths   = 10,10,10,11,6    Sc-GCN channel widths (low first)
//   model.q        = 4                Sc-GCN band-pass exponent
//   model.heads    = 4                GSAN heads
//   model.head_width = 16             GSAN width per head
//   train.optimizer = adam | sgd
//   train.lr, train.weight_decay, train.epochs, train.patience, train.seed
//   train.beta1, train.beta2, train.epsilon
//   output         = results          output directory

namespace hsn {

struct ExperimentConfig {
    std::string dataset = "sbm";
    SBMSpec sbm;
    ModelConfig model = ModelConfig::defaults(Preset::GcnBaseline);
    TrainConfig train;
    std::string output = "results";
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, sep)) out.push_back(trim(cell));
    return out;
}

inline double to_double(const std::string& v) {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
}

inline std::size_t to_size(const std::string& v) {
    if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, F&& conv, char sep = ',') {
    std::vector<T> out;
    for (const auto& cell : split(v, sep)) out.push_back(conv(cell));
    return out;
}

}  // namespace detail

/// Parses the configuration text. Errors carry the source name and line number.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    using namespace detail;
    ExperimentConfig cfg;
    std::map<std::string, std::string> raw;
    std::map<std::string, std::size_t> where;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        raw[key] = trim(line.substr(eq + 1));
        where[key] = lineno;
    }

    // The model preset decides the defaults the other model keys override.
    if (raw.count("model")) {
        try {
            cfg.model = ModelConfig::defaults(parse_preset(raw["model"]));
        } catch (const ParseError& e) {
            throw ParseError(source + ":" + std::to_string(where["model"]) + ": " + e.what());
        }
    }

    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"dataset", [&](const std::string& v) { cfg.dataset = v; }},
        {"output", [&](const std::string& v) { cfg.output = v; }},
        {"model", [&](const std::string&) {}},
        {"sbm.blocks", [&](const std::string& v) { cfg.sbm.block_sizes = to_list<std::size_t>(v, to_size); }},
        {"sbm.p_in", [&](const std::string& v) { cfg.sbm.p_in = to_double(v); }},
        {"sbm.p_out", [&](const std::string& v) { cfg.sbm.p_out = to_double(v); }},
        {"sbm.feature_dim", [&](const std::string& v) { cfg.sbm.feature_dim = to_size(v); }},
        {"sbm.mean_scale", [&](const std::string& v) { cfg.sbm.mean_scale = to_double(v); }},
        {"sbm.noise", [&](const std::string& v) { cfg.sbm.noise = to_double(v); }},
        {"sbm.seed", [&](const std::string& v) { cfg.sbm.seed = to_size(v); }},
        {"sbm.split", [&](const std::string& v) { cfg.sbm.split_ratio = to_list<double>(v, to_double); }},
        {"model.hidden", [&](const std::string& v) { cfg.model.hidden = to_size(v); }},
        {"model.alpha", [&](const std::string& v) { cfg.model.alpha = to_double(v); }},
        {"model.low", [&](const std::string& v) { cfg.model.low_powers = to_list<std::size_t>(v, to_size); }},
        {"model.band",
         [&](const std::string& v) {
             cfg.model.band_paths.clear();
             for (const auto& p : split(v, ';')) cfg.model.band_paths.push_back(parse_path(p));
         }},
        {"model.widths", [&](const std::string& v) { cfg.model.widths = to_list<std::size_t>(v, to_size); }},
        {"model.q", [&](const std::string& v) { cfg.model.q = to_double(v); }},
        {"model.heads", [&](const std::string& v) { cfg.model.heads = to_size(v); }},
        {"model.head_width", [&](const std::string& v) { cfg.model.head_width = to_size(v); }},
        {"train.optimizer", [&](const std::string& v) { cfg.train.optimizer = parse_optimizer(v); }},
        {"train.lr", [&](const std::string& v) { cfg.train.learning_rate = to_double(v); }},
        {"train.weight_decay", [&](const std::string& v) { cfg.train.weight_decay = to_double(v); }},
        {"train.epochs", [&](const std::string& v) { cfg.train.max_epochs = to_size(v); }},
        {"train.patience", [&](const std::string& v) { cfg.train.patience = to_size(v); }},
        {"train.seed", [&](const std::string& v) { cfg.train.seed = to_size(v); }},
        {"train.beta1", [&](const std::string& v) { cfg.train.beta1 = to_double(v); }},
        {"train.beta2", [&](const std::string& v) { cfg.train.beta2 = to_double(v); }},
        {"train.epsilon", [&](const std::string& v) { cfg.train.epsilon = to_double(v); }},
    };

    for (const auto& [key, value] : raw) {
        const std::string at = source + ":" + std::to_string(where[key]) + ": ";
        auto it = setters.find(key);
        if (it == setters.end()) throw ParseError(at + "unknown key '" + key + "'");
        try {
            it->second(value);
        } catch (const ParseError& e) {
            throw ParseError(at + "key '" + key + "': " + e.what());
        } catch (const std::exception&) {
            throw ParseError(at + "bad value '" + value + "' for key '" + key + "'");
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open config '" + path + "'");
    return parse_config(in, path);
}

}  // namespace hsn
