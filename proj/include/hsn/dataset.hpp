#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hsn/graph.hpp"
#include "hsn/theory.hpp"
#include "hsn/train.hpp"

namespace hsn {

struct Dataset {
    std::string name;
    Graph graph;
    FeatureMatrix features;
    std::vector<int> labels;
    SplitMasks splits;

    std::size_t num_classes() const {
        int m = -1;
        for (int y : labels) m = std::max(m, y);
        return static_cast<std::size_t>(m + 1);
    }
};

struct DatasetSummary {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t features = 0;
    std::size_t classes = 0;
    double homophily = 0.0;
};

inline DatasetSummary summarize(const Dataset& ds) {
    return {ds.graph.num_nodes(), ds.graph.num_edges(), ds.features.cols(), ds.num_classes(),
            homophily(ds.graph, ds.labels)};
}

inline std::string to_string(const DatasetSummary& s) {
    std::ostringstream out;
    out << "n=" << s.nodes << " edges=" << s.edges << " d=" << s.features << " classes=" << s.classes
        << " homophily=" << s.homophily;
    return out.str();
}

/// Class ids must be dense: every id in 0..C-1 occurs and none is negative.
inline void check_class_ids(const std::vector<int>& labels) {
    if (labels.empty()) throw BadClassIds("no labels");
    int m = -1;
    for (int y : labels) {
        if (y < 0) throw BadClassIds("negative class id " + std::to_string(y));
        m = std::max(m, y);
    }
    std::vector<char> seen(static_cast<std::size_t>(m + 1), 0);
    for (int y : labels) seen[static_cast<std::size_t>(y)] = 1;
    for (std::size_t c = 0; c < seen.size(); ++c)
        if (!seen[c]) throw BadClassIds("class ids are not dense: id " + std::to_string(c) + " is unused");
}

// ---------------------------------------------------------------------------
// Text formats

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open '" + path + "'");
    return in;
}

inline bool blank_or_comment(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '#';
}

}  // namespace detail

/// One row of comma-separated floats per node.
inline FeatureMatrix read_features_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<double> values;
    std::size_t rows = 0, cols = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank_or_comment(line)) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            ++c;
        }
        if (rows == 0) cols = c;
        if (c != cols) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                             " columns, found " + std::to_string(c));
        }
        ++rows;
    }
    return FeatureMatrix(rows, cols, std::move(values));
}

/// One integer class id per line.
inline std::vector<int> read_labels_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank_or_comment(line)) continue;
        try {
            std::size_t used = 0;
            labels.push_back(std::stoi(line, &used));
            if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(line);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad class id '" + line + "'");
        }
    }
    return labels;
}

/// JSON object with integer arrays "train", "val" and "test".
inline SplitMasks read_splits_json(const std::string& path) {
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    SplitMasks s;
    auto get = [&](const char* key, std::vector<Node>& out) {
        if (!j.contains(key)) throw ParseError(path + ": missing key '" + key + "'");
        for (const auto& v : j.at(key)) {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw ParseError(path + ": '" + key + "' must hold nonnegative integers");
            }
            out.push_back(v.get<Node>());
        }
    };
    get("train", s.train);
    get("val", s.val);
    get("test", s.test);
    return s;
}

inline void write_features_csv(std::ostream& out, const FeatureMatrix& x) {
    out.precision(17);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) out << (c ? "," : "") << x(r, c);
        out << '\n';
    }
}

inline void write_splits_json(std::ostream& out, const SplitMasks& s) {
    nlohmann::json j;
    j["train"] = s.train;
    j["val"] = s.val;
    j["test"] = s.test;
    out << j.dump() << '\n';
}

/// Loads and validates a dataset from separate files.
inline Dataset load_dataset_files(const std::string& edges, const std::string& features, const std::string& labels,
                                  const std::string& splits, std::string name = "dataset") {
    Dataset ds;
    ds.name = std::move(name);
    ds.labels = read_labels_csv(labels);
    ds.features = read_features_csv(features);
    if (ds.features.rows() != ds.labels.size()) {
        throw RowCountMismatch("features.csv has " + std::to_string(ds.features.rows()) + " rows but labels.csv has " +
                               std::to_string(ds.labels.size()));
    }
    check_class_ids(ds.labels);
    auto in = detail::open_input(edges);
    const auto edge_list = parse_edge_list(in, edges);
    for (const auto& e : edge_list)
        if (e.u >= ds.labels.size() || e.v >= ds.labels.size()) {
            throw RowCountMismatch(edges + ": edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                   ") references a node beyond the " + std::to_string(ds.labels.size()) +
                                   " labeled nodes");
        }
    ds.graph = build_graph(ds.labels.size(), edge_list);
    ds.splits = read_splits_json(splits);
    ds.splits.validate(ds.labels.size());
    return ds;
}

/// Loads edges.tsv, features.csv, labels.csv and splits.json from `dir`.
inline Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path p(dir);
    if (!fs::is_directory(p)) throw MissingFile("dataset directory '" + dir + "' does not exist");
    for (const char* f : {"edges.tsv", "features.csv", "labels.csv", "splits.json"})
        if (!fs::exists(p / f)) throw MissingFile("dataset directory '" + dir + "' lacks " + f);
    return load_dataset_files((p / "edges.tsv").string(), (p / "features.csv").string(),
                              (p / "labels.csv").string(), (p / "splits.json").string(),
                              p.filename().string());
}

inline void save_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path p(dir);
    auto open = [&](const char* f) {
        std::ofstream out(p / f);
        if (!out) throw MissingFile("cannot write '" + (p / f).string() + "'");
        return out;
    };
    {
        auto out = open("edges.tsv");
        write_edge_list(out, ds.graph);
    }
    {
        auto out = open("features.csv");
        write_features_csv(out, ds.features);
    }
    {
        auto out = open("labels.csv");
        for (int y : ds.labels) out << y << '\n';
    }
    {
        auto out = open("splits.json");
        write_splits_json(out, ds.splits);
    }
}

// ---------------------------------------------------------------------------
// Stochastic block model

struct SBMSpec {
    std::vector<std::size_t> block_sizes{200, 200};
    double p_in = 0.1;
    double p_out = 0.01;
    std::size_t feature_dim = 16;
    /// Per-block feature means (block_sizes.size() x feature_dim). When empty,
    /// block b has mean `mean_scale` on coordinate b mod feature_dim.
    std::vector<std::vector<double>> feature_means;
    double mean_scale = 1.0;
    double noise = 1.0;  ///< standard deviation of the Gaussian feature noise
    std::uint64_t seed = 0;
    std::vector<double> split_ratio{5.0, 1.0, 1.0};

    void validate() const {
        if (block_sizes.size() < 2) throw InvalidArgument("SBM needs at least 2 blocks");
        for (auto s : block_sizes)
            if (s == 0) throw InvalidArgument("SBM block sizes must be positive");
        if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
            throw InvalidArgument("SBM probabilities must lie in [0, 1]");
        }
        if (feature_dim == 0) throw InvalidArgument("SBM feature_dim must be >= 1");
        if (!feature_means.empty()) {
            if (feature_means.size() != block_sizes.size()) throw InvalidArgument("SBM needs one mean per block");
            for (const auto& m : feature_means)
                if (m.size() != feature_dim) throw InvalidArgument("SBM mean length != feature_dim");
        }
        if (!(noise >= 0.0)) throw InvalidArgument("SBM noise must be >= 0");
        if (split_ratio.size() != 3) throw InvalidArgument("SBM split ratio needs three parts");
        for (double r : split_ratio)
            if (!(r >= 0.0)) throw InvalidArgument("SBM split ratios must be >= 0");
        if (!(split_ratio[0] > 0.0 && split_ratio[2] > 0.0)) {
            throw InvalidArgument("SBM split needs nonempty train and test parts");
        }
    }
};

/// Per-class stratified split: each class is shuffled and cut by the ratios.
inline SplitMasks stratified_split(const std::vector<int>& labels, std::span<const double> ratio,
                                   std::mt19937_64& rng) {
    if (ratio.size() != 3) throw InvalidArgument("stratified_split: ratio needs three parts");
    const double total = ratio[0] + ratio[1] + ratio[2];
    int classes = 0;
    for (int y : labels) classes = std::max(classes, y + 1);
    SplitMasks s;
    for (int c = 0; c < classes; ++c) {
        std::vector<Node> members;
        for (Node v = 0; v < labels.size(); ++v)
            if (labels[v] == c) members.push_back(v);
        std::shuffle(members.begin(), members.end(), rng);
        const auto m = static_cast<double>(members.size());
        const auto n_train = static_cast<std::size_t>(std::llround(m * ratio[0] / total));
        const auto n_val = static_cast<std::size_t>(std::llround(m * ratio[1] / total));
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i < n_train) s.train.push_back(members[i]);
            else if (i < n_train + n_val) s.val.push_back(members[i]);
            else s.test.push_back(members[i]);
        }
    }
    for (auto* m : {&s.train, &s.val, &s.test}) std::sort(m->begin(), m->end());
    return s;
}

/// Deterministic given the seed. Graphs with isolated nodes are redrawn, up
/// to 100 attempts.
inline Dataset generate_sbm(const SBMSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<int> labels;
    for (std::size_t b = 0; b < spec.block_sizes.size(); ++b)
        labels.insert(labels.end(), spec.block_sizes[b], static_cast<int>(b));
    const std::size_t n = labels.size();

    Graph g;
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<Edge> edges;
        for (Node i = 0; i < n; ++i)
            for (Node j = i + 1; j < n; ++j) {
                const double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
                if (unif(rng) < p) edges.push_back({i, j});
            }
        g = build_graph(n, edges);
        ok = !g.has_isolated_nodes();
    }
    if (!ok) throw InfeasibleSpec("generate_sbm: every one of 100 samples had an isolated node");

    FeatureMatrix x(n, spec.feature_dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Node v = 0; v < n; ++v) {
        const auto b = static_cast<std::size_t>(labels[v]);
        for (std::size_t c = 0; c < spec.feature_dim; ++c) {
            const double mean = spec.feature_means.empty() ? (c == b % spec.feature_dim ? spec.mean_scale : 0.0)
                                                           : spec.feature_means[b][c];
            x(v, c) = mean + spec.noise * normal(rng);
        }
    }

    Dataset ds;
    ds.name = "sbm";
    ds.graph = std::move(g);
    ds.features = std::move(x);
    ds.labels = std::move(labels);
    ds.splits = stratified_split(ds.labels, spec.split_ratio, rng);
    return ds;
}

}  // namespace hsn
