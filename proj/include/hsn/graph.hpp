#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hsn/errors.hpp"
#include "hsn/matrix.hpp"

namespace hsn {

using Node = std::size_t;

struct Edge {
    Node u = 0;
    Node v = 0;
    double weight = 1.0;
};

/// Immutable weighted undirected graph in CSR form. Each undirected edge is
/// stored in both endpoint rows; neighbor lists are sorted ascending.
class Graph {
public:
    Graph() = default;

    std::size_t num_nodes() const noexcept { return degrees_.size(); }
    /// Number of undirected edges.
    std::size_t num_edges() const noexcept { return targets_.size() / 2; }

    std::span<const Node> neighbors(Node v) const noexcept {
        return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::span<const double> neighbor_weights(Node v) const noexcept {
        return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::size_t neighbor_count(Node v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

    /// Weighted degree d_v = sum_w W[v, w].
    double degree(Node v) const noexcept { return degrees_[v]; }
    const std::vector<double>& degrees() const noexcept { return degrees_; }

    /// True when some node has zero degree (the graph is still valid).
    bool has_isolated_nodes() const noexcept { return isolated_; }

    std::optional<double> edge_weight(Node u, Node v) const noexcept {
        auto nb = neighbors(u);
        auto it = std::lower_bound(nb.begin(), nb.end(), v);
        if (it == nb.end() || *it != v) return std::nullopt;
        return weights_[offsets_[u] + static_cast<std::size_t>(it - nb.begin())];
    }
    bool has_edge(Node u, Node v) const noexcept { return edge_weight(u, v).has_value(); }

    /// Undirected edges with u < v, in CSR order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(num_edges());
        for (Node u = 0; u < num_nodes(); ++u) {
            auto nb = neighbors(u);
            auto wt = neighbor_weights(u);
            for (std::size_t i = 0; i < nb.size(); ++i)
                if (u < nb[i]) out.push_back({u, nb[i], wt[i]});
        }
        return out;
    }

    const std::vector<std::size_t>& csr_offsets() const noexcept { return offsets_; }
    const std::vector<Node>& csr_targets() const noexcept { return targets_; }
    const std::vector<double>& csr_weights() const noexcept { return weights_; }

    friend Graph build_graph(std::size_t n, std::span<const Edge> edges);

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<Node> targets_;
    std::vector<double> weights_;
    std::vector<double> degrees_;
    bool isolated_ = false;
};

/// Builds a graph on nodes 0..n-1. An undirected edge may be listed more than
/// once (in either orientation) only with an identical weight; repeats are
/// stored once. Conflicting weights raise NonSymmetricInput.
inline Graph build_graph(std::size_t n, std::span<const Edge> edges) {
    std::map<std::pair<Node, Node>, double> unique;
    for (const auto& e : edges) {
        if (e.u >= n || e.v >= n) {
            throw InvalidArgument("build_graph: node id out of range in edge (" + std::to_string(e.u) + "," +
                                  std::to_string(e.v) + ")");
        }
        if (e.u == e.v) throw SelfLoop("build_graph: self-loop at node " + std::to_string(e.u));
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
            throw InvalidArgument("build_graph: edge weights must be finite and positive");
        }
        auto key = std::minmax(e.u, e.v);
        auto [it, inserted] = unique.emplace(std::pair<Node, Node>{key.first, key.second}, e.weight);
        if (!inserted && it->second != e.weight) {
            throw NonSymmetricInput("build_graph: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                    ") given with conflicting weights");
        }
    }

    Graph g;
    std::vector<std::size_t> counts(n, 0);
    for (const auto& [key, w] : unique) {
        ++counts[key.first];
        ++counts[key.second];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + counts[v];
    g.targets_.resize(g.offsets_[n]);
    g.weights_.resize(g.offsets_[n]);
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    // std::map iterates keys in (u, v) order, which leaves every row sorted.
    for (const auto& [key, w] : unique) {
        auto [u, v] = key;
        g.targets_[cursor[u]] = v;
        g.weights_[cursor[u]++] = w;
    }
    for (const auto& [key, w] : unique) {
        auto [u, v] = key;
        g.targets_[cursor[v]] = u;
        g.weights_[cursor[v]++] = w;
    }
    for (std::size_t v = 0; v < n; ++v) {
        const auto b = g.offsets_[v], e = g.offsets_[v + 1];
        std::vector<std::pair<Node, double>> row;
        row.reserve(e - b);
        for (auto i = b; i < e; ++i) row.emplace_back(g.targets_[i], g.weights_[i]);
        std::sort(row.begin(), row.end());
        for (auto i = b; i < e; ++i) {
            g.targets_[i] = row[i - b].first;
            g.weights_[i] = row[i - b].second;
        }
    }
    g.degrees_.assign(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        for (auto i = g.offsets_[v]; i < g.offsets_[v + 1]; ++i) g.degrees_[v] += g.weights_[i];
        if (g.degrees_[v] == 0.0) g.isolated_ = true;
    }
    return g;
}

/// Node count is inferred as one past the largest id.
inline Graph build_graph(std::span<const Edge> edges) {
    std::size_t n = 0;
    for (const auto& e : edges) n = std::max({n, e.u + 1, e.v + 1});
    return build_graph(n, edges);
}

inline Graph build_graph(std::initializer_list<Edge> edges) {
    return build_graph(std::span<const Edge>(edges.begin(), edges.size()));
}

// ---------------------------------------------------------------------------
// Diffusion and adjacency operators

struct OperatorKind {
    enum class Tag {
        LazyWalk,           ///< P = (I + W D^-1) / 2
        RenormAdjacency,    ///< A = D~^-1/2 (I + W) D~^-1/2
        RandomWalk,         ///< R = W D^-1
        ResidualDiffusion,  ///< A_res(alpha) = (I + alpha W D^-1) / (alpha + 1)
        SymNormAdjacency,   ///< I + D^-1/2 W D^-1/2
    };

    Tag tag = Tag::LazyWalk;
    double alpha = 0.0;

    static constexpr OperatorKind lazy_walk() { return {Tag::LazyWalk, 0.0}; }
    static constexpr OperatorKind renorm_adjacency() { return {Tag::RenormAdjacency, 0.0}; }
    static constexpr OperatorKind random_walk() { return {Tag::RandomWalk, 0.0}; }
    static OperatorKind residual(double alpha) {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
            throw InvalidArgument("ResidualDiffusion requires a finite alpha >= 0");
        }
        return {Tag::ResidualDiffusion, alpha};
    }
    static constexpr OperatorKind sym_norm_adjacency() { return {Tag::SymNormAdjacency, 0.0}; }

    bool needs_inverse_degree() const noexcept { return tag != Tag::RenormAdjacency; }
    bool symmetric() const noexcept { return tag == Tag::RenormAdjacency || tag == Tag::SymNormAdjacency; }
};

namespace detail {

inline void check_operator_input(const Graph& g, const OperatorKind& kind, const Matrix& x) {
    if (x.rows() != g.num_nodes()) {
        throw DimensionMismatch("operator input has " + std::to_string(x.rows()) + " rows, graph has " +
                                std::to_string(g.num_nodes()) + " nodes");
    }
    if (kind.needs_inverse_degree() && g.has_isolated_nodes()) {
        const auto& d = g.degrees();
        const auto it = std::find(d.begin(), d.end(), 0.0);
        throw IsolatedNode("operator needs D^-1 but node " + std::to_string(it - d.begin()) + " has degree 0");
    }
}

// out[v] = self * x[v] + nbr * sum_w W[v,w] * scale(v, w) * x[w]
template <class Scale>
Matrix propagate(const Graph& g, const Matrix& x, double self, double nbr, Scale&& scale) {
    Matrix out(x.rows(), x.cols());
    const std::size_t d = x.cols();
    for (Node v = 0; v < g.num_nodes(); ++v) {
        auto orow = out.row(v);
        auto xv = x.row(v);
        if (self != 0.0)
            for (std::size_t c = 0; c < d; ++c) orow[c] = self * xv[c];
        auto nb = g.neighbors(v);
        auto wt = g.neighbor_weights(v);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            const double coef = nbr * wt[i] * scale(v, nb[i]);
            auto xw = x.row(nb[i]);
            for (std::size_t c = 0; c < d; ++c) orow[c] += coef * xw[c];
        }
    }
    return out;
}

inline Matrix apply_impl(const Graph& g, const OperatorKind& kind, const Matrix& x, bool transposed) {
    check_operator_input(g, kind, x);
    const auto& deg = g.degrees();
    using Tag = OperatorKind::Tag;
    // W D^-1 scales by the column (neighbor) degree; its transpose D^-1 W by the row degree.
    auto inv_col = [&](Node, Node w) { return 1.0 / deg[w]; };
    auto inv_row = [&](Node v, Node) { return 1.0 / deg[v]; };
    switch (kind.tag) {
        case Tag::LazyWalk:
            return transposed ? propagate(g, x, 0.5, 0.5, inv_row) : propagate(g, x, 0.5, 0.5, inv_col);
        case Tag::RandomWalk:
            return transposed ? propagate(g, x, 0.0, 1.0, inv_row) : propagate(g, x, 0.0, 1.0, inv_col);
        case Tag::ResidualDiffusion: {
            const double s = 1.0 / (kind.alpha + 1.0);
            const double a = kind.alpha * s;
            return transposed ? propagate(g, x, s, a, inv_row) : propagate(g, x, s, a, inv_col);
        }
        case Tag::RenormAdjacency: {
            Matrix out = propagate(g, x, 0.0, 1.0, [&](Node v, Node w) {
                return 1.0 / std::sqrt((deg[v] + 1.0) * (deg[w] + 1.0));
            });
            for (Node v = 0; v < g.num_nodes(); ++v) {
                const double self = 1.0 / (deg[v] + 1.0);
                auto orow = out.row(v);
                auto xv = x.row(v);
                for (std::size_t c = 0; c < x.cols(); ++c) orow[c] += self * xv[c];
            }
            return out;
        }
        case Tag::SymNormAdjacency:
            return propagate(g, x, 1.0, 1.0, [&](Node v, Node w) { return 1.0 / std::sqrt(deg[v] * deg[w]); });
    }
    throw InvalidArgument("unknown operator kind");
}

}  // namespace detail

/// Applies the operator column-wise to X (rows indexed by node).
inline FeatureMatrix apply_operator(const Graph& g, const OperatorKind& kind, const FeatureMatrix& x) {
    return detail::apply_impl(g, kind, x, false);
}

/// Applies the transposed operator; needed for reverse-mode gradients.
inline FeatureMatrix apply_operator_transpose(const Graph& g, const OperatorKind& kind, const FeatureMatrix& x) {
    return detail::apply_impl(g, kind, x, true);
}

/// t successive applications. Never forms the dense power.
inline FeatureMatrix operator_power_apply(const Graph& g, const OperatorKind& kind, std::size_t t,
                                          const FeatureMatrix& x) {
    if (t == 0) throw InvalidArgument("operator_power_apply: t must be >= 1");
    FeatureMatrix y = apply_operator(g, kind, x);
    for (std::size_t i = 1; i < t; ++i) y = apply_operator(g, kind, y);
    return y;
}

inline FeatureMatrix operator_power_apply_transpose(const Graph& g, const OperatorKind& kind, std::size_t t,
                                                    const FeatureMatrix& x) {
    if (t == 0) throw InvalidArgument("operator_power_apply: t must be >= 1");
    FeatureMatrix y = apply_operator_transpose(g, kind, x);
    for (std::size_t i = 1; i < t; ++i) y = apply_operator_transpose(g, kind, y);
    return y;
}

/// Materializes the operator as a dense n x n matrix by applying it to the
/// identity. Intended for small validation graphs.
inline Matrix dense_operator(const Graph& g, const OperatorKind& kind) {
    return apply_operator(g, kind, Matrix::identity(g.num_nodes()));
}

// ---------------------------------------------------------------------------
// Hop distances

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

/// BFS hop distances from `source`; nodes farther than `max_radius` (or not
/// reachable) get kUnreachable.
inline std::vector<std::size_t> bfs_distances(const Graph& g, Node source,
                                              std::size_t max_radius = kUnreachable) {
    std::vector<std::size_t> dist(g.num_nodes(), kUnreachable);
    std::queue<Node> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const Node u = q.front();
        q.pop();
        if (dist[u] == max_radius) continue;
        for (Node w : g.neighbors(u)) {
            if (dist[w] == kUnreachable) {
                dist[w] = dist[u] + 1;
                q.push(w);
            }
        }
    }
    return dist;
}

/// Multi-source BFS: distance to the nearest node of `sources`.
inline std::vector<std::size_t> bfs_distances(const Graph& g, std::span<const Node> sources) {
    std::vector<std::size_t> dist(g.num_nodes(), kUnreachable);
    std::queue<Node> q;
    for (Node s : sources) {
        if (dist[s] != 0) {
            dist[s] = 0;
            q.push(s);
        }
    }
    while (!q.empty()) {
        const Node u = q.front();
        q.pop();
        for (Node w : g.neighbors(u)) {
            if (dist[w] == kUnreachable) {
                dist[w] = dist[u] + 1;
                q.push(w);
            }
        }
    }
    return dist;
}

/// K-step neighborhood {u : 1 <= d(u, v) <= K}; with `closed` the node v
/// itself is included. Returned sorted ascending.
inline std::vector<Node> neighborhood(const Graph& g, Node v, std::size_t k, bool closed = false) {
    if (v >= g.num_nodes()) throw InvalidArgument("neighborhood: node out of range");
    const auto dist = bfs_distances(g, v, k);
    std::vector<Node> out;
    for (Node u = 0; u < g.num_nodes(); ++u) {
        if (dist[u] == kUnreachable) continue;
        if (dist[u] >= 1 || closed) out.push_back(u);
    }
    return out;
}

inline std::vector<Node> closed_neighborhood(const Graph& g, Node v, std::size_t k) {
    return neighborhood(g, v, k, true);
}

// ---------------------------------------------------------------------------
// Edge-list text format: "u<TAB>v[<TAB>weight]" per line, '#' comments.

inline std::vector<Edge> parse_edge_list(std::istream& in, const std::string& source = "<edges>") {
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long u = 0, v = 0;
        if (!(ls >> u)) continue;  // blank line
        if (!(ls >> v) || u < 0 || v < 0) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'u<TAB>v[<TAB>weight]'");
        }
        double w = 1.0;
        if (!(ls >> w)) {
            if (!ls.eof()) throw ParseError(source + ":" + std::to_string(lineno) + ": bad weight");
            w = 1.0;
        }
        std::string rest;
        if (ls >> rest) throw ParseError(source + ":" + std::to_string(lineno) + ": trailing fields");
        edges.push_back({static_cast<Node>(u), static_cast<Node>(v), w});
    }
    return edges;
}

inline Graph read_edge_list(const std::string& path, std::size_t num_nodes = 0) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open edge list " + path);
    auto edges = parse_edge_list(in, path);
    std::size_t n = num_nodes;
    for (const auto& e : edges) n = std::max({n, e.u + 1, e.v + 1});
    return build_graph(n, edges);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
    out.precision(17);
    for (const auto& e : g.edges()) {
        out << e.u << '\t' << e.v;
        if (e.weight != 1.0) out << '\t' << e.weight;
        out << '\n';
    }
}

}  // namespace hsn
