#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsn/graph.hpp"
#include "hsn/layers.hpp"
#include "hsn/scattering.hpp"
#include "hsn/wavelets.hpp"

namespace hsn {

inline constexpr double kTheoryTolerance = 1e-9;

/// Explicit partial node map phi. Never searched for; always supplied.
class NodeMap {
public:
    NodeMap() = default;

    static NodeMap from_pairs(std::span<const std::pair<Node, Node>> pairs) {
        NodeMap m;
        for (auto [a, b] : pairs) m.set(a, b);
        return m;
    }
    /// Total map v -> perm[v].
    static NodeMap from_permutation(std::span<const Node> perm) {
        NodeMap m;
        for (Node v = 0; v < perm.size(); ++v) m.set(v, perm[v]);
        return m;
    }

    void set(Node from, Node to) { map_[from] = to; }
    bool defined(Node v) const { return map_.count(v) != 0; }
    std::size_t size() const noexcept { return map_.size(); }

    Node operator()(Node v) const {
        auto it = map_.find(v);
        if (it == map_.end()) throw PartialMap("node map undefined at node " + std::to_string(v));
        return it->second;
    }

    /// phi(A) for a node set; throws PartialMap where undefined.
    std::vector<Node> image(std::span<const Node> nodes) const {
        std::vector<Node> out;
        out.reserve(nodes.size());
        for (Node v : nodes) out.push_back((*this)(v));
        return out;
    }

    bool injective_on(std::span<const Node> nodes) const {
        auto img = image(nodes);
        std::sort(img.begin(), img.end());
        return std::adjacent_find(img.begin(), img.end()) == img.end();
    }

private:
    std::map<Node, Node> map_;
};

// ---------------------------------------------------------------------------
// Intrinsic features

struct IntrinsicFeatureKind {
    enum class Kind { Degree, AvgDegree, TriangleCount };
    Kind kind = Kind::Degree;
    std::size_t k = 1;

    static IntrinsicFeatureKind degree() { return {Kind::Degree, 1}; }
    /// Mean degree over the closed (K-1)-neighborhood; K-intrinsic.
    static IntrinsicFeatureKind avg_degree(std::size_t k) {
        if (k < 1) throw InvalidArgument("AvgDegreeK requires K >= 1");
        return {Kind::AvgDegree, k};
    }
    /// Triangles inside the induced closed K-neighborhood; K-intrinsic.
    static IntrinsicFeatureKind triangle_count(std::size_t k) {
        if (k < 1) throw InvalidArgument("TriangleCountK requires K >= 1");
        return {Kind::TriangleCount, k};
    }

    /// Smallest K for which the feature is K-intrinsic.
    std::size_t order() const noexcept { return kind == Kind::Degree ? 1 : k; }

    std::string name() const {
        switch (kind) {
            case Kind::Degree: return "degree";
            case Kind::AvgDegree: return "avg_degree(" + std::to_string(k) + ")";
            case Kind::TriangleCount: return "triangles(" + std::to_string(k) + ")";
        }
        return "?";
    }
};

/// Parses "degree", "avg_degree:K", "triangles:K".
inline IntrinsicFeatureKind parse_intrinsic_kind(const std::string& s) {
    if (s == "degree") return IntrinsicFeatureKind::degree();
    auto arg = [&](std::size_t pos) { return static_cast<std::size_t>(std::stoul(s.substr(pos))); };
    if (s.rfind("avg_degree:", 0) == 0) return IntrinsicFeatureKind::avg_degree(arg(11));
    if (s.rfind("triangles:", 0) == 0) return IntrinsicFeatureKind::triangle_count(arg(10));
    throw ParseError("unknown intrinsic feature kind '" + s + "'");
}

namespace detail {

inline std::size_t count_triangles(const Graph& g, std::span<const Node> nodes) {
    std::vector<char> in(g.num_nodes(), 0);
    for (Node u : nodes) in[u] = 1;
    std::size_t count = 0;
    for (Node u : nodes)
        for (Node w : g.neighbors(u)) {
            if (w <= u || !in[w]) continue;
            for (Node x : g.neighbors(w))
                if (x > w && in[x] && g.has_edge(u, x)) ++count;
        }
    return count;
}

}  // namespace detail

/// One column per call.
inline FeatureMatrix intrinsic_features(const Graph& g, const IntrinsicFeatureKind& kind) {
    const std::size_t n = g.num_nodes();
    FeatureMatrix x(n, 1);
    for (Node v = 0; v < n; ++v) {
        switch (kind.kind) {
            case IntrinsicFeatureKind::Kind::Degree: x(v, 0) = g.degree(v); break;
            case IntrinsicFeatureKind::Kind::AvgDegree: {
                const auto nb = closed_neighborhood(g, v, kind.k - 1);
                double s = 0.0;
                for (Node u : nb) s += g.degree(u);
                x(v, 0) = s / static_cast<double>(nb.size());
                break;
            }
            case IntrinsicFeatureKind::Kind::TriangleCount:
                x(v, 0) = static_cast<double>(detail::count_triangles(g, closed_neighborhood(g, v, kind.k)));
                break;
        }
    }
    return x;
}

/// Columns of several kinds side by side.
inline FeatureMatrix intrinsic_features(const Graph& g, std::span<const IntrinsicFeatureKind> kinds) {
    if (kinds.empty()) throw InvalidArgument("intrinsic_features: no feature kinds");
    std::vector<Matrix> cols;
    for (const auto& k : kinds) cols.push_back(intrinsic_features(g, k));
    return hconcat(cols);
}

// ---------------------------------------------------------------------------
// Isomorphism of induced neighborhoods

/// True iff phi maps the induced closed `radius`-neighborhood of v bijectively
/// onto that of phi(v), preserving edges (and weights) in both directions.
inline bool validate_isomorphism(const Graph& g, const NodeMap& phi, Node v, std::size_t radius) {
    const auto src = closed_neighborhood(g, v, radius);
    for (Node u : src)
        if (!phi.defined(u)) throw PartialMap("node map undefined at node " + std::to_string(u));
    const Node pv = phi(v);
    if (pv >= g.num_nodes()) return false;
    auto img = phi.image(src);
    for (Node u : img)
        if (u >= g.num_nodes()) return false;
    std::sort(img.begin(), img.end());
    if (std::adjacent_find(img.begin(), img.end()) != img.end()) return false;
    if (img != closed_neighborhood(g, pv, radius)) return false;

    std::vector<char> in(g.num_nodes(), 0);
    for (Node u : src) in[u] = 1;
    std::size_t src_edges = 0;
    for (Node a : src) {
        auto nb = g.neighbors(a);
        auto wt = g.neighbor_weights(a);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            const Node b = nb[i];
            if (b <= a || !in[b]) continue;
            ++src_edges;
            auto w = g.edge_weight(phi(a), phi(b));
            if (!w || *w != wt[i]) return false;
        }
    }
    std::vector<char> in_img(g.num_nodes(), 0);
    for (Node u : img) in_img[u] = 1;
    std::size_t img_edges = 0;
    for (Node a : img)
        for (Node b : g.neighbors(a))
            if (b > a && in_img[b]) ++img_edges;
    return src_edges == img_edges;
}

// ---------------------------------------------------------------------------
// Structural differences

struct StructuralDifference {
    Node node = 0;
    std::size_t distance = kUnreachable;  ///< hop distance from the center
    bool feature_diff = false;            ///< X[u] != X[phi(u)]
    bool degree_diff = false;             ///< d_u != d_phi(u)
    bool boundary = false;                ///< u has a neighbor outside the region
    bool product_diff = false;            ///< d_phi(u) X[u] != d_u X[phi(u)]
    /// Counted as a structural difference: (feature_diff or degree_diff), and
    /// for boundary nodes additionally product_diff.
    bool manifested = false;
};

struct StructuralDifferenceReport {
    std::vector<StructuralDifference> candidates;  ///< every node with feature_diff or degree_diff
    std::vector<Node> v_diff;                      ///< manifested nodes, ascending
    std::size_t d = kUnreachable;                  ///< min distance of v_diff from the center
};

namespace detail {

inline bool rows_differ(const Matrix& x, Node a, Node b, double scale_a, double scale_b, double tol) {
    for (std::size_t c = 0; c < x.cols(); ++c)
        if (std::abs(scale_a * x(a, c) - scale_b * x(b, c)) > tol) return true;
    return false;
}

inline std::vector<char> membership(const Graph& g, std::span<const Node> nodes) {
    std::vector<char> in(g.num_nodes(), 0);
    for (Node u : nodes) {
        if (u >= g.num_nodes()) throw InvalidArgument("node " + std::to_string(u) + " out of range");
        in[u] = 1;
    }
    return in;
}

inline bool on_boundary(const Graph& g, const std::vector<char>& in, Node u) {
    for (Node w : g.neighbors(u))
        if (!in[w]) return true;
    return false;
}

/// Structural-difference status of one node. `in_region` decides the boundary.
inline StructuralDifference classify(const Graph& g, const NodeMap& phi, const Matrix& x,
                                     const std::vector<char>& in_region, Node u, double tol) {
    StructuralDifference s;
    s.node = u;
    const Node pu = phi(u);
    const double du = g.degree(u), dp = g.degree(pu);
    s.feature_diff = rows_differ(x, u, pu, 1.0, 1.0, tol);
    s.degree_diff = std::abs(du - dp) > tol;
    s.boundary = !in_region[u] || on_boundary(g, in_region, u);
    s.product_diff = rows_differ(x, u, pu, dp, du, tol);
    s.manifested = (s.feature_diff || s.degree_diff) && (!s.boundary || s.product_diff);
    return s;
}

}  // namespace detail

/// Structural differences inside `region` relative to phi and X, with the
/// boundary taken relative to `region`. Distances are measured from `center`.
inline StructuralDifferenceReport structural_differences(const Graph& g, const NodeMap& phi, const FeatureMatrix& x,
                                                         std::span<const Node> region, Node center,
                                                         double tol = kTheoryTolerance) {
    if (x.rows() != g.num_nodes()) throw DimensionMismatch("structural_differences: X rows != n");
    const auto in = detail::membership(g, region);
    const auto dist = bfs_distances(g, center);
    StructuralDifferenceReport rep;
    for (Node u : region) {
        auto s = detail::classify(g, phi, x, in, u, tol);
        s.distance = dist[u];
        if (!(s.feature_diff || s.degree_diff)) continue;
        rep.candidates.push_back(s);
        if (s.manifested) {
            rep.v_diff.push_back(u);
            rep.d = std::min(rep.d, s.distance);
        }
    }
    std::sort(rep.v_diff.begin(), rep.v_diff.end());
    return rep;
}

// ---------------------------------------------------------------------------
// Coincidental correspondence

/// Nodes u of `region` with a nonempty set Delta_u of structurally different
/// neighbors whose degree-weighted feature sums coincide with those of
/// phi(Delta_u). Structural differences are judged relative to `diff_region`.
inline std::vector<Node> check_coincidental_correspondence(const Graph& g, const NodeMap& phi, const FeatureMatrix& x,
                                                           std::span<const Node> region,
                                                           std::span<const Node> diff_region,
                                                           double tol = kTheoryTolerance) {
    if (x.rows() != g.num_nodes()) throw DimensionMismatch("coincidental correspondence: X rows != n");
    const auto in = detail::membership(g, diff_region);
    std::vector<Node> offending;
    for (Node u : region) {
        std::vector<double> lhs(x.cols(), 0.0), rhs(x.cols(), 0.0);
        bool nonempty = false;
        for (Node w : g.neighbors(u)) {
            if (!detail::classify(g, phi, x, in, w, tol).manifested) continue;
            nonempty = true;
            const Node pw = phi(w);
            for (std::size_t c = 0; c < x.cols(); ++c) {
                lhs[c] += x(w, c) / g.degree(w);
                rhs[c] += x(pw, c) / g.degree(pw);
            }
        }
        if (!nonempty) continue;
        bool equal = true;
        for (std::size_t c = 0; c < x.cols(); ++c)
            if (std::abs(lhs[c] - rhs[c]) > tol) equal = false;
        if (equal) offending.push_back(u);
    }
    return offending;
}

inline std::vector<Node> check_coincidental_correspondence(const Graph& g, const NodeMap& phi, const FeatureMatrix& x,
                                                           std::span<const Node> region,
                                                           double tol = kTheoryTolerance) {
    return check_coincidental_correspondence(g, phi, x, region, region, tol);
}

/// The same check repeated on the diffused features P^j X for j = 0..depth-1.
inline std::vector<Node> check_coincidental_correspondence_diffused(const Graph& g, const NodeMap& phi,
                                                                    const FeatureMatrix& x,
                                                                    std::span<const Node> region,
                                                                    std::span<const Node> diff_region,
                                                                    std::size_t depth,
                                                                    double tol = kTheoryTolerance) {
    std::vector<Node> all;
    FeatureMatrix y = x;
    for (std::size_t j = 0; j < std::max<std::size_t>(depth, 1); ++j) {
        if (j > 0) y = apply_operator(g, OperatorKind::lazy_walk(), y);
        auto off = check_coincidental_correspondence(g, phi, y, region, diff_region, tol);
        all.insert(all.end(), off.begin(), off.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

// ---------------------------------------------------------------------------
// Generalized path

/// Number of shortest paths from `source` to every node (0 when unreachable).
inline std::vector<double> shortest_path_counts(const Graph& g, Node source) {
    const auto dist = bfs_distances(g, source);
    std::vector<Node> order(g.num_nodes());
    for (Node v = 0; v < order.size(); ++v) order[v] = v;
    std::stable_sort(order.begin(), order.end(), [&](Node a, Node b) { return dist[a] < dist[b]; });
    std::vector<double> count(g.num_nodes(), 0.0);
    count[source] = 1.0;
    for (Node u : order) {
        if (dist[u] == kUnreachable || u == source) continue;
        for (Node w : g.neighbors(u))
            if (dist[w] != kUnreachable && dist[w] + 1 == dist[u]) count[u] += count[w];
    }
    return count;
}

struct GeneralizedPath {
    std::size_t d = 0;
    std::vector<Node> sources;              ///< V_diff^d
    std::vector<std::vector<Node>> layers;  ///< U_0 .. U_d; U_0 = V_diff^d, U_d = {v}
    double num_paths = 0.0;                 ///< tau, shortest paths from V_diff^d to v
};

/// U_j holds the nodes at position j of some shortest path from V_diff^d to v:
/// d(w, v) = d - j and d(w, V_diff^d) = j.
inline GeneralizedPath generalized_path(const Graph& g, Node v, std::span<const Node> v_diff) {
    if (v_diff.empty()) throw InvalidArgument("generalized_path: V_diff is empty");
    const auto dv = bfs_distances(g, v);
    GeneralizedPath gp;
    gp.d = kUnreachable;
    for (Node u : v_diff) gp.d = std::min(gp.d, dv[u]);
    if (gp.d == kUnreachable) throw InvalidArgument("generalized_path: V_diff unreachable from v");
    for (Node u : v_diff)
        if (dv[u] == gp.d) gp.sources.push_back(u);
    std::sort(gp.sources.begin(), gp.sources.end());
    const auto ds = bfs_distances(g, std::span<const Node>(gp.sources));
    gp.layers.assign(gp.d + 1, {});
    for (Node w = 0; w < g.num_nodes(); ++w) {
        if (dv[w] > gp.d) continue;
        const std::size_t j = gp.d - dv[w];
        if (ds[w] == j) gp.layers[j].push_back(w);
    }
    const auto counts = shortest_path_counts(g, v);
    for (Node u : gp.sources) gp.num_paths += counts[u];
    return gp;
}

// ---------------------------------------------------------------------------
// Theorem verifiers

struct Theorem1Verdict {
    bool passed = false;
    double max_deviation = 0.0;
    std::size_t trials = 0;
    std::size_t layers = 0;
};

struct DiscriminabilityReport {
    Node v = 0;
    Node phi_v = 0;
    std::size_t d = 0;
    std::vector<Node> v_diff;
    GeneralizedPath path;
    ScatteringPath p;
    double separation = 0.0;  ///< max |F(X)[v] - F(X)[phi(v)]|
    bool separated = false;
    /// Lemma 1: nodes of N^(d-j) that differ under P^j X equal U_j, for each j.
    std::vector<std::vector<Node>> observed_layers;
    bool onion_match = false;
    /// The same layer check after each wavelet of the cascade (layer t_i).
    bool cascade_match = false;
    /// For comparison: separation of a d-layer GCN-style A^d X filter at v.
    double gcn_separation = 0.0;
};

namespace detail {

inline void check_intrinsic_order(std::span<const IntrinsicFeatureKind> kinds, std::size_t k) {
    for (const auto& kind : kinds)
        if (kind.order() > k) {
            throw HypothesisViolated("feature " + kind.name() + " is not " + std::to_string(k) + "-intrinsic");
        }
}

inline double row_deviation(const Matrix& x, Node a, Node b) {
    double m = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) m = std::max(m, std::abs(x(a, c) - x(b, c)));
    return m;
}

/// Manifested nodes of `layer_nodes` for features y, boundary judged on `region`.
inline std::vector<Node> manifested_among(const Graph& g, const NodeMap& phi, const Matrix& y,
                                          const std::vector<char>& in_region, std::span<const Node> layer_nodes) {
    std::vector<Node> out;
    for (Node u : layer_nodes)
        if (classify(g, phi, y, in_region, u, kTheoryTolerance).manifested) out.push_back(u);
    return out;
}

enum class Guard { NoCoincidence, UniquePath };

inline DiscriminabilityReport verify_discriminability(const Graph& g, const NodeMap& phi, Node v, std::size_t k,
                                                      std::size_t l, const FeatureMatrix& x, Nonlinearity sigma,
                                                      const Matrix& theta, Guard guard) {
    if (x.rows() != g.num_nodes()) throw DimensionMismatch("theorem check: X rows != n");
    if (theta.rows() != x.cols() || theta.cols() != x.cols()) {
        throw DimensionMismatch("theorem check: Theta must be square with X's width");
    }
    const std::size_t radius = k + l;
    if (!validate_isomorphism(g, phi, v, radius)) {
        throw HypothesisViolated("the " + std::to_string(radius) + "-neighborhoods of v and phi(v) are not isomorphic");
    }
    if (!sigma.strictly_monotonic()) {
        throw HypothesisViolated("nonlinearity " + sigma.name() + " is not strictly monotonic");
    }
    const auto region = closed_neighborhood(g, v, radius);
    const auto in_region = membership(g, region);
    const auto sd = structural_differences(g, phi, x, region, v);
    if (sd.v_diff.empty()) throw HypothesisViolated("no structural difference inside the isomorphic neighborhood");
    if (sd.d == 0) throw HypothesisViolated("structural difference at v itself (d = 0)");

    DiscriminabilityReport rep;
    rep.v = v;
    rep.phi_v = phi(v);
    rep.d = sd.d;
    rep.v_diff = sd.v_diff;
    rep.path = generalized_path(g, v, sd.v_diff);

    if (guard == Guard::NoCoincidence) {
        const auto ball = closed_neighborhood(g, v, rep.d);
        const auto in_ball = membership(g, ball);
        std::vector<Node> interior;
        for (Node u : ball)
            if (!on_boundary(g, in_ball, u)) interior.push_back(u);
        const auto off = check_coincidental_correspondence_diffused(g, phi, x, interior, region, rep.d);
        if (!off.empty()) {
            std::string list;
            for (Node u : off) list += (list.empty() ? "" : ",") + std::to_string(u);
            throw HypothesisViolated("coincidental correspondence at node(s) " + list);
        }
    } else {
        if (rep.path.sources.size() != 1) {
            throw HypothesisViolated("nearest structural difference is not unique (" +
                                     std::to_string(rep.path.sources.size()) + " nodes at distance " +
                                     std::to_string(rep.d) + ")");
        }
        if (rep.path.num_paths != 1.0) {
            throw HypothesisViolated("shortest path to the nearest difference is not unique (" +
                                     std::to_string(static_cast<long long>(rep.path.num_paths)) + " paths)");
        }
    }

    rep.p = binary_expansion_path(rep.d);
    WaveletBank bank(g, std::max<std::size_t>(rep.p.max_scale(), 1));
    const FeatureMatrix xt = matmul(x, theta);
    const FeatureMatrix out = sigma.apply(cascade(bank, rep.p, sigma, xt));
    rep.separation = row_deviation(out, v, rep.phi_v);
    rep.separated = rep.separation > kTheoryTolerance;

    const auto dist = bfs_distances(g, v);
    auto ball_nodes = [&](std::size_t r) {
        std::vector<Node> b;
        for (Node u : region)
            if (dist[u] <= r) b.push_back(u);
        return b;
    };

    FeatureMatrix y = xt;
    rep.onion_match = true;
    for (std::size_t j = 0; j <= rep.d; ++j) {
        if (j > 0) y = apply_operator(g, OperatorKind::lazy_walk(), y);
        rep.observed_layers.push_back(manifested_among(g, phi, y, in_region, ball_nodes(rep.d - j)));
        if (rep.observed_layers.back() != rep.path.layers[j]) rep.onion_match = false;
    }

    FeatureMatrix z = xt;
    std::size_t t = 0;
    rep.cascade_match = true;
    for (std::size_t i = 0; i < rep.p.scales.size(); ++i) {
        if (i > 0) z = sigma.apply(std::move(z));
        z = wavelet_apply(bank, rep.p.scales[i], z);
        t += std::size_t{1} << rep.p.scales[i];
        if (manifested_among(g, phi, z, in_region, ball_nodes(rep.d - t)) != rep.path.layers[t]) {
            rep.cascade_match = false;
        }
    }

    const auto gcn = operator_power_apply(g, OperatorKind::sym_norm_adjacency(), rep.d, xt);
    rep.gcn_separation = row_deviation(gcn, v, rep.phi_v);
    return rep;
}

}  // namespace detail

/// Random ReLU GCN stacks X^(l+1) = ReLU(A X^l Theta_l + B_l) on features X;
/// checks ||X^l[v] - X^l[phi(v)]||_inf < 1e-9 for every l <= L and trial.
inline Theorem1Verdict verify_theorem1(const Graph& g, const NodeMap& phi, Node v, std::size_t k, std::size_t l,
                                       const FeatureMatrix& x, std::size_t trials, std::uint64_t seed = 0,
                                       std::size_t width = 4) {
    if (x.rows() != g.num_nodes()) throw DimensionMismatch("verify_theorem1: X rows != n");
    if (!validate_isomorphism(g, phi, v, k + l)) {
        throw HypothesisViolated("the " + std::to_string(k + l) + "-neighborhoods of v and phi(v) are not isomorphic");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Theorem1Verdict verdict;
    verdict.trials = trials;
    verdict.layers = l;
    const Node pv = phi(v);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        FeatureMatrix h = x;
        for (std::size_t layer = 0; layer < l; ++layer) {
            Matrix theta(h.cols(), width), bias(1, width);
            for (double& w : theta.data()) w = normal(rng);
            for (double& b : bias.data()) b = normal(rng);
            h = gcn_channel(g, 1, theta, bias, Nonlinearity::relu(), h);
            verdict.max_deviation = std::max(verdict.max_deviation, detail::row_deviation(h, v, pv));
        }
    }
    verdict.passed = verdict.max_deviation < kTheoryTolerance;
    return verdict;
}

inline Theorem1Verdict verify_theorem1(const Graph& g, const NodeMap& phi, Node v, std::size_t k, std::size_t l,
                                       std::span<const IntrinsicFeatureKind> kinds, std::size_t trials,
                                       std::uint64_t seed = 0) {
    detail::check_intrinsic_order(kinds, k);
    return verify_theorem1(g, phi, v, k, l, intrinsic_features(g, kinds), trials, seed);
}

/// Builds p from the binary expansion of d and checks that sigma(U_p(X Theta))
/// separates v and phi(v). Requires no coincidental correspondence on
/// int(N^d(v)), checked for X and its diffusions P^j X, j < d.
inline DiscriminabilityReport verify_theorem2(const Graph& g, const NodeMap& phi, Node v, std::size_t k,
                                              std::size_t l, const FeatureMatrix& x, Nonlinearity sigma,
                                              const Matrix& theta) {
    return detail::verify_discriminability(g, phi, v, k, l, x, sigma, theta, detail::Guard::NoCoincidence);
}

inline DiscriminabilityReport verify_theorem2(const Graph& g, const NodeMap& phi, Node v, std::size_t k,
                                              std::size_t l, const FeatureMatrix& x, Nonlinearity sigma) {
    return verify_theorem2(g, phi, v, k, l, x, sigma, Matrix::identity(x.cols()));
}

inline DiscriminabilityReport verify_theorem2(const Graph& g, const NodeMap& phi, Node v, std::size_t k,
                                              std::size_t l, std::span<const IntrinsicFeatureKind> kinds,
                                              Nonlinearity sigma) {
    detail::check_intrinsic_order(kinds, k);
    return verify_theorem2(g, phi, v, k, l, intrinsic_features(g, kinds), sigma);
}

/// As verify_theorem2, but the guard is a unique nearest difference node
/// reached by a unique shortest path.
inline DiscriminabilityReport verify_theorem3(const Graph& g, const NodeMap& phi, Node v, std::size_t k,
                                              std::size_t l, const FeatureMatrix& x, Nonlinearity sigma,
                                              const Matrix& theta) {
    return detail::verify_discriminability(g, phi, v, k, l, x, sigma, theta, detail::Guard::UniquePath);
}

inline DiscriminabilityReport verify_theorem3(const Graph& g, const NodeMap& phi, Node v, std::size_t k,
                                              std::size_t l, const FeatureMatrix& x, Nonlinearity sigma) {
    return verify_theorem3(g, phi, v, k, l, x, sigma, Matrix::identity(x.cols()));
}

inline DiscriminabilityReport verify_theorem3(const Graph& g, const NodeMap& phi, Node v, std::size_t k,
                                              std::size_t l, std::span<const IntrinsicFeatureKind> kinds,
                                              Nonlinearity sigma) {
    detail::check_intrinsic_order(kinds, k);
    return verify_theorem3(g, phi, v, k, l, intrinsic_features(g, kinds), sigma);
}

// ---------------------------------------------------------------------------

/// Fraction of edges whose endpoints share a label; 0 for an edgeless graph.
inline double homophily(const Graph& g, std::span<const int> labels) {
    if (labels.size() != g.num_nodes()) throw DimensionMismatch("homophily: label count != n");
    std::size_t same = 0, total = 0;
    for (Node u = 0; u < g.num_nodes(); ++u)
        for (Node w : g.neighbors(u))
            if (w > u) {
                ++total;
                same += labels[u] == labels[w] ? 1 : 0;
            }
    return total == 0 ? 0.0 : static_cast<double>(same) / static_cast<double>(total);
}

}  // namespace hsn
