#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hsn/graph.hpp"
#include "hsn/theory.hpp"

// Small deterministic graph families used by the theory checks, the tests
// and the CLI.

namespace hsn::fixtures {

inline Graph path_graph(std::size_t n) {
    std::vector<Edge> e;
    for (Node i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return build_graph(n, e);
}

inline Graph cycle(std::size_t n) {
    if (n < 3) throw InvalidArgument("cycle needs n >= 3");
    std::vector<Edge> e;
    for (Node i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return build_graph(n, e);
}

inline Graph complete_graph(std::size_t n) {
    std::vector<Edge> e;
    for (Node i = 0; i < n; ++i)
        for (Node j = i + 1; j < n; ++j) e.push_back({i, j});
    return build_graph(n, e);
}

/// K_{a,b}: nodes 0..a-1 on one side, a..a+b-1 on the other.
inline Graph complete_bipartite(std::size_t a, std::size_t b) {
    std::vector<Edge> e;
    for (Node i = 0; i < a; ++i)
        for (Node j = 0; j < b; ++j) e.push_back({i, a + j});
    return build_graph(a + b, e);
}

inline Graph hypercube(std::size_t dim) {
    const std::size_t n = std::size_t{1} << dim;
    std::vector<Edge> e;
    for (Node v = 0; v < n; ++v)
        for (std::size_t b = 0; b < dim; ++b) {
            const Node w = v ^ (std::size_t{1} << b);
            if (w > v) e.push_back({v, w});
        }
    return build_graph(n, e);
}

/// Two cliques K_m joined by a path with `bridge` interior nodes.
inline Graph barbell(std::size_t m, std::size_t bridge) {
    std::vector<Edge> e;
    const std::size_t n = 2 * m + bridge;
    for (Node i = 0; i < m; ++i)
        for (Node j = i + 1; j < m; ++j) {
            e.push_back({i, j});
            e.push_back({m + bridge + i, m + bridge + j});
        }
    Node prev = m - 1;
    for (Node i = 0; i < bridge; ++i) {
        e.push_back({prev, m + i});
        prev = m + i;
    }
    e.push_back({prev, m + bridge});
    return build_graph(n, e);
}

/// +1/-1 two-coloring by BFS parity from node 0 (meaningful on bipartite graphs).
inline FeatureMatrix two_coloring(const Graph& g) {
    const auto dist = bfs_distances(g, 0);
    FeatureMatrix x(g.num_nodes(), 1);
    for (Node v = 0; v < g.num_nodes(); ++v) x(v, 0) = dist[v] % 2 == 0 ? 1.0 : -1.0;
    return x;
}

/// Connected graph: a random spanning tree plus independent edges with probability p.
inline Graph random_connected_graph(std::size_t n, double p, std::mt19937_64& rng) {
    if (n < 2) throw InvalidArgument("random_connected_graph needs n >= 2");
    std::vector<Edge> e;
    std::bernoulli_distribution coin(p);
    for (Node v = 1; v < n; ++v) {
        std::uniform_int_distribution<Node> parent(0, v - 1);
        e.push_back({parent(rng), v});
    }
    for (Node i = 0; i < n; ++i)
        for (Node j = i + 1; j < n; ++j)
            if (coin(rng)) e.push_back({i, j});
    return build_graph(n, e);
}

/// Erdos-Renyi G(n, p) resampled until connected.
inline Graph erdos_renyi_connected(std::size_t n, double p, std::mt19937_64& rng, std::size_t attempts = 1000) {
    std::bernoulli_distribution coin(p);
    for (std::size_t a = 0; a < attempts; ++a) {
        std::vector<Edge> e;
        for (Node i = 0; i < n; ++i)
            for (Node j = i + 1; j < n; ++j)
                if (coin(rng)) e.push_back({i, j});
        Graph g = build_graph(n, e);
        const auto dist = bfs_distances(g, 0);
        if (std::find(dist.begin(), dist.end(), kUnreachable) == dist.end()) return g;
    }
    throw InfeasibleSpec("erdos_renyi_connected: no connected sample found");
}

// ---------------------------------------------------------------------------
// Node pairs (v, phi(v)) for the discriminability theorems

struct PairFixture {
    std::string name;
    Graph g;
    NodeMap phi;
    Node v = 0;
    std::size_t k = 1;
    std::size_t l = 1;
    std::vector<IntrinsicFeatureKind> kinds;  ///< used when `x` is empty
    std::optional<FeatureMatrix> x;

    FeatureMatrix features() const { return x ? *x : intrinsic_features(g, kinds); }
};

namespace detail {

/// Disjoint union of copies A (nodes 0..m-1) and B (m..2m-1); phi swaps them.
inline PairFixture twin(std::string name, std::size_t m, const std::vector<Edge>& shared,
                        const std::vector<Edge>& only_a, const std::vector<Edge>& only_b) {
    std::vector<Edge> e;
    for (const auto& x : shared) {
        e.push_back(x);
        e.push_back({x.u + m, x.v + m, x.weight});
    }
    for (const auto& x : only_a) e.push_back(x);
    for (const auto& x : only_b) e.push_back({x.u + m, x.v + m, x.weight});
    PairFixture f;
    f.name = std::move(name);
    f.g = build_graph(2 * m, e);
    for (Node i = 0; i < m; ++i) {
        f.phi.set(i, i + m);
        f.phi.set(i + m, i);
    }
    return f;
}

}  // namespace detail

/// C_n with phi = rotation by `shift`; every node pair is indistinguishable.
inline PairFixture cycle_rotation(std::size_t n, std::size_t shift, std::size_t k = 1, std::size_t l = 2) {
    PairFixture f;
    f.name = "C" + std::to_string(n) + " rotation";
    f.g = cycle(n);
    for (Node i = 0; i < n; ++i) f.phi.set(i, (i + shift) % n);
    f.k = k;
    f.l = l;
    f.kinds = {IntrinsicFeatureKind::degree()};
    return f;
}

/// K_{3,3} with the side swap i <-> i+3.
inline PairFixture k33_swap(std::size_t l = 2) {
    PairFixture f;
    f.name = "K33 side swap";
    f.g = complete_bipartite(3, 3);
    for (Node i = 0; i < 3; ++i) {
        f.phi.set(i, i + 3);
        f.phi.set(i + 3, i);
    }
    f.l = l;
    f.kinds = {IntrinsicFeatureKind::degree(), IntrinsicFeatureKind::triangle_count(1)};
    return f;
}

/// 3-cube with the antipodal map v -> v xor 7.
inline PairFixture cube_antipodal(std::size_t l = 2) {
    PairFixture f;
    f.name = "3-cube antipodal";
    f.g = hypercube(3);
    for (Node i = 0; i < 8; ++i) f.phi.set(i, i ^ 7u);
    f.k = 2;
    f.l = l;
    f.kinds = {IntrinsicFeatureKind::degree(), IntrinsicFeatureKind::avg_degree(2)};
    return f;
}

/// Barbell with the mirror map; v is the first clique's attachment node.
inline PairFixture barbell_mirror(std::size_t m = 4, std::size_t bridge = 3, std::size_t l = 2) {
    PairFixture f;
    f.name = "barbell mirror";
    f.g = barbell(m, bridge);
    const std::size_t n = 2 * m + bridge;
    for (Node i = 0; i < m; ++i) {
        f.phi.set(i, n - 1 - i);
        f.phi.set(n - 1 - i, i);
    }
    for (Node i = 0; i < bridge; ++i) f.phi.set(m + i, m + bridge - 1 - i);
    f.v = m - 1;
    f.k = 2;
    f.l = l;
    f.kinds = {IntrinsicFeatureKind::degree(), IntrinsicFeatureKind::avg_degree(2)};
    return f;
}

/// Two paths a_0..a_t; the end a_t carries two pendant leaves in copy A and
/// one in copy B. The t-neighborhoods of a_0 are isomorphic, the
/// (t+1)-neighborhoods are not. Node ids: a_i = i, leaves t+1, t+2.
inline PairFixture pendant_pair(std::size_t t, std::size_t k = 1, std::size_t l = 1) {
    const std::size_t m = t + 3;
    std::vector<Edge> shared;
    for (Node i = 0; i < t; ++i) shared.push_back({i, i + 1});
    shared.push_back({t, t + 1});
    // In copy B the second leaf hangs off the first one instead of a_t.
    PairFixture f = detail::twin("pendant pair t=" + std::to_string(t), m, shared, {{t, t + 2}}, {{t + 1, t + 2}});
    f.v = 0;
    f.k = k;
    f.l = l;
    f.kinds = {IntrinsicFeatureKind::degree()};
    return f;
}

/// Two paths a_0..a_d whose end a_d carries a closed triangle (a_d, x, y) in
/// copy A and an open wedge x - a_d - y in copy B. With triangle-count
/// features the only structural difference in N^d(a_0) sits at a_d, so the
/// difference distance is exactly d. K = 1, L = d - 1.
/// Node ids: a_i = i, x = d+1, y = d+2.
inline PairFixture triangle_tail_pair(std::size_t d, bool with_degree = true) {
    if (d < 1) throw InvalidArgument("triangle_tail_pair needs d >= 1");
    const std::size_t m = d + 3;
    std::vector<Edge> shared;
    for (Node i = 0; i < d; ++i) shared.push_back({i, i + 1});
    shared.push_back({d, d + 1});
    shared.push_back({d, d + 2});
    PairFixture f = detail::twin("triangle tail d=" + std::to_string(d), m, shared, {{d + 1, d + 2}}, {});
    f.v = 0;
    f.k = 1;
    f.l = d - 1;
    f.kinds = {IntrinsicFeatureKind::triangle_count(1)};
    if (with_degree) f.kinds.push_back(IntrinsicFeatureKind::degree());
    return f;
}

/// v - u - {u1, u2} in both copies with X[u1] = X[u2] = 1 against 2 and 0:
/// the degree-weighted sums at u cancel exactly (coincidental correspondence).
/// Node ids: v = 0, u = 1, u1 = 2, u2 = 3.
inline PairFixture coincidence_gadget() {
    PairFixture f = detail::twin("coincidence gadget", 4, {{0, 1}, {1, 2}, {1, 3}}, {}, {});
    FeatureMatrix x(8, 1);
    x(2, 0) = 1.0;
    x(3, 0) = 1.0;
    x(6, 0) = 2.0;
    x(7, 0) = 0.0;
    f.x = x;
    f.k = 1;
    f.l = 1;
    return f;
}

/// Same shape as the coincidence gadget with both u1 and u2 changed from 1 to
/// 2: two equidistant difference nodes, no cancellation.
inline PairFixture equidistant_pair() {
    PairFixture f = detail::twin("equidistant differences", 4, {{0, 1}, {1, 2}, {1, 3}}, {}, {});
    FeatureMatrix x(8, 1);
    x(2, 0) = 1.0;
    x(3, 0) = 1.0;
    x(6, 0) = 2.0;
    x(7, 0) = 2.0;
    f.x = x;
    f.k = 1;
    f.l = 1;
    return f;
}

/// v reaches the single difference node u through a 4-cycle (v, a, c, b) and
/// then c - u: two shortest paths. Node ids: v = 0, a = 1, b = 2, c = 3, u = 4,
/// plus a tail node 5 beyond u.
inline PairFixture two_path_pair() {
    PairFixture f = detail::twin("two shortest paths", 6, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}}, {}, {});
    FeatureMatrix x(12, 1);
    x(4, 0) = 1.0;
    x(10, 0) = 2.0;
    f.x = x;
    f.k = 1;
    f.l = 2;
    return f;
}

}  // namespace hsn::fixtures
