#pragma once

#include <random>

#include "hsn/hsn.hpp"

namespace hsn::testing {

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> normal(0.0, sd);
    Matrix m(r, c);
    for (double& x : m.data()) x = normal(rng);
    return m;
}

/// Random symmetric weights on a random connected graph.
inline Graph random_weighted_graph(std::size_t n, double p, std::mt19937_64& rng) {
    const Graph base = fixtures::random_connected_graph(n, p, rng);
    std::uniform_real_distribution<double> w(0.2, 3.0);
    auto edges = base.edges();
    for (auto& e : edges) e.weight = w(rng);
    return build_graph(n, edges);
}

/// Graph relabeled by v -> perm[v].
inline Graph permute_graph(const Graph& g, const std::vector<Node>& perm) {
    auto edges = g.edges();
    for (auto& e : edges) {
        e.u = perm[e.u];
        e.v = perm[e.v];
    }
    return build_graph(g.num_nodes(), edges);
}

/// Rows moved by v -> perm[v].
inline Matrix permute_rows(const Matrix& x, const std::vector<Node>& perm) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(perm[r], c) = x(r, c);
    return out;
}

inline std::vector<Node> random_permutation(std::size_t n, std::mt19937_64& rng) {
    std::vector<Node> p(n);
    for (Node i = 0; i < n; ++i) p[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

/// <a, b>_w = a^T D^-1 b summed over columns.
inline double weighted_inner(const Graph& g, const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * b(r, c) / g.degree(r);
    return s;
}

inline Matrix dense_power(const Matrix& m, std::size_t t) {
    Matrix out = Matrix::identity(m.rows());
    for (std::size_t i = 0; i < t; ++i) out = matmul(m, out);
    return out;
}

/// Dense P = (I + W D^-1) / 2 built entry by entry.
inline Matrix dense_lazy_walk(const Graph& g) {
    const std::size_t n = g.num_nodes();
    Matrix p = Matrix::identity(n) * 0.5;
    for (Node v = 0; v < n; ++v) {
        auto nb = g.neighbors(v);
        auto wt = g.neighbor_weights(v);
        for (std::size_t i = 0; i < nb.size(); ++i) p(v, nb[i]) += 0.5 * wt[i] / g.degree(nb[i]);
    }
    return p;
}

inline Matrix column_of(std::initializer_list<double> v) { return Matrix::column(v); }

}  // namespace hsn::testing
