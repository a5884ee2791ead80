#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace hsn;
using namespace hsn::testing;

TEST(BuildGraph, TriangleDegrees) {
    const Graph g = build_graph({{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
    EXPECT_EQ(g.num_nodes(), 3u);
    EXPECT_EQ(g.num_edges(), 3u);
    EXPECT_EQ(g.degrees(), (std::vector<double>{2, 2, 2}));
}

TEST(BuildGraph, PathDegrees) {
    const Graph g = build_graph({{0, 1, 1}, {1, 2, 1}});
    EXPECT_EQ(g.degrees(), (std::vector<double>{1, 2, 1}));
}

TEST(BuildGraph, ConflictingDuplicateWeightsRejected) {
    EXPECT_THROW(build_graph({{0, 1, 0.5}, {1, 0, 0.7}}), NonSymmetricInput);
}

TEST(BuildGraph, IdenticalDuplicateStoredOnce) {
    const Graph g = build_graph({{0, 1, 0.5}, {1, 0, 0.5}});
    EXPECT_EQ(g.num_edges(), 1u);
    EXPECT_DOUBLE_EQ(g.degree(0), 0.5);
}

TEST(BuildGraph, SelfLoopRejected) { EXPECT_THROW(build_graph({{0, 0, 1}}), SelfLoop); }

TEST(BuildGraph, NonPositiveWeightRejected) {
    EXPECT_THROW(build_graph({{0, 1, 0.0}}), InvalidArgument);
    EXPECT_THROW(build_graph({{0, 1, -1.0}}), InvalidArgument);
}

TEST(BuildGraph, OutOfRangeNodeRejected) {
    const std::vector<Edge> e{{0, 5, 1}};
    EXPECT_THROW(build_graph(3, e), InvalidArgument);
}

TEST(BuildGraph, IsolatedNodeFlagged) {
    const std::vector<Edge> e{{0, 1, 1}};
    const Graph g = build_graph(3, e);
    EXPECT_TRUE(g.has_isolated_nodes());
    EXPECT_FALSE(build_graph({{0, 1, 1}}).has_isolated_nodes());
}

TEST(BuildGraph, CsrInvariantsOnRandomGraphs) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Graph g = random_weighted_graph(30, 0.15, rng);
        for (Node v = 0; v < g.num_nodes(); ++v) {
            auto nb = g.neighbors(v);
            auto wt = g.neighbor_weights(v);
            EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
            double row = 0.0;
            for (std::size_t i = 0; i < nb.size(); ++i) {
                EXPECT_NE(nb[i], v);
                EXPECT_GT(wt[i], 0.0);
                EXPECT_EQ(g.edge_weight(nb[i], v), wt[i]);
                row += wt[i];
            }
            EXPECT_NEAR(row, g.degree(v), 1e-12);
        }
    }
}

TEST(ApplyOperator, LazyWalkKillsC4TwoColoring) {
    const Graph g = fixtures::cycle(4);
    const Matrix y = apply_operator(g, OperatorKind::lazy_walk(), column_of({1, -1, 1, -1}));
    EXPECT_LT(max_abs_diff(y, Matrix(4, 1)), 1e-15);
}

TEST(ApplyOperator, LazyWalkFixesConstantsOnRegularGraphs) {
    for (const Graph& g : {fixtures::cycle(7), fixtures::complete_graph(5), fixtures::hypercube(3)}) {
        const Matrix one(g.num_nodes(), 2, 1.0);
        EXPECT_LT(max_abs_diff(apply_operator(g, OperatorKind::lazy_walk(), one), one), 1e-14);
    }
}

TEST(ApplyOperator, LazyWalkMatchesNodeForm) {
    std::mt19937_64 rng(2);
    const Graph g = random_weighted_graph(12, 0.3, rng);
    const Matrix x = random_matrix(12, 3, rng);
    const Matrix y = apply_operator(g, OperatorKind::lazy_walk(), x);
    for (Node v = 0; v < 12; ++v)
        for (std::size_t c = 0; c < 3; ++c) {
            double expect = 0.5 * x(v, c);
            auto nb = g.neighbors(v);
            auto wt = g.neighbor_weights(v);
            for (std::size_t i = 0; i < nb.size(); ++i) expect += 0.5 * wt[i] * x(nb[i], c) / g.degree(nb[i]);
            EXPECT_NEAR(y(v, c), expect, 1e-13);
        }
}

TEST(ApplyOperator, ResidualWithZeroAlphaIsIdentity) {
    std::mt19937_64 rng(3);
    const Graph g = random_weighted_graph(10, 0.3, rng);
    const Matrix x = random_matrix(10, 4, rng);
    EXPECT_LT(max_abs_diff(apply_operator(g, OperatorKind::residual(0.0), x), x), 1e-15);
}

TEST(ApplyOperator, ResidualRejectsNegativeAlpha) {
    EXPECT_THROW(OperatorKind::residual(-0.1), InvalidArgument);
}

TEST(ApplyOperator, RenormAdjacencyOnK2) {
    const Graph g = build_graph({{0, 1, 1}});
    const Matrix y = apply_operator(g, OperatorKind::renorm_adjacency(), column_of({3, 1}));
    EXPECT_NEAR(y(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(y(1, 0), 2.0, 1e-15);
}

TEST(ApplyOperator, DenseFormsMatchDefinitions) {
    std::mt19937_64 rng(4);
    const Graph g = random_weighted_graph(8, 0.4, rng);
    const std::size_t n = 8;
    Matrix w(n, n), dinv(n, n), dhalf(n, n), dtilde(n, n);
    for (const auto& e : g.edges()) w(e.u, e.v) = w(e.v, e.u) = e.weight;
    for (Node v = 0; v < n; ++v) {
        dinv(v, v) = 1.0 / g.degree(v);
        dhalf(v, v) = 1.0 / std::sqrt(g.degree(v));
        dtilde(v, v) = 1.0 / std::sqrt(g.degree(v) + 1.0);
    }
    const Matrix id = Matrix::identity(n);
    const Matrix wd = matmul(w, dinv);
    EXPECT_LT(max_abs_diff(dense_operator(g, OperatorKind::lazy_walk()), (id + wd) * 0.5), 1e-14);
    EXPECT_LT(max_abs_diff(dense_operator(g, OperatorKind::random_walk()), wd), 1e-14);
    EXPECT_LT(max_abs_diff(dense_operator(g, OperatorKind::residual(0.7)), (id + wd * 0.7) * (1.0 / 1.7)), 1e-14);
    EXPECT_LT(max_abs_diff(dense_operator(g, OperatorKind::renorm_adjacency()),
                           matmul(dtilde, matmul(id + w, dtilde))),
              1e-14);
    EXPECT_LT(max_abs_diff(dense_operator(g, OperatorKind::sym_norm_adjacency()), id + matmul(dhalf, matmul(w, dhalf))),
              1e-14);
}

TEST(ApplyOperator, TransposeMatchesDenseTranspose) {
    std::mt19937_64 rng(5);
    const Graph g = random_weighted_graph(9, 0.3, rng);
    for (auto kind : {OperatorKind::lazy_walk(), OperatorKind::random_walk(), OperatorKind::residual(2.0),
                      OperatorKind::renorm_adjacency(), OperatorKind::sym_norm_adjacency()}) {
        const Matrix dense = dense_operator(g, kind);
        const Matrix t = apply_operator_transpose(g, kind, Matrix::identity(9));
        EXPECT_LT(max_abs_diff(t, dense.transpose()), 1e-14);
    }
}

TEST(ApplyOperator, IsolatedNodeRejectedForInverseDegreeKinds) {
    const std::vector<Edge> e{{0, 1, 1}};
    const Graph g = build_graph(3, e);
    const Matrix x(3, 1, 1.0);
    for (auto kind : {OperatorKind::lazy_walk(), OperatorKind::random_walk(), OperatorKind::residual(1.0),
                      OperatorKind::sym_norm_adjacency()})
        EXPECT_THROW(apply_operator(g, kind, x), IsolatedNode);
    // A = D~^-1/2 (I + W) D~^-1/2 is defined for isolated nodes.
    const Matrix y = apply_operator(g, OperatorKind::renorm_adjacency(), x);
    EXPECT_DOUBLE_EQ(y(2, 0), 1.0);
}

TEST(ApplyOperator, DimensionMismatch) {
    const Graph g = fixtures::cycle(4);
    EXPECT_THROW(apply_operator(g, OperatorKind::lazy_walk(), Matrix(3, 1)), DimensionMismatch);
}

TEST(ApplyOperator, InputUnchanged) {
    std::mt19937_64 rng(6);
    const Graph g = random_weighted_graph(7, 0.4, rng);
    const Matrix x = random_matrix(7, 2, rng);
    const Matrix copy = x;
    (void)apply_operator(g, OperatorKind::lazy_walk(), x);
    EXPECT_EQ(x, copy);
}

TEST(OperatorPower, OneStepEqualsApply) {
    std::mt19937_64 rng(7);
    const Graph g = random_weighted_graph(10, 0.3, rng);
    const Matrix x = random_matrix(10, 2, rng);
    EXPECT_EQ(operator_power_apply(g, OperatorKind::lazy_walk(), 1, x),
              apply_operator(g, OperatorKind::lazy_walk(), x));
}

TEST(OperatorPower, C6TwoStepsKillTwoColoring) {
    const Graph g = fixtures::cycle(6);
    const Matrix y = operator_power_apply(g, OperatorKind::lazy_walk(), 2, column_of({1, -1, 1, -1, 1, -1}));
    EXPECT_LT(max_abs_diff(y, Matrix(6, 1)), 1e-15);
}

TEST(OperatorPower, ZeroPowerRejected) {
    EXPECT_THROW(operator_power_apply(fixtures::cycle(4), OperatorKind::lazy_walk(), 0, Matrix(4, 1)),
                 InvalidArgument);
}

TEST(OperatorPower, MassConservedAtEveryPower) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const Graph g = random_weighted_graph(15, 0.2, rng);
        const Matrix x = random_matrix(15, 3, rng);
        for (std::size_t t : {1u, 2u, 5u, 16u}) {
            const Matrix y = operator_power_apply(g, OperatorKind::lazy_walk(), t, x);
            EXPECT_LT(max_abs_diff(column_sums(y), column_sums(x)), 1e-10);
        }
    }
}

TEST(OperatorPower, MatchesDensePower) {
    std::mt19937_64 rng(9);
    const Graph g = random_weighted_graph(9, 0.3, rng);
    const Matrix x = random_matrix(9, 2, rng);
    const Matrix dense = dense_power(dense_lazy_walk(g), 5);
    EXPECT_LT(max_abs_diff(operator_power_apply(g, OperatorKind::lazy_walk(), 5, x), matmul(dense, x)), 1e-12);
}

TEST(OperatorProperties, LazyWalkSelfAdjointInWeightedInnerProduct) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Graph g = random_weighted_graph(20, 0.2, rng);
        const Matrix x = random_matrix(20, 1, rng), y = random_matrix(20, 1, rng);
        const double lhs = weighted_inner(g, apply_operator(g, OperatorKind::lazy_walk(), x), y);
        const double rhs = weighted_inner(g, x, apply_operator(g, OperatorKind::lazy_walk(), y));
        EXPECT_NEAR(lhs, rhs, 1e-10);
    }
}

TEST(OperatorProperties, Linearity) {
    std::mt19937_64 rng(11);
    const Graph g = random_weighted_graph(15, 0.3, rng);
    const Matrix x = random_matrix(15, 3, rng), y = random_matrix(15, 3, rng);
    const double a = 1.7, b = -0.4;
    for (auto kind : {OperatorKind::lazy_walk(), OperatorKind::random_walk(), OperatorKind::residual(0.35),
                      OperatorKind::renorm_adjacency(), OperatorKind::sym_norm_adjacency()}) {
        const Matrix lhs = apply_operator(g, kind, x * a + y * b);
        const Matrix rhs = apply_operator(g, kind, x) * a + apply_operator(g, kind, y) * b;
        EXPECT_LT(max_abs_diff(lhs, rhs), 1e-10);
    }
}

TEST(OperatorProperties, RenormAdjacencySpectrumInUnitInterval) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        const Graph g = random_weighted_graph(40, 0.1, rng);
        const auto eig = eigendecompose(dense_operator(g, OperatorKind::renorm_adjacency()));
        EXPECT_GE(eig.eigenvalues.front(), -1.0 - 1e-10);
        EXPECT_LE(eig.eigenvalues.back(), 1.0 + 1e-10);
    }
}

TEST(Neighborhood, PathExamples) {
    const Graph g = fixtures::path_graph(3);
    EXPECT_EQ(neighborhood(g, 0, 1), (std::vector<Node>{1}));
    EXPECT_EQ(neighborhood(g, 0, 2), (std::vector<Node>{1, 2}));
    EXPECT_TRUE(neighborhood(g, 1, 0).empty());
}

TEST(Neighborhood, ClosedZeroIsSelf) {
    const Graph g = fixtures::cycle(5);
    for (Node v = 0; v < 5; ++v) EXPECT_EQ(closed_neighborhood(g, v, 0), (std::vector<Node>{v}));
}

TEST(Neighborhood, MatchesBfsDistances) {
    std::mt19937_64 rng(13);
    const Graph g = fixtures::random_connected_graph(25, 0.05, rng);
    for (Node v = 0; v < 25; v += 4) {
        const auto dist = bfs_distances(g, v);
        for (std::size_t k = 0; k < 5; ++k) {
            std::vector<Node> expect;
            for (Node u = 0; u < 25; ++u)
                if (dist[u] >= 1 && dist[u] <= k) expect.push_back(u);
            EXPECT_EQ(neighborhood(g, v, k), expect);
        }
    }
}

TEST(Neighborhood, OutOfRangeRejected) {
    EXPECT_THROW(neighborhood(fixtures::cycle(4), 9, 1), InvalidArgument);
}

TEST(Bfs, MultiSourceIsMinimumOverSources) {
    std::mt19937_64 rng(14);
    const Graph g = fixtures::random_connected_graph(20, 0.08, rng);
    const std::vector<Node> sources{3, 11, 17};
    const auto multi = bfs_distances(g, std::span<const Node>(sources));
    std::vector<std::vector<std::size_t>> single;
    for (Node s : sources) single.push_back(bfs_distances(g, s));
    for (Node u = 0; u < 20; ++u)
        EXPECT_EQ(multi[u], std::min({single[0][u], single[1][u], single[2][u]}));
}

TEST(EdgeList, ParsesCommentsAndOptionalWeights) {
    std::istringstream in("# header\n0\t1\n1\t2\t0.5\n\n2 3 2 # trailing comment\n");
    const auto edges = parse_edge_list(in);
    ASSERT_EQ(edges.size(), 3u);
    EXPECT_DOUBLE_EQ(edges[0].weight, 1.0);
    EXPECT_DOUBLE_EQ(edges[1].weight, 0.5);
    EXPECT_EQ(edges[2].u, 2u);
    EXPECT_EQ(edges[2].v, 3u);
}

TEST(EdgeList, MalformedLinesReportLineNumber) {
    std::istringstream a("0\t1\n5\n");
    try {
        parse_edge_list(a, "g.tsv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("g.tsv:2"), std::string::npos);
    }
    std::istringstream b("0\t1\tx\n");
    EXPECT_THROW(parse_edge_list(b), ParseError);
    std::istringstream c("0\t1\t1\t7\n");
    EXPECT_THROW(parse_edge_list(c), ParseError);
    std::istringstream d("-1\t1\n");
    EXPECT_THROW(parse_edge_list(d), ParseError);
}

TEST(EdgeList, RoundTrip) {
    std::mt19937_64 rng(15);
    const Graph g = random_weighted_graph(12, 0.3, rng);
    std::stringstream buf;
    write_edge_list(buf, g);
    const Graph h = build_graph(12, parse_edge_list(buf));
    EXPECT_EQ(h.csr_offsets(), g.csr_offsets());
    EXPECT_EQ(h.csr_targets(), g.csr_targets());
    EXPECT_EQ(h.csr_weights(), g.csr_weights());
}

TEST(EdgeList, MissingFile) { EXPECT_THROW(read_edge_list("/nonexistent/edges.tsv"), MissingFile); }
