#include <gtest/gtest.h>

#include "support.hpp"

using namespace hsn;
using namespace hsn::testing;

namespace {

ParamTensor param(Matrix m) { return ParamTensor("p", std::move(m)); }

}  // namespace

TEST(Cascade, EmptyPathIsIdentity) {
    std::mt19937_64 rng(1);
    const Graph g = random_weighted_graph(8, 0.3, rng);
    const Matrix x = random_matrix(8, 3, rng);
    EXPECT_EQ(cascade(WaveletBank(g), ScatteringPath{}, Nonlinearity::abs(), x), x);
}

TEST(Cascade, Psi0OnC4TwoColoring) {
    const Graph g = fixtures::cycle(4);
    const Matrix x = fixtures::two_coloring(g);
    EXPECT_LT(max_abs_diff(cascade(WaveletBank(g), ScatteringPath{0}, Nonlinearity::abs(), x), x), 1e-15);
}

TEST(Cascade, AbsoluteValueMakesTwoColoringConstant) {
    const Graph g = fixtures::cycle(4);
    const Matrix y = cascade(WaveletBank(g), ScatteringPath{0, 0}, Nonlinearity::abs(), fixtures::two_coloring(g));
    EXPECT_LT(max_abs_diff(y, Matrix(4, 1)), 1e-15);
}

TEST(Cascade, SingleScaleAppliesNoNonlinearity) {
    std::mt19937_64 rng(2);
    const Graph g = random_weighted_graph(10, 0.3, rng);
    const WaveletBank bank(g, 3);
    const Matrix x = random_matrix(10, 2, rng);
    for (std::size_t k = 0; k <= 3; ++k)
        EXPECT_EQ(cascade(bank, ScatteringPath{k}, Nonlinearity::abs(), x), wavelet_apply(bank, k, x));
}

TEST(Cascade, InnerNonlinearityBetweenWavelets) {
    std::mt19937_64 rng(3);
    const Graph g = random_weighted_graph(10, 0.3, rng);
    const WaveletBank bank(g, 3);
    const Matrix x = random_matrix(10, 2, rng);
    const Nonlinearity s = Nonlinearity::leaky_relu(0.3);
    const Matrix expect = wavelet_apply(bank, 3, s.apply(wavelet_apply(bank, 0, s.apply(wavelet_apply(bank, 2, x)))));
    EXPECT_EQ(cascade(bank, ScatteringPath{2, 0, 3}, s, x), expect);
}

TEST(Cascade, ScaleOutOfRange) {
    const Graph g = fixtures::cycle(5);
    EXPECT_THROW(cascade(WaveletBank(g, 1), ScatteringPath{0, 2}, Nonlinearity::abs(), Matrix(5, 1)), ScaleOutOfRange);
}

TEST(Cascade, PermutationEquivariant) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const Graph g = random_weighted_graph(15, 0.2, rng);
        const auto perm = random_permutation(15, rng);
        const Graph pg = permute_graph(g, perm);
        const Matrix x = random_matrix(15, 2, rng);
        const ScatteringPath p{1, 0, 2};
        const Matrix a = cascade(WaveletBank(pg), p, Nonlinearity::abs(), permute_rows(x, perm));
        const Matrix b = permute_rows(cascade(WaveletBank(g), p, Nonlinearity::abs(), x), perm);
        EXPECT_LT(max_abs_diff(a, b), 1e-12);
    }
}

TEST(Cascade, EnergyBoundWithAbsoluteValue) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Graph g = random_weighted_graph(20, 0.2, rng);
        const Matrix x = random_matrix(20, 1, rng);
        const double nx = std::sqrt(weighted_inner(g, x, x));
        for (const ScatteringPath& p : {ScatteringPath{0}, ScatteringPath{1, 2}, ScatteringPath{0, 1, 3}, ScatteringPath{3, 3}}) {
            const Matrix u = cascade(WaveletBank(g), p, Nonlinearity::abs(), x);
            EXPECT_LE(std::sqrt(weighted_inner(g, u, u)), nx * (1 + 1e-8));
        }
    }
}

TEST(BipartiteTwoColoring, GcnFilterFlattensWhilePsi0Preserves) {
    std::vector<Graph> graphs;
    for (std::size_t n = 2; n <= 6; ++n) graphs.push_back(fixtures::cycle(2 * n));
    graphs.push_back(fixtures::complete_bipartite(3, 3));
    graphs.push_back(fixtures::hypercube(3));
    for (const Graph& g : graphs) {
        const Matrix x = fixtures::two_coloring(g);
        const Matrix gcn = apply_operator(g, OperatorKind::sym_norm_adjacency(), x);
        EXPECT_LT(max_abs_diff(gcn, Matrix(g.num_nodes(), 1)), 1e-12);
        EXPECT_LT(max_abs_diff(wavelet_apply(WaveletBank(g), 0, x), x), 1e-12);
    }
}

TEST(GraphMoments, Examples) {
    EXPECT_EQ(graph_moments(Matrix(4, 2), 3), Matrix(3, 2));
    const Matrix m = graph_moments(column_of({1, -1}), 2);
    EXPECT_DOUBLE_EQ(m(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(m(1, 0), 2.0);
    EXPECT_THROW(graph_moments(Matrix(2, 1), 0), InvalidArgument);
}

TEST(GraphMoments, MatchesDirectSum) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix u = random_matrix(5, 3, rng);
        const Matrix m = graph_moments(u, 4);
        for (std::size_t q = 1; q <= 4; ++q)
            for (std::size_t c = 0; c < 3; ++c) {
                double s = 0.0;
                for (std::size_t r = 0; r < 5; ++r) s += std::pow(std::abs(u(r, c)), static_cast<double>(q));
                EXPECT_NEAR(m(q - 1, c), s, 1e-12 * std::max(1.0, s));
            }
    }
}

TEST(ScatterLayer, IdentityParametersReduceToCascade) {
    std::mt19937_64 rng(7);
    const Graph g = random_weighted_graph(9, 0.3, rng);
    const WaveletBank bank(g, 3);
    const Matrix x = random_matrix(9, 3, rng);
    const ScatteringPath p{1, 2};
    const Matrix y = scatter_layer(bank, p, param(Matrix::identity(3)), param(Matrix(1, 3)), Nonlinearity::identity(), x);
    EXPECT_LT(max_abs_diff(y, cascade(bank, p, Nonlinearity::abs(), x)), 1e-14);
}

TEST(ScatterLayer, FourthPowerOfAbsoluteResponse) {
    std::mt19937_64 rng(8);
    const Graph g = random_weighted_graph(9, 0.3, rng);
    const WaveletBank bank(g, 3);
    const Matrix x = random_matrix(9, 3, rng);
    const Matrix theta = random_matrix(3, 2, rng);
    const Matrix y = scatter_layer(bank, ScatteringPath{1}, param(theta), param(Matrix(1, 2)), Nonlinearity::abs_pow(4.0), x);
    const Matrix u = wavelet_apply(bank, 1, matmul(x, theta));
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(y.data()[i], std::pow(std::abs(u.data()[i]), 4.0), 1e-14);
}

TEST(ScatterLayer, DenseOracleOnPathOfThree) {
    std::mt19937_64 rng(9);
    const Graph g = fixtures::path_graph(3);
    const WaveletBank bank(g, 3);
    const Matrix p = dense_lazy_walk(g);
    const Matrix psi0 = Matrix::identity(3) - p;
    const Matrix psi2 = dense_power(p, 2) - dense_power(p, 4);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = random_matrix(3, 2, rng);
        const Matrix theta = random_matrix(2, 3, rng);
        const Matrix bias = random_matrix(1, 3, rng);
        const Nonlinearity abs = Nonlinearity::abs();
        Matrix expect = matmul(psi2, abs.apply(matmul(psi0, matmul(x, theta))));
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) expect(r, c) = std::abs(expect(r, c) + bias(0, c));
        const Matrix y = scatter_layer(bank, ScatteringPath{0, 2}, param(theta), param(bias), abs, x);
        EXPECT_LT(max_abs_diff(y, expect), 1e-10);
    }
}

TEST(ScatterLayer, DimensionMismatch) {
    const Graph g = fixtures::cycle(4);
    EXPECT_THROW(scatter_layer(WaveletBank(g), ScatteringPath{1}, param(Matrix(3, 2)), param(Matrix(1, 2)),
                               Nonlinearity::abs(), Matrix(4, 2)),
                 DimensionMismatch);
    EXPECT_THROW(scatter_layer(WaveletBank(g), ScatteringPath{1}, param(Matrix(2, 2)), param(Matrix(1, 3)),
                               Nonlinearity::abs(), Matrix(4, 2)),
                 DimensionMismatch);
}

TEST(ScatteringPathType, ParsingAndBinaryExpansion) {
    EXPECT_EQ(parse_path("1 3"), (ScatteringPath{1, 3}));
    EXPECT_EQ(parse_path("(0,1)"), (ScatteringPath{0, 1}));
    EXPECT_TRUE(parse_path("()").empty());
    EXPECT_THROW(parse_path("1 x"), ParseError);
    EXPECT_THROW(parse_path("-1"), ParseError);
    EXPECT_EQ(binary_expansion_path(1), (ScatteringPath{0}));
    EXPECT_EQ(binary_expansion_path(3), (ScatteringPath{0, 1}));
    EXPECT_EQ(binary_expansion_path(5), (ScatteringPath{0, 2}));
    for (std::size_t d = 1; d < 100; ++d) EXPECT_EQ(binary_expansion_path(d).reach(), d);
}

TEST(NonlinearityType, AbsPowOneIsAbs) {
    const Nonlinearity a = Nonlinearity::abs(), p = Nonlinearity::abs_pow(1.0);
    for (double x : {-2.5, -1e-3, 0.0, 0.7, 3.0}) {
        EXPECT_EQ(a(x), p(x));
        EXPECT_EQ(a.derivative(x), p.derivative(x));
    }
    EXPECT_THROW(Nonlinearity::abs_pow(0.5), InvalidArgument);
}

TEST(NonlinearityType, SubgradientAtZero) {
    EXPECT_EQ(Nonlinearity::abs().derivative(0.0), 0.0);
    EXPECT_EQ(Nonlinearity::relu().derivative(0.0), 0.0);
    EXPECT_EQ(Nonlinearity::leaky_relu(0.2).derivative(-1.0), 0.2);
}

TEST(NonlinearityType, Monotonicity) {
    EXPECT_TRUE(Nonlinearity::identity().strictly_monotonic());
    EXPECT_TRUE(Nonlinearity::leaky_relu(0.2).strictly_monotonic());
    EXPECT_FALSE(Nonlinearity::abs().strictly_monotonic());
    EXPECT_FALSE(Nonlinearity::relu().strictly_monotonic());
}

TEST(NonlinearityType, Parse) {
    EXPECT_EQ(parse_nonlinearity("abs").kind, Nonlinearity::Kind::AbsVal);
    EXPECT_EQ(parse_nonlinearity("abs^4").param, 4.0);
    EXPECT_EQ(parse_nonlinearity("abspow:3").param, 3.0);
    EXPECT_EQ(parse_nonlinearity("leaky_relu:0.1").param, 0.1);
    EXPECT_EQ(parse_nonlinearity("relu").kind, Nonlinearity::Kind::ReLU);
    EXPECT_EQ(parse_nonlinearity("identity").kind, Nonlinearity::Kind::Identity);
    EXPECT_THROW(parse_nonlinearity("tanh"), ParseError);
}
