#include <gtest/gtest.h>

#include "support.hpp"

using namespace hsn;
using namespace hsn::testing;

namespace {

double weighted_norm(const Graph& g, const Matrix& x) { return std::sqrt(weighted_inner(g, x, x)); }

Matrix dense_wavelet(const Matrix& p, std::size_t k) {
    const std::size_t n = p.rows();
    if (k == 0) return Matrix::identity(n) - p;
    return dense_power(p, std::size_t{1} << (k - 1)) - dense_power(p, std::size_t{1} << k);
}

}  // namespace

TEST(WaveletApply, Psi0KeepsC4TwoColoring) {
    const Graph g = fixtures::cycle(4);
    const WaveletBank bank(g, 2);
    const Matrix x = column_of({1, -1, 1, -1});
    EXPECT_LT(max_abs_diff(wavelet_apply(bank, 0, x), x), 1e-15);
}

TEST(WaveletApply, ConstantsVanishOnRegularGraphs) {
    for (const Graph& g : {fixtures::cycle(9), fixtures::complete_bipartite(3, 3), fixtures::hypercube(4)}) {
        const WaveletBank bank(g, 4);
        const Matrix one(g.num_nodes(), 1, 1.0);
        for (std::size_t k = 0; k <= 4; ++k) EXPECT_LT(max_abs_diff(wavelet_apply(bank, k, one), Matrix(g.num_nodes(), 1)), 1e-12);
    }
}

TEST(WaveletApply, PathOfThreeHandValue) {
    const Graph g = fixtures::path_graph(3);
    const WaveletBank bank(g, 1);
    const Matrix y = wavelet_apply(bank, 1, column_of({1, 0, 0}));
    EXPECT_NEAR(y(0, 0), 0.125, 1e-15);
    EXPECT_NEAR(y(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(y(2, 0), -0.125, 1e-15);
    const Matrix p = dense_lazy_walk(g);
    EXPECT_LT(max_abs_diff(y, matmul(p - matmul(p, p), column_of({1, 0, 0}))), 1e-15);
}

TEST(WaveletApply, ScaleOutOfRange) {
    const Graph g = fixtures::cycle(5);
    const WaveletBank bank(g, 2);
    EXPECT_THROW(wavelet_apply(bank, 3, Matrix(5, 1)), ScaleOutOfRange);
}

TEST(WaveletApply, IsolatedNode) {
    const std::vector<Edge> e{{0, 1, 1}};
    const Graph g = build_graph(3, e);
    const WaveletBank bank(g, 1);
    EXPECT_THROW(wavelet_apply(bank, 1, Matrix(3, 1, 1.0)), IsolatedNode);
    EXPECT_THROW(lowpass_apply(bank, Matrix(3, 1, 1.0)), IsolatedNode);
    EXPECT_THROW(bank_sweep(bank, Matrix(3, 1, 1.0)), IsolatedNode);
}

TEST(WaveletApply, MatchesDenseOracleOnSmallGraphs) {
    std::mt19937_64 rng(1);
    for (std::size_t n = 2; n <= 16; ++n) {
        const Graph g = random_weighted_graph(n, 0.3, rng);
        const WaveletBank bank(g, 4);
        const Matrix p = dense_lazy_walk(g);
        const Matrix x = random_matrix(n, 3, rng);
        for (std::size_t k = 0; k <= 4; ++k) {
            const Matrix dense = dense_wavelet(p, k);
            EXPECT_LT(max_abs_diff(wavelet_apply(bank, k, x), matmul(dense, x)), 1e-9) << "n=" << n << " k=" << k;
            EXPECT_LT(max_abs_diff(wavelet_apply_transpose(bank, k, x), matmul(dense.transpose(), x)), 1e-9);
        }
        EXPECT_LT(max_abs_diff(lowpass_apply(bank, x), matmul(dense_power(p, 16), x)), 1e-9);
    }
}

TEST(WaveletApply, NonExpansiveInWeightedNorm) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const Graph g = random_weighted_graph(20, 0.2, rng);
        const WaveletBank bank(g, 4);
        const Matrix x = random_matrix(20, 1, rng);
        const double nx = weighted_norm(g, x);
        for (std::size_t k = 0; k <= 4; ++k) EXPECT_LE(weighted_norm(g, wavelet_apply(bank, k, x)), nx * (1 + 1e-8));
        EXPECT_LE(weighted_norm(g, lowpass_apply(bank, x)), nx * (1 + 1e-8));
    }
}

TEST(LowpassApply, ScaleZeroIsOneStep) {
    std::mt19937_64 rng(3);
    const Graph g = random_weighted_graph(10, 0.3, rng);
    const Matrix x = random_matrix(10, 2, rng);
    EXPECT_EQ(lowpass_apply(WaveletBank(g, 0), x), apply_operator(g, OperatorKind::lazy_walk(), x));
}

TEST(LowpassApply, ConstantUnchangedOnRegularGraph) {
    const Graph g = fixtures::hypercube(3);
    const Matrix one(8, 1, 1.0);
    EXPECT_LT(max_abs_diff(lowpass_apply(WaveletBank(g, 3), one), one), 1e-14);
}

TEST(LowpassApply, ConvergesToStationaryDirection) {
    std::mt19937_64 rng(4);
    for (std::size_t n : {6u, 11u, 16u}) {
        const Graph g = random_weighted_graph(n, 0.4, rng);
        const Matrix x = random_matrix(n, 1, rng);
        const Matrix y = lowpass_apply(WaveletBank(g, 12), x);
        EXPECT_LT(max_abs_diff(y, matmul(dense_power(dense_lazy_walk(g), 4096), x)), 1e-9);
        double total = 0.0, mass = 0.0;
        for (Node v = 0; v < n; ++v) {
            total += g.degree(v);
            mass += x(v, 0);
        }
        for (Node v = 0; v < n; ++v) EXPECT_NEAR(y(v, 0), mass * g.degree(v) / total, 1e-8);
    }
}

TEST(BankSweep, Telescopes) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Graph g = random_weighted_graph(30, 0.1, rng);
        for (std::size_t K = 0; K <= 4; ++K) {
            const Matrix x = random_matrix(30, 2, rng);
            const auto parts = bank_sweep(WaveletBank(g, K), x);
            ASSERT_EQ(parts.size(), K + 2);
            Matrix total(30, 2);
            for (const auto& m : parts) total += m;
            EXPECT_LT(max_abs_diff(total, x), 1e-10);
        }
    }
}

TEST(BankSweep, C4TwoColoring) {
    const Graph g = fixtures::cycle(4);
    const Matrix x = column_of({1, -1, 1, -1});
    const auto parts = bank_sweep(WaveletBank(g, 1), x);
    ASSERT_EQ(parts.size(), 3u);
    EXPECT_LT(max_abs_diff(parts[0], x), 1e-15);
    EXPECT_LT(max_abs_diff(parts[1], Matrix(4, 1)), 1e-15);
    EXPECT_LT(max_abs_diff(parts[2], Matrix(4, 1)), 1e-15);
}

TEST(BankSweep, ZeroInput) {
    const Graph g = fixtures::cycle(6);
    for (const auto& m : bank_sweep(WaveletBank(g, 3), Matrix(6, 2))) EXPECT_EQ(m, Matrix(6, 2));
}

TEST(BankSweep, MatchesSeparateApplications) {
    std::mt19937_64 rng(6);
    const Graph g = random_weighted_graph(14, 0.3, rng);
    const WaveletBank bank(g, 3);
    const Matrix x = random_matrix(14, 3, rng);
    const auto parts = bank_sweep(bank, x);
    for (std::size_t k = 0; k <= 3; ++k) EXPECT_LT(max_abs_diff(parts[k], wavelet_apply(bank, k, x)), 1e-13);
    EXPECT_LT(max_abs_diff(parts[4], lowpass_apply(bank, x)), 1e-13);
}

TEST(BankSweep, SharedChainUsesTwoToTheKMatvecs) {
    const Graph g = fixtures::cycle(10);
    for (std::size_t K = 0; K <= 5; ++K) {
        std::size_t count = 0;
        bank_sweep(WaveletBank(g, K), Matrix(10, 1, 1.0), &count);
        EXPECT_EQ(count, std::size_t{1} << K);
    }
}

TEST(BankSweep, RetainsDyadicPowersWhenAsked) {
    std::mt19937_64 rng(7);
    const Graph g = random_weighted_graph(9, 0.4, rng);
    const Matrix x = random_matrix(9, 1, rng);
    std::vector<Matrix> dyadic;
    bank_sweep(WaveletBank(g, 3, true), x, nullptr, &dyadic);
    ASSERT_EQ(dyadic.size(), 4u);
    for (std::size_t j = 0; j < 4; ++j)
        EXPECT_LT(max_abs_diff(dyadic[j], operator_power_apply(g, OperatorKind::lazy_walk(), std::size_t{1} << j, x)),
                  1e-13);
    std::vector<Matrix> none;
    bank_sweep(WaveletBank(g, 3, false), x, nullptr, &none);
    EXPECT_TRUE(none.empty());
}

TEST(WaveletBankConfig, DefaultScaleAndLimit) {
    const Graph g = fixtures::cycle(4);
    EXPECT_EQ(WaveletBank(g).max_scale(), 3u);
    EXPECT_THROW(WaveletBank(g, 21), InvalidArgument);
}
