#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hsn/fixtures.hpp"
#include "hsn/graph.hpp"
#include "hsn/scattering.hpp"
#include "hsn/theory.hpp"
#include "hsn/wavelets.hpp"

// The constructive fixture suite behind `hsn verify-theory`.

namespace hsn {

struct SuiteRow {
    std::string group;
    std::string name;
    bool passed = false;
    double value = 0.0;  ///< max deviation, or min separation for separation checks
    std::string detail;
};

namespace detail {

/// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(Matrix m) {
    const std::size_t n = m.rows();
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (m(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
            det = -det;
        }
        det *= m(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m(r, c) / m(c, c);
            for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
        }
    }
    return det;
}

/// Gaussian square matrix redrawn until |det| >= 1e-3.
inline Matrix random_invertible(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        Matrix m(d, d);
        for (double& x : m.data()) x = normal(rng);
        if (std::abs(determinant(m)) >= 1e-3) return m;
    }
}

}  // namespace detail

/// The unnormalized GCN filter I + D^-1/2 W D^-1/2, iterated 1..3 times, sends
/// the two-coloring of a regular bipartite graph to zero; Psi_0 returns it.
inline std::vector<SuiteRow> two_coloring_suite() {
    struct Named {
        std::string name;
        Graph g;
    };
    std::vector<Named> graphs{{"C4", fixtures::cycle(4)},
                              {"C6", fixtures::cycle(6)},
                              {"C8", fixtures::cycle(8)},
                              {"K33", fixtures::complete_bipartite(3, 3)},
                              {"3-cube", fixtures::hypercube(3)}};
    std::vector<SuiteRow> rows;
    for (const auto& [name, g] : graphs) {
        const Matrix x = fixtures::two_coloring(g);
        const Matrix zero(g.num_nodes(), 1);
        double gcn_dev = 0.0, psi_dev = 0.0;
        for (std::size_t t = 1; t <= 3; ++t) {
            gcn_dev = std::max(gcn_dev, max_abs_diff(operator_power_apply(g, OperatorKind::sym_norm_adjacency(), t, x), zero));
            Matrix y = x;
            for (std::size_t i = 0; i < t; ++i) y = wavelet_apply(WaveletBank(g, 0), 0, y);
            psi_dev = std::max(psi_dev, max_abs_diff(y, x));
        }
        rows.push_back({"two-coloring", name + " gcn", gcn_dev < 1e-12, gcn_dev, "filter^t x = 0, t = 1..3"});
        rows.push_back({"two-coloring", name + " psi0", psi_dev < 1e-12, psi_dev, "psi0^t x = x, t = 1..3"});
    }
    return rows;
}

inline std::vector<fixtures::PairFixture> indistinguishability_fixtures() {
    return {fixtures::cycle_rotation(6, 1),   fixtures::cycle_rotation(8, 3, 1, 3), fixtures::k33_swap(),
            fixtures::cube_antipodal(),       fixtures::barbell_mirror(),           fixtures::pendant_pair(4, 1, 2),
            fixtures::triangle_tail_pair(4)};
}

/// Random ReLU GCN stacks cannot separate v from phi(v).
inline std::vector<SuiteRow> indistinguishability_suite(std::size_t draws = 100, std::uint64_t seed = 0) {
    std::vector<SuiteRow> rows;
    for (const auto& f : indistinguishability_fixtures()) {
        SuiteRow r{"gcn-blind", f.name, false, 0.0, ""};
        try {
            const auto v = verify_theorem1(f.g, f.phi, f.v, f.k, f.l, f.kinds, draws, seed);
            r.passed = v.passed;
            r.value = v.max_deviation;
            r.detail = "K=" + std::to_string(f.k) + " L=" + std::to_string(f.l) + " draws=" + std::to_string(draws);
        } catch (const Error& e) {
            r.detail = e.what();
        }
        rows.push_back(r);
    }
    return rows;
}

/// Binary-expansion cascades separate the triangle-tail pairs at distance d,
/// with the onion layers matching the generalized path, for Theta = I and
/// for random invertible Theta.
inline std::vector<SuiteRow> separation_suite(std::vector<std::size_t> distances = {1, 2, 3, 5},
                                            std::size_t theta_draws = 20, std::uint64_t seed = 0) {
    std::mt19937_64 rng(seed);
    const Nonlinearity sigma = Nonlinearity::leaky_relu(0.2);
    std::vector<SuiteRow> rows;
    for (std::size_t d : distances) {
        const auto f = fixtures::triangle_tail_pair(d);
        const Matrix x = f.features();
        SuiteRow sep{"separation", f.name + " separation", true, std::numeric_limits<double>::infinity(), ""};
        SuiteRow onion{"onion", f.name + " onion layers", true, 0.0, ""};
        std::size_t runs = 0;
        try {
            for (std::size_t i = 0; i <= theta_draws; ++i) {
                const Matrix theta = i == 0 ? Matrix::identity(x.cols()) : detail::random_invertible(x.cols(), rng);
                const auto rep = verify_theorem2(f.g, f.phi, f.v, f.k, f.l, x, sigma, theta);
                ++runs;
                sep.value = std::min(sep.value, rep.separation);
                if (!rep.separated || rep.d != d) sep.passed = false;
                if (!rep.onion_match || !rep.cascade_match) onion.passed = false;
                sep.detail = "p=" + rep.p.to_string();
            }
            sep.detail += " theta draws=" + std::to_string(runs);
            onion.detail = "U_j match at every j <= " + std::to_string(d);
        } catch (const Error& e) {
            sep.passed = onion.passed = false;
            sep.detail = onion.detail = e.what();
        }
        rows.push_back(sep);
        rows.push_back(onion);
    }
    return rows;
}

/// Fixtures whose hypotheses must be rejected, plus one that must pass.
inline std::vector<SuiteRow> guard_suite() {
    const Nonlinearity sigma = Nonlinearity::leaky_relu(0.2);
    std::vector<SuiteRow> rows;
    auto expect_violation = [&](const std::string& name, auto&& call) {
        SuiteRow r{"guards", name, false, 0.0, "no HypothesisViolated raised"};
        try {
            call();
        } catch (const HypothesisViolated& e) {
            r.passed = true;
            r.detail = e.what();
        } catch (const Error& e) {
            r.detail = std::string("unexpected error: ") + e.what();
        }
        rows.push_back(r);
    };
    const auto gadget = fixtures::coincidence_gadget();
    expect_violation("separation guard " + gadget.name, [&] {
        verify_theorem2(gadget.g, gadget.phi, gadget.v, gadget.k, gadget.l, gadget.features(), sigma);
    });
    const auto eq = fixtures::equidistant_pair();
    expect_violation("unique-path guard " + eq.name,
                     [&] { verify_theorem3(eq.g, eq.phi, eq.v, eq.k, eq.l, eq.features(), sigma); });
    const auto two = fixtures::two_path_pair();
    expect_violation("unique-path guard " + two.name,
                     [&] { verify_theorem3(two.g, two.phi, two.v, two.k, two.l, two.features(), sigma); });
    const auto tail = fixtures::triangle_tail_pair(3);
    expect_violation("separation guard " + tail.name + " relu",
                     [&] { verify_theorem2(tail.g, tail.phi, tail.v, tail.k, tail.l, tail.kinds, Nonlinearity::relu()); });

    SuiteRow ok{"guards", "unique-path guard " + tail.name, false, 0.0, ""};
    try {
        const auto rep = verify_theorem3(tail.g, tail.phi, tail.v, tail.k, tail.l, tail.kinds, sigma);
        ok.passed = rep.separated;
        ok.value = rep.separation;
        ok.detail = "unique path, separated";
    } catch (const Error& e) {
        ok.detail = e.what();
    }
    rows.push_back(ok);
    return rows;
}

inline std::vector<SuiteRow> theory_suite(std::size_t gcn_draws = 100, std::size_t theta_draws = 20,
                                          std::uint64_t seed = 0) {
    std::vector<SuiteRow> rows = two_coloring_suite();
    auto append = [&](std::vector<SuiteRow> more) { rows.insert(rows.end(), more.begin(), more.end()); };
    append(indistinguishability_suite(gcn_draws, seed));
    append(separation_suite({1, 2, 3, 5}, theta_draws, seed));
    append(guard_suite());
    return rows;
}

}  // namespace hsn
