#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "hsn/graph.hpp"
#include "hsn/matrix.hpp"
#include "hsn/wavelets.hpp"

// Dense spectral tools for small graphs. Only used to validate the sparse
// filters against their frequency-domain behaviour; training never calls in here.

namespace hsn {

inline constexpr std::size_t kDefaultDenseLimit = 2048;

struct EigenDecomposition {
    std::vector<double> eigenvalues;  ///< ascending
    Matrix eigenvectors;              ///< column i pairs with eigenvalues[i]
};

struct JacobiOptions {
    double tolerance = 1e-12;  ///< on the off-diagonal Frobenius norm, relative to max(1, ||M||_F)
    std::size_t max_sweeps = 100;
    double symmetry_tolerance = 1e-10;
};

inline void check_dense_size(std::size_t n, std::size_t limit) {
    if (n > limit) {
        throw TooLargeForDense("graph with " + std::to_string(n) + " nodes exceeds dense limit " +
                               std::to_string(limit));
    }
}

/// L = I - D^-1/2 W D^-1/2, symmetrized after rounding.
inline Matrix sym_normalized_laplacian(const Graph& g, std::size_t dense_limit = kDefaultDenseLimit) {
    check_dense_size(g.num_nodes(), dense_limit);
    // 2I - (I + D^-1/2 W D^-1/2)
    Matrix l = Matrix::identity(g.num_nodes()) * 2.0 - dense_operator(g, OperatorKind::sym_norm_adjacency());
    for (std::size_t i = 0; i < l.rows(); ++i)
        for (std::size_t j = i + 1; j < l.cols(); ++j) {
            const double s = 0.5 * (l(i, j) + l(j, i));
            l(i, j) = l(j, i) = s;
        }
    return l;
}

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
inline EigenDecomposition eigendecompose(const Matrix& m, const JacobiOptions& opt = {}) {
    if (m.rows() != m.cols()) throw DimensionMismatch("eigendecompose: matrix is not square");
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > opt.symmetry_tolerance) {
                throw NotSymmetric("eigendecompose: entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") breaks symmetry");
            }

    Matrix a = m;
    Matrix v = Matrix::identity(n);
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    const double scale = std::max(1.0, frobenius_norm(m));
    std::size_t sweep = 0;
    while (off_norm() > opt.tolerance * scale) {
        if (sweep++ == opt.max_sweeps) {
            throw NoConvergence("Jacobi eigensolver did not converge in " + std::to_string(opt.max_sweeps) +
                                " sweeps");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = a(src, src);
        // Sign convention: the largest-magnitude entry is positive; ties go to the lowest index.
        std::size_t best = 0;
        for (std::size_t r = 1; r < n; ++r)
            if (std::abs(v(r, src)) > std::abs(v(best, src)) + 1e-12) best = r;
        const double sign = v(best, src) < 0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = sign * v(r, src);
    }
    return out;
}

/// Graph Fourier transform X^ = Q^T X.
inline FeatureMatrix graph_fourier(const FeatureMatrix& x, const EigenDecomposition& eig) {
    if (x.rows() != eig.eigenvectors.rows()) throw DimensionMismatch("graph_fourier: row count mismatch");
    return matmul_tn(eig.eigenvectors, x);
}

/// Inverse transform X = Q X^.
inline FeatureMatrix inverse_fourier(const FeatureMatrix& xhat, const EigenDecomposition& eig) {
    if (xhat.rows() != eig.eigenvectors.cols()) throw DimensionMismatch("inverse_fourier: row count mismatch");
    return matmul(eig.eigenvectors, xhat);
}

// ---------------------------------------------------------------------------
// Chebyshev filters on the rescaled Laplacian L~ = 2 L / lambda_max - I.

/// sum_j theta_j T_j(x).
inline double chebyshev_series(double x, std::span<const double> theta) {
    if (theta.empty()) return 0.0;
    double t_prev = 1.0, t_cur = x;
    double acc = theta[0];
    if (theta.size() > 1) acc += theta[1] * x;
    for (std::size_t j = 2; j < theta.size(); ++j) {
        const double t_next = 2.0 * x * t_cur - t_prev;
        acc += theta[j] * t_next;
        t_prev = t_cur;
        t_cur = t_next;
    }
    return acc;
}

/// Applies sum_j theta_j T_j(L~) X through the three-term recurrence with
/// sparse matvecs.
inline FeatureMatrix chebyshev_filter_apply(const Graph& g, std::span<const double> theta, double lambda_max,
                                            const FeatureMatrix& x) {
    if (!(lambda_max > 0.0)) throw InvalidArgument("chebyshev_filter_apply: lambda_max must be positive");
    FeatureMatrix out(x.rows(), x.cols());
    if (theta.empty()) return out;
    // L~ y = (2 / lambda_max) (y - D^-1/2 W D^-1/2 y) - y, with I + D^-1/2 W D^-1/2 available as an operator.
    auto rescaled = [&](const FeatureMatrix& y) {
        FeatureMatrix adj = apply_operator(g, OperatorKind::sym_norm_adjacency(), y) - y;
        FeatureMatrix lap = y - adj;
        lap *= 2.0 / lambda_max;
        return lap - y;
    };
    FeatureMatrix t_prev = x;
    out.axpy(theta[0], t_prev);
    if (theta.size() == 1) return out;
    FeatureMatrix t_cur = rescaled(x);
    out.axpy(theta[1], t_cur);
    for (std::size_t j = 2; j < theta.size(); ++j) {
        FeatureMatrix t_next = rescaled(t_cur);
        t_next *= 2.0;
        t_next -= t_prev;
        out.axpy(theta[j], t_next);
        t_prev = std::move(t_cur);
        t_cur = std::move(t_next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Measured spectral responses

struct SpectralFilter {
    enum class Kind {
        GcnUnnormalized,  ///< theta (I + D^-1/2 W D^-1/2)
        Wavelet,          ///< Psi_k
        Lowpass,          ///< Phi_K = P^(2^K)
        DiffusionPower,   ///< P^t
        Chebyshev,        ///< sum_j theta_j T_j(L~), lambda_max measured exactly
    };
    Kind kind = Kind::GcnUnnormalized;
    std::size_t scale = 0;       ///< k for Wavelet, K for Lowpass, t for DiffusionPower
    std::vector<double> theta{1.0};

    static SpectralFilter gcn(double theta = 1.0) { return {Kind::GcnUnnormalized, 0, {theta}}; }
    static SpectralFilter wavelet(std::size_t k) { return {Kind::Wavelet, k, {}}; }
    static SpectralFilter lowpass(std::size_t K) { return {Kind::Lowpass, K, {}}; }
    static SpectralFilter diffusion(std::size_t t) { return {Kind::DiffusionPower, t, {}}; }
    static SpectralFilter chebyshev(std::vector<double> theta) { return {Kind::Chebyshev, 0, std::move(theta)}; }

    std::string label() const {
        switch (kind) {
            case Kind::GcnUnnormalized: return "gcn";
            case Kind::Wavelet: return "wavelet" + std::to_string(scale);
            case Kind::Lowpass: return "lowpass" + std::to_string(scale);
            case Kind::DiffusionPower: return "diffusion" + std::to_string(scale);
            case Kind::Chebyshev: return "chebyshev";
        }
        return "?";
    }
};

/// Dense matrix of the filter in node coordinates.
inline Matrix dense_filter(const Graph& g, const SpectralFilter& f, const EigenDecomposition& eig) {
    const std::size_t n = g.num_nodes();
    const Matrix id = Matrix::identity(n);
    switch (f.kind) {
        case SpectralFilter::Kind::GcnUnnormalized:
            return dense_operator(g, OperatorKind::sym_norm_adjacency()) * f.theta.at(0);
        case SpectralFilter::Kind::Wavelet: {
            WaveletBank bank(g, f.scale);
            return wavelet_apply(bank, f.scale, id);
        }
        case SpectralFilter::Kind::Lowpass:
            return lowpass_apply(WaveletBank(g, f.scale), id);
        case SpectralFilter::Kind::DiffusionPower:
            return operator_power_apply(g, OperatorKind::lazy_walk(), f.scale, id);
        case SpectralFilter::Kind::Chebyshev:
            return chebyshev_filter_apply(g, f.theta, eig.eigenvalues.back(), id);
    }
    throw InvalidArgument("unknown spectral filter");
}

/// Per-eigenvalue multipliers g^[i] = q_i^T S q_i where S is the filter
/// expressed in the symmetric frame. Filters built from P are conjugated by
/// D^1/2 first (D^-1/2 P D^1/2 = I - L/2 is symmetric and shares P's spectrum).
inline std::vector<double> spectral_response(const Graph& g, const SpectralFilter& f, const EigenDecomposition& eig,
                                             std::size_t dense_limit = kDefaultDenseLimit) {
    check_dense_size(g.num_nodes(), dense_limit);
    const std::size_t n = g.num_nodes();
    if (eig.eigenvectors.rows() != n) throw DimensionMismatch("spectral_response: decomposition size mismatch");
    Matrix s = dense_filter(g, f, eig);
    const bool walk_based = f.kind == SpectralFilter::Kind::Wavelet || f.kind == SpectralFilter::Kind::Lowpass ||
                            f.kind == SpectralFilter::Kind::DiffusionPower;
    if (walk_based) {
        const auto& d = g.degrees();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s(i, j) *= std::sqrt(d[j] / d[i]);
    }
    const Matrix sq = matmul(s, eig.eigenvectors);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += eig.eigenvectors(r, i) * sq(r, i);
        out[i] = acc;
    }
    return out;
}

inline std::vector<double> spectral_response(const Graph& g, const SpectralFilter& f,
                                             std::size_t dense_limit = kDefaultDenseLimit) {
    return spectral_response(g, f, eigendecompose(sym_normalized_laplacian(g, dense_limit)), dense_limit);
}

}  // namespace hsn
