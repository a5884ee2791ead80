#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hsn/graph.hpp"

namespace hsn {

/// Dyadic diffusion-wavelet bank over the lazy random walk P:
///   Psi_0 = I - P,  Psi_k = P^(2^(k-1)) - P^(2^k) for 1 <= k <= K,  Phi_K = P^(2^K).
/// The operators are never materialized; everything is a chain of matvecs.
class WaveletBank {
public:
    static constexpr std::size_t kDefaultMaxScale = 3;

    explicit WaveletBank(const Graph& graph, std::size_t max_scale = kDefaultMaxScale,
                         bool retain_dyadic = false)
        : graph_(&graph), max_scale_(max_scale), retain_dyadic_(retain_dyadic) {
        if (max_scale_ > 20) throw InvalidArgument("WaveletBank: max scale above 20 is not supported");
    }

    const Graph& graph() const noexcept { return *graph_; }
    std::size_t max_scale() const noexcept { return max_scale_; }
    /// Whether bank_sweep hands back the dyadic powers P^(2^j) X it computed.
    bool retain_dyadic() const noexcept { return retain_dyadic_; }

    void check_scale(std::size_t k) const {
        if (k > max_scale_) {
            throw ScaleOutOfRange("wavelet scale " + std::to_string(k) + " exceeds bank maximum " +
                                  std::to_string(max_scale_));
        }
    }

private:
    const Graph* graph_;
    std::size_t max_scale_;
    bool retain_dyadic_;
};

namespace detail {

inline FeatureMatrix walk(const Graph& g, const FeatureMatrix& x, bool transposed) {
    return transposed ? apply_operator_transpose(g, OperatorKind::lazy_walk(), x)
                      : apply_operator(g, OperatorKind::lazy_walk(), x);
}

inline FeatureMatrix wavelet_impl(const WaveletBank& bank, std::size_t k, const FeatureMatrix& x,
                                  bool transposed) {
    bank.check_scale(k);
    const Graph& g = bank.graph();
    if (k == 0) return x - walk(g, x, transposed);
    const std::size_t half = std::size_t{1} << (k - 1);
    FeatureMatrix y = walk(g, x, transposed);
    for (std::size_t j = 1; j < half; ++j) y = walk(g, y, transposed);
    FeatureMatrix coarse = y;
    for (std::size_t j = 0; j < half; ++j) coarse = walk(g, coarse, transposed);
    return y - coarse;
}

}  // namespace detail

/// Psi_k X. The P^(2^(k-1)) X prefix is reused for P^(2^k) X.
inline FeatureMatrix wavelet_apply(const WaveletBank& bank, std::size_t k, const FeatureMatrix& x) {
    return detail::wavelet_impl(bank, k, x, false);
}

/// Psi_k^T X, the adjoint used when back-propagating through a wavelet.
inline FeatureMatrix wavelet_apply_transpose(const WaveletBank& bank, std::size_t k, const FeatureMatrix& x) {
    return detail::wavelet_impl(bank, k, x, true);
}

/// Phi_K X = P^(2^K) X.
inline FeatureMatrix lowpass_apply(const WaveletBank& bank, const FeatureMatrix& x) {
    return operator_power_apply(bank.graph(), OperatorKind::lazy_walk(), std::size_t{1} << bank.max_scale(), x);
}

/// [Psi_0 X, ..., Psi_K X, Phi_K X] from a single chain of 2^K matvecs.
/// When `matvecs` is given it receives the number of P applications; when the
/// bank retains dyadic powers and `dyadic` is given it receives
/// [P X, P^2 X, P^4 X, ..., P^(2^K) X].
inline std::vector<FeatureMatrix> bank_sweep(const WaveletBank& bank, const FeatureMatrix& x,
                                             std::size_t* matvecs = nullptr,
                                             std::vector<FeatureMatrix>* dyadic = nullptr) {
    const Graph& g = bank.graph();
    const std::size_t K = bank.max_scale();
    std::vector<FeatureMatrix> out;
    out.reserve(K + 2);
    std::size_t count = 0;

    FeatureMatrix prev = apply_operator(g, OperatorKind::lazy_walk(), x);  // P^1 X
    ++count;
    if (dyadic && bank.retain_dyadic()) dyadic->push_back(prev);
    out.push_back(x - prev);
    std::size_t power = 1;
    for (std::size_t k = 1; k <= K; ++k) {
        FeatureMatrix next = prev;
        for (std::size_t j = 0; j < power; ++j) {
            next = apply_operator(g, OperatorKind::lazy_walk(), next);
            ++count;
        }
        power *= 2;
        if (dyadic && bank.retain_dyadic()) dyadic->push_back(next);
        out.push_back(prev - next);
        prev = std::move(next);
    }
    out.push_back(std::move(prev));
    if (matvecs) *matvecs = count;
    return out;
}

}  // namespace hsn
