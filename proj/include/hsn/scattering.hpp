#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "hsn/autodiff.hpp"
#include "hsn/nonlinearity.hpp"
#include "hsn/wavelets.hpp"

namespace hsn {

/// Ordered wavelet scales (k_1, ..., k_m). The empty path is the identity cascade.
struct ScatteringPath {
    std::vector<std::size_t> scales;

    ScatteringPath() = default;
    ScatteringPath(std::initializer_list<std::size_t> s) : scales(s) {}
    explicit ScatteringPath(std::vector<std::size_t> s) : scales(std::move(s)) {}

    std::size_t order() const noexcept { return scales.size(); }
    bool empty() const noexcept { return scales.empty(); }
    /// Total diffusion reach sum_i 2^(k_i).
    std::size_t reach() const noexcept {
        std::size_t r = 0;
        for (auto k : scales) r += std::size_t{1} << k;
        return r;
    }
    std::size_t max_scale() const noexcept {
        std::size_t m = 0;
        for (auto k : scales) m = std::max(m, k);
        return m;
    }

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < scales.size(); ++i) s += (i ? "," : "") + std::to_string(scales[i]);
        return s + ")";
    }

    friend bool operator==(const ScatteringPath&, const ScatteringPath&) = default;
};

/// Parses whitespace- or comma-separated scales, e.g. "1 2" or "1,2". "()" or "" is the empty path.
inline ScatteringPath parse_path(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '(' || c == ')') c = ' ';
    std::istringstream in(text);
    std::vector<std::size_t> scales;
    long long k = 0;
    while (in >> k) {
        if (k < 0) throw ParseError("scattering path scales must be >= 0");
        scales.push_back(static_cast<std::size_t>(k));
    }
    if (!in.eof()) throw ParseError("cannot parse scattering path '" + text + "'");
    return ScatteringPath(std::move(scales));
}

/// Binary expansion d = 2^(k_1) + ... + 2^(k_m) with k_1 < ... < k_m.
inline ScatteringPath binary_expansion_path(std::size_t d) {
    std::vector<std::size_t> scales;
    for (std::size_t k = 0; (std::size_t{1} << k) <= d; ++k)
        if (d & (std::size_t{1} << k)) scales.push_back(k);
    return ScatteringPath(std::move(scales));
}

inline void check_path(const WaveletBank& bank, const ScatteringPath& p) {
    for (auto k : p.scales) bank.check_scale(k);
}

/// U_p X = Psi_(k_m) sigma Psi_(k_(m-1)) ... sigma Psi_(k_1) X. No outer nonlinearity.
inline FeatureMatrix cascade(const WaveletBank& bank, const ScatteringPath& p, Nonlinearity sigma,
                             const FeatureMatrix& x) {
    check_path(bank, p);
    FeatureMatrix z = x;
    for (std::size_t i = 0; i < p.scales.size(); ++i) {
        if (i > 0) z = sigma.apply(std::move(z));
        z = wavelet_apply(bank, p.scales[i], z);
    }
    return z;
}

/// Moments S_(p,q) = sum_i |U[i, c]|^q for q = 1..qmax; result is qmax x cols.
inline Matrix graph_moments(const FeatureMatrix& u, std::size_t qmax) {
    if (qmax == 0) throw InvalidArgument("graph_moments: qmax must be >= 1");
    Matrix out(qmax, u.cols());
    for (std::size_t r = 0; r < u.rows(); ++r)
        for (std::size_t c = 0; c < u.cols(); ++c) {
            const double a = std::abs(u(r, c));
            double p = 1.0;
            for (std::size_t q = 0; q < qmax; ++q) {
                p *= a;
                out(q, c) += p;
            }
        }
    return out;
}

namespace ad {

inline Var cascade(const WaveletBank& bank, const ScatteringPath& p, Nonlinearity sigma, Var x) {
    check_path(bank, p);
    Var z = x;
    for (std::size_t i = 0; i < p.scales.size(); ++i) {
        if (i > 0) z = activation(z, sigma);
        z = wavelet(bank, p.scales[i], z);
    }
    return z;
}

/// outer( U_p(X Theta) + B ), with `inner` used between wavelets of the cascade.
inline Var scatter_layer(const WaveletBank& bank, const ScatteringPath& p, Var theta, Var bias, Nonlinearity inner,
                         Nonlinearity outer, Var x) {
    if (x.value().cols() != theta.value().rows()) {
        throw DimensionMismatch("scatter_layer: X has " + std::to_string(x.value().cols()) + " columns, Theta has " +
                                std::to_string(theta.value().rows()) + " rows");
    }
    Var z = cascade(bank, p, inner, matmul(x, theta));
    return activation(add_bias(z, bias), outer);
}

}  // namespace ad

/// Learned scattering channel sigma(U_p(X Theta) + B): transformation, then
/// cascade aggregation, then activation (optionally |.|^q).
inline FeatureMatrix scatter_layer(const WaveletBank& bank, const ScatteringPath& p, const ParamTensor& theta,
                                   const ParamTensor& bias, Nonlinearity sigma, const FeatureMatrix& x,
                                   Nonlinearity inner = Nonlinearity::abs()) {
    Tape tape;
    Var out = ad::scatter_layer(bank, p, tape.constant(theta.value()), tape.constant(bias.value()), inner, sigma,
                                tape.constant(x));
    return out.value();
}

}  // namespace hsn
