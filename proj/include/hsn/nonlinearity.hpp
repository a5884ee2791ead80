#pragma once

#include <cmath>
#include <string>

#include "hsn/errors.hpp"
#include "hsn/matrix.hpp"

namespace hsn {

/// Elementwise activation. AbsValPow(1) behaves exactly like AbsVal.
struct Nonlinearity {
    enum class Kind { AbsVal, AbsValPow, ReLU, LeakyReLU, Identity };

    Kind kind = Kind::Identity;
    double param = 0.0;  ///< q for AbsValPow, negative slope for LeakyReLU

    static constexpr Nonlinearity abs() { return {Kind::AbsVal, 1.0}; }
    static Nonlinearity abs_pow(double q) {
        if (!(q >= 1.0)) throw InvalidArgument("AbsValPow requires q >= 1");
        return {Kind::AbsValPow, q};
    }
    static constexpr Nonlinearity relu() { return {Kind::ReLU, 0.0}; }
    static constexpr Nonlinearity leaky_relu(double slope = 0.2) { return {Kind::LeakyReLU, slope}; }
    static constexpr Nonlinearity identity() { return {Kind::Identity, 0.0}; }

    double operator()(double x) const noexcept {
        switch (kind) {
            case Kind::AbsVal: return std::abs(x);
            case Kind::AbsValPow: return param == 1.0 ? std::abs(x) : std::pow(std::abs(x), param);
            case Kind::ReLU: return x > 0.0 ? x : 0.0;
            case Kind::LeakyReLU: return x > 0.0 ? x : param * x;
            case Kind::Identity: return x;
        }
        return x;
    }

    /// Derivative; the subgradient at the kink of |x| and ReLU is taken as 0.
    double derivative(double x) const noexcept {
        switch (kind) {
            case Kind::AbsVal: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
            case Kind::AbsValPow: {
                if (x == 0.0) return 0.0;
                const double s = x > 0.0 ? 1.0 : -1.0;
                return param == 1.0 ? s : s * param * std::pow(std::abs(x), param - 1.0);
            }
            case Kind::ReLU: return x > 0.0 ? 1.0 : 0.0;
            case Kind::LeakyReLU: return x > 0.0 ? 1.0 : param;
            case Kind::Identity: return 1.0;
        }
        return 1.0;
    }

    bool strictly_monotonic() const noexcept {
        return kind == Kind::Identity || (kind == Kind::LeakyReLU && param > 0.0);
    }

    std::string name() const {
        switch (kind) {
            case Kind::AbsVal: return "abs";
            case Kind::AbsValPow: return "abs^" + std::to_string(param);
            case Kind::ReLU: return "relu";
            case Kind::LeakyReLU: return "leaky_relu(" + std::to_string(param) + ")";
            case Kind::Identity: return "identity";
        }
        return "?";
    }

    Matrix apply(Matrix m) const {
        for (double& x : m.data()) x = (*this)(x);
        return m;
    }
};

/// Parses "abs", "abs^4" / "abspow:4", "relu", "leaky_relu" / "leaky_relu:0.1", "identity".
inline Nonlinearity parse_nonlinearity(const std::string& s) {
    auto arg = [&](std::size_t pos) { return std::stod(s.substr(pos)); };
    if (s == "abs") return Nonlinearity::abs();
    if (s.rfind("abs^", 0) == 0) return Nonlinearity::abs_pow(arg(4));
    if (s.rfind("abspow:", 0) == 0) return Nonlinearity::abs_pow(arg(7));
    if (s == "relu") return Nonlinearity::relu();
    if (s == "leaky_relu") return Nonlinearity::leaky_relu();
    if (s.rfind("leaky_relu:", 0) == 0) return Nonlinearity::leaky_relu(arg(11));
    if (s == "identity" || s == "id") return Nonlinearity::identity();
    throw ParseError("unknown nonlinearity '" + s + "'");
}

}  // namespace hsn
