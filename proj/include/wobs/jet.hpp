#pragma once

#include <array>
#include <cmath>

#include "wobs/common.hpp"

namespace wobs {

/// First-order forward-mode jet over the frame variables (t, s, x1, x2).
///
/// A jet carries a value and its exact gradient. Products and sums of jets
/// follow the product rule, which is how divergences of the Carleman fluxes
/// are taken without any grid differencing.
struct Jet {
    double v = 0.0;
    std::array<double, kMaxFrameVars> d{};

    Jet() = default;
    explicit Jet(double value) : v(value) {}
    Jet(double value, const std::array<double, kMaxFrameVars>& grad) : v(value), d(grad) {}

    double operator[](int var) const { return d[var]; }

    Jet& operator+=(const Jet& o) {
        v += o.v;
        for (int i = 0; i < kMaxFrameVars; ++i) d[i] += o.d[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        v -= o.v;
        for (int i = 0; i < kMaxFrameVars; ++i) d[i] -= o.d[i];
        return *this;
    }
    Jet& operator*=(double c) {
        v *= c;
        for (auto& x : d) x *= c;
        return *this;
    }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(Jet a) { return a *= -1.0; }
inline Jet operator*(Jet a, double c) { return a *= c; }
inline Jet operator*(double c, Jet a) { return a *= c; }
inline Jet operator+(Jet a, double c) {
    a.v += c;
    return a;
}
inline Jet operator-(Jet a, double c) {
    a.v -= c;
    return a;
}

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.v * b.v);
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}

inline Jet sin(const Jet& a) {
    Jet r(std::sin(a.v));
    const double c = std::cos(a.v);
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = c * a.d[i];
    return r;
}

inline Jet cos(const Jet& a) {
    Jet r(std::cos(a.v));
    const double s = -std::sin(a.v);
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = s * a.d[i];
    return r;
}

inline Jet exp(const Jet& a) {
    Jet r(std::exp(a.v));
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = r.v * a.d[i];
    return r;
}

inline Jet log(const Jet& a) {
    Jet r(std::log(a.v));
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = a.d[i] / a.v;
    return r;
}

inline Jet sqrt(const Jet& a) {
    Jet r(std::sqrt(a.v));
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = a.d[i] / (2.0 * r.v);
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
    Jet r(a.v / b.v);
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
    return r;
}

inline Jet pow(const Jet& a, double p) {
    Jet r(std::pow(a.v, p));
    const double dp = p * std::pow(a.v, p - 1.0);
    for (int i = 0; i < kMaxFrameVars; ++i) r.d[i] = dp * a.d[i];
    return r;
}

}  // namespace wobs
