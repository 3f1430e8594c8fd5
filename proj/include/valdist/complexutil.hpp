#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <variant>

#include "valdist/errors.hpp"

namespace valdist {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// A value on the Riemann sphere: either finite or a pole of known order.
struct Pole {
    int order = 1;
    friend bool operator==(const Pole& a, const Pole& b) { return a.order == b.order; }
};

class ExtendedComplex {
public:
    ExtendedComplex() : v_(Complex{0.0, 0.0}) {}
    ExtendedComplex(Complex z) : v_(z) {}
    ExtendedComplex(double x) : v_(Complex{x, 0.0}) {}
    ExtendedComplex(Pole p) : v_(p) {
        if (p.order < 1) throw PreconditionError("pole order must be >= 1");
    }

    bool is_pole() const { return std::holds_alternative<Pole>(v_); }
    bool is_finite() const { return !is_pole(); }
    Complex value() const {
        if (is_pole()) throw PreconditionError("value() on a pole");
        return std::get<Complex>(v_);
    }
    int pole_order() const {
        if (!is_pole()) throw PreconditionError("pole_order() on a finite value");
        return std::get<Pole>(v_).order;
    }

    friend bool operator==(const ExtendedComplex& a, const ExtendedComplex& b) {
        return a.v_ == b.v_;
    }

private:
    std::variant<Complex, Pole> v_;
};

/// Chordal distance on the Riemann sphere, |a-b| / sqrt((1+|a|^2)(1+|b|^2)),
/// with the usual continuous extension to infinity.
inline double chordal(const ExtendedComplex& a, const ExtendedComplex& b) {
    if (a.is_pole() && b.is_pole()) return 0.0;
    if (a.is_pole()) return 1.0 / std::sqrt(1.0 + std::norm(b.value()));
    if (b.is_pole()) return 1.0 / std::sqrt(1.0 + std::norm(a.value()));
    const Complex za = a.value(), zb = b.value();
    const double ma = std::abs(za), mb = std::abs(zb);
    // Large inputs: work in the reciprocal chart so |a|^2 cannot overflow.
    if (ma > 1e150 || mb > 1e150) {
        const Complex ia = (ma > 1e-300) ? 1.0 / za : za;
        const Complex ib = (mb > 1e-300) ? 1.0 / zb : zb;
        if (ma <= 1e150) return chordal(ExtendedComplex(ia), ExtendedComplex(Complex{0, 0}));
        if (mb <= 1e150) return chordal(ExtendedComplex(ib), ExtendedComplex(Complex{0, 0}));
        return std::abs(ia - ib) / std::sqrt((1.0 + std::norm(ia)) * (1.0 + std::norm(ib)));
    }
    return std::abs(za - zb) / std::sqrt((1.0 + std::norm(za)) * (1.0 + std::norm(zb)));
}

/// SplitMix64; used wherever a deterministic nudge or jitter is needed.
inline std::uint64_t hash_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic double in [0,1) from a seed chain.
inline double hash_unit(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t h = hash_mix(a ^ hash_mix(b ^ hash_mix(c)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

} // namespace valdist
