#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "valdist/complexutil.hpp"
#include "valdist/errors.hpp"
#include "valdist/expr.hpp"

namespace valdist {

/// Truncated Laurent expansion of a function at a base point:
///
///   f(z0 + h) = sum_{i=0..order} c_i h^(valuation+i) + O(h^(valuation+order+1))
///
/// with c_0 != 0 unless the zero flag is set. A zero-flagged jet means the
/// expansion vanishes through exponent known_top(); it cannot distinguish a
/// high-order zero from an identical zero, which is why dividing by one is an
/// error rather than a guess.
class LaurentJet {
public:
    // Sentinel used for structurally exact zeros (literal 0, x - x, ...).
    static constexpr int kExactTop = 1 << 28;

    static LaurentJet zero(int known_top = kExactTop) {
        LaurentJet j;
        j.zero_ = true;
        j.ztop_ = known_top;
        return j;
    }

    static LaurentJet constant(Complex c, int ncoeff) {
        if (c == Complex{0.0, 0.0}) return zero();
        std::vector<Complex> v(static_cast<std::size_t>(std::max(1, ncoeff)), Complex{0.0, 0.0});
        v[0] = c;
        return from_coeffs(0, std::move(v));
    }

    /// Builds a jet from raw coefficients, stripping exactly-zero leading
    /// coefficients (the top known exponent is preserved).
    static LaurentJet from_coeffs(int valuation, std::vector<Complex> coeffs) {
        const int top = valuation + static_cast<int>(coeffs.size()) - 1;
        std::size_t lead = 0;
        while (lead < coeffs.size() && coeffs[lead] == Complex{0.0, 0.0}) ++lead;
        if (lead == coeffs.size()) return zero(top);
        if (lead > 0) coeffs.erase(coeffs.begin(), coeffs.begin() + static_cast<long>(lead));
        LaurentJet j;
        j.valuation_ = valuation + static_cast<int>(lead);
        j.coeff_ = std::move(coeffs);
        for (const Complex& c : j.coeff_)
            if (!is_finite(c)) throw Overflow("jet coefficient out of double range");
        return j;
    }

    bool is_zero() const { return zero_; }
    bool exactly_zero() const { return zero_ && ztop_ >= kExactTop; }
    int valuation() const { return valuation_; }
    int order() const { return zero_ ? ztop_ : static_cast<int>(coeff_.size()) - 1; }
    int known_top() const { return zero_ ? ztop_ : valuation_ + static_cast<int>(coeff_.size()) - 1; }
    const std::vector<Complex>& coeffs() const { return coeff_; }

    Complex leading() const { return zero_ ? Complex{0.0, 0.0} : coeff_[0]; }

    bool covers_exponent(int e) const { return e <= known_top(); }

    /// Coefficient of h^e; exponents below the valuation are exactly zero.
    Complex coeff_at(int e) const {
        if (zero_) {
            if (e > ztop_) throw PreconditionError("coefficient beyond known window");
            return {0.0, 0.0};
        }
        if (e < valuation_) return {0.0, 0.0};
        if (e > known_top()) throw PreconditionError("coefficient beyond known window");
        return coeff_[static_cast<std::size_t>(e - valuation_)];
    }

    friend LaurentJet operator+(const LaurentJet& a, const LaurentJet& b) { return add(a, b, 1.0); }
    friend LaurentJet operator-(const LaurentJet& a, const LaurentJet& b) { return add(a, b, -1.0); }

    friend LaurentJet operator*(const LaurentJet& a, const LaurentJet& b) {
        if (a.zero_ || b.zero_) {
            if (a.exactly_zero() || b.exactly_zero()) return zero();
            const int ta = a.zero_ ? a.ztop_ + 1 : a.valuation_;
            const int tb = b.zero_ ? b.ztop_ + 1 : b.valuation_;
            return zero(sat(ta + tb) - 1);
        }
        const std::size_t n = std::min(a.coeff_.size(), b.coeff_.size());
        std::vector<Complex> out(n, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; i + j < n; ++j)
                out[i + j] += a.coeff_[i] * b.coeff_[j];
        return from_coeffs(a.valuation_ + b.valuation_, std::move(out));
    }

    friend LaurentJet operator/(const LaurentJet& a, const LaurentJet& b) {
        if (b.zero_) throw ZeroDivisor("division by a jet that vanishes through its window");
        if (a.zero_) {
            if (a.exactly_zero()) return zero();
            return zero(sat(a.ztop_ - b.valuation_));
        }
        return a * b.reciprocal();
    }

    LaurentJet reciprocal() const {
        if (zero_) throw ZeroDivisor("reciprocal of a jet that vanishes through its window");
        const std::size_t n = coeff_.size();
        std::vector<Complex> r(n, Complex{0.0, 0.0});
        r[0] = 1.0 / coeff_[0];
        for (std::size_t k = 1; k < n; ++k) {
            Complex acc{0.0, 0.0};
            for (std::size_t j = 1; j <= k; ++j) acc += coeff_[j] * r[k - j];
            r[k] = -acc / coeff_[0];
        }
        return from_coeffs(-valuation_, std::move(r));
    }

    LaurentJet pow(long long e) const {
        if (e == 0) return constant(Complex{1.0, 0.0}, zero_ ? 1 : static_cast<int>(coeff_.size()));
        if (zero_) {
            if (e < 0) throw ZeroDivisor("negative power of a vanishing jet");
            if (exactly_zero()) return zero();
            return zero(sat((ztop_ + 1) * e) - 1);
        }
        const bool inv = e < 0;
        unsigned long long n = inv ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
        LaurentJet acc = constant(Complex{1.0, 0.0}, static_cast<int>(coeff_.size()));
        LaurentJet p = *this;
        while (n) {
            if (n & 1) acc = acc * p;
            p = (n >>= 1) ? p * p : p;
        }
        return inv ? acc.reciprocal() : acc;
    }

    /// Jet of the derivative; one exponent of knowledge is consumed.
    LaurentJet derivative() const {
        if (zero_) return zero(exactly_zero() ? kExactTop : ztop_ - 1);
        std::vector<Complex> out(coeff_.size());
        for (std::size_t i = 0; i < coeff_.size(); ++i)
            out[i] = coeff_[i] * static_cast<double>(valuation_ + static_cast<int>(i));
        return from_coeffs(valuation_ - 1, std::move(out));
    }

    LaurentJet derivative(int times) const {
        LaurentJet j = *this;
        for (int i = 0; i < times; ++i) j = j.derivative();
        return j;
    }

private:
    static int sat(long long x) {
        return static_cast<int>(std::clamp<long long>(x, -kExactTop, kExactTop));
    }

    static LaurentJet add(const LaurentJet& a, const LaurentJet& b, double sign) {
        if (a.zero_ && b.zero_)
            return zero(std::min(a.ztop_, b.ztop_));
        if (a.zero_ || b.zero_) {
            const LaurentJet& live = a.zero_ ? b : a;
            const int cap = a.zero_ ? a.ztop_ : b.ztop_;
            const double s = a.zero_ ? sign : 1.0;
            LaurentJet out = live.truncated_to_top(cap);
            if (s < 0 && !out.zero_)
                for (Complex& c : out.coeff_) c = -c;
            return out;
        }
        const int v = std::min(a.valuation_, b.valuation_);
        const int top = std::min(a.known_top(), b.known_top());
        if (top < v) return zero(top);
        std::vector<Complex> out(static_cast<std::size_t>(top - v + 1), Complex{0.0, 0.0});
        for (int e = v; e <= top; ++e) {
            Complex s{0.0, 0.0};
            if (e >= a.valuation_ && e <= a.known_top())
                s += a.coeff_[static_cast<std::size_t>(e - a.valuation_)];
            if (e >= b.valuation_ && e <= b.known_top())
                s += sign * b.coeff_[static_cast<std::size_t>(e - b.valuation_)];
            out[static_cast<std::size_t>(e - v)] = s;
        }
        return from_coeffs(v, std::move(out));
    }

    LaurentJet truncated_to_top(int cap) const {
        if (zero_) return zero(std::min(ztop_, cap));
        if (known_top() <= cap) return *this;
        if (cap < valuation_) return zero(cap);
        std::vector<Complex> out(coeff_.begin(), coeff_.begin() + (cap - valuation_ + 1));
        return from_coeffs(valuation_, std::move(out));
    }

    int valuation_ = 0;
    std::vector<Complex> coeff_;
    bool zero_ = false;
    int ztop_ = kExactTop;
};

namespace detail {

/// Taylor coefficients 0..top of a jet with valuation >= 0.
inline std::vector<Complex> taylor_of(const LaurentJet& j) {
    const int top = j.known_top();
    std::vector<Complex> u(static_cast<std::size_t>(top + 1), Complex{0.0, 0.0});
    for (int e = std::max(0, j.valuation()); e <= top; ++e) u[static_cast<std::size_t>(e)] = j.coeff_at(e);
    return u;
}

inline LaurentJet jet_exp(const LaurentJet& a) {
    if (a.is_zero()) {
        // exp(O(h^{t+1})) = 1 + O(h^{t+1})
        std::vector<Complex> one(static_cast<std::size_t>(std::min(a.order(), 64)) + 1, Complex{0.0, 0.0});
        one[0] = 1.0;
        return LaurentJet::from_coeffs(0, std::move(one));
    }
    if (a.valuation() < 0)
        throw EssentialSingularity("exp of an expansion with a pole");
    auto u = taylor_of(a);
    std::vector<Complex> g(u.size(), Complex{0.0, 0.0});
    g[0] = std::exp(u[0]);
    if (!is_finite(g[0])) throw Overflow("exp overflow");
    for (std::size_t n = 1; n < u.size(); ++n) {
        Complex acc{0.0, 0.0};
        for (std::size_t k = 1; k <= n; ++k) acc += static_cast<double>(k) * u[k] * g[n - k];
        g[n] = acc / static_cast<double>(n);
    }
    return LaurentJet::from_coeffs(0, std::move(g));
}

inline std::pair<LaurentJet, LaurentJet> jet_sin_cos(const LaurentJet& a) {
    if (a.is_zero()) {
        const int cap = std::min(a.order(), 64);
        std::vector<Complex> one(static_cast<std::size_t>(cap) + 1, Complex{0.0, 0.0});
        one[0] = 1.0;
        return {LaurentJet::zero(a.order()), LaurentJet::from_coeffs(0, std::move(one))};
    }
    if (a.valuation() < 0)
        throw EssentialSingularity("sin/cos of an expansion with a pole");
    auto u = taylor_of(a);
    std::vector<Complex> s(u.size(), Complex{0.0, 0.0}), c(u.size(), Complex{0.0, 0.0});
    s[0] = std::sin(u[0]);
    c[0] = std::cos(u[0]);
    if (!is_finite(s[0]) || !is_finite(c[0])) throw Overflow("sin/cos overflow");
    for (std::size_t n = 1; n < u.size(); ++n) {
        Complex as{0.0, 0.0}, ac{0.0, 0.0};
        for (std::size_t k = 1; k <= n; ++k) {
            as += static_cast<double>(k) * u[k] * c[n - k];
            ac += static_cast<double>(k) * u[k] * s[n - k];
        }
        s[n] = as / static_cast<double>(n);
        c[n] = -ac / static_cast<double>(n);
    }
    return {LaurentJet::from_coeffs(0, std::move(s)), LaurentJet::from_coeffs(0, std::move(c))};
}

inline LaurentJet jet_eval_node(const Expr& e, Complex z0, int ncoeff) {
    switch (e.kind()) {
        case NodeKind::Variable: {
            if (z0 == Complex{0.0, 0.0}) {
                std::vector<Complex> c(static_cast<std::size_t>(ncoeff), Complex{0.0, 0.0});
                c[0] = 1.0;
                return LaurentJet::from_coeffs(1, std::move(c));
            }
            std::vector<Complex> c(static_cast<std::size_t>(std::max(2, ncoeff)), Complex{0.0, 0.0});
            c[0] = z0;
            c[1] = 1.0;
            return LaurentJet::from_coeffs(0, std::move(c));
        }
        case NodeKind::Literal:
            return LaurentJet::constant(e.value(), ncoeff);
        case NodeKind::Parameter:
            throw UnboundParameter("expression still contains parameter '" + e.name() + "'");
        case NodeKind::Add:
            return jet_eval_node(e.child(0), z0, ncoeff) + jet_eval_node(e.child(1), z0, ncoeff);
        case NodeKind::Sub:
            return jet_eval_node(e.child(0), z0, ncoeff) - jet_eval_node(e.child(1), z0, ncoeff);
        case NodeKind::Mul:
            return jet_eval_node(e.child(0), z0, ncoeff) * jet_eval_node(e.child(1), z0, ncoeff);
        case NodeKind::Div:
            return jet_eval_node(e.child(0), z0, ncoeff) / jet_eval_node(e.child(1), z0, ncoeff);
        case NodeKind::Pow:
            return jet_eval_node(e.child(0), z0, ncoeff).pow(e.exponent());
        case NodeKind::Exp:
            return jet_exp(jet_eval_node(e.child(0), z0, ncoeff));
        case NodeKind::Sin:
            return jet_sin_cos(jet_eval_node(e.child(0), z0, ncoeff)).first;
        case NodeKind::Cos:
            return jet_sin_cos(jet_eval_node(e.child(0), z0, ncoeff)).second;
        case NodeKind::Derivative:
            return jet_eval_node(e.child(0), z0, ncoeff + e.order()).derivative(e.order());
    }
    throw PreconditionError("unreachable expression kind");
}

} // namespace detail

/// Laurent jet of a parameter-free expression at z0 with at least K+1
/// coefficients past the valuation. Leading-coefficient cancellation can eat
/// window length, so evaluation retries with extra headroom when short.
inline LaurentJet jet_eval(const Expr& expr, Complex z0, int K) {
    if (K < 0) throw PreconditionError("jet order must be >= 0");
    int ncoeff = K + 3;
    LaurentJet j = detail::jet_eval_node(expr, z0, ncoeff);
    for (int attempt = 0; attempt < 3 && !j.is_zero() && j.order() < K; ++attempt) {
        ncoeff += (K - j.order()) + 4;
        j = detail::jet_eval_node(expr, z0, ncoeff);
    }
    return j;
}

/// Value of f at z0 on the Riemann sphere, read off a jet.
inline ExtendedComplex jet_value(const LaurentJet& j) {
    if (j.is_zero()) return ExtendedComplex(Complex{0.0, 0.0});
    if (j.valuation() < 0) return ExtendedComplex(Pole{-j.valuation()});
    if (j.valuation() > 0) return ExtendedComplex(Complex{0.0, 0.0});
    return ExtendedComplex(j.leading());
}

/// k-th derivative of a parameter-free expression at z0; Pole(|v|+k) at a
/// pole of order |v|.
inline ExtendedComplex derivative_at(const Expr& expr, Complex z0, int k) {
    if (k < 0) throw PreconditionError("derivative order must be >= 0");
    const LaurentJet j = jet_eval(expr, z0, k + 2);
    if (j.is_zero()) return ExtendedComplex(Complex{0.0, 0.0});
    if (j.valuation() < 0) return ExtendedComplex(Pole{-j.valuation() + k});
    if (k < j.valuation()) return ExtendedComplex(Complex{0.0, 0.0});
    if (!j.covers_exponent(k))
        throw PreconditionError("jet window too short for requested derivative");
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return ExtendedComplex(j.coeff_at(k) * fact);
}

inline ExtendedComplex value_at(const Expr& expr, Complex z0) { return derivative_at(expr, z0, 0); }

/// Anything evaluable as a Laurent jet at a point: expressions, differential
/// monomials, differential polynomials. The int is the requested jet order.
using JetFn = std::function<LaurentJet(Complex, int)>;

inline JetFn jet_fn(Expr expr) {
    return [expr = std::move(expr)](Complex z0, int order) { return jet_eval(expr, z0, order); };
}

inline JetFn reciprocal_fn(JetFn fn) {
    return [fn = std::move(fn)](Complex z0, int order) {
        LaurentJet j = fn(z0, order + 1);
        return LaurentJet::constant(Complex{1.0, 0.0}, j.is_zero() ? 2 : j.order() + 1) / j;
    };
}

} // namespace valdist
