#pragma once

#include <numeric>
#include <optional>
#include <vector>

#include "valdist/errors.hpp"
#include "valdist/expr.hpp"
#include "valdist/jet.hpp"
#include "valdist/rational.hpp"

namespace valdist {

/// Differential monomial f^(n0) (f')^(n1) ... (f^(k))^(nk), stored as the
/// exponent vector [n0, ..., nk] with the trailing entry nonzero.
class MonomialSpec {
public:
    explicit MonomialSpec(std::vector<int> exponents) : n_(std::move(exponents)) {
        while (!n_.empty() && n_.back() == 0) n_.pop_back();
        if (n_.empty()) throw PreconditionError("monomial needs at least one positive exponent");
        for (int e : n_)
            if (e < 0) throw PreconditionError("monomial exponents must be non-negative");
    }

    const std::vector<int>& exponents() const { return n_; }

    /// Highest derivative order with a nonzero exponent.
    int order() const { return static_cast<int>(n_.size()) - 1; }

    /// Total degree d_M = sum n_i.
    int degree() const { return std::accumulate(n_.begin(), n_.end(), 0); }

    /// Weight Gamma_M = sum (i+1) n_i.
    int weight() const {
        int w = 0;
        for (std::size_t i = 0; i < n_.size(); ++i) w += static_cast<int>(i + 1) * n_[i];
        return w;
    }

    /// Derivative weight D_M = Gamma_M - d_M = sum i*n_i.
    int derivative_weight() const { return weight() - degree(); }

private:
    std::vector<int> n_;
};

struct MonomialStats {
    int degree = 0;   // d_M
    int weight = 0;   // Gamma_M
    int dweight = 0;  // D_M
};

inline MonomialStats stats(const MonomialSpec& spec) {
    return {spec.degree(), spec.weight(), spec.derivative_weight()};
}

struct ThresholdResult {
    Rational rhs;          // ((k+2) D_M + 2(k+1)) / k, exact
    bool satisfied = false;  // d_M > rhs
    int k = 0;
};

/// Sharp degree threshold d_M > ((k+2) D_M + 2(k+1)) / k, decided in exact
/// rational arithmetic so boundary cases can never flip from rounding.
/// For pure-power monomials (order 0) the derivative order k is ambiguous and
/// must be supplied; when the spec has derivative factors an explicit k must
/// agree with the spec's own order.
inline ThresholdResult threshold_check(const MonomialSpec& spec,
                                       std::optional<int> explicit_k = std::nullopt) {
    int k = spec.order();
    if (k == 0) {
        if (!explicit_k)
            throw UndefinedOrder("pure-power monomial: supply the derivative order k");
        k = *explicit_k;
    } else if (explicit_k && *explicit_k != k) {
        throw PreconditionError("explicit k disagrees with the monomial's own order");
    }
    if (k < 1) throw UndefinedOrder("derivative order k must be >= 1");
    const int d = spec.degree();
    const int D = spec.derivative_weight();
    const Rational rhs(static_cast<std::int64_t>(k + 2) * D + 2 * (k + 1), k);
    return {rhs, Rational(d) > rhs, k};
}

/// Jet of M[f] at z0 with at least extra_order coefficients past the
/// valuation; the product of shifted-jet powers, no symbolic expansion.
inline LaurentJet monomial_eval(const MonomialSpec& spec, const Expr& f, Complex z0,
                                int extra_order = 2) {
    const int k = spec.order();
    int K = k + std::max(extra_order, 1) + 2;
    for (int attempt = 0;; ++attempt) {
        const LaurentJet base = jet_eval(f, z0, K);
        LaurentJet acc = LaurentJet::constant(Complex{1.0, 0.0},
                                              base.is_zero() ? extra_order + 1 : base.order() + 1);
        LaurentJet d = base;
        for (int i = 0; i <= k; ++i) {
            if (spec.exponents()[static_cast<std::size_t>(i)] > 0)
                acc = acc * d.pow(spec.exponents()[static_cast<std::size_t>(i)]);
            if (i < k) d = d.derivative();
        }
        if (acc.is_zero() || acc.order() >= extra_order || attempt >= 2) return acc;
        K += (extra_order - acc.order()) + 4;
    }
}

inline JetFn monomial_fn(MonomialSpec spec, Expr f) {
    return [spec = std::move(spec), f = std::move(f)](Complex z0, int order) {
        return monomial_eval(spec, f, z0, order);
    };
}

/// Differential polynomial sum_i alpha_i(z) prod_j (f^(j))^(S_ij), with
/// parameter-free coefficient expressions.
class DiffPolynomial {
public:
    struct Term {
        Expr coeff;
        std::vector<int> powers;  // powers[j] = S_ij, j = 0..p
    };

    explicit DiffPolynomial(std::vector<Term> terms) : terms_(std::move(terms)) {
        if (terms_.empty()) throw PreconditionError("differential polynomial needs at least one term");
        for (auto& t : terms_) {
            if (t.coeff.has_parameters())
                throw PreconditionError("differential polynomial coefficients must be parameter-free");
            if (t.coeff.kind() == NodeKind::Literal && t.coeff.value() == Complex{0.0, 0.0})
                throw PreconditionError("differential polynomial coefficients must not be zero");
            while (!t.powers.empty() && t.powers.back() == 0) t.powers.pop_back();
            for (int p : t.powers)
                if (p < 0) throw PreconditionError("exponents must be non-negative");
        }
    }

    const std::vector<Term>& terms() const { return terms_; }

    /// d(P): minimum over terms of the total degree.
    int min_degree() const {
        int d = -1;
        for (const auto& t : terms_) {
            int s = std::accumulate(t.powers.begin(), t.powers.end(), 0);
            d = d < 0 ? s : std::min(d, s);
        }
        return d;
    }

    /// theta(P): maximum over terms of sum_j j*S_ij.
    int max_derivative_weight() const {
        int th = 0;
        for (const auto& t : terms_) {
            int s = 0;
            for (std::size_t j = 0; j < t.powers.size(); ++j)
                s += static_cast<int>(j) * t.powers[static_cast<std::size_t>(j)];
            th = std::max(th, s);
        }
        return th;
    }

    int max_derivative_order() const {
        std::size_t p = 0;
        for (const auto& t : terms_) p = std::max(p, t.powers.size());
        return p == 0 ? 0 : static_cast<int>(p) - 1;
    }

private:
    std::vector<Term> terms_;
};

struct PolyStats {
    int min_degree = 0;            // d(P)
    int max_derivative_weight = 0;  // theta(P)
};

inline PolyStats poly_stats(const DiffPolynomial& p) {
    return {p.min_degree(), p.max_derivative_weight()};
}

/// Jet of P applied to f at z0.
inline LaurentJet poly_eval(const DiffPolynomial& p, const Expr& f, Complex z0,
                            int extra_order = 2) {
    const int kmax = p.max_derivative_order();
    int K = kmax + std::max(extra_order, 1) + 2;
    for (int attempt = 0;; ++attempt) {
        const LaurentJet base = jet_eval(f, z0, K);
        LaurentJet sum = LaurentJet::zero();
        for (const auto& term : p.terms()) {
            LaurentJet prod = jet_eval(term.coeff, z0, base.is_zero() ? K : base.order());
            LaurentJet d = base;
            for (std::size_t j = 0; j < term.powers.size(); ++j) {
                if (term.powers[j] > 0) prod = prod * d.pow(term.powers[j]);
                if (j + 1 < term.powers.size()) d = d.derivative();
            }
            sum = sum + prod;
        }
        if (sum.is_zero() || sum.order() >= extra_order || attempt >= 2) return sum;
        K += (extra_order - sum.order()) + 4;
    }
}

inline JetFn poly_fn(DiffPolynomial p, Expr f) {
    return [p = std::move(p), f = std::move(f)](Complex z0, int order) {
        return poly_eval(p, f, z0, order);
    };
}

} // namespace valdist
