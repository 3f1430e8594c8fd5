#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "valdist/expr.hpp"

// Test-only utilities. The evaluators here deliberately avoid the jet path so
// they can serve as independent oracles for it.

namespace testutil {

using valdist::Complex;
using valdist::Expr;
using valdist::NodeKind;

/// Plain recursive evaluation with std:: complex arithmetic. No jets, no
/// Laurent bookkeeping; derivative nodes are unsupported on purpose.
inline Complex naive_eval(const Expr& e, Complex z) {
    switch (e.kind()) {
        case NodeKind::Variable: return z;
        case NodeKind::Literal: return e.value();
        case NodeKind::Parameter: throw std::runtime_error("naive_eval: unbound parameter");
        case NodeKind::Add: return naive_eval(e.child(0), z) + naive_eval(e.child(1), z);
        case NodeKind::Sub: return naive_eval(e.child(0), z) - naive_eval(e.child(1), z);
        case NodeKind::Mul: return naive_eval(e.child(0), z) * naive_eval(e.child(1), z);
        case NodeKind::Div: return naive_eval(e.child(0), z) / naive_eval(e.child(1), z);
        case NodeKind::Pow: {
            Complex b = naive_eval(e.child(0), z);
            long long n = e.exponent();
            bool inv = n < 0;
            unsigned long long m = inv ? -n : n;
            Complex acc{1.0, 0.0}, p = b;
            while (m) {
                if (m & 1) acc *= p;
                p *= p;
                m >>= 1;
            }
            return inv ? 1.0 / acc : acc;
        }
        case NodeKind::Exp: return std::exp(naive_eval(e.child(0), z));
        case NodeKind::Sin: return std::sin(naive_eval(e.child(0), z));
        case NodeKind::Cos: return std::cos(naive_eval(e.child(0), z));
        case NodeKind::Derivative: throw std::runtime_error("naive_eval: derivative node");
    }
    throw std::runtime_error("naive_eval: bad node");
}

/// k-th derivative by 4th-order central differences on naive_eval.
/// Stencils from the standard tables; step chosen near the rounding optimum.
inline Complex central_derivative(const Expr& e, Complex z, int k) {
    auto f = [&](double t) { return naive_eval(e, z + Complex{t, 0.0}); };
    const double h = std::pow(2.0, std::round(std::log2(std::pow(2.2e-16, 1.0 / (k + 4.0)))));
    switch (k) {
        case 0: return f(0.0);
        case 1:
            return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
        case 2:
            return (-f(2 * h) + 16.0 * f(h) - 30.0 * f(0) + 16.0 * f(-h) - f(-2 * h)) / (12.0 * h * h);
        case 3:
            return (-f(3 * h) + 8.0 * f(2 * h) - 13.0 * f(h) + 13.0 * f(-h) - 8.0 * f(-2 * h) +
                    f(-3 * h)) /
                   (8.0 * h * h * h);
        case 4:
            return (-f(3 * h) + 12.0 * f(2 * h) - 39.0 * f(h) + 56.0 * f(0) - 39.0 * f(-h) +
                    12.0 * f(-2 * h) - f(-3 * h)) /
                   (6.0 * h * h * h * h);
        default:
            throw std::runtime_error("central_derivative: k > 4");
    }
}

/// Random expression trees over the full grammar. Sibling literals are never
/// placed under one arithmetic node (the parser folds those), and derivative
/// nodes are optional so oracles that cannot handle them can opt out.
class ExprGen {
public:
    explicit ExprGen(unsigned seed, bool with_derivatives = true, bool with_parameter = false)
        : rng_(seed), with_derivatives_(with_derivatives), with_parameter_(with_parameter) {}

    Expr gen(int depth = 3) { return gen_node(depth, false); }

private:
    Expr gen_node(int depth, bool literal_sibling) {
        std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
        switch (pick(rng_)) {
            case 0: return Expr::variable();
            case 1:
                if (literal_sibling || (with_parameter_ && flip())) {
                    if (with_parameter_ && flip()) return Expr::parameter("p");
                    return Expr::variable();
                }
                return Expr::literal(rand_literal());
            case 2:
                if (with_parameter_ && flip()) return Expr::parameter("p");
                return Expr::variable();
            case 3: {
                Expr a = gen_node(depth - 1, false);
                bool a_lit = a.kind() == NodeKind::Literal;
                return a + gen_node(depth - 1, a_lit);
            }
            case 4: {
                Expr a = gen_node(depth - 1, false);
                bool a_lit = a.kind() == NodeKind::Literal;
                return a - gen_node(depth - 1, a_lit);
            }
            case 5: {
                Expr a = gen_node(depth - 1, false);
                bool a_lit = a.kind() == NodeKind::Literal;
                return a * gen_node(depth - 1, a_lit);
            }
            case 6: {
                Expr a = gen_node(depth - 1, false);
                bool a_lit = a.kind() == NodeKind::Literal;
                return a / gen_node(depth - 1, a_lit);
            }
            case 7: {
                std::uniform_int_distribution<int> ed(-3, 4);
                int e = ed(rng_);
                Expr base = gen_node(depth - 1, true);  // literal base would fold
                return Expr::pow(base, e == 0 ? 2 : e);
            }
            case 8: {
                Expr arg = gen_node(depth - 1, true);  // literal arg would fold
                switch (rng_() % 3) {
                    case 0: return Expr::exp(arg);
                    case 1: return Expr::sin(arg);
                    default: return Expr::cos(arg);
                }
            }
            default: {
                if (!with_derivatives_) return Expr::variable();
                std::uniform_int_distribution<int> kd(1, 3);
                return Expr::derivative(gen_node(depth - 1, true), kd(rng_));
            }
        }
    }

    Complex rand_literal() {
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        double re = d(rng_);
        while (re == 0.0) re = d(rng_);
        return flip() ? Complex{re, 0.0} : Complex{re, d(rng_)};
    }

    bool flip() { return (rng_() & 1) != 0; }

    std::mt19937 rng_;
    bool with_derivatives_;
    bool with_parameter_;
};

inline double rel_err(Complex got, Complex want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

} // namespace testutil
