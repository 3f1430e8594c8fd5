#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "valdist/complexutil.hpp"
#include "valdist/errors.hpp"
#include "valdist/jet.hpp"
#include "valdist/locate.hpp"
#include "valdist/monomial.hpp"

namespace valdist {

struct NevanlinnaOptions {
    double quad_abs_tol = 1e-9;
    double quad_rel_tol = 1e-8;
    int quad_max_depth = 52;
    int quad_init_panels = 16;
    LocateOptions locate;
    /// Fraction of the search-disk diameter used as the blind-subdivision
    /// resolution when hunting poles/zeros of meromorphic functions. Ignored
    /// when `analytic` is set.
    double pair_resolution_frac = 1.0 / 64.0;
    /// Promise that the functions involved have no pole/zero pairs to hide:
    /// zero-winding cells are then trusted immediately. Big speedup for
    /// entire functions and polynomials.
    bool analytic = false;
};

struct QuadResult {
    double value = 0.0;
    double err = 0.0;
};

namespace detail {

struct CirclePole {};  // internal: sample hit a pole/zero of the integrand exactly

inline double logplus_of_sample(const JetFn& fn, Complex z) {
    LaurentJet j;
    try {
        j = fn(z, 0);
    } catch (const Overflow&) {
        throw CirclePole{};
    }
    if (j.is_zero()) return 0.0;            // |f| = 0, log+ = 0
    if (j.valuation() < 0) throw CirclePole{};
    if (j.valuation() > 0) return 0.0;
    const double a = std::abs(j.leading());
    if (!(a < std::numeric_limits<double>::infinity())) throw CirclePole{};
    return a > 1.0 ? std::log(a) : 0.0;
}

template <class F>
void adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb, double whole,
                      double eps, int depth, int max_depth, double& val, double& err) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * eps || (b - a) < 1e-15) {
        val += left + right + delta / 15.0;
        err += std::fabs(delta) / 15.0;
        return;
    }
    if (depth >= max_depth) throw NonConvergent("circle quadrature did not converge");
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1, max_depth, val, err);
    adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1, max_depth, val, err);
}

inline QuadResult circle_average_logplus(const JetFn& fn, double r, const NevanlinnaOptions& opts) {
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    for (int attempt = 0;; ++attempt) {
        const double rr = r * (1.0 + 1e-6 * attempt);
        auto g = [&](double theta) {
            return logplus_of_sample(fn, rr * Complex{std::cos(theta), std::sin(theta)});
        };
        try {
            // scale pass for the relative part of the tolerance
            double coarse = 0.0;
            const int nc = 128;
            for (int k = 0; k < nc; ++k) coarse += g(kTwoPi * (k + 0.5) / nc);
            coarse *= kTwoPi / nc;
            const double eps_total =
                std::max(opts.quad_abs_tol, opts.quad_rel_tol * std::fabs(coarse / kTwoPi)) * kTwoPi;

            double val = 0.0, err = 0.0;
            const int np = std::max(4, opts.quad_init_panels);
            std::vector<double> theta(static_cast<std::size_t>(np) + 1), gv(theta.size());
            for (int k = 0; k <= np; ++k) {
                theta[static_cast<std::size_t>(k)] = kTwoPi * k / np;
                gv[static_cast<std::size_t>(k)] = g(theta[static_cast<std::size_t>(k)] );
            }
            for (int k = 0; k < np; ++k) {
                const double a = theta[static_cast<std::size_t>(k)], b = theta[static_cast<std::size_t>(k) + 1];
                const double fm = g(0.5 * (a + b));
                const double whole =
                    (b - a) / 6.0 * (gv[static_cast<std::size_t>(k)] + 4.0 * fm + gv[static_cast<std::size_t>(k) + 1]);
                adaptive_simpson(g, a, b, gv[static_cast<std::size_t>(k)], fm, gv[static_cast<std::size_t>(k) + 1], whole,
                                 eps_total * (b - a) / kTwoPi, 0, opts.quad_max_depth, val, err);
            }
            return {val / kTwoPi, err / kTwoPi};
        } catch (const CirclePole&) {
            if (attempt >= 8)
                throw OnCircleSingularity("pole or zero pinned to the integration circle");
        }
    }
}

inline LocateOptions search_options(double rmax, const NevanlinnaOptions& opts) {
    LocateOptions lo = opts.locate;
    if (!opts.analytic && lo.pair_resolution <= 0.0)
        lo.pair_resolution = 2.0 * rmax * opts.pair_resolution_frac;
    if (opts.analytic) lo.pair_resolution = 0.0;
    return lo;
}

/// Roots of multiplicity m polish no better than eps^(1/m) in the location,
/// which would poison log(r/|p|) terms near the origin. When the function
/// vanishes at z = 0 structurally (positive jet valuation), the nearest
/// found root inside a small radius is relocated onto the origin.
inline void snap_origin_root(RootList& roots, const JetFn& fn, Complex target, double rmax) {
    if (roots.empty()) return;
    bool origin_is_root = false;
    try {
        LaurentJet j = fn({0.0, 0.0}, 1);
        if (target != Complex{0.0, 0.0})
            j = j - LaurentJet::constant(target, j.is_zero() ? 2 : j.order() + 1);
        origin_is_root = j.is_zero() || j.valuation() >= 1;
    } catch (const Error&) {
        return;
    }
    if (!origin_is_root) return;
    std::size_t best = roots.size();
    double dist = 1e-3 * rmax;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double d = std::abs(roots[i].location);
        if (d <= dist) {
            dist = d;
            best = i;
        }
    }
    if (best < roots.size()) roots[best].location = {0.0, 0.0};
}

} // namespace detail

/// Proximity function m(r, f): circle average of log+ |f|.
inline QuadResult proximity(const JetFn& fn, double r, const NevanlinnaOptions& opts = {}) {
    if (!(r > 0.0)) throw PreconditionError("radius must be positive");
    return detail::circle_average_logplus(fn, r, opts);
}

inline QuadResult proximity(const Expr& f, double r, const NevanlinnaOptions& opts = {}) {
    return proximity(jet_fn(f), r, opts);
}

/// Poles of fn inside |z| <= rmax, found as zeros of the reciprocal.
inline RootList pole_inventory(const JetFn& fn, double rmax, const NevanlinnaOptions& opts = {}) {
    const JetFn recip = reciprocal_fn(fn);
    RootList roots = locate_apoints(recip, Complex{0, 0},
                                    Region::disk({0, 0}, rmax * (1.0 + 1e-9)),
                                    detail::search_options(rmax, opts));
    detail::snap_origin_root(roots, recip, {0, 0}, rmax);
    return roots;
}

/// Zeros of fn - a inside |z| <= rmax.
inline RootList zero_inventory(const JetFn& fn, Complex a, double rmax,
                               const NevanlinnaOptions& opts = {}) {
    RootList roots = locate_apoints(fn, a, Region::disk({0, 0}, rmax * (1.0 + 1e-9)),
                                    detail::search_options(rmax, opts));
    detail::snap_origin_root(roots, fn, a, rmax);
    return roots;
}

/// Logarithmically weighted count over an inventory:
/// sum_{0 < |p| <= r} mu log(r/|p|) + mu(0) log r.
inline double counting_from(const RootList& roots, double r, bool reduced,
                            double origin_snap = 1e-9) {
    double total = 0.0;
    for (const Root& p : roots) {
        const double mod = std::abs(p.location);
        if (mod > r * (1.0 + 1e-12)) continue;
        const double mu = reduced ? 1.0 : static_cast<double>(p.multiplicity);
        total += mod <= origin_snap ? mu * std::log(r) : mu * std::log(r / mod);
    }
    return std::max(total, 0.0);
}

/// Counting function N(r, f) (or the reduced variant) over the poles of f.
inline double counting(const Expr& f, double r, bool reduced = false,
                       const NevanlinnaOptions& opts = {}) {
    if (!(r > 0.0)) throw PreconditionError("radius must be positive");
    return counting_from(pole_inventory(jet_fn(f), r, opts), r, reduced);
}

struct NevanlinnaReport {
    std::vector<double> r;
    std::vector<double> m, N, Nbar, T, err;
    RootList poles;  // inventory on the largest radius
};

/// Sampled m, N, N-bar and T = m + N over an increasing radius grid.
inline NevanlinnaReport characteristic(const Expr& f, const std::vector<double>& grid,
                                       const NevanlinnaOptions& opts = {}) {
    if (grid.empty()) throw PreconditionError("empty radius grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw PreconditionError("radii must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw PreconditionError("radius grid must be increasing");
    }
    const JetFn fn = jet_fn(f);
    NevanlinnaReport rep;
    rep.r = grid;
    rep.poles = pole_inventory(fn, grid.back(), opts);
    for (double r : grid) {
        const QuadResult q = proximity(fn, r, opts);
        const double N = counting_from(rep.poles, r, false);
        rep.m.push_back(q.value);
        rep.N.push_back(N);
        rep.Nbar.push_back(counting_from(rep.poles, r, true));
        rep.T.push_back(q.value + N);
        rep.err.push_back(q.err);
    }
    return rep;
}

namespace detail {

inline bool numerically_constant(const Expr& f) {
    for (Complex z0 : {Complex{0.1234, 0.0567}, Complex{-0.7113, 0.3921}}) {
        try {
            const LaurentJet j = jet_eval(f, z0, 6);
            if (j.is_zero()) continue;
            if (j.valuation() != 0) return false;
            const double scale = std::abs(j.leading());
            for (int e = 1; e <= j.known_top(); ++e)
                if (std::abs(j.coeff_at(e)) > 1e-12 * (1.0 + scale)) return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

inline JetFn shifted_reciprocal(const Expr& f, Complex a) {
    return reciprocal_fn([fn = jet_fn(f), a](Complex z, int order) {
        LaurentJet j = fn(z, order + 1);
        return j - LaurentJet::constant(a, j.is_zero() ? 2 : j.order() + 1);
    });
}

} // namespace detail

/// max over the grid of |T(r, 1/(f-a)) - T(r, f)|; the First Main Theorem
/// says this stays bounded in r.
inline double fmt_margin(const Expr& f, Complex a, const std::vector<double>& grid,
                         const NevanlinnaOptions& opts = {}) {
    if (grid.empty()) throw PreconditionError("empty radius grid");
    if (detail::numerically_constant(f)) {
        const auto v = value_at(f, {0.1234, 0.0567});
        if (v.is_finite() && std::abs(v.value() - a) < 1e-12)
            throw PreconditionError("f coincides with the target value");
    }
    const double rmax = *std::max_element(grid.begin(), grid.end());
    const JetFn fn = jet_fn(f);
    const RootList poles_f = pole_inventory(fn, rmax, opts);
    const RootList apoints = zero_inventory(fn, a, rmax, opts);  // poles of 1/(f-a)
    const JetFn recip = detail::shifted_reciprocal(f, a);
    double worst = 0.0;
    for (double r : grid) {
        const double t_f = proximity(fn, r, opts).value + counting_from(poles_f, r, false);
        const double t_g = proximity(recip, r, opts).value + counting_from(apoints, r, false);
        worst = std::max(worst, std::fabs(t_g - t_f));
    }
    return worst;
}

/// T(r,f) - sum_j Nbar(r, 1/(f-a_j)) - Nbar(r, f). The Second Main Theorem
/// bounds this by the small error term S(r,f); the caller interprets the raw
/// number against a fitted slack envelope.
inline double smt_margin(const Expr& f, const std::vector<Complex>& values, double r,
                         const NevanlinnaOptions& opts = {}) {
    if (values.size() < 3) throw PreconditionError("need at least three target values");
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i] == values[j]) throw PreconditionError("target values must be distinct");
    if (detail::numerically_constant(f)) throw PreconditionError("f must be non-constant");
    const JetFn fn = jet_fn(f);
    const RootList poles_f = pole_inventory(fn, r, opts);
    double t = proximity(fn, r, opts).value + counting_from(poles_f, r, false);
    double sum = 0.0;
    for (Complex a : values)
        sum += counting_from(zero_inventory(fn, a, r, opts), r, true);
    return t - sum - counting_from(poles_f, r, true);
}

/// T(r,f) - (theta+1)/(d-1) Nbar(r, 1/f) - 1/(d-1) Nbar(r, 1/(P-a)).
inline double hinchliffe_margin(const Expr& f, const DiffPolynomial& P, Complex a, double r,
                                const NevanlinnaOptions& opts = {}) {
    const auto ps = poly_stats(P);
    if (ps.min_degree < 2) throw DegreeTooSmall("d(P) must be at least 2");
    if (a == Complex{0, 0}) throw PreconditionError("target a must be nonzero");
    if (detail::numerically_constant(f)) throw PreconditionError("f must be non-constant");
    const JetFn fn = jet_fn(f);
    const double t = proximity(fn, r, opts).value +
                     counting_from(pole_inventory(fn, r, opts), r, false);
    const double nbar_zero = counting_from(zero_inventory(fn, {0, 0}, r, opts), r, true);
    const double nbar_pa = counting_from(zero_inventory(poly_fn(P, f), a, r, opts), r, true);
    const double d = ps.min_degree, th = ps.max_derivative_weight;
    return t - (th + 1.0) / (d - 1.0) * nbar_zero - 1.0 / (d - 1.0) * nbar_pa;
}

/// Least-squares slope of log T against log r over the upper half of the
/// grid, clamped at zero. The grid must span at least 1.5 decades.
inline double estimate_order(const Expr& f, const std::vector<double>& grid,
                             const NevanlinnaOptions& opts = {}) {
    if (grid.size() < 4) throw PreconditionError("need at least four radii");
    if (std::log10(grid.back() / grid.front()) < 1.5)
        throw PreconditionError("radius grid must span at least 1.5 decades");
    const NevanlinnaReport rep = characteristic(f, grid, opts);
    std::vector<double> xs, ys;
    for (std::size_t i = grid.size() / 2; i < grid.size(); ++i) {
        if (rep.T[i] < 10.0 * 2.220446049250313e-16) continue;
        xs.push_back(std::log(grid[i]));
        ys.push_back(std::log(rep.T[i]));
    }
    if (xs.size() < 2)
        throw InsufficientGrowth("characteristic too small to estimate an order");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return std::max(num / den, 0.0);
}

} // namespace valdist
