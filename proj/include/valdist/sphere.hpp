#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "valdist/complexutil.hpp"
#include "valdist/errors.hpp"
#include "valdist/jet.hpp"

namespace valdist {

namespace detail {

/// Spherical derivative |g'| / (1 + |g|^2) read off a jet of g, evaluated
/// directly. Valid when g is finite at the base point.
inline double spherical_direct(const LaurentJet& j) {
    if (j.is_zero()) return 0.0;
    const Complex g = j.coeff_at(0);
    const Complex gp = j.covers_exponent(1) ? j.coeff_at(1) : Complex{0.0, 0.0};
    return std::abs(gp) / (1.0 + std::norm(g));
}

/// Same quantity computed in the reciprocal chart 1/g; the two expressions
/// are algebraically identical, but this one stays stable at and near poles.
inline double spherical_chart(const LaurentJet& j) {
    return spherical_direct(j.reciprocal());
}

/// Chart switchover at |g| > 1.
inline double spherical_of_jet(const LaurentJet& j) {
    if (j.is_zero()) return 0.0;
    if (j.valuation() < 0) return spherical_chart(j);
    if (j.valuation() == 0 && std::abs(j.leading()) > 1.0) return spherical_chart(j);
    return spherical_direct(j);
}

} // namespace detail

/// Spherical derivative of the j-th derivative of expr at z0. At a pole of
/// f^(j) the value is the continuous extension through the 1/f chart.
inline double spherical_derivative(const Expr& expr, Complex z0, int j = 0) {
    if (j < 0) throw PreconditionError("derivative index must be >= 0");
    LaurentJet jet = jet_eval(expr, z0, j + 2).derivative(j);
    if (!jet.is_zero() && jet.order() < 1)
        jet = jet_eval(expr, z0, j + 4).derivative(j);
    return detail::spherical_of_jet(jet);
}

/// Spherical derivative of a jet-evaluable function at z0 (order 0).
inline double spherical_derivative(const JetFn& fn, Complex z0) {
    LaurentJet jet = fn(z0, 2);
    if (!jet.is_zero() && jet.order() < 1) jet = fn(z0, 4);
    return detail::spherical_of_jet(jet);
}

/// (1 - |z0|^2) f^#(z0), the unit-disk normalization.
inline double hyperbolic_spherical(const Expr& expr, Complex z0) {
    const double r2 = std::norm(z0);
    if (r2 >= 1.0) throw OutsideUnitDisk("point is not inside the unit disk");
    return (1.0 - r2) * spherical_derivative(expr, z0, 0);
}

/// Closed disk or closed axis-aligned rectangle with a sampling grid.
///
/// The grid places `resolution` samples per axis at x_k = c + hw*(2k - m)/m,
/// k = 0..m-1: the center is hit exactly (k = m/2 for even m), the left/bottom
/// edge is included and the right/top edge is not. Refinement re-grids a
/// one-cell neighbourhood of the running maximum at the same resolution.
struct Region {
    enum class Shape { Disk, Rect };

    static Region disk(Complex center, double radius, int resolution = 32, int refine_depth = 8) {
        if (!(radius > 0.0)) throw PreconditionError("disk radius must be positive");
        Region r;
        r.shape = Shape::Disk;
        r.center = center;
        r.radius = radius;
        r.set_grid(resolution, refine_depth);
        return r;
    }

    static Region rect(Complex lo, Complex hi, int resolution = 32, int refine_depth = 8) {
        if (!(lo.real() < hi.real()) || !(lo.imag() < hi.imag()))
            throw PreconditionError("rectangle corners must be ordered and non-degenerate");
        Region r;
        r.shape = Shape::Rect;
        r.lo = lo;
        r.hi = hi;
        r.set_grid(resolution, refine_depth);
        return r;
    }

    bool contains(Complex z) const {
        if (shape == Shape::Disk) return std::abs(z - center) <= radius * (1.0 + 1e-12);
        return z.real() >= lo.real() - 1e-15 && z.real() <= hi.real() + 1e-15 &&
               z.imag() >= lo.imag() - 1e-15 && z.imag() <= hi.imag() + 1e-15;
    }

    Complex bounding_lo() const {
        return shape == Shape::Disk ? center - Complex{radius, radius} : lo;
    }
    Complex bounding_hi() const {
        return shape == Shape::Disk ? center + Complex{radius, radius} : hi;
    }
    double diameter() const {
        return shape == Shape::Disk ? 2.0 * radius : std::abs(hi - lo);
    }

    Shape shape = Shape::Disk;
    Complex center{0.0, 0.0};
    double radius = 1.0;
    Complex lo{0.0, 0.0}, hi{0.0, 0.0};
    int resolution = 32;
    int refine_depth = 8;

private:
    void set_grid(int res, int depth) {
        if (res < 2) throw PreconditionError("grid resolution must be >= 2");
        if (depth < 0) throw PreconditionError("refinement depth must be >= 0");
        resolution = res;
        refine_depth = depth;
    }
};

namespace detail {

inline std::vector<double> axis_samples(double c, double hw, int m) {
    std::vector<double> xs(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
        xs[static_cast<std::size_t>(k)] = c + hw * (static_cast<double>(2 * k - m) / m);
    return xs;
}

} // namespace detail

struct MartyEstimate {
    double estimate = 0.0;
    Complex argmax{0.0, 0.0};
};

/// Grid-refined lower bound for sup of (f^(j))^# over a region, with the
/// point where the largest sample was seen. Near-ties (within 1e-9 relative)
/// resolve to the smallest |z|, then lexicographically smallest (Re, Im), so
/// witness points are stable across family members.
inline MartyEstimate marty_sup(const Expr& expr, const Region& region, int j = 0) {
    const int m = region.resolution;

    auto prefer = [](Complex a, Complex b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma < mb;
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    };

    MartyEstimate best;
    bool have = false;

    auto sweep = [&](Complex c, double hwx, double hwy) {
        const auto xs = detail::axis_samples(c.real(), hwx, m);
        const auto ys = detail::axis_samples(c.imag(), hwy, m);
        std::vector<std::pair<double, Complex>> samples;
        samples.reserve(xs.size() * ys.size());
        for (double x : xs) {
            for (double y : ys) {
                const Complex z{x, y};
                if (!region.contains(z)) continue;
                samples.emplace_back(spherical_derivative(expr, z, j), z);
            }
        }
        if (samples.empty()) return;
        double round_max = have ? best.estimate : 0.0;
        for (const auto& [v, z] : samples) round_max = std::max(round_max, v);
        const double band = round_max * (1.0 - 1e-9);
        Complex pick{0.0, 0.0};
        bool picked = false;
        if (have && best.estimate >= band) {
            pick = best.argmax;
            picked = true;
        }
        for (const auto& [v, z] : samples) {
            if (v < band) continue;
            if (!picked || prefer(z, pick)) {
                pick = z;
                picked = true;
            }
        }
        best = {round_max, pick};
        have = true;
    };

    double hwx, hwy;
    Complex c0;
    if (region.shape == Region::Shape::Disk) {
        c0 = region.center;
        hwx = hwy = region.radius;
    } else {
        c0 = 0.5 * (region.lo + region.hi);
        hwx = 0.5 * (region.hi.real() - region.lo.real());
        hwy = 0.5 * (region.hi.imag() - region.lo.imag());
    }

    sweep(c0, hwx, hwy);
    if (!have) throw PreconditionError("region grid produced no samples");

    for (int d = 0; d < region.refine_depth; ++d) {
        hwx = 2.0 * hwx / m;
        hwy = 2.0 * hwy / m;
        sweep(best.argmax, hwx, hwy);
    }
    return best;
}

} // namespace valdist
