#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "valdist/complexutil.hpp"
#include "valdist/errors.hpp"
#include "valdist/jet.hpp"
#include "valdist/sphere.hpp"

namespace valdist {

/// Closed curve along which boundary images are sampled for winding numbers.
struct Contour {
    enum class Shape { Circle, RectBoundary };

    static Contour circle(Complex center, double radius, int samples = 32, int max_refinements = 14) {
        if (!(radius > 0.0)) throw PreconditionError("contour radius must be positive");
        Contour c;
        c.shape = Shape::Circle;
        c.center = center;
        c.radius = radius;
        c.set(samples, max_refinements);
        return c;
    }

    static Contour rect_boundary(Complex lo, Complex hi, int samples = 32, int max_refinements = 14) {
        if (!(lo.real() < hi.real()) || !(lo.imag() < hi.imag()))
            throw PreconditionError("rectangle corners must be ordered");
        Contour c;
        c.shape = Shape::RectBoundary;
        c.lo = lo;
        c.hi = hi;
        c.set(samples, max_refinements);
        return c;
    }

    Complex point(double t) const {  // t in [0,1), counterclockwise
        if (shape == Shape::Circle) {
            const double th = 2.0 * 3.14159265358979323846 * t;
            return center + radius * Complex{std::cos(th), std::sin(th)};
        }
        const double w = hi.real() - lo.real(), h = hi.imag() - lo.imag();
        const double per = 2.0 * (w + h);
        double s = t * per;
        if (s < w) return {lo.real() + s, lo.imag()};
        s -= w;
        if (s < h) return {hi.real(), lo.imag() + s};
        s -= h;
        if (s < w) return {hi.real() - s, hi.imag()};
        s -= w;
        return {lo.real(), hi.imag() - s};
    }

    Shape shape = Shape::Circle;
    Complex center{0.0, 0.0};
    double radius = 1.0;
    Complex lo{0.0, 0.0}, hi{0.0, 0.0};
    int samples = 32;
    int max_refinements = 14;

private:
    void set(int s, int r) {
        if (s < 16) throw PreconditionError("contour needs at least 16 samples");
        if (r < 0) throw PreconditionError("refinement count must be >= 0");
        samples = s;
        max_refinements = r;
    }
};

struct Root {
    Complex location{0.0, 0.0};
    int multiplicity = 1;
    double residual = 0.0;
};

using RootList = std::vector<Root>;

struct LocateOptions {
    double tol = 1e-10;          // polish residual and cluster diameter
    int max_depth = 64;
    long max_cells = 400000;
    /// 0 means the function is assumed pole-free inside the region, so
    /// zero-winding cells are dropped immediately. A positive length forces
    /// blind subdivision of zero-winding cells down to this size, which is
    /// what catches zero/pole pairs of meromorphic functions (pairs closer
    /// together than this resolution are invisible to the argument principle
    /// and stay undetected).
    double pair_resolution = 0.0;
    int contour_samples = 32;
    int contour_max_doublings = 14;
    std::uint64_t seed = 0x9E3779B97F4A7C15ull;
};

namespace detail {

inline ExtendedComplex boundary_value(const JetFn& fn, Complex z) {
    return jet_value(fn(z, 0));
}

/// Winding number of fn - target along the contour via summed phase steps.
/// Sampling doubles until every consecutive step is below pi/2, the total is
/// close to an integer multiple of 2*pi, and that integer repeats across one
/// doubling (the repeat requirement defeats aliasing by fast, regular phase
/// rotation, which can fake small steps with the wrong total).
inline int winding_raw(const JetFn& fn, Complex target, const Contour& contour) {
    constexpr double kPi = 3.14159265358979323846;
    auto phase_at = [&](double t) {
        const Complex z = contour.point(t);
        ExtendedComplex v;
        try {
            v = boundary_value(fn, z);
        } catch (const Overflow&) {
            throw OnContourSingularity("overflow while sampling the contour");
        }
        if (v.is_pole()) throw OnContourSingularity("pole of the function on the contour");
        const Complex w = v.value() - target;
        if (w == Complex{0.0, 0.0} || std::abs(w) < 1e-290)
            throw OnContourSingularity("contour passes through the target value");
        return std::arg(w);
    };

    int n = std::max(16, contour.samples);
    std::vector<double> phase(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) phase[static_cast<std::size_t>(k)] = phase_at(static_cast<double>(k) / n);

    bool have_prev = false;
    int prev = 0;
    for (int refinement = 0;; ++refinement) {
        double total = 0.0, worst = 0.0;
        for (int k = 0; k < n; ++k) {
            double d = phase[static_cast<std::size_t>((k + 1) % n)] - phase[static_cast<std::size_t>(k)];
            while (d > kPi) d -= 2.0 * kPi;
            while (d <= -kPi) d += 2.0 * kPi;
            worst = std::max(worst, std::fabs(d));
            total += d;
        }
        const double turns = total / (2.0 * kPi);
        const double nearest = std::round(turns);
        if (worst < 0.5 * kPi && std::fabs(turns - nearest) < 0.25) {
            if (have_prev && prev == static_cast<int>(nearest)) return prev;
            have_prev = true;
            prev = static_cast<int>(nearest);
        } else {
            have_prev = false;
        }
        if (refinement >= contour.max_refinements)
            throw NonConvergent("winding sampling did not stabilize");
        // interleave: previous samples sit at the even indices of the finer grid
        std::vector<double> finer(static_cast<std::size_t>(2 * n));
        for (int k = 0; k < n; ++k) {
            finer[static_cast<std::size_t>(2 * k)] = phase[static_cast<std::size_t>(k)];
            finer[static_cast<std::size_t>(2 * k + 1)] = phase_at((2.0 * k + 1.0) / (2.0 * n));
        }
        phase = std::move(finer);
        n *= 2;
    }
}

struct Cell {
    double x0, y0, x1, y1;
    int depth = 0;

    double diam() const { return std::hypot(x1 - x0, y1 - y0); }
    Complex center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    bool contains_half_open(Complex z) const {
        return z.real() >= x0 && z.real() < x1 && z.imag() >= y0 && z.imag() < y1;
    }
    Contour boundary(int samples, int doublings) const {
        return Contour::rect_boundary({x0, y0}, {x1, y1}, samples, doublings);
    }
};

inline std::uint64_t cell_hash(const Cell& c, std::uint64_t seed, int attempt) {
    std::uint64_t h = seed;
    h = hash_mix(h ^ std::bit_cast<std::uint64_t>(c.x0));
    h = hash_mix(h ^ std::bit_cast<std::uint64_t>(c.y0));
    h = hash_mix(h ^ std::bit_cast<std::uint64_t>(c.x1));
    h = hash_mix(h ^ std::bit_cast<std::uint64_t>(c.y1));
    h = hash_mix(h ^ static_cast<std::uint64_t>(attempt));
    return h;
}

/// Newton iteration on fn - target from a seed point, with the multiplicity-
/// scaled step mult * f/f' (quadratic even on multiple roots when mult is
/// right; a wrong mult just fails the later winding verification). Returns
/// the polished point when the residual drops below tol.
inline std::optional<std::pair<Complex, double>> newton_polish(const JetFn& fn, Complex target,
                                                               Complex z, double tol,
                                                               int mult = 1, int max_iter = 90) {
    double resid = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        LaurentJet j;
        try {
            j = fn(z, 2);
        } catch (const Error&) {
            return std::nullopt;
        }
        if (j.is_zero()) {
            // expansion vanishes: target 0 is matched exactly
            if (std::abs(target) == 0.0) return std::make_pair(z, 0.0);
            return std::nullopt;
        }
        if (j.valuation() < 0) return std::nullopt;  // sitting on a pole
        const Complex value = (j.valuation() == 0 ? j.leading() : Complex{0.0, 0.0}) - target;
        Complex deriv{0.0, 0.0};
        if (j.covers_exponent(1)) deriv = j.coeff_at(1);
        resid = std::abs(value);
        if (resid == 0.0) return std::make_pair(z, 0.0);
        if (mult == 1 && resid <= tol * 1e-3) return std::make_pair(z, resid);
        if (deriv == Complex{0.0, 0.0} || !is_finite(deriv)) {
            // flat spot: deterministic nudge and keep going
            const double u = hash_unit(std::bit_cast<std::uint64_t>(z.real()),
                                       std::bit_cast<std::uint64_t>(z.imag()), it);
            z += (1e-6 + 1e-6 * u) * Complex{std::cos(6.28 * u), std::sin(6.28 * u)};
            continue;
        }
        const Complex step = static_cast<double>(mult) * value / deriv;
        if (!is_finite(step)) return std::nullopt;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) break;
        z -= step;
        if (!is_finite(z)) return std::nullopt;
    }
    if (resid <= tol) return std::make_pair(z, resid);
    return std::nullopt;
}

class Subdivider {
public:
    Subdivider(const JetFn& fn, Complex target, const LocateOptions& opts)
        : fn_(fn), target_(target), opts_(opts) {}

    RootList run(const Cell& top) {
        process(top, winding_with_retry(top));
        // deterministic merge order; coordinates quantized at tol so that
        // last-ulp noise cannot flip the ordering of near-tied columns
        const double q = std::max(opts_.tol, 1e-13);
        auto key = [q](Complex z) {
            return std::pair<long long, long long>{std::llround(z.real() / q),
                                                   std::llround(z.imag() / q)};
        };
        std::sort(roots_.begin(), roots_.end(), [&](const Root& a, const Root& b) {
            return key(a.location) < key(b.location);
        });
        return std::move(roots_);
    }

    int winding_with_retry(const Cell& c) {
        for (int attempt = 0;; ++attempt) {
            Cell probe = c;
            if (attempt > 0) {
                // deterministic pseudo-random nudge, relative size 1e-4
                const double sx = (c.x1 - c.x0) * 1e-4 * attempt;
                const double sy = (c.y1 - c.y0) * 1e-4 * attempt;
                const double u = hash_unit(cell_hash(c, opts_.seed, attempt), 77);
                probe.x0 -= sx * (0.5 + u);
                probe.x1 += sx * (1.5 - u);
                probe.y0 -= sy * (1.0 - u);
                probe.y1 += sy * (0.5 + u);
            }
            try {
                return winding_raw(fn_, target_, probe.boundary(opts_.contour_samples,
                                                                opts_.contour_max_doublings));
            } catch (const OnContourSingularity&) {
                if (attempt >= 8) throw;
            } catch (const NonConvergent&) {
                if (attempt >= 8) throw;
            }
        }
    }

private:
    void process(const Cell& cell, int winding) {
        if (++cells_ > opts_.max_cells)
            throw BudgetExceeded("subdivision cell budget exhausted");

        if (winding == 0) {
            if (opts_.pair_resolution > 0.0 && cell.diam() > opts_.pair_resolution)
                subdivide(cell, winding);
            return;
        }

        const bool shortcut_allowed =
            opts_.pair_resolution <= 0.0 || cell.diam() <= opts_.pair_resolution;

        if (shortcut_allowed && try_resolve(cell, winding)) return;

        if (cell.diam() <= opts_.tol) {
            if (winding >= 1) {
                const Complex c = cell.center();
                double resid = std::numeric_limits<double>::infinity();
                try {
                    const ExtendedComplex v = boundary_value(fn_, c);
                    if (v.is_finite()) resid = std::abs(v.value() - target_);
                } catch (const Error&) {
                }
                roots_.push_back({c, winding, resid});
            }
            return;  // net pole clusters are not reported
        }

        if (cell.depth >= opts_.max_depth)
            throw BudgetExceeded("subdivision depth cap reached");
        subdivide(cell, winding);
    }

    /// Polish-and-verify: Newton from the cell center (zeros, or poles via
    /// the reciprocal), then check that a small square around the polished
    /// point carries the cell's entire winding.
    bool try_resolve(const Cell& cell, int winding) {
        const bool want_pole = winding < 0;
        const JetFn* f = &fn_;
        JetFn recip;
        Complex target = target_;
        if (want_pole) {
            recip = [this](Complex z, int o) {
                LaurentJet j = fn_(z, o + 1) - LaurentJet::constant(target_, 2);
                return LaurentJet::constant(Complex{1.0, 0.0}, j.is_zero() ? 2 : j.order() + 1) / j;
            };
            f = &recip;
            target = {0.0, 0.0};
        }

        const int mult = winding < 0 ? -winding : winding;
        auto polished = newton_polish(*f, target, cell.center(), opts_.tol, mult);
        if (!polished) {
            const double u = hash_unit(cell_hash(cell, opts_.seed, 5), 3);
            const Complex alt = cell.center() + 0.25 * Complex{(cell.x1 - cell.x0) * (u - 0.5),
                                                               (cell.y1 - cell.y0) * (0.5 - u)};
            polished = newton_polish(*f, target, alt, opts_.tol, mult);
        }
        if (!polished) return false;
        const auto [q, resid] = *polished;
        if (!cell.contains_half_open(q)) return false;

        const double margin = std::min({q.real() - cell.x0, cell.x1 - q.real(),
                                        q.imag() - cell.y0, cell.y1 - q.imag()});
        double hw = std::min(std::max(32.0 * opts_.tol, cell.diam() * 1e-5), 0.9 * margin);
        if (!(hw > 0.0)) return false;
        for (int attempt = 0; attempt < 4; ++attempt) {
            const Cell square{q.real() - hw, q.imag() - hw, q.real() + hw, q.imag() + hw, cell.depth};
            try {
                const int w = winding_raw(fn_, target_, square.boundary(opts_.contour_samples,
                                                                        opts_.contour_max_doublings));
                if (w != winding) return false;
                if (winding >= 1) roots_.push_back({q, winding, resid});
                return true;  // poles: resolved and dropped
            } catch (const OnContourSingularity&) {
            } catch (const NonConvergent&) {
            }
            hw *= 0.61803398875;
        }
        return false;
    }

    void subdivide(const Cell& cell, int parent_winding) {
        for (int attempt = 0;; ++attempt) {
            if (attempt > 8)
                throw OnContourSingularity("could not split cell around boundary singularities");
            const std::uint64_t h = cell_hash(cell, opts_.seed, attempt);
            const double jx = 0.5 + 0.1 * (hash_unit(h, 1) - 0.5);
            const double jy = 0.5 + 0.1 * (hash_unit(h, 2) - 0.5);
            const double sx = cell.x0 + (cell.x1 - cell.x0) * jx;
            const double sy = cell.y0 + (cell.y1 - cell.y0) * jy;
            const Cell kids[4] = {
                {cell.x0, cell.y0, sx, sy, cell.depth + 1},
                {sx, cell.y0, cell.x1, sy, cell.depth + 1},
                {cell.x0, sy, sx, cell.y1, cell.depth + 1},
                {sx, sy, cell.x1, cell.y1, cell.depth + 1},
            };
            int w[4];
            bool ok = true;
            for (int i = 0; i < 4 && ok; ++i) {
                try {
                    w[i] = winding_raw(fn_, target_, kids[i].boundary(opts_.contour_samples,
                                                                      opts_.contour_max_doublings));
                } catch (const OnContourSingularity&) {
                    ok = false;
                } catch (const NonConvergent&) {
                    ok = false;
                }
            }
            if (!ok) continue;
            if (parent_winding != 0) {
                int sum = w[0] + w[1] + w[2] + w[3];
                if (sum != parent_winding) continue;  // a feature straddles a split line
            }
            for (int i = 0; i < 4; ++i) process(kids[i], w[i]);
            return;
        }
    }

    const JetFn& fn_;
    Complex target_;
    LocateOptions opts_;
    RootList roots_;
    long cells_ = 0;
};

} // namespace detail

/// Zeros minus poles of fn - target inside the contour, by the argument
/// principle. The caller perturbs the contour on OnContourSingularity.
inline int winding_count(const JetFn& fn, Complex target, const Contour& contour) {
    return detail::winding_raw(fn, target, contour);
}

inline int winding_count(const Expr& expr, Complex target, const Contour& contour) {
    return winding_count(jet_fn(expr), target, contour);
}

/// All a-points of fn inside the region, polished to residual <= tol, with
/// multiplicities from tol-scale winding counts. Disk regions are searched on
/// the bounding square and filtered by membership.
inline RootList locate_apoints(const JetFn& fn, Complex a, const Region& region,
                               const LocateOptions& opts = {}) {
    if (!is_finite(a)) throw PreconditionError("target must be finite");
    const Complex lo = region.bounding_lo(), hi = region.bounding_hi();

    for (int attempt = 0;; ++attempt) {
        // outward nudge of the top rectangle when its boundary is singular
        const double fx = 1e-4 * attempt * (1.0 + hash_unit(opts.seed, 911, attempt));
        const double gx = (hi.real() - lo.real()) * fx, gy = (hi.imag() - lo.imag()) * fx;
        detail::Cell top{lo.real() - gx, lo.imag() - gy, hi.real() + gx, hi.imag() + gy, 0};
        try {
            detail::Subdivider sub(fn, a, opts);
            RootList roots = sub.run(top);
            RootList filtered;
            for (const Root& r : roots)
                if (region.contains(r.location)) filtered.push_back(r);
            return filtered;
        } catch (const OnContourSingularity&) {
            if (attempt >= 8) throw;
        }
    }
}

inline RootList locate_apoints(const Expr& expr, Complex a, const Region& region,
                               const LocateOptions& opts = {}) {
    if (expr.has_parameters()) throw UnboundParameter("expression must be parameter-free");
    return locate_apoints(jet_fn(expr), a, region, opts);
}

/// Preimage search for each member of a finite target set, keyed by target.
inline std::vector<std::pair<Complex, RootList>> preimage_set(const Expr& expr,
                                                              const std::vector<Complex>& targets,
                                                              const Region& region,
                                                              const LocateOptions& opts = {}) {
    std::vector<std::pair<Complex, RootList>> out;
    out.reserve(targets.size());
    for (Complex t : targets) out.emplace_back(t, locate_apoints(expr, t, region, opts));
    return out;
}

} // namespace valdist
