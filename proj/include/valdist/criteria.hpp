#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "valdist/complexutil.hpp"
#include "valdist/errors.hpp"
#include "valdist/expr.hpp"
#include "valdist/jet.hpp"
#include "valdist/locate.hpp"
#include "valdist/monomial.hpp"
#include "valdist/sphere.hpp"

namespace valdist {

struct AuditConfig {
    Region region = Region::disk({0, 0}, 1.0);
    std::vector<Complex> targets;      // finite target set E (point audits)
    std::optional<Complex> target_a;   // single nonzero target (monomial audits)
    int k = 1;                         // derivative ceiling
    std::optional<double> bound;       // M; absent = report the supremum only
    double tol = 1e-10;
    LocateOptions locate;
};

enum class Verdict { WithinBound, ExceedsBound, Vacuous, SupOnly };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::WithinBound: return "within-bound";
        case Verdict::ExceedsBound: return "exceeds-bound";
        case Verdict::Vacuous: return "vacuous-empty-preimage";
        case Verdict::SupOnly: return "sup-only";
    }
    return "?";
}

struct AuditPoint {
    Complex target{0, 0};
    Complex location{0, 0};
    int multiplicity = 1;
    double residual = 0.0;
    std::vector<double> sharp;  // (f^(j))^# for j = 0..k-1, or the single monomial value
};

struct ThresholdBlock {
    int degree = 0;       // d_M
    int dweight = 0;      // D_M
    Rational rhs;         // exact right-hand side of the degree condition
    bool satisfied = false;
    int k = 1;
};

struct AuditReport {
    std::vector<std::pair<Complex, RootList>> preimages;
    std::vector<AuditPoint> points;
    double supremum = 0.0;
    Verdict verdict = Verdict::Vacuous;
    std::optional<double> bound;
    std::optional<ThresholdBlock> threshold;
    std::optional<bool> zeros_multiplicity_ok;  // informational, tolerance-limited
};

namespace detail {

inline Verdict settle_verdict(bool any_points, double sup, const std::optional<double>& bound) {
    if (!any_points) return Verdict::Vacuous;
    if (!bound) return Verdict::SupOnly;
    return sup <= *bound ? Verdict::WithinBound : Verdict::ExceedsBound;
}

} // namespace detail

/// Audit the bounded-spherical-derivative hypothesis on the preimage of a
/// finite target set: locate K ∩ f^{-1}(E), evaluate (f^(j))^# there for
/// j = 0..k-1, and compare the supremum against the bound when one is given.
inline AuditReport lappan_audit(const Expr& f, const AuditConfig& cfg) {
    if (f.has_parameters()) throw UnboundParameter("audited expression must be parameter-free");
    if (cfg.targets.empty()) throw PreconditionError("audit needs a nonempty target set");
    if (cfg.k < 1) throw PreconditionError("derivative ceiling k must be >= 1");
    for (std::size_t i = 0; i < cfg.targets.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.targets.size(); ++j)
            if (cfg.targets[i] == cfg.targets[j])
                throw DistinctnessViolation("target set has repeated values");

    LocateOptions lo = cfg.locate;
    lo.tol = cfg.tol;

    AuditReport rep;
    rep.bound = cfg.bound;
    bool any = false;
    for (Complex e : cfg.targets) {
        RootList pre = locate_apoints(f, e, cfg.region, lo);
        for (const Root& r : pre) {
            AuditPoint pt;
            pt.target = e;
            pt.location = r.location;
            pt.multiplicity = r.multiplicity;
            pt.residual = r.residual;
            for (int j = 0; j < cfg.k; ++j)
                pt.sharp.push_back(spherical_derivative(f, r.location, j));
            for (double s : pt.sharp) rep.supremum = std::max(rep.supremum, s);
            rep.points.push_back(std::move(pt));
            any = true;
        }
        rep.preimages.emplace_back(e, std::move(pre));
    }
    rep.verdict = detail::settle_verdict(any, rep.supremum, cfg.bound);
    return rep;
}

/// Audit the monomial hypothesis: locate {z in K : M[f](z) = a}, evaluate
/// (M[f])^# there, and attach the exact degree-threshold block. The zero
/// multiplicity condition on f is reported informationally.
inline AuditReport monomial_audit(const Expr& f, const MonomialSpec& spec,
                                  const AuditConfig& cfg) {
    if (f.has_parameters()) throw UnboundParameter("audited expression must be parameter-free");
    if (!cfg.target_a) throw PreconditionError("monomial audit needs a single target value a");
    const Complex a = *cfg.target_a;
    if (a == Complex{0, 0}) throw ZeroTarget("monomial audits require a != 0");

    LocateOptions lo = cfg.locate;
    lo.tol = cfg.tol;

    const ThresholdResult th =
        threshold_check(spec, spec.order() == 0 ? std::optional<int>(cfg.k) : std::nullopt);

    AuditReport rep;
    rep.bound = cfg.bound;
    rep.threshold = ThresholdBlock{spec.degree(), spec.derivative_weight(), th.rhs, th.satisfied, th.k};

    const JetFn fn = monomial_fn(spec, f);
    RootList apts = locate_apoints(fn, a, cfg.region, lo);
    bool any = false;
    for (const Root& r : apts) {
        AuditPoint pt;
        pt.target = a;
        pt.location = r.location;
        pt.multiplicity = r.multiplicity;
        pt.residual = r.residual;
        pt.sharp.push_back(spherical_derivative(fn, r.location));
        rep.supremum = std::max(rep.supremum, pt.sharp[0]);
        rep.points.push_back(std::move(pt));
        any = true;
    }
    rep.preimages.emplace_back(a, std::move(apts));

    RootList fzeros = locate_apoints(f, {0, 0}, cfg.region, lo);
    bool mult_ok = true;
    for (const Root& r : fzeros) mult_ok = mult_ok && r.multiplicity >= th.k;
    rep.zeros_multiplicity_ok = mult_ok;

    rep.verdict = detail::settle_verdict(any, rep.supremum, cfg.bound);
    return rep;
}

/// B_1 = M(1 + max |b|^2), B_j = M(1 + B_{j-1}^2) for j = 2..k-1.
inline std::vector<double> bound_cascade(double M, const std::vector<Complex>& targets, int k) {
    if (!(M > 0.0)) throw PreconditionError("bound M must be positive");
    if (targets.empty()) throw PreconditionError("target set must be nonempty");
    if (k < 2) throw PreconditionError("cascade needs k >= 2");
    double maxsq = 0.0;
    for (Complex b : targets) maxsq = std::max(maxsq, std::norm(b));
    std::vector<double> out;
    out.push_back(M * (1.0 + maxsq));
    for (int j = 2; j <= k - 1; ++j) out.push_back(M * (1.0 + out.back() * out.back()));
    return out;
}

/// Check |f^(j)(z)| <= B_j at every located preimage point, 1 <= j <= k-1.
/// Requires a passing (or vacuous) point audit with an explicit bound.
inline bool cascade_consistency(const Expr& f, const AuditConfig& cfg) {
    if (!cfg.bound) throw PreconditionError("cascade check needs the audit bound M");
    const AuditReport rep = lappan_audit(f, cfg);
    if (rep.verdict == Verdict::Vacuous) return true;
    if (rep.verdict != Verdict::WithinBound)
        throw PreconditionError("cascade check requires a within-bound audit");
    if (cfg.k < 2) return true;
    const std::vector<double> B = bound_cascade(*cfg.bound, cfg.targets, cfg.k);
    for (const AuditPoint& pt : rep.points) {
        for (int j = 1; j <= cfg.k - 1; ++j) {
            const auto v = derivative_at(f, pt.location, j);
            if (v.is_pole()) return false;
            if (std::abs(v.value()) > B[static_cast<std::size_t>(j - 1)] * (1.0 + 1e-9))
                return false;
        }
    }
    return true;
}

/// One member of a rescaling diagnostic sequence.
struct RescaleStep {
    std::size_t index = 0;       // position in the family's value list
    Complex witness{0, 0};       // z_n, the Marty argmax
    double rho = 0.0;            // 1 / f_n^#(z_n)
    double alpha = 0.0;
    std::vector<ExtendedComplex> samples;  // g_n on the fixed xi grid
    double sharp0 = 0.0;         // g_n^#(0)
};

/// Expression for g_n(xi) = rho^{-alpha} f_n(z_n + rho xi).
inline Expr rescaled_member(const Expr& member, Complex witness, double rho, double alpha) {
    return Expr::literal(Complex{std::pow(rho, -alpha), 0.0}) *
           affine_precompose(member, witness, Complex{rho, 0.0});
}

/// Constructive rescaling explorer: for each family member take the Marty
/// argmax as witness, rho = 1/estimate, and sample the rescaled member on a
/// fixed xi grid. Convergence is judged by the caller from the sequence.
inline std::vector<RescaleStep> zalcman_rescale(const Family& family, const Region& region,
                                                double alpha, const std::vector<Complex>& xi_grid) {
    if (!(alpha > -1.0)) throw PreconditionError("rescaling exponent must satisfy alpha > -1");
    if (xi_grid.empty()) throw PreconditionError("xi grid must be nonempty");
    std::vector<RescaleStep> steps;
    steps.reserve(family.size());
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Expr member = family.instantiate(i);
        const MartyEstimate m = marty_sup(member, region, 0);
        if (!(m.estimate > 0.0))
            throw FlatFamily("member " + std::to_string(i) + " has vanishing spherical derivative");
        RescaleStep st;
        st.index = i;
        st.witness = m.argmax;
        st.rho = 1.0 / m.estimate;
        st.alpha = alpha;
        const Expr g = rescaled_member(member, st.witness, st.rho, alpha);
        st.samples.reserve(xi_grid.size());
        for (Complex xi : xi_grid) st.samples.push_back(value_at(g, xi));
        st.sharp0 = spherical_derivative(g, {0, 0}, 0);
        steps.push_back(std::move(st));
    }
    return steps;
}

struct IdentityGap {
    ExtendedComplex lhs;  // M[g_m](xi)
    ExtendedComplex rhs;  // M[f_m](z_m + rho_m xi)
    double gap = 0.0;
};

/// Both sides of the rescaling identity M[g_m](xi) = M[f_m](z_m + rho_m xi),
/// which holds exactly when alpha = D_M / d_M.
inline IdentityGap rescale_monomial_identity(const Family& family, const MonomialSpec& spec,
                                             const RescaleStep& step, Complex xi) {
    const double alpha_expected =
        static_cast<double>(spec.derivative_weight()) / static_cast<double>(spec.degree());
    if (std::fabs(step.alpha - alpha_expected) > 1e-12)
        throw PreconditionError("step exponent does not match D_M/d_M for this monomial");
    const Expr member = family.instantiate(step.index);
    const Expr g = rescaled_member(member, step.witness, step.rho, step.alpha);
    IdentityGap out;
    out.lhs = jet_value(monomial_eval(spec, g, xi, 2));
    out.rhs = jet_value(monomial_eval(spec, member, step.witness + step.rho * xi, 2));
    if (out.lhs.is_pole() || out.rhs.is_pole())
        throw PreconditionError("identity comparison hit a pole; pick another sample point");
    out.gap = std::abs(out.lhs.value() - out.rhs.value());
    return out;
}

} // namespace valdist
