#include <catch2/catch.hpp>

#include "valdist/nevanlinna.hpp"

#include "helpers.hpp"

using namespace valdist;

namespace {

NevanlinnaOptions entire_opts() {
    NevanlinnaOptions o;
    o.analytic = true;
    return o;
}

/// Independent quadrature oracle: plain midpoint rule on naive_eval, no jets.
double midpoint_logplus(const Expr& f, double r, int n = 200000) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double th = two_pi * (k + 0.5) / n;
        const double mag = std::abs(testutil::naive_eval(f, r * Complex{std::cos(th), std::sin(th)}));
        if (mag > 1.0) acc += std::log(mag);
    }
    return acc / n;
}

} // namespace

TEST_CASE("proximity of z on the unit circle vanishes") {
    auto q = proximity(parse("z"), 1.0, entire_opts());
    CHECK(q.value == Approx(0.0).margin(1e-12));
}

TEST_CASE("proximity of z^d at r = e is d") {
    for (int d : {1, 3, 7}) {
        auto q = proximity(Expr::pow(Expr::variable(), d), std::exp(1.0), entire_opts());
        CHECK(q.value == Approx(static_cast<double>(d)).margin(1e-9));
    }
}

TEST_CASE("proximity of exp(z) matches r/pi and the midpoint oracle") {
    const Expr f = parse("exp(z)");
    const double r = 5.0;
    auto q = proximity(f, r, entire_opts());
    CHECK(q.value == Approx(r / 3.14159265358979323846).epsilon(1e-7));
    CHECK(q.value == Approx(midpoint_logplus(f, r)).margin(1e-5));
}

TEST_CASE("counting of an entire function is zero") {
    CHECK(counting(parse("exp(z)"), 3.0, false, entire_opts()) == 0.0);
}

TEST_CASE("counting of 1/(z(z-1)) at r = 2 is 2 log 2") {
    const double n = counting(parse("1/(z*(z - 1))"), 2.0);
    CHECK(n == Approx(2.0 * std::log(2.0)).margin(1e-9));
}

TEST_CASE("reduced counting collapses multiplicities") {
    const double r = std::exp(1.0);
    CHECK(counting(parse("1/z^2"), r, true) == Approx(1.0).margin(1e-12));
    CHECK(counting(parse("1/z^2"), r, false) == Approx(2.0).margin(1e-12));
}

TEST_CASE("characteristic of powers is d log r") {
    const std::vector<double> grid = {std::exp(1.0), std::exp(2.0)};
    for (int d : {1, 3}) {
        auto rep = characteristic(Expr::pow(Expr::variable(), d), grid, entire_opts());
        CHECK(rep.T[0] == Approx(static_cast<double>(d)).margin(1e-9));
        CHECK(rep.T[1] == Approx(2.0 * d).margin(1e-9));
    }
}

TEST_CASE("characteristic of exp at r = pi is 1") {
    auto rep = characteristic(parse("exp(z)"), {3.14159265358979323846}, entire_opts());
    CHECK(rep.T[0] == Approx(1.0).epsilon(1e-7));
}

TEST_CASE("characteristic of a constant vanishes") {
    auto rep = characteristic(parse("0.5"), {1.0, 2.0, 4.0}, entire_opts());
    for (double t : rep.T) CHECK(t == Approx(0.0).margin(1e-12));
}

TEST_CASE("characteristic reports satisfy the defining identities") {
    const Expr f = parse("(z^2 - 1)/(z^2 + 4)");
    const std::vector<double> grid = {1.0, 2.0, 4.0, 8.0};
    auto rep = characteristic(f, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(rep.T[i] == rep.m[i] + rep.N[i]);  // exact by construction
        CHECK(rep.Nbar[i] <= rep.N[i] + 1e-15);
        CHECK(rep.m[i] >= 0.0);
        CHECK(rep.N[i] >= 0.0);
        if (i > 0) CHECK(rep.T[i] >= rep.T[i - 1] - 1e-9);  // monotone up to quadrature noise
    }
    // poles of f are at +-2i
    REQUIRE(rep.poles.size() == 2);
    CHECK(std::abs(std::abs(rep.poles[0].location) - 2.0) < 1e-8);
}

TEST_CASE("fmt margin of z at the origin target is zero") {
    const double m = fmt_margin(parse("z"), {0, 0}, {2, 4, 8}, entire_opts());
    CHECK(m <= 1e-12);
}

TEST_CASE("fmt margin of a Moebius function stays small") {
    const double m = fmt_margin(parse("(z - 1)/(z + 1)"), {0, 0}, {2, 4, 8, 16});
    CHECK(m <= 2.0);
}

TEST_CASE("fmt margin of the exponential against its golden pin") {
    const double m = fmt_margin(parse("exp(z)"), {1, 0}, {2, 4, 8}, entire_opts());
    CHECK(m <= 0.2);  // regression pin; measured 0.1146
    CHECK(m >= 0.0);
}

TEST_CASE("smt margin for linear f against three values") {
    const double m = smt_margin(parse("z"), {{0, 0}, {1, 0}, {2, 0}}, 10.0, entire_opts());
    const double expect = std::log(10.0) - (std::log(10.0) + std::log(10.0) + std::log(5.0));
    CHECK(m == Approx(expect).margin(1e-7));
    CHECK(m < 0.0);
}

TEST_CASE("smt margin for z^2 is negative") {
    const double m = smt_margin(parse("z^2"), {{0, 0}, {1, 0}, {-1, 0}}, 4.0, entire_opts());
    const double expect = 2.0 * std::log(4.0)     // T
                          - std::log(4.0)         // double zero at 0, reduced
                          - 2.0 * std::log(4.0)   // z^2 = 1
                          - 2.0 * std::log(4.0);  // z^2 = -1
    CHECK(m == Approx(expect).margin(1e-7));
    CHECK(m < 0.0);
}

TEST_CASE("smt margin rejects constants and repeated values") {
    CHECK_THROWS_AS(smt_margin(parse("3"), {{0, 0}, {1, 0}, {2, 0}}, 4.0), PreconditionError);
    CHECK_THROWS_AS(smt_margin(parse("z"), {{0, 0}, {0, 0}, {2, 0}}, 4.0), PreconditionError);
    CHECK_THROWS_AS(smt_margin(parse("z"), {{0, 0}, {1, 0}}, 4.0), PreconditionError);
}

TEST_CASE("hinchliffe margin closed forms for polynomial data") {
    // f = z^2, P = f^2: d = 2, theta = 0, T = 2 log r, Nbar(1/f) = log r,
    // P - 1 has four simple roots on the unit circle.
    DiffPolynomial p({{Expr::literal(1.0), {2}}});
    const double r = 4.0;
    const double m = hinchliffe_margin(parse("z^2"), p, {1, 0}, r, entire_opts());
    const double expect = 2.0 * std::log(r) - std::log(r) - 4.0 * std::log(r);
    CHECK(m == Approx(expect).margin(1e-7));
    CHECK(m <= 0.0);

    // f = z, P = f^2, r = e: T = 1, Nbar(1/f) = 1, zeros of z^2 - 1 at +-1
    const double m2 = hinchliffe_margin(parse("z"), p, {1, 0}, std::exp(1.0), entire_opts());
    CHECK(m2 == Approx(1.0 - 1.0 - 2.0).margin(1e-7));
}

TEST_CASE("hinchliffe margin needs degree at least two") {
    DiffPolynomial p({{Expr::literal(1.0), {1}}});
    CHECK_THROWS_AS(hinchliffe_margin(parse("z"), p, {1, 0}, 2.0), DegreeTooSmall);
}

TEST_CASE("order estimates: 0 for polynomials, 1 for exp, 2 for exp(z^2)") {
    std::vector<double> wide;
    for (int i = 0; i <= 15; ++i) wide.push_back(100.0 * std::pow(10.0, 6.0 * i / 15.0));
    CHECK(estimate_order(parse("z^3"), wide, entire_opts()) == Approx(0.0).margin(0.1));

    std::vector<double> mid;
    for (int i = 0; i <= 11; ++i) mid.push_back(std::pow(2.0, i / 2.0 + 0.0));
    CHECK(estimate_order(parse("exp(z)"), mid, entire_opts()) == Approx(1.0).margin(0.05));

    std::vector<double> low;
    for (int i = 0; i <= 9; ++i) low.push_back(0.5 * std::pow(24.0 / 0.5, i / 9.0));
    CHECK(estimate_order(parse("exp(z^2)"), low, entire_opts()) == Approx(2.0).margin(0.1));
}

TEST_CASE("order estimation rejects flat data and short grids") {
    CHECK_THROWS_AS(estimate_order(parse("1"), {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}, entire_opts()),
                    InsufficientGrowth);
    CHECK_THROWS_AS(estimate_order(parse("exp(z)"), {1.0, 2.0, 4.0, 8.0}, entire_opts()),
                    PreconditionError);
}
