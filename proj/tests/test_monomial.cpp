#include <catch2/catch.hpp>

#include "valdist/monomial.hpp"
#include "valdist/sphere.hpp"

#include <random>

#include "helpers.hpp"

using namespace valdist;

TEST_CASE("monomial stats from exponent vectors") {
    auto s1 = stats(MonomialSpec({2, 0, 1, 1}));
    CHECK(s1.degree == 4);
    CHECK(s1.weight == 9);
    CHECK(s1.dweight == 5);

    auto s2 = stats(MonomialSpec({7, 1}));
    CHECK(s2.degree == 8);
    CHECK(s2.weight == 9);
    CHECK(s2.dweight == 1);

    auto s3 = stats(MonomialSpec({0, 1}));
    CHECK(s3.degree == 1);
    CHECK(s3.weight == 2);
    CHECK(s3.dweight == 1);
}

TEST_CASE("weight identity holds for random specs") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> d(0, 4);
    for (int i = 0; i < 200; ++i) {
        std::vector<int> n(1 + rng() % 5);
        int sum = 0;
        for (int& e : n) sum += (e = d(rng));
        if (sum == 0) n[0] = 1;
        MonomialSpec spec(n);
        CHECK(spec.weight() == spec.degree() + spec.derivative_weight());
    }
}

TEST_CASE("threshold for the first-derivative monomial is exactly 7") {
    auto t = threshold_check(MonomialSpec({0, 1}));
    CHECK(t.rhs == Rational(7));
    CHECK_FALSE(t.satisfied);
    CHECK(t.k == 1);
}

TEST_CASE("threshold for f^7 f' is met with degree 8") {
    auto t = threshold_check(MonomialSpec({7, 1}));
    CHECK(t.rhs == Rational(7));
    CHECK(t.satisfied);
}

TEST_CASE("threshold reduces to n > k + 3 + 2/k for f^n f^(k)") {
    for (int k = 1; k <= 12; ++k) {
        for (int n = 1; n <= 40; ++n) {
            std::vector<int> exps(static_cast<std::size_t>(k) + 1, 0);
            exps[0] = n;
            exps.back() = 1;
            auto t = threshold_check(MonomialSpec(exps));
            const bool reduced = static_cast<long long>(n) * k > 1ll * k * k + 3ll * k + 2;
            CHECK(t.satisfied == reduced);
        }
    }
}

TEST_CASE("pure-power monomials need an explicit k") {
    MonomialSpec pure({3});
    CHECK_THROWS_AS(threshold_check(pure), UndefinedOrder);
    auto t = threshold_check(pure, 2);
    CHECK(t.rhs == Rational(2 * 3 + 0 * 4, 2) + Rational(0));  // (k+2)*0 + 2(k+1) over k = 3
    CHECK(t.rhs == Rational(3));
    CHECK_FALSE(t.satisfied);  // d = 3 is not > 3
    CHECK_THROWS_AS(threshold_check(MonomialSpec({1, 1}), 3), PreconditionError);
}

TEST_CASE("monomial_eval matches the worked product f^7 f' for f = 2z") {
    Expr f = parse("2*z");
    LaurentJet j = monomial_eval(MonomialSpec({7, 1}), f, {1, 0}, 2);
    REQUIRE_FALSE(j.is_zero());
    CHECK(j.valuation() == 0);
    CHECK(std::abs(j.leading() - Complex{256.0, 0.0}) < 1e-10);
}

TEST_CASE("monomial_eval of f' for f = 3z - 1 is the constant 3") {
    Expr f = parse("3*z - 1");
    LaurentJet j = monomial_eval(MonomialSpec({0, 1}), f, {0.4, 0.2}, 2);
    CHECK(jet_value(j).value() == Complex{3.0, 0.0});
    CHECK(detail::spherical_of_jet(j) == 0.0);  // constant monomial
}

TEST_CASE("monomial_eval with the identity spec returns the function's jet") {
    LaurentJet j = monomial_eval(MonomialSpec({1}), parse("z"), {0, 0}, 2);
    CHECK(j.valuation() == 1);
    CHECK(j.leading() == Complex{1.0, 0.0});
}

TEST_CASE("monomial_eval equals the product of derivative powers at random points") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const Expr f = parse("exp(z) + z^3 - 2");
    const MonomialSpec spec({2, 1, 0, 1});
    for (int i = 0; i < 25; ++i) {
        const Complex z0{d(rng), d(rng)};
        Complex expect{1.0, 0.0};
        bool ok = true;
        for (int j = 0; j <= spec.order() && ok; ++j) {
            const int n = spec.exponents()[static_cast<std::size_t>(j)];
            if (n == 0) continue;
            auto v = derivative_at(f, z0, j);
            if (!v.is_finite() || v.value() == Complex{0, 0}) ok = false;
            for (int p = 0; p < n && ok; ++p) expect *= v.value();
        }
        if (!ok) continue;
        const auto got = jet_value(monomial_eval(spec, f, z0, 2));
        REQUIRE(got.is_finite());
        CHECK(std::abs(got.value() - expect) <= 1e-10 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("poly_stats on hand examples") {
    // single term f^2 f'
    DiffPolynomial p1({{Expr::literal(1.0), {2, 1}}});
    auto s1 = poly_stats(p1);
    CHECK(s1.min_degree == 3);
    CHECK(s1.max_derivative_weight == 1);

    // two terms {f^3, f * f''^2}
    DiffPolynomial p2({{Expr::literal(1.0), {3}}, {Expr::literal(1.0), {1, 0, 2}}});
    auto s2 = poly_stats(p2);
    CHECK(s2.min_degree == 3);
    CHECK(s2.max_derivative_weight == 4);
}

TEST_CASE("a one-term polynomial reproduces the monomial statistics") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> d(0, 3);
    for (int i = 0; i < 100; ++i) {
        std::vector<int> n(1 + rng() % 4);
        int sum = 0;
        for (int& e : n) sum += (e = d(rng));
        if (sum == 0) n[0] = 1;
        MonomialSpec spec(n);
        DiffPolynomial p({{Expr::literal(1.0), spec.exponents()}});
        auto s = poly_stats(p);
        CHECK(s.min_degree == spec.degree());
        CHECK(s.max_derivative_weight == spec.derivative_weight());
    }
}

TEST_CASE("poly_eval evaluates sums of derivative products") {
    // P = f^2 + f' for f = z^2: P(z) = z^4 + 2z
    DiffPolynomial p({{Expr::literal(1.0), {2}}, {Expr::literal(1.0), {0, 1}}});
    const Complex z0{0.7, -0.3};
    const auto got = jet_value(poly_eval(p, parse("z^2"), z0, 2));
    const Complex expect = z0 * z0 * z0 * z0 + 2.0 * z0;
    REQUIRE(got.is_finite());
    CHECK(std::abs(got.value() - expect) < 1e-12);
}

TEST_CASE("polynomial validation") {
    CHECK_THROWS_AS(DiffPolynomial({}), PreconditionError);
    CHECK_THROWS_AS(DiffPolynomial({{Expr::literal(0.0), {1}}}), PreconditionError);
    CHECK_THROWS_AS(MonomialSpec({0, 0}), PreconditionError);
    CHECK_THROWS_AS(MonomialSpec({-1, 2}), PreconditionError);
}
