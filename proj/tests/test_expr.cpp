#include <catch2/catch.hpp>

#include "valdist/expr.hpp"
#include "valdist/jet.hpp"

#include "helpers.hpp"

using namespace valdist;
using testutil::ExprGen;

TEST_CASE("parse recognizes the plain variable") {
    Expr e = parse("z");
    CHECK(e.kind() == NodeKind::Variable);
}

TEST_CASE("parse builds exp over a product") {
    Expr e = parse("exp(2*z)");
    REQUIRE(e.kind() == NodeKind::Exp);
    REQUIRE(e.child(0).kind() == NodeKind::Mul);
    CHECK(e.child(0).child(0).kind() == NodeKind::Literal);
    CHECK(e.child(0).child(1).kind() == NodeKind::Variable);
}

TEST_CASE("parse handles a declared parameter in a power product") {
    Expr e = parse("m^8 * z^7", {"m"});
    REQUIRE(e.kind() == NodeKind::Mul);
    CHECK(e.child(0).kind() == NodeKind::Pow);
    CHECK(e.child(0).child(0).kind() == NodeKind::Parameter);
    CHECK(e.child(0).exponent() == 8);
    CHECK(e.child(1).exponent() == 7);
}

TEST_CASE("parse precedence: power > unary minus > mul > add") {
    // -z^2 is -(z^2)
    Expr a = parse("-z^2");
    REQUIRE(a.kind() == NodeKind::Sub);
    CHECK(a.child(0).kind() == NodeKind::Literal);
    CHECK(a.child(1).kind() == NodeKind::Pow);

    // unary minus binds tighter than mul: -z*2 is (-z)*2
    Expr b = parse("-z*2");
    REQUIRE(b.kind() == NodeKind::Mul);
    CHECK(b.child(0).kind() == NodeKind::Sub);

    Expr c = parse("1 + 2*z");
    REQUIRE(c.kind() == NodeKind::Add);
    CHECK(c.child(1).kind() == NodeKind::Mul);
}

TEST_CASE("parse reports byte offsets on syntax errors") {
    try {
        parse("z + (2*z");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& err) {
        CHECK(err.offset() == 8);
    }
}

TEST_CASE("parse rejects undeclared identifiers") {
    CHECK_THROWS_AS(parse("q*z"), UnknownIdentifier);
    CHECK_NOTHROW(parse("q*z", {"q"}));
}

TEST_CASE("parse supports D(expr, k) and negative exponents") {
    Expr e = parse("D(sin(z), 2) + z^-3");
    REQUIRE(e.kind() == NodeKind::Add);
    CHECK(e.child(0).kind() == NodeKind::Derivative);
    CHECK(e.child(0).order() == 2);
    CHECK(e.child(1).exponent() == -3);
}

TEST_CASE("literal folding collapses constant subexpressions") {
    Expr e = parse("2*3 + z");
    REQUIRE(e.kind() == NodeKind::Add);
    CHECK(e.child(0).kind() == NodeKind::Literal);
    CHECK(e.child(0).value() == Complex{6.0, 0.0});

    Expr c = parse("exp(0) + z");
    CHECK(c.child(0).value() == Complex{1.0, 0.0});
}

TEST_CASE("family instantiation substitutes parameter leaves") {
    Family fam(parse("n*z", {"n"}), "n", {Complex{1, 0}, Complex{2, 0}, Complex{3, 0}});
    Expr inst = fam.instantiate(1);
    CHECK(inst.equals(parse("2*z")));
    CHECK_FALSE(inst.has_parameters());
    CHECK_THROWS_AS(fam.instantiate(3), IndexOutOfRange);
}

TEST_CASE("family from the exponential example") {
    Family fam(parse("exp(n*z)", {"n"}), "n", {Complex{5, 0}});
    CHECK(fam.instantiate(0).equals(parse("exp(5*z)")));
}

TEST_CASE("family with a pre-substituted constant") {
    Expr base = parse("m*z - a", {"m", "a"}).substitute("a", Complex{1, 0});
    Family fam(base, "m", {Complex{3, 0}});
    CHECK(fam.instantiate(0).equals(parse("3*z - 1")));
}

TEST_CASE("family validation") {
    CHECK_THROWS_AS(Family(parse("z"), "n", {Complex{1, 0}}), PreconditionError);
    CHECK_THROWS_AS(Family(parse("n*z", {"n"}), "n", {}), PreconditionError);
}

TEST_CASE("affine precompose: identity map") {
    Expr e = affine_precompose(parse("z"), {0, 0}, {1, 0});
    auto v = value_at(e, Complex{0.3, -0.2});
    CHECK(std::abs(v.value() - Complex{0.3, -0.2}) < 1e-15);
}

TEST_CASE("affine precompose: rescaled linear factor") {
    // 5*(xi/5) evaluates to xi
    Expr e = affine_precompose(parse("5*z"), {0, 0}, {0.2, 0});
    for (Complex xi : {Complex{0.7, 0.1}, Complex{-1.2, 0.4}}) {
        CHECK(std::abs(value_at(e, xi).value() - xi) <= 1e-12 * (1 + std::abs(xi)));
    }
}

TEST_CASE("affine precompose: exponential shift against point evaluation") {
    const Complex c0{0.0, 3.14159265358979323846};
    const Complex c1{2.0, 0.0};
    Expr e = affine_precompose(parse("exp(z)"), c0, c1);
    for (Complex xi : {Complex{0.25, -0.3}, Complex{-0.5, 0.1}, Complex{1.0, 1.0}}) {
        const Complex expect = std::exp(c0 + c1 * xi);
        const Complex got = value_at(e, xi).value();
        CHECK(std::abs(got - expect) <= 1e-12 * (1 + std::abs(expect)));
    }
}

TEST_CASE("affine precompose rejects a degenerate scale") {
    CHECK_THROWS_AS(affine_precompose(parse("z"), {1, 0}, {0, 0}), DegenerateScale);
}

TEST_CASE("affine precompose keeps derivative nodes composing by value") {
    // expr = D(sin, 1) = cos; expr(c0 + c1*xi) must equal cos(c0 + c1*xi)
    Expr e = affine_precompose(parse("D(sin(z), 1)"), {0.4, 0.0}, {3.0, 0.0});
    const Complex xi{0.2, 0.1};
    const Complex expect = std::cos(Complex{0.4, 0.0} + 3.0 * xi);
    CHECK(std::abs(value_at(e, xi).value() - expect) < 1e-12);
}

TEST_CASE("print/parse round trip is structural on generated trees") {
    ExprGen gen(20240601u);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        Expr e = gen.gen(4);
        Expr back = parse(e.str());
        INFO("printed: " << e.str());
        REQUIRE(back.equals(e));
        ++checked;
    }
    CHECK(checked == 300);
}

TEST_CASE("round trip survives complex literals from transforms") {
    Expr e = affine_precompose(parse("exp(z) + z^3"), {0.5, 1.5}, {-2.0, 0.25});
    Expr back = parse(e.str());
    CHECK(back.equals(e));
}

TEST_CASE("instantiate changes only parameter leaves") {
    ExprGen gen(77u, true, true);
    for (int i = 0; i < 100; ++i) {
        Expr e = gen.gen(4);
        if (!e.contains_parameter("p")) continue;
        Family fam(e, "p", {Complex{1.25, -0.5}});
        Expr inst = fam.instantiate(0);
        // identical skeleton: replace the literal leaves that took the
        // parameter's place and we are back to the original
        struct Same {
            bool operator()(const Expr& a, const Expr& b) const {
                if (a.kind() == NodeKind::Parameter)
                    return b.kind() == NodeKind::Literal && b.value() == Complex{1.25, -0.5};
                if (a.kind() != b.kind() || a.arity() != b.arity()) return false;
                for (std::size_t i = 0; i < a.arity(); ++i)
                    if (!(*this)(a.child(i), b.child(i))) return false;
                return true;
            }
        };
        CHECK(Same{}(e, inst));
    }
}

TEST_CASE("affine precompose agrees with direct evaluation on random trees") {
    ExprGen gen(4242u, false);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    int usable = 0;
    for (int i = 0; i < 200 && usable < 60; ++i) {
        Expr e = gen.gen(3);
        const Complex c0{d(rng), d(rng)};
        Complex c1{d(rng), d(rng)};
        if (std::abs(c1) < 0.1) c1 += Complex{0.5, 0.0};
        const Complex z0{d(rng), d(rng)};
        Complex direct, composed;
        try {
            auto dv = value_at(e, c0 + c1 * z0);
            auto cv = value_at(affine_precompose(e, c0, c1), z0);
            if (dv.is_pole() || cv.is_pole()) continue;
            direct = dv.value();
            composed = cv.value();
        } catch (const Error&) {
            continue;
        }
        if (std::abs(direct) > 1e6) continue;
        CHECK(std::abs(composed - direct) <= 1e-12 * (1.0 + std::abs(direct)));
        ++usable;
    }
    CHECK(usable >= 40);
}
