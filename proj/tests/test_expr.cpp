#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include <cmath>

using namespace symred;
using testutil::random_bindings;
using testutil::random_expr;
using testutil::standard_table;

static SymbolTable tab = standard_table();

static Expr P(const std::string& s) { return parse(s, tab); }

TEST_CASE("parser produces jets, constants and integral atoms") {
    Expr e = P("u_xx - (2/x^2)*u");
    bool found = false;
    for (auto& a : collect_free_atoms(e))
        if (a->kind == Kind::Jet && to_string(a) == "u_xx") found = true;
    CHECK(found);

    CHECK(is_zero_const(P("0")));

    Expr q = P("Int(s,0,u, 1/sqrt(phi1 - s^3/3))");
    CHECK(q->kind == Kind::Integral);

    Expr d = P("D(u;x,2;t,1)");
    CHECK(to_string(d) == "u_xxt");
}

TEST_CASE("parse errors carry a position") {
    CHECK_THROWS_AS(P("u_xx + "), ParseError);
    CHECK_THROWS_AS(P("nosuchname + 1"), ParseError);
    try {
        P("x + unknown7");
    } catch (const ParseError& pe) {
        CHECK(pe.position == 4);
    }
}

TEST_CASE("differentiation basics") {
    Expr x = tab.sym("x");
    Expr u = tab.sym("u");
    CHECK(equal_normalized(diff(P("x^2"), x), P("2*x")));
    CHECK(equal_normalized(diff(P("exp(beta*x)/u"), u), P("-exp(beta*x)/u^2")));
    // fundamental theorem boundary term
    Expr integral = P("Int(s,0,u, 1/sqrt(phi1 - s^3/3))");
    CHECK(equal_normalized(diff(integral, u), P("1/sqrt(phi1 - u^3/3)")));
}

TEST_CASE("normalization identities") {
    CHECK(is_zero_const(normalize(P("u/u - 1"))));
    CHECK(is_one_const(normalize(P("exp(beta*x)*exp(-beta*x)"))));
    Expr a = P("(phi1*exp(beta*x)+phi2) * (phi1*exp(beta*x)+phi2)^(-3/2)");
    Expr b = P("(phi1*exp(beta*x)+phi2)^(-1/2)");
    CHECK(equal_normalized(a, b));
    // radical folding
    CHECK(equal_normalized(P("sqrt(x)^2"), P("x")));
    CHECK(equal_normalized(P("sqrt(3*(t+1))"), P("sqrt(3)*sqrt(t+1)")));
    CHECK(equal_normalized(P("x^(1/4) * x^(1/4)"), P("sqrt(x)")));
    // symbolic exponents combine through exp/ln atoms
    CHECK(equal_normalized(P("x^alpha * x^(2-alpha)"), P("x^2")));
}

TEST_CASE("normalize is idempotent") {
    Rng rng(99, "idem");
    for (int i = 0; i < 200; ++i) {
        Expr e = random_expr(rng, 3);
        Expr n1 = normalize(e);
        Expr n2 = normalize(n1);
        CHECK(expr_equal(n1, n2));
    }
}

TEST_CASE("substitution is simultaneous and exact on atoms") {
    SubstMap m;
    m.add(tab.sym("u"), P("x^2"));
    CHECK(equal_normalized(substitute(P("u_x + u"), m), P("u_x + x^2")));

    SubstMap z;
    z.add(tab.sym("x"), make_int(0));
    CHECK(is_zero_const(substitute(P("x^2"), z)));

    // simultaneity: swap x and t
    SubstMap swap;
    swap.add(tab.sym("x"), tab.sym("t"));
    swap.add(tab.sym("t"), tab.sym("x"));
    CHECK(equal_normalized(substitute(P("x - t"), swap), P("t - x")));
}

TEST_CASE("numeric evaluation") {
    Bindings b;
    b.set("x", 2.0);
    CHECK(eval_num(P("x^2 + 1"), b) == doctest::Approx(5.0).epsilon(1e-14));

    // sqrt(2)/(3*sqrt(3*(t+1))) at t = 0
    Bindings b2;
    b2.set("t", 0.0);
    double k0 = eval_num(P("sqrt(2)/(3*sqrt(3*(t+1)))"), b2);
    CHECK(k0 == doctest::Approx(std::sqrt(2.0) / (3.0 * std::sqrt(3.0))).epsilon(1e-13));
    CHECK(k0 == doctest::Approx(0.2721655).epsilon(1e-6));

    // quadrature against an independent composite-Simpson oracle
    Bindings b3;
    b3.set("phi1", 1.0);
    b3.set("u", 1.0);
    double engine = eval_num(P("Int(s,0,u, 1/sqrt(phi1 - s^3/3))"), b3);
    double oracle = integrate_composite_simpson(
        [](double s) { return 1.0 / std::sqrt(1.0 - s * s * s / 3.0); }, 0.0, 1.0, 1000000);
    CHECK(std::abs(engine - oracle) < 1e-10);
}

TEST_CASE("evaluation errors name the offending subterm") {
    Bindings b;
    b.set("x", -1.0);
    CHECK_THROWS_AS(eval_num(P("ln(x)"), b), EvalError);
    Bindings empty;
    CHECK_THROWS_AS(eval_num(P("u_x + 1"), empty), EvalError);
}

TEST_CASE("diff is linear and satisfies the product rule") {
    Rng rng(7, "linprod");
    Expr x = tab.sym("x");
    for (int i = 0; i < 120; ++i) {
        Expr e1 = random_expr(rng, 2);
        Expr e2 = random_expr(rng, 2);
        Rational a((long long)rng.below(5) + 1), bq((long long)rng.below(5) + 1);
        Expr lhs = diff(make_add({make_mul({make_const(a), e1}), make_mul({make_const(bq), e2})}), x);
        Expr rhs = make_add({make_mul({make_const(a), diff(e1, x)}),
                             make_mul({make_const(bq), diff(e2, x)})});
        CHECK(equal_normalized(lhs, rhs));

        Expr pl = diff(make_mul({e1, e2}), x);
        Expr pr = make_add({make_mul({diff(e1, x), e2}), make_mul({e1, diff(e2, x)})});
        CHECK(equal_normalized(pl, pr));
    }
}

TEST_CASE("normalization preserves numeric value") {
    Rng rng(11, "evalnorm");
    int done = 0;
    for (int i = 0; i < 20000 && done < 1000; ++i) {
        Expr e = random_expr(rng, 3);
        Bindings b = random_bindings(rng);
        double v0, v1;
        try {
            v0 = eval_num(e, b);
            v1 = eval_num(normalize(e), b);
        } catch (const EvalError&) {
            continue;
        }
        if (!std::isfinite(v0) || std::abs(v0) > 1e8) continue;
        CHECK(std::abs(v1 - v0) <= 1e-10 * (1.0 + std::abs(v0)));
        ++done;
    }
    CHECK(done >= 1000);
}

TEST_CASE("symbolic derivative matches central finite differences") {
    Rng rng(13, "fd");
    Expr x = tab.sym("x");
    int done = 0;
    for (int i = 0; i < 3000 && done < 300; ++i) {
        Expr e = random_expr(rng, 3);
        Expr de = diff(e, x);
        Bindings b = random_bindings(rng);
        double xv = *b.find("x");
        double h = 1e-6;
        double fp, fm, dv;
        try {
            Bindings bp = b, bm = b;
            bp.set("x", xv + h);
            bm.set("x", xv - h);
            fp = eval_num(e, bp);
            fm = eval_num(e, bm);
            dv = eval_num(de, b);
        } catch (const EvalError&) {
            continue;
        }
        double fd = (fp - fm) / (2.0 * h);
        if (!std::isfinite(fd) || std::abs(fd) > 1e6 || std::abs(dv) > 1e6) continue;
        CHECK(std::abs(dv - fd) <= 1e-5 * (1.0 + std::abs(fd)));
        ++done;
    }
    CHECK(done >= 250);
}

TEST_CASE("parser round-trip: parse(print(e)) equals normalize(e)") {
    Rng rng(17, "roundtrip");
    for (int i = 0; i < 300; ++i) {
        Expr e = random_expr(rng, 3);
        Expr n = normalize(e);
        Expr back = parse(to_string(n), tab);
        CHECK(expr_equal(normalize(back), n));
    }
    // integral atoms round-trip too
    Expr q = normalize(P("Int(s,0,u, 1/sqrt(phi1 - s^3/3)) + x"));
    CHECK(expr_equal(normalize(parse(to_string(q), tab)), q));
}

TEST_CASE("scaled evaluation reports cancellation magnitude") {
    Bindings b;
    b.set("x", 1000.0);
    ScaledValue sv = eval_scaled(P("(x + 1) - x"), b);
    CHECK(sv.value == doctest::Approx(1.0));
    CHECK(sv.scale >= 999.0);
}
