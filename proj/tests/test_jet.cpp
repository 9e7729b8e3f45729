#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symred/detcheck.hpp"
#include "symred/jet.hpp"
#include "test_util.hpp"

using namespace symred;
using testutil::standard_table;

static SymbolTable tab = standard_table();
static Expr P(const std::string& s) { return parse(s, tab); }

// u_xx = 2u/x^2
static Manifold ode2_manifold() {
    Manifold m;
    m.add_rule(P("u_xx"), P("2*u/x^2"));
    return m;
}

TEST_CASE("total derivatives raise jets and apply the chain rule") {
    CHECK(equal_normalized(total_derivative(P("u^2"), "x"), P("2*u*u_x")));

    Manifold m = ode2_manifold();
    CHECK(equal_normalized(total_derivative(P("u_x"), "x", &m), P("2*u/x^2")));

    // D_t of u_x on an evolution manifold equals D_x of the rule's rhs
    Manifold mt;
    mt.add_rule(P("u_t"), P("exp(u)"));
    Expr lhs = total_derivative(P("u_x"), "t", &mt);
    CHECK(equal_normalized(lhs, P("exp(u)*u_x")));
}

TEST_CASE("reduction to the manifold is exhaustive and idempotent") {
    Manifold m = ode2_manifold();
    CHECK(is_zero_const(m.reduce(P("u_xx - (2/x^2)*u"))));

    // derived mixed consequence, against a hand-differentiated oracle
    Manifold airy;
    airy.add_rule(P("u_xx"), P("(x/(6*(t+1)))*u"));
    Expr got = airy.reduce(P("u_xxt"));
    Expr oracle = P("-(x/(6*(t+1)^2))*u + (x/(6*(t+1)))*u_t");
    CHECK(equal_normalized(got, oracle));

    // idempotence
    Expr r1 = m.reduce(P("u_xxxx + u_xx*u_x"));
    CHECK(expr_equal(m.reduce(r1), r1));

    // multi-field: psi_x = u*psi^2 + v reduces psi_x directly
    SymbolTable t2;
    t2.add_independent("x");
    t2.add_independent("t");
    t2.add_field("psi", {"x", "t"});
    t2.add_field("u", {"x", "t"});
    t2.add_field("v", {"x", "t"});
    Manifold mf;
    mf.add_rule(parse("psi_x", t2), parse("u*psi^2 + v", t2));
    CHECK(equal_normalized(mf.reduce(parse("psi_x", t2)), parse("u*psi^2 + v", t2)));
}

TEST_CASE("manifold rules must be in solved form") {
    Manifold m;
    CHECK_THROWS_AS(m.add_rule(P("u_xx"), P("u_xx^2")), ManifoldError);
    CHECK_THROWS_AS(m.add_rule(P("u_xx"), P("u_xxx + u")), ManifoldError);
    Manifold ok = ode2_manifold();
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("mixed total derivatives commute after reduction") {
    Manifold airy;
    airy.add_rule(P("u_xx"), P("(x/(6*(t+1)))*u"));
    for (const char* s : {"u_x*u", "u_xx*u_t", "u_x^2/u", "exp(u)*u_x"}) {
        Expr e = P(s);
        Expr dxdt = total_derivative(total_derivative(e, "t", &airy), "x", &airy);
        Expr dtdx = total_derivative(total_derivative(e, "x", &airy), "t", &airy);
        CHECK(equal_normalized(dxdt, dtdx));
    }
}

TEST_CASE("prolongation annihilates symmetries and exposes defects") {
    Manifold m = ode2_manifold();
    Expr H = P("u_xx - (2/x^2)*u");

    GeneralizedField scaling{"u", P("u")};
    CHECK(is_zero_const(prolong_apply(scaling, H, m)));

    GeneralizedField timeder{"u", P("u_t")};
    CHECK(is_zero_const(prolong_apply(timeder, H, m)));

    // time-dependent coefficient breaks u_t invariance; the residual is
    // -x*u/(6(t+1)^2), the negated t-derivative of the coefficient
    Manifold airy;
    airy.add_rule(P("u_xx"), P("(x/(6*(t+1)))*u"));
    Expr H6 = P("u_xx - (x/(6*(t+1)))*u");
    Expr res = prolong_apply(timeder, H6, airy);
    CHECK(equal_normalized(res, P("-(x*u)/(6*(t+1)^2)")));
}

TEST_CASE("prolong_apply is linear in the characteristic and Leibniz in e") {
    Manifold m = ode2_manifold();
    Rng rng(23, "prolong");
    for (int i = 0; i < 30; ++i) {
        Expr e1 = testutil::random_expr(rng, 2);
        Expr e2 = testutil::random_expr(rng, 2);
        Expr eta1 = testutil::random_expr(rng, 2);
        Expr eta2 = testutil::random_expr(rng, 2);
        GeneralizedField X1{"u", eta1}, X2{"u", eta2}, Xsum{"u", eta1 + eta2};
        Expr lin = prolong_apply(Xsum, e1, m) - prolong_apply(X1, e1, m) - prolong_apply(X2, e1, m);
        CHECK(is_zero_symbolic(lin) != ZeroTest::NonZero);

        // Leibniz rule: X(e1*e2) = X(e1)*e2 + e1*X(e2) on the manifold
        Expr prod = prolong_apply(X1, make_mul({e1, e2}), m);
        Expr expanded = make_add({make_mul({prolong_apply(X1, e1, m), m.reduce(e2)}),
                                  make_mul({m.reduce(e1), prolong_apply(X1, e2, m)})});
        Expr difference = m.reduce(prod - expanded);
        CHECK(is_zero_symbolic(difference) != ZeroTest::NonZero);
    }
}

TEST_CASE("commutators of evolutionary fields") {
    // [X, X] = 0
    GeneralizedField X{"u", P("u_xx*u/u_x")};
    CHECK(is_zero_const(commutator(X, X).characteristic));

    // scaling commutes with any characteristic homogeneous of degree one
    GeneralizedField q3{"u", P("u_t - u_xxx + 3*u_xx*u/u_x")};
    GeneralizedField q4{"u", P("u")};
    CHECK(is_zero_const(commutator(q3, q4).characteristic));

    // translation against dilation: [d_x, x d_x] = d_x in evolutionary form
    GeneralizedField trans{"u", P("-u_x")};
    GeneralizedField dil{"u", P("-x*u_x")};
    Expr c = commutator(trans, dil).characteristic;
    CHECK(equal_normalized(c, P("-u_x")));
}

TEST_CASE("point symmetry correspondence on the diffusion flow manifold") {
    // u_t = (exp(beta*x)/u)_xx, generators d_t, 2t d_t + u d_u, 2 d_x + beta u d_u
    Expr rhs = total_derivative(total_derivative(P("exp(beta*x)/u"), "x"), "x");
    Manifold m;
    m.add_rule(P("u_t"), rhs);
    Expr H = P("u_t") - rhs;
    Expr u = tab.sym("u");

    auto check_pt = [&](const std::string& xit, const std::string& xix, const std::string& eta) {
        Expr chr = evolutionary_characteristic(P(xit), P(xix), P(eta), u, "t", "x");
        GeneralizedField X{"u", chr};
        Expr res = prolong_apply(X, H, m);
        CHECK(is_zero_symbolic(res) == ZeroTest::Zero);
    };
    check_pt("1", "0", "0");
    check_pt("2*t", "0", "u");
    check_pt("0", "2", "beta*u");

    // a non-symmetry leaves a residual
    Expr bad = evolutionary_characteristic(P("0"), P("1"), P("0"), u, "t", "x");
    CHECK(is_zero_symbolic(prolong_apply(GeneralizedField{"u", bad}, H, m)) == ZeroTest::NonZero);
}
