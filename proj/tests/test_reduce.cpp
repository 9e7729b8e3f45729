#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symred/reduce.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace symred;
using testutil::standard_table;

static SymbolTable tab = []() {
    SymbolTable t = standard_table();
    t.add_parameter("a7");
    t.add_parameter("a8");
    return t;
}();
static Expr P(const std::string& s) { return parse(s, tab); }

static CheckOptions opts(const std::string& label) {
    CheckOptions o;
    o.label = label;
    return o;
}

// u = phi1 x^2 + phi2/x reduces u_t = u_xxx - 3 u_xx u_x / u + lambda u
static Ansatz cubic_ansatz() {
    Ansatz a;
    a.phi = {"phi1", "phi2"};
    a.u_of = P("phi1*x^2 + phi2/x");
    return a;
}
static Expr cubic_pde() {
    return P("u_t - u_xxx + 3*u_xx*u_x/u - lambda*u");
}

TEST_CASE("ansatz substitution reproduces the hand-derived residual") {
    Expr res = apply_ansatz(cubic_pde(), cubic_ansatz());
    Expr oracle = P("(phi1_t - lambda*phi1)*x^2 + (phi2_t - lambda*phi2 + 12*phi1)/x");
    CHECK(equal_normalized(res, oracle));

    // trivial: u = phi1 into u_t = 0 leaves phi1'
    Ansatz triv;
    triv.phi = {"phi1", "phi2"};
    triv.u_of = P("phi1");
    CHECK(equal_normalized(apply_ansatz(P("u_t"), triv), P("phi1_t")));
}

TEST_CASE("numeric extraction matches the exponential-medium flow") {
    // u_t = (exp(beta x)/u)_xx under u = exp(beta x)/sqrt(phi1 exp(beta x) + phi2):
    // phi' = (-beta^2/2 phi1^2, -beta^2 phi1 phi2)
    Expr rhs = total_derivative(total_derivative(P("exp(beta*x)/u"), "x"), "x");
    SubstMap none;
    Expr pde = P("u_t") - substitute_raw(rhs, none);
    Ansatz a;
    a.phi = {"phi1", "phi2"};
    a.u_of = P("exp(beta*x)/sqrt(phi1*exp(beta*x)+phi2)");

    Bindings extra;
    extra.set("beta", 1.0);
    std::vector<double> xs;
    for (int k = 0; k < 12; ++k) xs.push_back(0.2 + 0.15 * k);
    NumericExtraction ex = extract_reduced_numeric(pde, a, 0.0, {1.0, 1.0}, xs, extra);
    CHECK(ex.defect < 1e-9);
    CHECK(ex.phi_dot[0] == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(ex.phi_dot[1] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("implicit quadrature ansatz: evaluation and extraction") {
    Ansatz a;
    a.form = Ansatz::Form::ImplicitQuadrature;
    a.phi = {"phi1", "phi2"};
    a.quadrature = P("Int(s,0,u, 1/sqrt(phi1 - s^3/3))");
    a.ux_relation = P("sqrt(phi1 - u^3/3)");
    a.bracket_hi = P("0.95*(3*phi1)^(1/3)");
    a.jet_rules = {{P("u_xx"), P("-u^2/2")}};

    Bindings extra;

    SUBCASE("root at x + phi2 = 0 is u = 0 and u is approximately x for small x") {
        ImplicitPoint p0 = eval_implicit(a, {1.0, 0.0}, 0.0, extra);
        CHECK(std::abs(p0.u) < 1e-10);
        ImplicitPoint ps = eval_implicit(a, {1.0, 0.0}, 1e-3, extra);
        CHECK(ps.u == doctest::Approx(1e-3).epsilon(1e-5));
    }

    SUBCASE("finite differences confirm the first-derivative relation") {
        double h = 1e-6;
        for (double x : {0.2, 0.5, 0.9}) {
            ImplicitPoint pm = eval_implicit(a, {1.0, 0.0}, x - h, extra);
            ImplicitPoint pp = eval_implicit(a, {1.0, 0.0}, x + h, extra);
            ImplicitPoint pc = eval_implicit(a, {1.0, 0.0}, x, extra);
            double fd = (pp.u - pm.u) / (2.0 * h);
            CHECK(std::abs(fd - pc.ux) < 1e-6 * (1.0 + std::abs(fd)));
        }
    }

    SUBCASE("the quadrature invariant holds along the ansatz") {
        for (double x : {0.1, 0.4, 0.8, 1.1}) {
            ImplicitPoint p = eval_implicit(a, {1.0, 0.0}, x, extra);
            double inv = 3.0 * p.ux * p.ux + p.u * p.u * p.u - 3.0 * 1.0;
            CHECK(std::abs(inv) < 1e-10);
        }
    }

    SUBCASE("extraction recovers the quadrature flow for h1 = 1, h2 = id") {
        Expr pde = P("u_t - (u_xxx + u*u_x + u_x*h1(3*u_x^2+u^3) "
                     "+ u_x*h2(3*u_x^2+u^3)*Int(s,0,u,(u_x^2+u^3/3-s^3/3)^(-3/2)))");
        Bindings eb;
        eb.set_opaque("h1", [](const std::vector<double>&, const std::vector<int>& d) {
            return (d.empty() || d[0] == 0) ? 1.0 : 0.0;
        });
        eb.set_opaque("h2", [](const std::vector<double>& args, const std::vector<int>& d) {
            int n = d.empty() ? 0 : d[0];
            if (n == 0) return args[0];
            if (n == 1) return 1.0;
            return 0.0;
        });
        std::vector<double> xs;
        for (int k = 0; k < 12; ++k) xs.push_back(0.05 + 0.09 * k);
        NumericExtraction ex = extract_reduced_numeric(pde, a, 0.7, {1.0, 0.0}, xs, eb);
        CHECK(ex.defect < 1e-7);
        CHECK(ex.phi_dot[0] == doctest::Approx(6.0).epsilon(1e-6));
        CHECK(ex.phi_dot[1] == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("reduced-system verification passes the stated system and rejects a mutation") {
    ReducedCheckConfig cfg;
    cfg.opts = opts("cubic-rs");
    cfg.spec.domains["x"] = {0.5, 2.0, {}};
    cfg.spec.domains["t"] = {0.1, 1.0, {}};
    cfg.spec.domains["phi1"] = {0.3, 1.5, {}};
    cfg.spec.domains["phi2"] = {0.3, 1.5, {}};
    cfg.spec.domains["lambda"] = {-1.0, 1.0, {}};

    ReducedSystem good;
    good.solved = {{P("phi1_t"), P("lambda*phi1")}, {P("phi2_t"), P("lambda*phi2 - 12*phi1")}};
    Verdict v = verify_reduced_system(cubic_pde(), cubic_ansatz(), good, cfg);
    CHECK(v.status == Status::PassSymbolic);

    ReducedSystem bad;
    bad.solved = {{P("phi1_t"), P("lambda*phi1")}, {P("phi2_t"), P("lambda*phi2 + 12*phi1")}};
    Verdict vb = verify_reduced_system(cubic_pde(), cubic_ansatz(), bad, cfg);
    CHECK(vb.status == Status::Fail);

    // equations given unsolved are solved internally
    ReducedSystem eqform;
    eqform.equations = {P("phi1_t - lambda*phi1"), P("phi2_t - lambda*phi2 + 12*phi1")};
    Verdict ve = verify_reduced_system(cubic_pde(), cubic_ansatz(), eqform, cfg);
    CHECK(ve.status == Status::PassSymbolic);
}

TEST_CASE("first integrals collapse to the reduction functions under the ansatz") {
    Ansatz a;
    a.phi = {"phi1", "phi2"};
    a.u_of = P("exp(beta*x)/sqrt(phi1*exp(beta*x)+phi2)");

    Expr I1 = P("exp(beta*x)*(2/u^2 - (2/beta)*u_x/u^3)");
    Expr I2 = P("exp(2*beta*x)*((2/beta)*u_x/u^3 - 1/u^2)");
    CHECK(is_zero_const(apply_ansatz(I1 - P("phi1"), a)));
    CHECK(is_zero_const(apply_ansatz(I2 - P("phi2"), a)));

    // and they are constant along the quadratic-medium curve
    Manifold m;
    m.add_rule(P("u_xx"), P("3*u_x^2/u - 3*beta*u_x + beta^2*u"));
    CHECK(is_zero_const(total_derivative(I1, "x", &m)));
    CHECK(is_zero_const(total_derivative(I2, "x", &m)));
}

TEST_CASE("derivative relation between the reduction functions holds on the flow") {
    // (phi2/phi1)' = -beta^2/2 phi2 after substituting the two-term flow
    Manifold phm;
    phm.add_rule(P("phi1_t"), P("beta*a7*phi1*phi2 - beta*(a8+beta/2)*phi1^2"));
    phm.add_rule(P("phi2_t"), P("beta*a7*phi2^2 - beta*(a8+beta)*phi1*phi2"));
    Expr rel = total_derivative(P("phi2/phi1"), "t", &phm) + P("(beta^2/2)*phi2");
    CHECK(is_zero_symbolic(rel) == ZeroTest::Zero);
}

TEST_CASE("algebraic reduction is extracted and matched up to constant factors") {
    Expr I1e = P("2*(exp(beta*x)/u^3)*(u - u_x/beta)");
    Expr I2e = P("(exp(2*beta*x)/u^3)*(2*u_x/beta - u)");
    Expr lhs = total_derivative(total_derivative(P("exp(beta*x)/u"), "x"), "x");
    Expr pde = lhs + P("exp(-beta*x)*u^3") * make_opaque("A1", {I1e, I2e}) +
               P("exp(-2*beta*x)*u^3") * make_opaque("A2", {I1e, I2e});

    Ansatz a;
    a.phi = {"phi1", "phi2"};
    a.u_of = P("exp(beta*x)/sqrt(phi1*exp(beta*x)+phi2)");

    ReducedCheckConfig cfg;
    cfg.opts = opts("algebraic");
    cfg.collect_atom = P("exp(beta*x)");
    cfg.clear_factor = P("(phi1*exp(beta*x)+phi2)^(3/2)");

    ReducedSystem rs;
    rs.algebraic = true;
    rs.equations = {P("(beta^2/2)*phi1^2 + 2*A1(phi1,phi2)"),
                    P("beta^2*phi1*phi2 + 2*A2(phi1,phi2)")};
    Verdict v = verify_reduced_system(pde, a, rs, cfg);
    CHECK(v.status == Status::PassSymbolic);

    // mutated system must not match
    ReducedSystem bad = rs;
    bad.equations[0] = P("(beta^2/2)*phi1^2 + 3*A1(phi1,phi2)");
    Verdict vb = verify_reduced_system(pde, a, bad, cfg);
    CHECK(vb.status == Status::Fail);
}

TEST_CASE("solution verification on a grid") {
    // phi1 = C1 e^{lambda t}, phi2 = (C2 - 12 C1 t) e^{lambda t} solves the
    // cubic-dispersion reduction; the composed solution satisfies the flow
    Expr u = P("(c1*exp(lambda*t))*x^2 + ((c2 - 12*c1*t)*exp(lambda*t))/x");
    for (double lam : {-1.0, 0.0, 1.0}) {
        SolutionCheck sc;
        sc.pde = cubic_pde();
        sc.solution = u;
        sc.grid = {0.5, 2.5, 0.1, 1.2, 20, 20};
        sc.param_draws = 5;
        SamplingSpec spec;
        spec.fixed["lambda"] = lam;
        spec.domains["c1"] = {0.3, 1.5, {}};
        spec.domains["c2"] = {0.3, 1.5, {}};
        Verdict v = verify_solution(sc, opts("cubic-sol"), spec);
        CHECK(v.passed());
    }

    // branch symmetry: the negated family satisfies the even-odd flow equally
    SolutionCheck neg;
    neg.pde = cubic_pde();
    neg.solution = -u;
    neg.grid = {0.5, 2.5, 0.1, 1.2, 10, 10};
    neg.param_draws = 3;
    SamplingSpec spec;
    spec.fixed["lambda"] = 1.0;
    spec.domains["c1"] = {0.3, 1.5, {}};
    spec.domains["c2"] = {0.3, 1.5, {}};
    CHECK(verify_solution(neg, opts("cubic-sol-neg"), spec).passed());
}
