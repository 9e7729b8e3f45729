// Acceptance suite: runs the bundled catalog and the engine-level property
// checks, printing one pass/fail line per criterion. Exits nonzero when a
// criterion fails.

#include "symred/runner.hpp"
#include "symred/normalize.hpp"
#include "symred/parser.hpp"

#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <map>

using namespace symred;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void line(int criterion, const std::string& what, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << ": " << what;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
}

struct ResultTable {
    std::map<std::string, CaseResult> by_id;
    double total_seconds = 0.0;

    const CaseResult& at(const std::string& id) const {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw std::runtime_error("missing case result: " + id);
        return it->second;
    }
    bool passed(const std::string& id) const {
        const std::string& s = at(id).status;
        return s == "PASS_SYMBOLIC" || s == "PASS_NUMERIC";
    }
    bool failed(const std::string& id) const { return at(id).status == "FAIL"; }
    double seconds(const std::string& glob) const {
        double s = 0.0;
        for (auto& [id, r] : by_id)
            if (glob_match(glob, id)) s += r.seconds;
        return s;
    }
    bool all(const std::string& glob, bool want_pass) const {
        int n = 0;
        for (auto& [id, r] : by_id) {
            if (!glob_match(glob, id)) continue;
            ++n;
            bool p = r.status == "PASS_SYMBOLIC" || r.status == "PASS_NUMERIC";
            if (want_pass != p) return false;
        }
        return n > 0;
    }
};

SymbolTable base_table() {
    SymbolTable t = testutil::standard_table();
    t.add_parameter("a7");
    t.add_parameter("a8");
    t.add_parameter("alpha1");
    t.add_parameter("alpha2");
    return t;
}

} // namespace

static void criterion5(SymbolTable& tab);
static void criterion6_extras(SymbolTable& tab);
static void criterion7(SymbolTable& tab);
static void criterion8(const std::vector<CaseRecord>& records, double full_seconds);

int main() {
    RunConfig cfg;
    cfg.catalog_path = default_catalog_dir();
    std::vector<CaseRecord> records = load_catalog_dir(cfg.catalog_path);

    auto t0 = Clock::now();
    RunReport full = run_cases(records, cfg);
    double full_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    ResultTable table;
    for (auto& r : full.results) table.by_id[r.id] = r;
    table.total_seconds = full_seconds;

    SymbolTable tab = base_table();

    // ---- criterion 1: the eleven-curve suite and its mutation controls ----
    {
        bool pass_all = table.all("prop1-*", true);
        bool fail_all = table.all("p1mut-*", true) == false && [&] {
            for (auto& [id, r] : table.by_id)
                if (glob_match("p1mut-*", id) && r.status != "FAIL") return false;
            return true;
        }();
        bool residuals_ok = true;
        for (auto& [id, r] : table.by_id) {
            if (!glob_match("prop1-*", id)) continue;
            if (r.status == "PASS_NUMERIC" && (r.max_residual >= 1e-9 || r.samples < 20))
                residuals_ok = false;
        }
        double secs = table.seconds("prop1-*") + table.seconds("p1mut-*");
        line(1, "all eleven curve/operator pairs admitted", pass_all);
        line(1, "every single-coefficient mutation rejected", fail_all);
        line(1, "pass stage symbolic or numeric below 1e-9 over >= 20 points", residuals_ok);
        line(1, "suite runtime below 60 s", secs < 60.0,
             "took " + std::to_string(secs) + " s");
    }

    // ---- criterion 2: positive and negative symmetry controls ----
    {
        line(2, "time derivative and third-order characteristics rejected alone",
             table.failed("airy-neg-q1") && table.failed("airy-neg-q2-printed") &&
                 table.failed("airy-neg-q2-flow"));
        line(2, "combined characteristic and scaling admitted",
             table.passed("airy-q3-flow") && table.passed("airy-q4"));
        line(2, "shifted-curve characteristics admitted, including the mixed-jet one",
             table.passed("mixedjet-y0") && table.passed("mixedjet-y1") &&
                 table.passed("mixedjet-y2"));
        line(2, "cubic mixed-jet characteristic verdict reported with its flag",
             table.at("mixedjet-y3-u").expect == "report" &&
                 !table.at("mixedjet-y3-u").status.empty(),
             "verdict " + table.at("mixedjet-y3-u").status);
        line(2, "third-order flow characteristic admitted by the stationary curve",
             table.passed("kdv-x"));
        line(2, "hyperbolic pair admitted with an opaque source function",
             table.passed("wave1-q1") && table.passed("wave1-q2"));
        line(2, "multi-field characteristic admitted, and rejected under a corrupted rule",
             table.passed("riccati-q-flow") && table.failed("riccati-q-corrupt"));
    }

    // ---- criterion 3: reduction suite ----
    {
        line(3, "cubic-dispersion flow reduces to the stated linear pair",
             table.passed("ode2-reduce") && table.failed("ode2-reduce-mut"));
        line(3, "nonevolutionary mixed-jet equation reduces under the exponential ansatz",
             table.passed("mixedjet-reduce"));
        line(3, "all six medium families reduce with sampled source functions",
             table.passed("med-i") && table.passed("med-ii") && table.passed("med-iii") &&
                 table.passed("med-iii-alt") && table.passed("med-iv") && table.passed("med-v") &&
                 table.passed("med-vi"));
        line(3, "five-constant and three-constant source flows reduce as printed",
             table.passed("src5-reduce") && table.passed("src3-reduce"));
        line(3, "source-free flow reduces to the quadratic pair",
             table.passed("base-reduce"));
        line(3, "quadrature ansatz reduces the augmented third-order flow numerically",
             table.passed("kdv-reduce"),
             "max rel " + std::to_string(table.at("kdv-reduce").max_residual));
        line(3, "stationary equation reproduces the algebraic pair",
             table.passed("med-alg"));
    }

    // ---- criterion 4: solution suite ----
    {
        line(4, "exponential pair solves the cubic-dispersion flow at three rates",
             table.passed("ode2-sol-neg") && table.passed("ode2-sol-zero") &&
                 table.passed("ode2-sol-pos"));
        line(4, "all five closed-form families solve their flows over random draws",
             table.passed("src5-sol-1") && table.passed("src5-sol-2") &&
                 table.passed("src5-sol-3") && table.passed("src5-sol-4") &&
                 table.passed("src5-sol-5"));
        line(4, "balanced-drain closed form solves the three-constant flow",
             table.passed("src3-a8sol"));
        line(4, "two-constant partial solution solves the source-free flow",
             table.passed("base-sol"));
        line(4, "arbitrary-function hyperbolic solutions verified for three draws each",
             table.passed("wave1-solution") && table.passed("wave2-solution"));
    }

    criterion5(tab);
    criterion6_extras(tab);
    {
        // catalog-driven halves of criterion 6
        line(6, "translation pair yields no invariant combination",
             table.at("base-x1x3").status == "NONE");
        line(6, "abelian combination detected as invariant",
             table.at("base-abelian").status == "FOUND");
        line(6, "non-invariance of the source-family solutions reproduced",
             table.at("src5-noninv-a3").status == "NONE" &&
                 table.at("src5-noninv-a4").status == "NONE" &&
                 table.at("src5-noninv-a5").status == "NONE" &&
                 table.at("src3-a8sol-noninv").status == "NONE");
        line(6, "inherited symmetry actions reproduced exactly",
             table.at("src3-inherited-q1").status == "PASS_SYMBOLIC" &&
                 table.at("src3-inherited-q2").status == "PASS_SYMBOLIC");
    }
    criterion7(tab);
    criterion8(records, full_seconds);

    std::cout << (failures == 0 ? "ACCEPTANCE: all criteria satisfied\n"
                                : "ACCEPTANCE: " + std::to_string(failures) +
                                      " criterion line(s) failed\n");
    return failures == 0 ? 0 : 1;
}

// ---- criterion 5: first integrals ------------------------------------------

static void criterion5(SymbolTable& tab) {
    auto P = [&](const std::string& s) { return parse(s, tab); };

    Manifold m;
    m.add_rule(P("u_xx"), P("3*u_x^2/u - 3*beta*u_x + beta^2*u"));
    Expr I1 = P("exp(beta*x)*(2/u^2 - (2/beta)*u_x/u^3)");
    Expr I2 = P("exp(2*beta*x)*((2/beta)*u_x/u^3 - 1/u^2)");
    bool integrals = is_zero_symbolic(total_derivative(I1, "x", &m)) == ZeroTest::Zero &&
                     is_zero_symbolic(total_derivative(I2, "x", &m)) == ZeroTest::Zero;
    line(5, "both functionals are first integrals of the curve, symbolically", integrals);

    Ansatz a;
    a.phi = {"phi1", "phi2"};
    a.u_of = P("exp(beta*x)/sqrt(phi1*exp(beta*x)+phi2)");
    bool collapse = is_zero_const(apply_ansatz(I1 - P("phi1"), a)) &&
                    is_zero_const(apply_ansatz(I2 - P("phi2"), a));
    line(5, "under the ansatz the integrals collapse to the reduction functions", collapse);

    // algebraic invariant of the reduced flow drifts below 1e-6 along RK4 paths
    {
        Rng rng(42, "drift");
        double worst = 0.0;
        bool ok = true;
        for (int draw = 0; draw < 5; ++draw) {
            double beta = rng.uniform(0.4, 0.9);
            double a7 = rng.uniform(0.4, 1.0);
            double a8 = rng.uniform(0.2, 0.8);
            std::vector<double> y0 = {rng.uniform(0.6, 1.2), rng.uniform(0.6, 1.2)};
            std::vector<double> times;
            for (int i = 0; i <= 10; ++i) times.push_back(0.05 * i);
            auto rhs = [&](double, const std::vector<double>& y) {
                double p1 = y[0], p2 = y[1];
                return std::vector<double>{beta * a7 * p1 * p2 -
                                               beta * (a8 + beta / 2) * p1 * p1,
                                           beta * a7 * p2 * p2 - beta * (a8 + beta) * p1 * p2};
            };
            auto states = rk4_integrate(rhs, y0, times, 1e-9);
            auto quantity = [&](const std::vector<double>& y) {
                return y[1] * std::pow(y[0] / y[1], 2.0 * (a8 + beta) / beta) *
                       std::exp(2.0 * a7 * y[1] / (beta * y[0]));
            };
            double q0 = quantity(states.front());
            for (auto& y : states) {
                if (y[0] < 0.05 || y[1] < 0.05) { ok = false; break; }
                worst = std::max(worst, std::abs(quantity(y) - q0) / std::abs(q0));
            }
        }
        line(5, "reduced-flow invariant drifts below 1e-6 along RK4 trajectories",
             ok && worst < 1e-6, "max rel drift " + std::to_string(worst));
    }

    // the quotient relation holds symbolically on the reduced flow
    {
        Manifold phm;
        phm.add_rule(P("phi1_t"), P("beta*a7*phi1*phi2 - beta*(a8+beta/2)*phi1^2"));
        phm.add_rule(P("phi2_t"), P("beta*a7*phi2^2 - beta*(a8+beta)*phi1*phi2"));
        Expr rel = total_derivative(P("phi2/phi1"), "t", &phm) + P("(beta^2/2)*phi2");
        line(5, "quotient relation holds symbolically on the reduced flow",
             is_zero_symbolic(rel) == ZeroTest::Zero);
    }
}

// ---- criterion 6: engine-level invariance checks -----------------------------

static void criterion6_extras(SymbolTable& tab) {
    auto P = [&](const std::string& s) { return parse(s, tab); };

    SolutionWithConstants s;
    s.f = P("exp(beta*x)/sqrt((2/(beta^2*t+c1))*exp(beta*x) + c2/(beta^2*t+c1)^2)");
    s.constants = {"c1", "c2"};

    PointField X1{P("1"), P("0"), P("0"), "X1"};
    PointField X2{P("2*t"), P("0"), P("u"), "X2"};
    PointField X3{P("0"), P("2"), P("beta*u"), "X3"};

    // ten random families always admit a combination with small defect
    {
        Rng rng(42, "acc-thm");
        bool ok = true;
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            SamplingSpec spec;
            spec.fixed["beta"] = rng.uniform(0.5, 1.5);
            spec.fixed["c1"] = rng.uniform(0.5, 1.5);
            spec.fixed["c2"] = rng.uniform(0.5, 1.5);
            ComboOptions copts;
            copts.grid = {0.2, 1.6, 0.1, 1.0, 5, 5};
            copts.label = "acc-thm-" + std::to_string(i);
            ComboResult r = find_invariant_combo({X1, X2, X3}, s, copts, spec);
            if (r.outcome != ComboResult::Outcome::Found) ok = false;
            worst = std::max(worst, r.verify_residual);
        }
        line(6, "three-operator algebra admits a combination for ten random families",
             ok && worst < 1e-8, "worst verification residual " + std::to_string(worst));
    }

    // the distinguished abelian combination has identically zero defect
    {
        PointField combo{P("2*(beta^2*t+c1)"), P("-2*beta"), P("0"), "Q1-bQ2"};
        line(6, "abelian combination's defect vanishes symbolically",
             is_zero_symbolic(defect(combo, s)) == ZeroTest::Zero);
    }

    // invariant-solution comparison forms satisfy their criteria symbolically
    {
        Expr t = tab.sym("t");
        auto Dt = [&](const Expr& e) { return total_derivative(e, "t"); };
        Expr a1 = P("alpha1"), a2 = P("alpha2");
        Expr lin = a1 + a2 * t;

        Expr p1a = P("c1"), p2a = P("c2*exp((alpha2/alpha1)*t)");
        bool case_a3 = is_zero_symbolic(a1 * Dt(p1a)) == ZeroTest::Zero &&
                       is_zero_symbolic(a1 * Dt(p2a) - a2 * p2a) == ZeroTest::Zero;

        Expr p1b = P("c1/(alpha1+alpha2*t)"), p2b = P("c2*(alpha1+alpha2*t)");
        bool case_a4 = is_zero_symbolic(lin * Dt(p1b) + a2 * p1b) == ZeroTest::Zero &&
                       is_zero_symbolic(lin * Dt(p2b) - a2 * p2b) == ZeroTest::Zero;
        // the printed reciprocal form fails the second criterion equation
        Expr p2bad = P("c2/(alpha1+alpha2*t)");
        bool printed_fails = is_zero_symbolic(lin * Dt(p2bad) - a2 * p2bad) == ZeroTest::NonZero;

        Expr p1c = P("c1/(alpha1+alpha2*t)"), p2c = P("c2");
        bool case_a5 = is_zero_symbolic(lin * Dt(p1c) + a2 * p1c) == ZeroTest::Zero &&
                       is_zero_symbolic(lin * Dt(p2c)) == ZeroTest::Zero;

        line(6, "invariant-solution comparison forms satisfy their criteria exactly",
             case_a3 && case_a4 && case_a5,
             printed_fails ? "printed reciprocal second component rejected"
                           : "printed variant unexpectedly satisfied the criterion");
    }

    // criterion split: the defect's exponential coefficients are the two
    // stated criterion expressions
    {
        Expr u = P("exp(beta*x)/sqrt(phi1*exp(beta*x)+phi2)");
        Expr ut = total_derivative(u, "t");
        Expr lin = P("alpha1 + alpha2*t");
        Expr d = lin * ut - P("(alpha2/2)") * u;
        Expr cleared = normalize(d * P("-2*(phi1*exp(beta*x)+phi2)^(3/2)/exp(beta*x)"));
        auto coeffs = collect_coefficients(cleared, P("exp(beta*x)"));
        bool ok = false;
        if (coeffs && coeffs->size() == 2) {
            Expr c0 = (*coeffs)[0].second;
            Expr c1 = (*coeffs)[1].second;
            ok = equal_normalized(c1, P("(alpha1+alpha2*t)*phi1_t + alpha2*phi1")) &&
                 equal_normalized(c0, P("(alpha1+alpha2*t)*phi2_t + alpha2*phi2"));
        }
        line(6, "splitting the defect reproduces the two criterion equations", ok);
    }
}

// ---- criterion 7: commutators -------------------------------------------------

static void criterion7(SymbolTable& tab) {
    auto P = [&](const std::string& s) { return parse(s, tab); };

    Manifold airy;
    airy.add_rule(P("u_xx"), P("(x/(6*(t+1)))*u"));
    GeneralizedField q3{"u", P("u_t - u_xxx + 3*u_xx*u_x/u")};
    GeneralizedField q4{"u", P("u")};
    GeneralizedField bracket = commutator(q3, q4, &airy);
    bool stated = equal_normalized(bracket.characteristic, q3.characteristic);
    line(7, "stated bracket of the nonstationary pair equals the combined characteristic",
         stated,
         "engine computes [Q3,Q4] = " + to_string(bracket.characteristic) +
             "; degree-one homogeneity forces the zero bracket, see the decisions record");

    GeneralizedField p1{"u", P("beta^2*u - 2*(beta^2*t+c1)*u_t")};
    GeneralizedField p2{"u", P("beta*u - 2*u_x")};
    line(7, "evolutionary pair of point symmetries commutes symbolically",
         is_zero_const(commutator(p1, p2).characteristic));
}

// ---- criterion 8: engine properties -------------------------------------------

static void criterion8(const std::vector<CaseRecord>& records, double full_seconds) {
    // derivative versus central finite differences on 1000 random expressions
    {
        Rng rng(42, "acc-fd");
        SymbolTable tab = testutil::standard_table();
        Expr x = tab.sym("x");
        int done = 0, tried = 0;
        bool ok = true;
        double worst = 0.0;
        while (done < 1000 && tried < 20000) {
            ++tried;
            Expr e = testutil::random_expr(rng, 3);
            Expr de = diff(e, x);
            Bindings b = testutil::random_bindings(rng);
            double xv = *b.find("x");
            double h = 1e-6, fp, fm, dv;
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
            double rel = std::abs(dv - fd) / (1.0 + std::abs(fd));
            worst = std::max(worst, rel);
            if (rel > 1e-5) ok = false;
            ++done;
        }
        line(8, "derivatives match finite differences on 1000 random expressions",
             ok && done == 1000, "worst rel " + std::to_string(worst));

        // parser round-trip on the same generator
        Rng rng2(42, "acc-rt");
        bool rt = true;
        for (int i = 0; i < 1000; ++i) {
            Expr e = testutil::random_expr(rng2, 3);
            Expr n = normalize(e);
            if (!expr_equal(normalize(parse(to_string(n), tab)), n)) rt = false;
        }
        line(8, "printing and reparsing preserves the normal form", rt);
    }

    // determinism: serial and parallel runs agree byte for byte on verdicts
    {
        RunConfig cfg;
        cfg.catalog_path = default_catalog_dir();
        auto subset = select_cases(records, "airy-*");
        RunReport r1 = run_cases(subset, cfg);
        RunConfig par = cfg;
        par.jobs = 4;
        RunReport r2 = run_cases(subset, par);
        bool same = r1.results.size() == r2.results.size();
        for (size_t i = 0; same && i < r1.results.size(); ++i)
            same = r1.results[i].status == r2.results[i].status &&
                   r1.results[i].max_residual == r2.results[i].max_residual;
        RunReport r3 = run_cases(subset, cfg);
        bool stable = r1.results.size() == r3.results.size();
        for (size_t i = 0; stable && i < r1.results.size(); ++i)
            stable = r1.results[i].status == r3.results[i].status &&
                     r1.results[i].max_residual == r3.results[i].max_residual;
        line(8, "verdicts identical across parallel and repeated serial runs", same && stable);
    }

    line(8, "full default suite completes within ten minutes", full_seconds < 600.0,
         "took " + std::to_string(full_seconds) + " s");
}
