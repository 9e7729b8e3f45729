#ifndef SYMRED_REDUCE_HPP
#define SYMRED_REDUCE_HPP

#include "symred/detcheck.hpp"

#include <optional>

namespace symred {

struct ReduceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parametrized solution family u = U(x, t; phi1, phi2). Explicit, or
/// implicit through a quadrature relation Q(u; phi1) = x + phi2 with a
/// closed first-derivative relation for the jets.
struct Ansatz {
    enum class Form { Explicit, ImplicitQuadrature };
    Form form = Form::Explicit;

    std::string field = "u";
    std::vector<std::string> phi;  // reduction function names, order matters
    std::string xvar = "x";
    std::string tvar = "t";

    Expr u_of;          // explicit: U(x,t,phi)
    bool negate = false;

    Expr quadrature;    // implicit: Q(u; phi1), an integral expression in u
    Expr ux_relation;   // implicit: u_x = R(u, phi1)
    Expr bracket_hi;    // implicit: upper root bracket, expression in phi
    std::vector<std::pair<Expr, Expr>> jet_rules; // implicit: higher x-jets, e.g. u_xx -> -u^2/2

    Expr solution_expr() const; // explicit U with sign applied
};

struct ReducedSystem {
    std::vector<Expr> equations;                 // E_k(t, phi, phi') = 0
    std::vector<std::pair<Expr, Expr>> solved;   // phi_i' -> G_i(t, phi)
    bool algebraic = false;

    /// The solved form as a rewrite manifold over the reduction functions.
    Manifold as_manifold() const;
};

/// Substitute the ansatz into the equation: every jet of the field becomes
/// the corresponding total derivative of U. Result is normalized and lives
/// in (x, t, phi_i, phi_i', ...). Throws ReduceError for jets the ansatz
/// cannot express (implicit form, or malformed input).
Expr apply_ansatz(const Expr& pde, const Ansatz& a);

/// Clear the residual with `clear_factor`, require it polynomial in the
/// collection atom `w`, and return the coefficient equations by power.
std::vector<Expr> extract_reduced_symbolic(const Expr& pde, const Ansatz& a, const Expr& w,
                                           const Expr& clear_factor);

struct NumericExtraction {
    std::vector<double> phi_dot;
    double defect = 0.0; // scale-normalized max residual of the fit
};

/// Least-squares estimate of phi' at one state point from >= 8 sample x
/// values; the equation must be affine in phi'. Extra bindings supply
/// parameters and opaque instantiations.
NumericExtraction extract_reduced_numeric(const Expr& pde, const Ansatz& a, double t,
                                          const std::vector<double>& phi,
                                          const std::vector<double>& xs, const Bindings& extra);

/// Verify a reduced system: symbolically when the ansatz is explicit
/// (substitute the solved form and zero-test), and always numerically by
/// comparing least-squares extraction against the solved form at sampled
/// states. Algebraic systems are verified by coefficient extraction and
/// canonical matching plus pointwise identity sampling.
struct ReducedCheckConfig {
    CheckOptions opts;
    SamplingSpec spec;
    Expr collect_atom;   // for algebraic extraction
    Expr clear_factor;   // for algebraic extraction
    int state_samples = 20;
    double tol = 1e-6;
};

Verdict verify_reduced_system(const Expr& pde, const Ansatz& a, const ReducedSystem& rs,
                              const ReducedCheckConfig& cfg);

/// Canonical primitive form: normal form divided by its rational content,
/// for comparisons up to a nonzero constant multiple.
Expr canonical_primitive(const Expr& e);

struct GridSpec {
    double x_lo = 0.5, x_hi = 2.5;
    double t_lo = 0.1, t_hi = 1.5;
    int nx = 20, nt = 20;
};

enum class ConstraintKind { NonZero, Positive };
struct Constraint {
    Expr expr;
    ConstraintKind kind;
};

struct SolutionCheck {
    Expr pde;
    Expr solution; // u(x,t) with parameter symbols
    std::string field = "u";
    std::string xvar = "x";
    std::string tvar = "t";
    GridSpec grid;
    int param_draws = 10;
    double tol = 1e-7;
    std::vector<Constraint> constraints;
};

/// Evaluate the equation's residual on a grid with all jets of the solution
/// computed symbolically; PASS iff the scale-normalized residual stays
/// below tolerance for every admissible parameter draw.
Verdict verify_solution(const SolutionCheck& sc, const CheckOptions& opts,
                        const SamplingSpec& spec);

struct ImplicitPoint {
    double u;
    double ux;
    double du_dphi1;
    double du_dphi2;
    double q_phi1; // d/dphi1 of the quadrature at the root
};

/// Solve Q(u; phi1) = x + phi2 for u by safeguarded bisection/Newton and
/// return the jet data at the root.
ImplicitPoint eval_implicit(const Ansatz& a, const std::vector<double>& phi, double x,
                            const Bindings& extra);

} // namespace symred

#endif
