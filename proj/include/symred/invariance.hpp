#ifndef SYMRED_INVARIANCE_HPP
#define SYMRED_INVARIANCE_HPP

#include "symred/detcheck.hpp"
#include "symred/reduce.hpp"

#include <optional>

namespace symred {

/// Point symmetry generator xi_t d_t + xi_x d_x + eta d_u with coefficients
/// depending on (t, x, u) only.
struct PointField {
    Expr xi_t;
    Expr xi_x;
    Expr eta;
    std::string name;
};

/// Solution family u = f(x, t; c1, c2) whose constants span the comparison
/// space W2 = span(df/dc1, df/dc2).
struct SolutionWithConstants {
    Expr f;
    std::vector<std::string> constants; // parameter symbol names
    std::string field = "u";
    std::string xvar = "x";
    std::string tvar = "t";
};

/// Invariance defect xi_t f_t + xi_x f_x - eta(t, x, f), normalized.
Expr defect(const PointField& X, const SolutionWithConstants& s);

struct SpanDecomposition {
    std::vector<double> coefficients; // one per constant
    double residual = 0.0;            // scale-normalized fit residual
};

/// Least-squares decomposition of d over the constant-derivative basis on a
/// sampled grid. Throws on a rank-deficient basis.
SpanDecomposition span_decompose(const Expr& d, const SolutionWithConstants& s,
                                 const std::vector<Bindings>& grid);

struct ComboResult {
    enum class Outcome { Found, None, Inconclusive };
    Outcome outcome = Outcome::None;
    std::vector<double> alpha;   // unit-norm combination when found
    double sigma_ratio = 1.0;    // smallest/largest singular value
    double verify_residual = 0.0;
};

struct ComboOptions {
    uint64_t seed = 42;
    std::string label;
    double accept = 1e-8;  // nullspace accepted below
    double reject = 1e-4;  // rejected above; in between retries on a finer grid
    GridSpec grid;
    int extra_random_points = 12;
};

/// Search for a nonzero combination sum_i alpha_i X_i whose defect vanishes
/// on the family. Implements the singular-value criterion with a fresh-grid
/// verification pass and one x4 grid refinement retry in the dead band.
ComboResult find_invariant_combo(const std::vector<PointField>& Xs,
                                 const SolutionWithConstants& s, const ComboOptions& opts,
                                 const SamplingSpec& spec);

/// Inherited-symmetry check: the first prolongation of Q applied to the
/// first integrals must equal the stated functions of (I1, I2) on the
/// manifold, and Qt must equal m(t).
struct InheritedCheck {
    PointField Q;
    Expr I1, I2;
    Manifold const* manifold;
    Expr expected_f1, expected_f2; // expressions in the symbols I1, I2
    Expr expected_m;               // expression in t
    std::string field = "u";
    std::string xvar = "x";
    std::string tvar = "t";
};

Verdict check_inherited(const InheritedCheck& chk);

/// First prolongation Q^(1) applied to a function of (t, x, u, u_x),
/// reduced to the manifold.
Expr point_prolong_apply(const PointField& Q, const Expr& I, const Manifold& m,
                         const std::string& field, const std::string& xvar,
                         const std::string& tvar);

} // namespace symred

#endif
