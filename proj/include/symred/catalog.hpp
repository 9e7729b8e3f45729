#ifndef SYMRED_CATALOG_HPP
#define SYMRED_CATALOG_HPP

#include "symred/invariance.hpp"
#include "symred/reduce.hpp"

#include <optional>
#include <string>
#include <vector>

namespace symred {

struct CatalogError : std::runtime_error {
    CatalogError(const std::string& id, const std::string& msg)
        : std::runtime_error(id.empty() ? msg : (id + ": " + msg)) {}
};

/// One verification case: a machine-readable record of an equation, its
/// operators/ansatz/solutions, and the expected outcome.
struct CaseRecord {
    std::string id;
    std::string kind;   // symmetry-check, reduction-check, solution-check,
                        // invariance-check, inherited-check, commutator-check
    std::string title;
    std::string anchor; // coverage key, one per claim family
    std::string expect = "pass"; // pass | fail | report
    std::string typo_group;      // nonempty for typo-suspect variants
    std::string note;

    SymbolTable table;
    SamplingSpec sampling;

    std::vector<std::pair<Expr, Expr>> manifold_rules;
    struct Operator {
        std::string name;
        Expr eta;
    };
    std::vector<Operator> operators;
    Expr check_h;
    Expr expect_commutator;

    Expr pde;
    std::optional<Ansatz> ansatz;
    ReducedSystem reduced;
    Expr collect_atom;
    Expr clear_factor;
    double reduced_tol = 1e-6;
    int reduced_states = 20;

    Expr solution;
    int solution_draws = 10;
    double solution_tol = 1e-7;
    GridSpec grid;
    std::vector<Constraint> constraints;

    std::vector<PointField> point_ops;
    std::vector<std::string> constants;
    std::string invariance_expect; // found | none

    Expr I1, I2, expected_f1, expected_f2, expected_m;

    std::string xvar = "x";
    std::string tvar = "t";
    std::string field = "u";

    std::vector<std::string> raw_lines; // exact text for round-trip serialization

    Manifold build_manifold() const;
    std::string serialize() const;
};

/// Load and validate a case file; duplicate ids and malformed records are
/// rejected with the offending case id and field in the message.
std::vector<CaseRecord> load_catalog_file(const std::string& path);

/// Load every *.cat file in a directory (sorted), checking id uniqueness
/// across files.
std::vector<CaseRecord> load_catalog_dir(const std::string& dir);

/// Filter by id glob ('*' and '?') or by exact kind; stable order by id.
std::vector<CaseRecord> select_cases(const std::vector<CaseRecord>& records,
                                     const std::string& id_glob, const std::string& kind = "");

bool glob_match(const std::string& pattern, const std::string& text);

/// Directory holding the bundled case files.
std::string default_catalog_dir();

} // namespace symred

#endif
