#ifndef SYMRED_DETCHECK_HPP
#define SYMRED_DETCHECK_HPP

#include "symred/eval.hpp"
#include "symred/jet.hpp"

#include <map>
#include <optional>
#include <string>

namespace symred {

enum class Status { PassSymbolic, PassNumeric, Fail, Inconclusive };

std::string status_name(Status s);

struct Verdict {
    Status status = Status::Inconclusive;
    Expr residual;                    // post-reduction normal form
    double numeric_max_residual = 0.0; // max scale-normalized residual sampled
    int samples_used = 0;
    std::string stage; // "symbolic" or "numeric"
    std::string notes;

    bool passed() const { return status == Status::PassSymbolic || status == Status::PassNumeric; }
};

struct SampleDomain {
    double lo = 0.3;
    double hi = 1.7;
    std::vector<double> exclude;
};

/// Per-case sampling description: domains by atom name, pinned values,
/// derived parameters, opaque functions to instantiate.
struct SamplingSpec {
    std::map<std::string, SampleDomain> domains;
    std::map<std::string, double> fixed;
    std::vector<std::pair<std::string, Expr>> derived; // evaluated in order
    std::map<std::string, int> opaques;                // name -> arity
    double anti_base = 0.0;
    SampleDomain default_domain{};

    SampleDomain domain_for(const std::string& name) const {
        auto it = domains.find(name);
        return it == domains.end() ? default_domain : it->second;
    }
};

enum class CheckMode { Symbolic, Numeric, Both };

struct CheckOptions {
    uint64_t seed = 42;
    int samples = 20;
    double tol_pass = 1e-9;
    double tol_fail = 1e-6;
    CheckMode mode = CheckMode::Both;
    std::string label; // per-case RNG stream label
    int opaque_instances = 3;
};

/// Draw bindings for every atom in `atoms` from the sampling domains; resamples
/// around exclusions. Derived parameters are evaluated afterwards.
Bindings draw_bindings(const std::vector<Expr>& atoms, const SamplingSpec& spec, Rng& rng);

/// Evaluate the sampling description's derived parameters into `b`, drawing any of their
/// dependencies that are still unbound.
void apply_derived_params(Bindings& b, const SamplingSpec& spec, Rng& rng);

struct NumericResult {
    double max_rel = 0.0;
    int samples = 0;
    int failures = 0; // samples abandoned after repeated domain errors
    std::string note;
};

/// Scale-normalized residual sampling over the per-case domains, covering at
/// least `opts.opaque_instances` instantiations of every opaque function.
NumericResult sample_residual(const Expr& residual, const SamplingSpec& spec,
                              const CheckOptions& opts);

/// Decide whether X is a generalized symmetry of the equation H = 0 on the
/// manifold m: evaluates the prolonged action and applies the two-stage
/// zero test (exact normal form, then seeded numeric sampling with the
/// pass/fail thresholds).
Verdict check_lbs(const Manifold& m, const GeneralizedField& X, const Expr& H,
                  const CheckOptions& opts, const SamplingSpec& spec);

/// Multi-field form: the prolongation acts on X.field only while the other
/// fields reduce by their own manifold rules. Same verdict semantics.
Verdict check_lbs_multifield(const Manifold& m, const GeneralizedField& X, const Expr& H,
                             const CheckOptions& opts, const SamplingSpec& spec);

/// Two-stage zero test of an arbitrary residual expression.
Verdict residual_verdict(const Expr& residual, const CheckOptions& opts,
                         const SamplingSpec& spec);

} // namespace symred

#endif
