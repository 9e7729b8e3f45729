#include "symred/detcheck.hpp"

#include "symred/normalize.hpp"

#include <cmath>
#include <set>

namespace symred {

std::string status_name(Status s) {
    switch (s) {
        case Status::PassSymbolic: return "PASS_SYMBOLIC";
        case Status::PassNumeric: return "PASS_NUMERIC";
        case Status::Fail: return "FAIL";
        case Status::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

namespace {

void collect_opaque_names(const Expr& e, std::map<std::string, int>& out) {
    if (e->kind == Kind::Opaque) out[e->name] = (int)e->kids.size();
    for (auto& k : e->kids) collect_opaque_names(k, out);
}

double draw_in_domain(const SampleDomain& d, Rng& rng) {
    double width = d.hi - d.lo;
    for (int tries = 0; tries < 64; ++tries) {
        double v = rng.uniform(d.lo, d.hi);
        bool ok = true;
        for (double ex : d.exclude)
            if (std::abs(v - ex) < 0.05 * (width > 0 ? width : 1.0)) ok = false;
        if (ok) return v;
    }
    return 0.5 * (d.lo + d.hi);
}

} // namespace

void apply_derived_params(Bindings& b, const SamplingSpec& spec, Rng& rng) {
    auto is_derived = [&](const std::string& n) {
        for (auto& [dn, de] : spec.derived)
            if (dn == n) return true;
        return false;
    };
    for (auto& [dn, de] : spec.derived) {
        // dependencies that appear nowhere else still need values
        for (auto& a : collect_free_atoms(de)) {
            std::string n = to_string(a);
            if (b.find(n) || is_derived(n)) continue;
            auto fx = spec.fixed.find(n);
            if (fx != spec.fixed.end())
                b.set(n, fx->second);
            else
                b.set(n, draw_in_domain(spec.domain_for(n), rng));
        }
        b.set(dn, eval_num(de, b));
    }
}

Bindings draw_bindings(const std::vector<Expr>& atoms, const SamplingSpec& spec, Rng& rng) {
    Bindings b;
    b.set_anti_base(spec.anti_base);
    for (auto& a : atoms) {
        std::string name = to_string(a);
        auto fx = spec.fixed.find(name);
        if (fx != spec.fixed.end()) {
            b.set(name, fx->second);
            continue;
        }
        bool derived = false;
        for (auto& [dn, de] : spec.derived)
            if (dn == name) derived = true;
        if (derived) continue;
        b.set(name, draw_in_domain(spec.domain_for(name), rng));
    }
    apply_derived_params(b, spec, rng);
    return b;
}

NumericResult sample_residual(const Expr& residual, const SamplingSpec& spec,
                              const CheckOptions& opts) {
    NumericResult r;
    std::vector<Expr> atoms = collect_free_atoms(residual);
    std::map<std::string, int> opaque = spec.opaques;
    collect_opaque_names(residual, opaque);

    Rng rng(opts.seed, opts.label + "/numeric");
    int instances = opaque.empty() ? 1 : std::max(1, opts.opaque_instances);
    for (int inst = 0; inst < instances; ++inst) {
        for (int s = 0; s < opts.samples; ++s) {
            bool done = false;
            for (int attempt = 0; attempt < 10 && !done; ++attempt) {
                Bindings b = draw_bindings(atoms, spec, rng);
                for (auto& [name, arity] : opaque)
                    b.set_opaque(name, make_opaque_instance(arity, inst + (int)rng.below(3), rng));
                try {
                    ScaledValue v = eval_scaled(residual, b);
                    if (!std::isfinite(v.value)) throw EvalError("nonfinite value", "residual");
                    r.max_rel = std::max(r.max_rel, v.relative());
                    ++r.samples;
                    done = true;
                } catch (const EvalError& ee) {
                    if (attempt == 9) {
                        ++r.failures;
                        if (r.note.empty()) r.note = ee.what();
                    }
                }
            }
        }
    }
    return r;
}

Verdict residual_verdict(const Expr& residual, const CheckOptions& opts,
                         const SamplingSpec& spec) {
    Verdict v;
    v.residual = normalize(residual);
    if (opts.mode != CheckMode::Numeric) {
        if (is_zero_symbolic(v.residual) == ZeroTest::Zero) {
            v.status = Status::PassSymbolic;
            v.stage = "symbolic";
            return v;
        }
        if (opts.mode == CheckMode::Symbolic) {
            v.status = Status::Inconclusive;
            v.stage = "symbolic";
            v.notes = "normal form nonzero; numeric stage disabled";
            return v;
        }
    }
    NumericResult n = sample_residual(v.residual, spec, opts);
    v.stage = "numeric";
    v.numeric_max_residual = n.max_rel;
    v.samples_used = n.samples;
    if (!n.note.empty()) v.notes = n.note;
    if (n.samples == 0) {
        v.status = Status::Inconclusive;
        v.notes = "no valid samples: " + n.note;
        return v;
    }
    if (n.max_rel >= opts.tol_fail)
        v.status = Status::Fail;
    else if (n.max_rel <= opts.tol_pass && n.failures == 0)
        v.status = Status::PassNumeric;
    else
        v.status = Status::Inconclusive;
    return v;
}

Verdict check_lbs(const Manifold& m, const GeneralizedField& X, const Expr& H,
                  const CheckOptions& opts, const SamplingSpec& spec) {
    Expr residual;
    try {
        residual = prolong_apply(X, H, m);
    } catch (const ManifoldError& me) {
        Verdict v;
        v.status = Status::Inconclusive;
        v.notes = std::string("manifold error: ") + me.what();
        return v;
    }
    return residual_verdict(residual, opts, spec);
}

Verdict check_lbs_multifield(const Manifold& m, const GeneralizedField& X, const Expr& H,
                             const CheckOptions& opts, const SamplingSpec& spec) {
    return check_lbs(m, X, H, opts, spec);
}

} // namespace symred
