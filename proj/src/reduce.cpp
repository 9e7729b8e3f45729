#include "symred/reduce.hpp"

#include "symred/normalize.hpp"

#include <algorithm>
#include <cmath>

namespace symred {

Expr Ansatz::solution_expr() const {
    if (form != Form::Explicit) throw ReduceError("implicit ansatz has no closed solution form");
    return negate ? -u_of : u_of;
}

Manifold ReducedSystem::as_manifold() const {
    Manifold m;
    for (auto& [lhs, rhs] : solved) m.add_rule(lhs, rhs);
    return m;
}

Expr apply_ansatz(const Expr& pde, const Ansatz& a) {
    if (a.form != Ansatz::Form::Explicit)
        throw ReduceError("symbolic ansatz substitution requires the explicit form");
    Expr U = a.solution_expr();
    std::vector<Expr> jets = collect_jets(pde, a.field);
    SubstMap rules;
    for (auto& jet : jets) {
        Expr rep = U;
        for (size_t i = 0; i < jet->indeps.size(); ++i)
            for (int k = 0; k < jet->orders[i]; ++k) rep = total_derivative(rep, jet->indeps[i]);
        rules.add(jet, rep);
    }
    return substitute(pde, rules);
}

std::vector<Expr> extract_reduced_symbolic(const Expr& pde, const Ansatz& a, const Expr& w,
                                           const Expr& clear_factor) {
    Expr residual = apply_ansatz(pde, a);
    Expr cleared = normalize(make_mul({residual, clear_factor}));
    auto coeffs = collect_coefficients(cleared, w);
    if (!coeffs)
        throw ReduceError("cleared residual is not polynomial in the collection atom " +
                          to_string(w));
    std::vector<Expr> out;
    for (auto& [p, c] : *coeffs) out.push_back(c);
    return out;
}

namespace {

std::vector<Expr> phi_dot_jets(const Ansatz& a) {
    std::vector<Expr> out;
    for (auto& name : a.phi) out.push_back(make_jet(name, {a.tvar}, {1}));
    return out;
}

// bind jets of the field along the implicit ansatz at one x sample;
// u_t is affine in phi': u_t = (phi2' - Q_phi1 * phi1') / Q_u
void bind_implicit_jets(const Ansatz& a, const ImplicitPoint& pt, const std::vector<double>& phi,
                        double x, double phi1_dot, double phi2_dot, Bindings& b,
                        const std::vector<Expr>& jets, const Manifold& m) {
    b.set(a.xvar, x);
    for (size_t i = 0; i < a.phi.size(); ++i) b.set(a.phi[i], phi[i]);
    b.set(a.field, pt.u);
    b.set(a.field + "_" + a.xvar, pt.ux);
    for (auto& jet : jets) {
        int ot = 0, ox = 0;
        for (size_t i = 0; i < jet->indeps.size(); ++i) {
            if (jet->indeps[i] == a.tvar) ot = jet->orders[i];
            if (jet->indeps[i] == a.xvar) ox = jet->orders[i];
        }
        if (ot == 0 && ox >= 2) {
            const Expr* r = m.lookup(jet);
            if (!r) throw ReduceError("implicit ansatz cannot express " + to_string(jet));
            b.set(to_string(jet), eval_num(*r, b));
        } else if (ot == 1 && ox == 0) {
            double qu = 1.0 / pt.ux;
            b.set(to_string(jet), (phi2_dot - pt.q_phi1 * phi1_dot) / qu);
        } else if (ot > 0) {
            throw ReduceError("implicit ansatz cannot express " + to_string(jet));
        }
    }
}

} // namespace

ImplicitPoint eval_implicit(const Ansatz& a, const std::vector<double>& phi, double x,
                            const Bindings& extra) {
    if (a.form != Ansatz::Form::ImplicitQuadrature)
        throw ReduceError("eval_implicit requires an implicit ansatz");
    Bindings b = extra;
    for (size_t i = 0; i < a.phi.size(); ++i) b.set(a.phi[i], phi[i]);
    double hi = eval_num(a.bracket_hi, b);
    double target = x + phi[1];

    auto qval = [&](double u) {
        Bindings bb = b;
        bb.set(a.field, u);
        return eval_num(a.quadrature, bb) - target;
    };
    auto qderiv = [&](double u) {
        Bindings bb = b;
        bb.set(a.field, u);
        // dQ/du is the integrand at the upper limit = 1/R(u)
        return 1.0 / eval_num(a.ux_relation, bb);
    };
    double lo = 0.0;
    if (qval(lo) > 0.0 || qval(hi) < 0.0) throw ReduceError("implicit ansatz root not bracketed");
    double u = find_root(qval, qderiv, lo, hi, 1e-12);

    ImplicitPoint pt;
    pt.u = u;
    Bindings bu = b;
    bu.set(a.field, u);
    pt.ux = eval_num(a.ux_relation, bu);
    // dQ/dphi1 at the root by differentiating under the integral
    Expr phi1_sym = make_jet(a.phi[0], {a.tvar}, {0});
    Expr dq = diff(a.quadrature, phi1_sym);
    pt.q_phi1 = eval_num(dq, bu);
    // implicit partials: Q_u du/dphi1 + Q_phi1 = 0, Q_u du/dphi2 = 1
    double qu = 1.0 / pt.ux;
    pt.du_dphi1 = -pt.q_phi1 / qu;
    pt.du_dphi2 = 1.0 / qu;
    return pt;
}

NumericExtraction extract_reduced_numeric(const Expr& pde, const Ansatz& a, double t,
                                          const std::vector<double>& phi,
                                          const std::vector<double>& xs, const Bindings& extra) {
    if (xs.size() < 8) throw ReduceError("numeric extraction needs at least 8 sample points");
    size_t n = a.phi.size();
    std::vector<std::vector<double>> A(xs.size(), std::vector<double>(n, 0.0));
    std::vector<double> rhs(xs.size(), 0.0);
    std::vector<double> scale(xs.size(), 0.0);

    std::vector<Expr> dots = phi_dot_jets(a);

    if (a.form == Ansatz::Form::Explicit) {
        Expr residual = apply_ansatz(pde, a);
        for (size_t j = 0; j < xs.size(); ++j) {
            Bindings b = extra;
            b.set(a.xvar, xs[j]);
            b.set(a.tvar, t);
            for (size_t i = 0; i < n; ++i) b.set(a.phi[i], phi[i]);
            for (auto& d : dots) b.set(to_string(d), 0.0);
            ScaledValue base = eval_scaled(residual, b);
            rhs[j] = base.value;
            scale[j] = base.scale;
            for (size_t i = 0; i < n; ++i) {
                b.set(to_string(dots[i]), 1.0);
                A[j][i] = eval_num(residual, b) - base.value;
                b.set(to_string(dots[i]), 0.0);
            }
        }
    } else {
        std::vector<Expr> jets = collect_jets(pde, a.field);
        Manifold m;
        for (auto& [lhs, r] : a.jet_rules) m.add_rule(lhs, r);
        for (size_t j = 0; j < xs.size(); ++j) {
            ImplicitPoint pt = eval_implicit(a, phi, xs[j], extra);
            auto eval_at = [&](double p1d, double p2d) {
                Bindings b = extra;
                b.set(a.tvar, t);
                bind_implicit_jets(a, pt, phi, xs[j], p1d, p2d, b, jets, m);
                return eval_scaled(pde, b);
            };
            ScaledValue base = eval_at(0.0, 0.0);
            rhs[j] = base.value;
            scale[j] = base.scale;
            A[j][0] = eval_at(1.0, 0.0).value - base.value;
            A[j][1] = eval_at(0.0, 1.0).value - base.value;
        }
    }

    std::vector<double> neg_rhs(rhs.size());
    for (size_t j = 0; j < rhs.size(); ++j) neg_rhs[j] = -rhs[j];
    NumericExtraction out;
    out.phi_dot = least_squares(A, neg_rhs);
    for (size_t j = 0; j < xs.size(); ++j) {
        double r = rhs[j];
        for (size_t i = 0; i < n; ++i) r += A[j][i] * out.phi_dot[i];
        out.defect = std::max(out.defect, std::abs(r) / (1.0 + scale[j]));
    }
    return out;
}

Expr canonical_primitive(const Expr& e) {
    try {
        AtomTable tab;
        RF r = normalize_rf(e, tab);
        if (r.num.empty()) return make_int(0);
        Rational c = poly_content_canonical(r.num, tab);
        r.num = poly_scale(r.num, Rational(1) / c);
        return rf_to_expr(r, tab);
    } catch (const RationalOverflow&) {
        return e;
    }
}

namespace {

// solve a pair of equations affine in phi1', phi2' for the derivatives
std::optional<std::vector<std::pair<Expr, Expr>>> solve_for_derivatives(
    const std::vector<Expr>& eqs, const std::vector<Expr>& dots) {
    if (eqs.size() != 2 || dots.size() != 2) return std::nullopt;
    std::vector<std::vector<Expr>> A(2);
    std::vector<Expr> b(2);
    for (int i = 0; i < 2; ++i) {
        auto split = split_affine(eqs[i], dots);
        if (!split) return std::nullopt;
        A[i] = split->first;
        b[i] = split->second;
    }
    Expr det = normalize(A[0][0] * A[1][1] - A[0][1] * A[1][0]);
    if (is_zero_const(det)) return std::nullopt;
    // A phi' + b = 0  =>  phi' = -A^{-1} b
    Expr g1 = normalize((A[0][1] * b[1] - A[1][1] * b[0]) / det);
    Expr g2 = normalize((A[1][0] * b[0] - A[0][0] * b[1]) / det);
    std::vector<std::pair<Expr, Expr>> out;
    out.emplace_back(dots[0], g1);
    out.emplace_back(dots[1], g2);
    return out;
}

} // namespace

Verdict verify_reduced_system(const Expr& pde, const Ansatz& a, const ReducedSystem& rs,
                              const ReducedCheckConfig& cfg) {
    Verdict v;
    std::vector<Expr> dots = phi_dot_jets(a);

    if (rs.algebraic) {
        if (!cfg.collect_atom || !cfg.clear_factor) {
            v.status = Status::Inconclusive;
            v.notes = "algebraic verification needs collection data";
            return v;
        }
        std::vector<Expr> extracted =
            extract_reduced_symbolic(pde, a, cfg.collect_atom, cfg.clear_factor);
        if (extracted.size() != rs.equations.size()) {
            v.status = Status::Fail;
            v.notes = "extracted " + std::to_string(extracted.size()) + " equations, expected " +
                      std::to_string(rs.equations.size());
            return v;
        }
        std::vector<bool> used(extracted.size(), false);
        for (auto& exp_eq : rs.equations) {
            Expr target = canonical_primitive(exp_eq);
            bool matched = false;
            for (size_t i = 0; i < extracted.size(); ++i) {
                if (used[i]) continue;
                if (expr_equal(canonical_primitive(extracted[i]), target)) {
                    used[i] = true;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                v.status = Status::Fail;
                v.notes = "no extracted equation matches " + to_string(exp_eq);
                return v;
            }
        }
        v.status = Status::PassSymbolic;
        v.stage = "symbolic";
        return v;
    }

    auto solved = rs.solved.empty() ? solve_for_derivatives(rs.equations, dots)
                                    : std::optional(rs.solved);
    if (!solved) {
        v.status = Status::Inconclusive;
        v.notes = "reduced system is not affine-solvable for the derivatives";
        return v;
    }

    bool symbolic_pass = false;
    if (a.form == Ansatz::Form::Explicit) {
        Expr residual = apply_ansatz(pde, a);
        Manifold phim;
        for (auto& [l, r] : *solved) phim.add_rule(l, r);
        Expr reduced = phim.reduce(residual);
        v.residual = reduced;
        if (is_zero_symbolic(reduced) == ZeroTest::Zero) symbolic_pass = true;
    }

    // numeric cross-check: extraction against the solved form at sampled states
    Rng rng(cfg.opts.seed, cfg.opts.label + "/redstate");
    std::map<std::string, int> opaque = cfg.spec.opaques;
    int instances = opaque.empty() ? 1 : std::max(1, cfg.opts.opaque_instances);
    double max_rel = 0.0;
    int states = 0;
    std::string note;
    SampleDomain tdom = cfg.spec.domain_for(a.tvar);
    SampleDomain xdom = cfg.spec.domain_for(a.xvar);

    for (int inst = 0; inst < instances; ++inst) {
        for (int s = 0; s < cfg.state_samples; ++s) {
            bool done = false;
            for (int attempt = 0; attempt < 10 && !done; ++attempt) {
                try {
                    Bindings extra;
                    extra.set_anti_base(cfg.spec.anti_base);
                    std::vector<Expr> atoms = collect_free_atoms(pde);
                    for (auto& eq : rs.equations)
                        for (auto& at : collect_free_atoms(eq)) atoms.push_back(at);
                    for (auto& [l, rr] : *solved)
                        for (auto& at : collect_free_atoms(rr)) atoms.push_back(at);
                    for (auto& at : atoms) {
                        if (extra.find(to_string(at))) continue;
                        std::string name = to_string(at);
                        if (at->kind == Kind::Jet) continue;
                        if (name == a.xvar || name == a.tvar) continue;
                        auto fx = cfg.spec.fixed.find(name);
                        if (fx != cfg.spec.fixed.end())
                            extra.set(name, fx->second);
                        else {
                            bool derived = false;
                            for (auto& [dn, de] : cfg.spec.derived)
                                if (dn == name) derived = true;
                            if (!derived) {
                                SampleDomain d = cfg.spec.domain_for(name);
                                extra.set(name, rng.uniform(d.lo, d.hi));
                            }
                        }
                    }
                    apply_derived_params(extra, cfg.spec, rng);
                    for (auto& [name, arity] : opaque)
                        extra.set_opaque(name,
                                         make_opaque_instance(arity, inst + (int)rng.below(3), rng));

                    double t = rng.uniform(tdom.lo, tdom.hi);
                    std::vector<double> phi;
                    for (auto& pn : a.phi) {
                        SampleDomain d = cfg.spec.domain_for(pn);
                        phi.push_back(rng.uniform(d.lo, d.hi));
                    }
                    std::vector<double> xs;
                    for (int k = 0; k < 16; ++k)
                        xs.push_back(xdom.lo + (xdom.hi - xdom.lo) * (k + 0.5) / 16.0);

                    NumericExtraction ex = extract_reduced_numeric(pde, a, t, phi, xs, extra);
                    max_rel = std::max(max_rel, ex.defect);
                    Bindings bstate = extra;
                    bstate.set(a.tvar, t);
                    for (size_t i = 0; i < a.phi.size(); ++i) bstate.set(a.phi[i], phi[i]);
                    for (size_t i = 0; i < solved->size(); ++i) {
                        double want = eval_num((*solved)[i].second, bstate);
                        double got = ex.phi_dot[i];
                        max_rel = std::max(max_rel,
                                           std::abs(got - want) / (1.0 + std::abs(want)));
                    }
                    ++states;
                    done = true;
                } catch (const std::exception& ex) {
                    if (attempt == 9 && note.empty()) note = ex.what();
                }
            }
        }
    }

    v.samples_used = states;
    v.numeric_max_residual = max_rel;
    if (!note.empty()) v.notes = note;
    if (states == 0) {
        v.status = Status::Inconclusive;
        v.notes = "no valid states: " + note;
        return v;
    }
    if (symbolic_pass && max_rel <= cfg.tol) {
        v.status = Status::PassSymbolic;
        v.stage = "symbolic";
    } else if (max_rel <= cfg.tol) {
        v.status = Status::PassNumeric;
        v.stage = "numeric";
    } else {
        v.status = Status::Fail;
        v.stage = symbolic_pass ? "numeric" : "both";
    }
    return v;
}

Verdict verify_solution(const SolutionCheck& sc, const CheckOptions& opts,
                        const SamplingSpec& spec) {
    Verdict v;
    std::vector<Expr> jets = collect_jets(sc.pde, sc.field);
    SubstMap rules;
    for (auto& jet : jets) {
        Expr rep = sc.solution;
        for (size_t i = 0; i < jet->indeps.size(); ++i)
            for (int k = 0; k < jet->orders[i]; ++k) rep = total_derivative(rep, jet->indeps[i]);
        rules.add(jet, rep);
    }
    Expr residual_raw = substitute_raw(sc.pde, rules);
    Expr residual = normalize(residual_raw);
    v.residual = residual;
    bool symbolic = is_zero_symbolic(residual) == ZeroTest::Zero;

    Rng rng(opts.seed, opts.label + "/solution");
    std::map<std::string, int> opaque = spec.opaques;
    std::vector<Expr> atoms = collect_free_atoms(residual_raw);

    double max_rel = 0.0;
    int draws_done = 0;
    std::string note;
    for (int draw = 0; draw < sc.param_draws; ++draw) {
        bool done = false;
        for (int attempt = 0; attempt < 50 && !done; ++attempt) {
            try {
                Bindings b;
                b.set_anti_base(spec.anti_base);
                for (auto& at : atoms) {
                    std::string name = to_string(at);
                    if (name == sc.xvar || name == sc.tvar) continue;
                    auto fx = spec.fixed.find(name);
                    if (fx != spec.fixed.end()) {
                        b.set(name, fx->second);
                        continue;
                    }
                    bool derived = false;
                    for (auto& [dn, de] : spec.derived)
                        if (dn == name) derived = true;
                    if (derived) continue;
                    SampleDomain d = spec.domain_for(name);
                    b.set(name, rng.uniform(d.lo, d.hi));
                }
                apply_derived_params(b, spec, rng);
                for (auto& [name, arity] : opaque)
                    b.set_opaque(name, make_opaque_instance(arity, draw, rng));

                bool ok = true;
                for (auto& c : sc.constraints) {
                    double val = eval_num(c.expr, b);
                    if (c.kind == ConstraintKind::NonZero && std::abs(val) < 1e-3) ok = false;
                    if (c.kind == ConstraintKind::Positive && val < 1e-6) ok = false;
                }
                if (!ok) continue;

                double local_max = 0.0;
                for (int ix = 0; ix < sc.grid.nx; ++ix) {
                    for (int it = 0; it < sc.grid.nt; ++it) {
                        Bindings bb = b;
                        bb.set(sc.xvar, sc.grid.x_lo + (sc.grid.x_hi - sc.grid.x_lo) *
                                                           (ix + 0.5) / sc.grid.nx);
                        bb.set(sc.tvar, sc.grid.t_lo + (sc.grid.t_hi - sc.grid.t_lo) *
                                                           (it + 0.5) / sc.grid.nt);
                        ScaledValue sv = eval_scaled(residual_raw, bb);
                        if (!std::isfinite(sv.value))
                            throw EvalError("nonfinite residual", "solution grid");
                        local_max = std::max(local_max, sv.relative());
                    }
                }
                max_rel = std::max(max_rel, local_max);
                ++draws_done;
                done = true;
            } catch (const EvalError& ee) {
                if (note.empty()) note = ee.what();
            }
        }
    }

    v.numeric_max_residual = max_rel;
    v.samples_used = draws_done * sc.grid.nx * sc.grid.nt;
    if (!note.empty() && draws_done < sc.param_draws) v.notes = note;
    if (draws_done == 0) {
        v.status = Status::Inconclusive;
        v.notes = "no admissible parameter draw: " + note;
        return v;
    }
    if (max_rel < sc.tol) {
        v.status = symbolic ? Status::PassSymbolic : Status::PassNumeric;
        v.stage = symbolic ? "symbolic" : "numeric";
    } else {
        v.status = Status::Fail;
        v.stage = "numeric";
    }
    return v;
}

} // namespace symred
