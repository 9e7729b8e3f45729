#include "symred/runner.hpp"

#include "symred/normalize.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>
#include <thread>

namespace symred {

namespace {

CheckOptions check_options(const CaseRecord& rec, const RunConfig& cfg) {
    CheckOptions o;
    o.seed = cfg.seed;
    o.samples = cfg.samples;
    o.tol_pass = cfg.tol_pass;
    o.tol_fail = cfg.tol_fail;
    o.mode = cfg.mode;
    o.label = rec.id;
    return o;
}

void fill_from_verdict(CaseResult& out, const Verdict& v, const std::string& expect) {
    out.status = status_name(v.status);
    out.stage = v.stage;
    out.max_residual = v.numeric_max_residual;
    out.samples = v.samples_used;
    out.notes = v.notes;
    if (expect == "report")
        out.ok = true;
    else if (expect == "fail")
        out.ok = v.status == Status::Fail;
    else
        out.ok = v.passed();
}

CaseResult execute(const CaseRecord& rec, const RunConfig& cfg) {
    CaseResult out;
    out.id = rec.id;
    out.kind = rec.kind;
    out.expect = rec.expect;
    CheckOptions opts = check_options(rec, cfg);

    if (rec.kind == "symmetry-check") {
        Manifold m = rec.build_manifold();
        GeneralizedField X{rec.field, rec.operators[0].eta};
        Verdict v = check_lbs(m, X, rec.check_h, opts, rec.sampling);
        fill_from_verdict(out, v, rec.expect);
        return out;
    }
    if (rec.kind == "commutator-check") {
        Manifold m = rec.build_manifold();
        GeneralizedField X1{rec.field, rec.operators[0].eta};
        GeneralizedField X2{rec.field, rec.operators[1].eta};
        GeneralizedField c = commutator(X1, X2, rec.manifold_rules.empty() ? nullptr : &m);
        Verdict v = residual_verdict(c.characteristic - rec.expect_commutator, opts, rec.sampling);
        fill_from_verdict(out, v, rec.expect);
        return out;
    }
    if (rec.kind == "reduction-check") {
        ReducedCheckConfig rcfg;
        rcfg.opts = opts;
        rcfg.spec = rec.sampling;
        rcfg.collect_atom = rec.collect_atom;
        rcfg.clear_factor = rec.clear_factor;
        rcfg.tol = rec.reduced_tol;
        rcfg.state_samples = rec.reduced_states;
        Verdict v = verify_reduced_system(rec.pde, *rec.ansatz, rec.reduced, rcfg);
        fill_from_verdict(out, v, rec.expect);
        return out;
    }
    if (rec.kind == "solution-check") {
        SolutionCheck sc;
        sc.pde = rec.pde;
        sc.solution = rec.solution;
        sc.field = rec.field;
        sc.xvar = rec.xvar;
        sc.tvar = rec.tvar;
        sc.grid = rec.grid;
        sc.param_draws = rec.solution_draws;
        sc.tol = rec.solution_tol;
        sc.constraints = rec.constraints;
        Verdict v = verify_solution(sc, opts, rec.sampling);
        fill_from_verdict(out, v, rec.expect);
        return out;
    }
    if (rec.kind == "invariance-check") {
        SolutionWithConstants s;
        s.f = rec.solution;
        s.constants = rec.constants;
        s.field = rec.field;
        s.xvar = rec.xvar;
        s.tvar = rec.tvar;
        ComboOptions copts;
        copts.seed = cfg.seed;
        copts.label = rec.id;
        copts.grid = rec.grid;
        ComboResult r = find_invariant_combo(rec.point_ops, s, copts, rec.sampling);
        out.max_residual = r.verify_residual;
        out.stage = "numeric";
        switch (r.outcome) {
            case ComboResult::Outcome::Found: out.status = "FOUND"; break;
            case ComboResult::Outcome::None: out.status = "NONE"; break;
            case ComboResult::Outcome::Inconclusive: out.status = "INCONCLUSIVE"; break;
        }
        {
            std::ostringstream os;
            os << "sigma_ratio=" << r.sigma_ratio;
            out.notes = os.str();
        }
        if (rec.expect == "report")
            out.ok = true;
        else
            out.ok = (rec.invariance_expect == "found" &&
                      r.outcome == ComboResult::Outcome::Found) ||
                     (rec.invariance_expect == "none" && r.outcome == ComboResult::Outcome::None);
        return out;
    }
    if (rec.kind == "inherited-check") {
        Manifold m = rec.build_manifold();
        InheritedCheck chk;
        chk.Q = rec.point_ops[0];
        chk.I1 = rec.I1;
        chk.I2 = rec.I2;
        chk.manifold = &m;
        chk.expected_f1 = rec.expected_f1;
        chk.expected_f2 = rec.expected_f2;
        chk.expected_m = rec.expected_m;
        chk.field = rec.field;
        chk.xvar = rec.xvar;
        chk.tvar = rec.tvar;
        Verdict v = check_inherited(chk);
        fill_from_verdict(out, v, rec.expect);
        return out;
    }
    out.status = "ERROR";
    out.notes = "unknown kind " + rec.kind;
    out.engine_error = true;
    return out;
}

} // namespace

CaseResult run_case(const CaseRecord& rec, const RunConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    CaseResult out;
    try {
        out = execute(rec, cfg);
    } catch (const std::exception& e) {
        out.id = rec.id;
        out.kind = rec.kind;
        out.expect = rec.expect;
        if (rec.expect == "report") {
            // malformed-by-design records report the failure instead of erroring
            out.status = "INCONCLUSIVE";
            out.notes = e.what();
            out.ok = true;
        } else {
            out.status = "ERROR";
            out.notes = e.what();
            out.engine_error = true;
            out.ok = false;
        }
    }
    out.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

RunReport run_cases(const std::vector<CaseRecord>& records, const RunConfig& cfg) {
    RunReport report;
    report.seed = cfg.seed;
    report.results.resize(records.size());
    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < records.size(); ++i)
            report.results[i] = run_case(records[i], cfg);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= records.size()) return;
                report.results[i] = run_case(records[i], cfg);
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return report;
}

int RunReport::exit_code() const {
    bool mismatch = false;
    for (auto& r : results) {
        if (r.engine_error) return 2;
        if (!r.ok) mismatch = true;
    }
    return mismatch ? 1 : 0;
}

std::string RunReport::to_text() const {
    std::ostringstream os;
    size_t idw = 4;
    for (auto& r : results) idw = std::max(idw, r.id.size());
    os << "  " << std::string(idw - 2, ' ') << "id  kind              status         expect  ok"
       << "  max_residual  note\n";
    int okc = 0;
    for (auto& r : results) {
        os << "  " << std::string(idw - r.id.size(), ' ') << r.id << "  ";
        std::string kind = r.kind;
        kind.resize(16, ' ');
        std::string status = r.status;
        status.resize(13, ' ');
        std::string expect = r.expect;
        expect.resize(6, ' ');
        os << kind << "  " << status << "  " << expect << "  " << (r.ok ? "yes" : "NO ") << "  ";
        std::ostringstream num;
        num.precision(3);
        num << std::scientific << r.max_residual;
        os << num.str() << "  " << r.notes << "\n";
        if (r.ok) ++okc;
    }
    os << okc << "/" << results.size() << " cases matched their expectations\n";
    return os.str();
}

std::string RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    {
        std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        j["timestamp"] = buf;
    }
    j["cases"] = nlohmann::ordered_json::array();
    int matched = 0, errors = 0;
    for (auto& r : results) {
        nlohmann::ordered_json c;
        c["id"] = r.id;
        c["kind"] = r.kind;
        c["status"] = r.status;
        c["stage"] = r.stage;
        c["max_residual"] = r.max_residual;
        c["samples"] = r.samples;
        c["seconds"] = r.seconds;
        c["notes"] = r.notes;
        c["expect"] = r.expect;
        c["ok"] = r.ok;
        j["cases"].push_back(c);
        if (r.ok) ++matched;
        if (r.engine_error) ++errors;
    }
    j["summary"] = {{"total", results.size()}, {"matched", matched}, {"errors", errors}};
    return j.dump(2) + "\n";
}

} // namespace symred
