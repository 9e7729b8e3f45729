// Command-line driver: run verification suites against the bundled (or a
// user-supplied) case catalog and emit text or JSON reports.

#include "symred/normalize.hpp"
#include "symred/parser.hpp"
#include "symred/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace symred;

namespace {

std::vector<CaseRecord> load_and_select(const RunConfig& cfg) {
    std::string dir = cfg.catalog_path.empty() ? default_catalog_dir() : cfg.catalog_path;
    std::vector<CaseRecord> all = load_catalog_dir(dir);
    return select_cases(all, cfg.filter, cfg.kind_filter);
}

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& mode) {
    cmd->add_option("--seed", cfg.seed, "deterministic run seed");
    cmd->add_option("--tol-pass", cfg.tol_pass, "numeric pass threshold (relative)");
    cmd->add_option("--tol-fail", cfg.tol_fail, "numeric fail threshold (relative)");
    cmd->add_option("--samples", cfg.samples, "sample points per numeric verdict");
    cmd->add_option("--mode", mode, "symbolic | numeric | both")
        ->check(CLI::IsMember({"symbolic", "numeric", "both"}));
    cmd->add_option("--filter", cfg.filter, "case id glob");
    cmd->add_option("--kind", cfg.kind_filter, "restrict to one case kind");
    cmd->add_option("--format", cfg.format, "text | json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--jobs", cfg.jobs, "parallel case execution degree");
    cmd->add_option("--catalog", cfg.catalog_path, "catalog directory");
}

CheckMode parse_mode(const std::string& m) {
    if (m == "symbolic") return CheckMode::Symbolic;
    if (m == "numeric") return CheckMode::Numeric;
    return CheckMode::Both;
}

int cmd_verify(RunConfig cfg) {
    std::vector<CaseRecord> cases = load_and_select(cfg);
    RunReport report = run_cases(cases, cfg);
    std::cout << (cfg.format == "json" ? report.to_json() : report.to_text());
    return report.exit_code();
}

int cmd_list(const RunConfig& cfg) {
    for (auto& r : load_and_select(cfg))
        std::cout << r.id << "  " << r.kind << "  expect=" << r.expect
                  << (r.typo_group.empty() ? "" : "  typo-group=" + r.typo_group) << "\n";
    return 0;
}

int cmd_show(const RunConfig& cfg, const std::string& id) {
    for (auto& r : load_and_select(cfg)) {
        if (r.id != id) continue;
        std::cout << r.serialize();
        return 0;
    }
    std::cerr << "no case with id " << id << "\n";
    return 2;
}

int cmd_explain(RunConfig cfg, const std::string& id) {
    std::string dir = cfg.catalog_path.empty() ? default_catalog_dir() : cfg.catalog_path;
    for (auto& r : load_catalog_dir(dir)) {
        if (r.id != id) continue;
        std::cout << "case " << r.id << " (" << r.kind << ")\n";
        if (r.kind == "symmetry-check") {
            Manifold m = r.build_manifold();
            GeneralizedField X{r.field, r.operators[0].eta};
            std::cout << "  characteristic: " << to_string(r.operators[0].eta) << "\n";
            std::cout << "  equation:       " << to_string(r.check_h) << "\n";
            Expr res = prolong_apply(X, r.check_h, m);
            std::cout << "  residual (reduced, normalized):\n    " << to_string(res) << "\n";
        } else if (r.kind == "reduction-check" && r.ansatz &&
                   r.ansatz->form == Ansatz::Form::Explicit) {
            Expr res = apply_ansatz(r.pde, *r.ansatz);
            std::cout << "  substituted residual:\n    " << to_string(res) << "\n";
            ReducedSystem rs = r.reduced;
            if (!rs.solved.empty()) {
                Manifold phim = rs.as_manifold();
                std::cout << "  residual on the stated reduced flow:\n    "
                          << to_string(phim.reduce(res)) << "\n";
            }
        } else if (r.kind == "commutator-check") {
            Manifold m = r.build_manifold();
            GeneralizedField c =
                commutator(GeneralizedField{r.field, r.operators[0].eta},
                           GeneralizedField{r.field, r.operators[1].eta},
                           r.manifold_rules.empty() ? nullptr : &m);
            std::cout << "  commutator characteristic:\n    " << to_string(c.characteristic)
                      << "\n";
            std::cout << "  stated value:\n    " << to_string(r.expect_commutator) << "\n";
        } else {
            std::cout << "  (no intermediate dump for this kind; run verify --filter " << id
                      << ")\n";
        }
        RunReport rep = run_cases({r}, cfg);
        std::cout << rep.to_text();
        return rep.exit_code();
    }
    std::cerr << "no case with id " << id << "\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"symred: verification suites for generalized-symmetry reductions"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string mode = "both";
    std::string id;

    CLI::App* verify = app.add_subcommand("verify", "run cases and report verdicts");
    add_common(verify, cfg, mode);
    CLI::App* list = app.add_subcommand("list", "list catalog cases");
    add_common(list, cfg, mode);
    CLI::App* show = app.add_subcommand("show", "print one case record");
    add_common(show, cfg, mode);
    show->add_option("id", id, "case id")->required();
    CLI::App* explain = app.add_subcommand("explain", "dump residuals for one case");
    add_common(explain, cfg, mode);
    explain->add_option("id", id, "case id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    cfg.mode = parse_mode(mode);
    try {
        if (verify->parsed()) return cmd_verify(cfg);
        if (list->parsed()) return cmd_list(cfg);
        if (show->parsed()) return cmd_show(cfg, id);
        if (explain->parsed()) return cmd_explain(cfg, id);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
