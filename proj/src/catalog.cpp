#include "symred/catalog.hpp"

#include "symred/parser.hpp"
#include "symred/normalize.hpp"
#include "symred/jet.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace symred {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

bool split_kv(const std::string& line, std::string& key, std::string& value) {
    size_t eq = line.find('=');
    if (eq == std::string::npos) return false;
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    return !key.empty();
}

double parse_double(const std::string& s, const std::string& id, const std::string& what) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw CatalogError(id, "bad number '" + s + "' in " + what);
    }
}

struct RecordBuilder {
    CaseRecord rec;
    std::string section;
    bool pde_is_flow = true;

    Expr expr(const std::string& text, const std::string& what) {
        try {
            return parse(text, rec.table);
        } catch (const std::exception& e) {
            throw CatalogError(rec.id, what + ": " + e.what());
        }
    }

    void decl_line(const std::string& line) {
        std::string key, value;
        if (split_kv(line, key, value) && key == "anti_base") {
            rec.sampling.anti_base = parse_double(value, rec.id, "anti_base");
            return;
        }
        std::vector<std::string> w = split_ws(line);
        if (w.empty()) return;
        if (w[0] == "independent") {
            for (size_t i = 1; i < w.size(); ++i) rec.table.add_independent(w[i]);
            return;
        }
        if (w[0] == "field") {
            // field u : x t
            auto colon = std::find(w.begin(), w.end(), ":");
            if (colon == w.end() || colon == w.begin() + 1 + 0)
                if (w.size() < 4 || w[2] != ":")
                    throw CatalogError(rec.id, "malformed field declaration: " + line);
            std::vector<std::string> indeps(w.begin() + 3, w.end());
            rec.table.add_field(w[1], indeps);
            return;
        }
        if (w[0] == "opaque") {
            if (w.size() != 4 || w[2] != ":")
                throw CatalogError(rec.id, "malformed opaque declaration: " + line);
            rec.table.add_opaque(w[1], (int)parse_double(w[3], rec.id, "opaque arity"));
            rec.sampling.opaques[w[1]] = (int)parse_double(w[3], rec.id, "opaque arity");
            return;
        }
        if (w[0] == "param") {
            if (w.size() >= 3 && w[2] == ":=") {
                rec.table.add_parameter(w[1]);
                std::string rhs = trim(line.substr(line.find(":=") + 2));
                try {
                    size_t used = 0;
                    double v = std::stod(rhs, &used);
                    if (used == rhs.size()) {
                        rec.sampling.fixed[w[1]] = v;
                        return;
                    }
                } catch (...) {
                }
                rec.sampling.derived.emplace_back(w[1], expr(rhs, "derived param " + w[1]));
                return;
            }
            if (w.size() < 5 || w[2] != ":")
                throw CatalogError(rec.id, "malformed param declaration: " + line);
            rec.table.add_parameter(w[1]);
            SampleDomain d;
            d.lo = parse_double(w[3], rec.id, "param " + w[1]);
            d.hi = parse_double(w[4], rec.id, "param " + w[1]);
            for (size_t i = 5; i < w.size(); ++i) {
                if (w[i] == "!") continue;
                d.exclude.push_back(parse_double(w[i], rec.id, "param exclusion"));
            }
            rec.sampling.domains[w[1]] = d;
            return;
        }
        if (w[0] == "domain") {
            if (w.size() < 5 || w[2] != ":")
                throw CatalogError(rec.id, "malformed domain declaration: " + line);
            SampleDomain d;
            d.lo = parse_double(w[3], rec.id, "domain " + w[1]);
            d.hi = parse_double(w[4], rec.id, "domain " + w[1]);
            for (size_t i = 5; i < w.size(); ++i) {
                if (w[i] == "!") continue;
                d.exclude.push_back(parse_double(w[i], rec.id, "domain exclusion"));
            }
            rec.sampling.domains[w[1]] = d;
            return;
        }
        if (w[0] == "xvar") {
            rec.xvar = w[1];
            return;
        }
        if (w[0] == "tvar") {
            rec.tvar = w[1];
            return;
        }
        if (w[0] == "depfield") {
            rec.field = w[1];
            return;
        }
        throw CatalogError(rec.id, "unknown declaration: " + line);
    }

    void case_line(const std::string& line) {
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed line: " + line);
        if (key == "id")
            rec.id = value;
        else if (key == "kind")
            rec.kind = value;
        else if (key == "title")
            rec.title = value;
        else if (key == "anchor")
            rec.anchor = value;
        else if (key == "expect")
            rec.expect = value;
        else if (key == "typo_group")
            rec.typo_group = value;
        else if (key == "note")
            rec.note = value;
        else
            throw CatalogError(rec.id, "unknown [case] key: " + key);
    }

    void manifold_line(const std::string& line) {
        std::string key, value;
        if (!split_kv(line, key, value))
            throw CatalogError(rec.id, "malformed manifold rule: " + line);
        if (key == "from_pde") {
            // solve the already-declared equation for the given jet
            if (!rec.pde) throw CatalogError(rec.id, "from_pde requires a [pde] section first");
            Expr lhs = expr(value, "manifold lhs");
            rec.manifold_rules.emplace_back(lhs, normalize(lhs - rec.pde));
            return;
        }
        Expr lhs = expr(key, "manifold lhs");
        rec.manifold_rules.emplace_back(lhs, expr(value, "manifold rhs"));
    }

    void operator_line(const std::string& line) {
        if (rec.operators.empty()) rec.operators.emplace_back();
        std::string key, value;
        if (!split_kv(line, key, value))
            throw CatalogError(rec.id, "malformed operator line: " + line);
        if (key == "name") {
            rec.operators.back().name = value;
        } else if (key == "eta") {
            rec.operators.back().eta = expr(value, "operator eta");
        } else if (key == "kdivu") {
            Expr K = expr(value, "operator kdivu");
            Expr base = K / rec.table.sym(rec.field);
            rec.operators.back().eta =
                total_derivative(total_derivative(base, rec.xvar), rec.xvar);
        } else {
            throw CatalogError(rec.id, "unknown [operator] key: " + key);
        }
    }

    void check_line(const std::string& line) {
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed check line");
        if (key == "h")
            rec.check_h = expr(value, "check h");
        else if (key == "h_from_pde")
            rec.check_h = rec.pde;
        else if (key == "expect_commutator")
            rec.expect_commutator = expr(value, "expected commutator");
        else
            throw CatalogError(rec.id, "unknown [check] key: " + key);
    }

    Expr flow_term(const std::string& kexpr) {
        // second x-derivative of K/u
        Expr base = expr(kexpr, "flow kernel") / rec.table.sym(rec.field);
        return total_derivative(total_derivative(base, rec.xvar), rec.xvar);
    }

    void pde_line(const std::string& line) {
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed pde line");
        if (key == "expr") {
            rec.pde = expr(value, "pde");
        } else if (key == "flow") {
            // evolution equation u_t = (K/u)_xx + extras
            Expr ut = rec.table.jet(rec.field, time_jet_orders());
            rec.pde = ut - flow_term(value);
            pde_is_flow = true;
        } else if (key == "static") {
            // stationary equation (K/u)_xx + extras = 0
            rec.pde = flow_term(value);
            pde_is_flow = false;
        } else if (key == "extra") {
            if (!rec.pde) throw CatalogError(rec.id, "extra before flow/static");
            Expr term = expr(value, "pde extra");
            rec.pde = pde_is_flow ? rec.pde - term : rec.pde + term;
        } else {
            throw CatalogError(rec.id, "unknown [pde] key: " + key);
        }
    }

    std::vector<int> time_jet_orders() {
        const FieldDecl* f = rec.table.field(rec.field);
        if (!f) throw CatalogError(rec.id, "field " + rec.field + " undeclared");
        std::vector<int> orders(f->indeps.size(), 0);
        for (size_t i = 0; i < f->indeps.size(); ++i)
            if (f->indeps[i] == rec.tvar) orders[i] = 1;
        return orders;
    }

    void ansatz_line(const std::string& line) {
        if (!rec.ansatz) {
            rec.ansatz = Ansatz{};
            rec.ansatz->xvar = rec.xvar;
            rec.ansatz->tvar = rec.tvar;
            rec.ansatz->field = rec.field;
        }
        std::vector<std::string> w = split_ws(line);
        if (w.size() >= 3 && w[0] == "jetrule") {
            std::string rest = trim(line.substr(line.find("jetrule") + 7));
            std::string key, value;
            if (!split_kv(rest, key, value)) throw CatalogError(rec.id, "malformed jetrule");
            rec.ansatz->jet_rules.emplace_back(expr(key, "jetrule lhs"),
                                               expr(value, "jetrule rhs"));
            return;
        }
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed ansatz line");
        if (key == "u")
            rec.ansatz->u_of = expr(value, "ansatz u");
        else if (key == "phi")
            rec.ansatz->phi = split_ws(value);
        else if (key == "negate")
            rec.ansatz->negate = (value == "true");
        else if (key == "form")
            rec.ansatz->form = value == "implicit" ? Ansatz::Form::ImplicitQuadrature
                                                   : Ansatz::Form::Explicit;
        else if (key == "quadrature")
            rec.ansatz->quadrature = expr(value, "ansatz quadrature");
        else if (key == "ux")
            rec.ansatz->ux_relation = expr(value, "ansatz ux");
        else if (key == "bracket_hi")
            rec.ansatz->bracket_hi = expr(value, "ansatz bracket");
        else
            throw CatalogError(rec.id, "unknown [ansatz] key: " + key);
    }

    void reduced_line(const std::string& line) {
        std::vector<std::string> w = split_ws(line);
        if (!w.empty() && w[0] == "solved") {
            std::string rest = trim(line.substr(line.find("solved") + 6));
            std::string key, value;
            if (!split_kv(rest, key, value)) throw CatalogError(rec.id, "malformed solved form");
            rec.reduced.solved.emplace_back(expr(key, "solved lhs"), expr(value, "solved rhs"));
            return;
        }
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed reduced line");
        if (key == "eq")
            rec.reduced.equations.push_back(expr(value, "reduced equation"));
        else if (key == "algebraic")
            rec.reduced.algebraic = (value == "true");
        else if (key == "collect")
            rec.collect_atom = expr(value, "collect atom");
        else if (key == "clear")
            rec.clear_factor = expr(value, "clear factor");
        else if (key == "tol")
            rec.reduced_tol = parse_double(value, rec.id, "reduced tol");
        else if (key == "states")
            rec.reduced_states = (int)parse_double(value, rec.id, "reduced states");
        else
            throw CatalogError(rec.id, "unknown [reduced] key: " + key);
    }

    void grid_value(const std::string& value) {
        std::vector<std::string> w = split_ws(value);
        if (w.size() != 6) throw CatalogError(rec.id, "grid needs 6 numbers");
        rec.grid.x_lo = parse_double(w[0], rec.id, "grid");
        rec.grid.x_hi = parse_double(w[1], rec.id, "grid");
        rec.grid.t_lo = parse_double(w[2], rec.id, "grid");
        rec.grid.t_hi = parse_double(w[3], rec.id, "grid");
        rec.grid.nx = (int)parse_double(w[4], rec.id, "grid");
        rec.grid.nt = (int)parse_double(w[5], rec.id, "grid");
    }

    void solution_line(const std::string& line) {
        std::vector<std::string> w = split_ws(line);
        if (!w.empty() && w[0] == "constraint") {
            // constraint nonzero = expr / constraint positive = expr
            std::string rest = trim(line.substr(line.find("constraint") + 10));
            std::string key, value;
            if (!split_kv(rest, key, value)) throw CatalogError(rec.id, "malformed constraint");
            ConstraintKind k = key == "nonzero" ? ConstraintKind::NonZero
                              : key == "positive"
                                  ? ConstraintKind::Positive
                                  : throw CatalogError(rec.id, "unknown constraint kind " + key);
            rec.constraints.push_back({expr(value, "constraint"), k});
            return;
        }
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed solution line");
        if (key == "u")
            rec.solution = expr(value, "solution");
        else if (key == "draws")
            rec.solution_draws = (int)parse_double(value, rec.id, "draws");
        else if (key == "tol")
            rec.solution_tol = parse_double(value, rec.id, "solution tol");
        else if (key == "grid")
            grid_value(value);
        else
            throw CatalogError(rec.id, "unknown [solution] key: " + key);
    }

    void invariance_line(const std::string& line) {
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed invariance line");
        if (key == "op") {
            // name ; xi_t ; xi_x ; eta
            std::vector<std::string> parts;
            std::string cur;
            for (char c : value) {
                if (c == ';') {
                    parts.push_back(trim(cur));
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            parts.push_back(trim(cur));
            if (parts.size() != 4) throw CatalogError(rec.id, "op needs name;xi_t;xi_x;eta");
            PointField pf;
            pf.name = parts[0];
            pf.xi_t = expr(parts[1], "op xi_t");
            pf.xi_x = expr(parts[2], "op xi_x");
            pf.eta = expr(parts[3], "op eta");
            rec.point_ops.push_back(std::move(pf));
        } else if (key == "solution") {
            rec.solution = expr(value, "invariance solution");
        } else if (key == "constants") {
            rec.constants = split_ws(value);
        } else if (key == "expect") {
            rec.invariance_expect = value;
        } else if (key == "grid") {
            grid_value(value);
        } else {
            throw CatalogError(rec.id, "unknown [invariance] key: " + key);
        }
    }

    void inherited_line(const std::string& line) {
        std::string key, value;
        if (!split_kv(line, key, value)) throw CatalogError(rec.id, "malformed inherited line");
        if (key == "I1")
            rec.I1 = expr(value, "I1");
        else if (key == "I2")
            rec.I2 = expr(value, "I2");
        else if (key == "f1")
            rec.expected_f1 = expr(value, "f1");
        else if (key == "f2")
            rec.expected_f2 = expr(value, "f2");
        else if (key == "m")
            rec.expected_m = expr(value, "m");
        else
            throw CatalogError(rec.id, "unknown [inherited] key: " + key);
    }

    void feed(const std::string& line) {
        if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            if (section == "operator2") {
                rec.operators.emplace_back();
                section = "operator";
            } else if (section == "operator") {
                rec.operators.emplace_back();
            }
            return;
        }
        if (section == "case")
            case_line(line);
        else if (section == "decls")
            decl_line(line);
        else if (section == "manifold")
            manifold_line(line);
        else if (section == "operator")
            operator_line(line);
        else if (section == "check")
            check_line(line);
        else if (section == "pde")
            pde_line(line);
        else if (section == "ansatz")
            ansatz_line(line);
        else if (section == "reduced")
            reduced_line(line);
        else if (section == "solution")
            solution_line(line);
        else if (section == "invariance")
            invariance_line(line);
        else if (section == "inherited")
            inherited_line(line);
        else
            throw CatalogError(rec.id, "line outside any known section: " + line);
    }

    void validate() {
        static const std::set<std::string> kinds = {"symmetry-check",   "reduction-check",
                                                    "solution-check",   "invariance-check",
                                                    "inherited-check",  "commutator-check"};
        if (rec.id.empty()) throw CatalogError("", "record without id");
        if (!kinds.count(rec.kind)) throw CatalogError(rec.id, "unknown kind '" + rec.kind + "'");
        if (rec.expect != "pass" && rec.expect != "fail" && rec.expect != "report")
            throw CatalogError(rec.id, "expect must be pass, fail or report");
        if (rec.kind == "symmetry-check") {
            if (rec.operators.empty() || !rec.operators[0].eta)
                throw CatalogError(rec.id, "symmetry-check needs an operator");
            if (!rec.check_h) throw CatalogError(rec.id, "symmetry-check needs [check] h");
            if (rec.manifold_rules.empty())
                throw CatalogError(rec.id, "symmetry-check needs manifold rules");
        }
        if (rec.kind == "commutator-check") {
            if (rec.operators.size() != 2)
                throw CatalogError(rec.id, "commutator-check needs two operators");
            if (!rec.expect_commutator)
                throw CatalogError(rec.id, "commutator-check needs expect_commutator");
        }
        if (rec.kind == "reduction-check") {
            if (!rec.pde || !rec.ansatz) throw CatalogError(rec.id, "reduction-check needs pde and ansatz");
            if (rec.reduced.equations.empty() && rec.reduced.solved.empty())
                throw CatalogError(rec.id, "reduction-check needs a reduced system");
        }
        if (rec.kind == "solution-check") {
            if (!rec.pde || !rec.solution)
                throw CatalogError(rec.id, "solution-check needs pde and solution");
        }
        if (rec.kind == "invariance-check") {
            if (rec.point_ops.empty() || !rec.solution || rec.constants.empty())
                throw CatalogError(rec.id, "invariance-check needs ops, solution, constants");
            if (rec.invariance_expect != "found" && rec.invariance_expect != "none")
                throw CatalogError(rec.id, "invariance expect must be found or none");
        }
        if (rec.kind == "inherited-check") {
            if (rec.manifold_rules.empty() || rec.operators.empty() || !rec.I1 || !rec.I2 ||
                !rec.expected_f1 || !rec.expected_f2 || !rec.expected_m)
                throw CatalogError(rec.id, "inherited-check needs manifold, operator, integrals "
                                           "and expected actions");
            if (rec.point_ops.empty())
                throw CatalogError(rec.id, "inherited-check needs the point operator [invariance] op");
        }
    }
};

} // namespace

Manifold CaseRecord::build_manifold() const {
    Manifold m;
    for (auto& [l, r] : manifold_rules) m.add_rule(l, r);
    return m;
}

std::string CaseRecord::serialize() const {
    std::string out = "[case]\n";
    for (auto& l : raw_lines) out += l + "\n";
    return out;
}

std::vector<CaseRecord> load_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("", "cannot open catalog file " + path);
    std::vector<CaseRecord> records;
    std::unique_ptr<RecordBuilder> builder;
    std::set<std::string> ids;
    std::string line;
    auto finish = [&]() {
        if (!builder) return;
        builder->validate();
        if (!ids.insert(builder->rec.id).second)
            throw CatalogError(builder->rec.id, "duplicate case id");
        records.push_back(std::move(builder->rec));
        builder.reset();
    };
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "[case]") {
            finish();
            builder = std::make_unique<RecordBuilder>();
            builder->section = "case";
            continue;
        }
        if (!builder) throw CatalogError("", "content before the first [case] in " + path);
        builder->rec.raw_lines.push_back(t);
        builder->feed(t);
    }
    finish();

    // typo-suspect variant groups need at least two members
    std::map<std::string, int> groups;
    for (auto& r : records)
        if (!r.typo_group.empty()) ++groups[r.typo_group];
    for (auto& [g, n] : groups)
        if (n < 2) throw CatalogError("", "typo group '" + g + "' has fewer than 2 members");
    return records;
}

std::vector<CaseRecord> load_catalog_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".cat") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<CaseRecord> all;
    std::set<std::string> ids;
    for (auto& f : files) {
        for (auto& r : load_catalog_file(f)) {
            if (!ids.insert(r.id).second) throw CatalogError(r.id, "duplicate case id across files");
            all.push_back(std::move(r));
        }
    }
    return all;
}

bool glob_match(const std::string& pattern, const std::string& text) {
    // iterative glob with '*' and '?'
    size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

std::vector<CaseRecord> select_cases(const std::vector<CaseRecord>& records,
                                     const std::string& id_glob, const std::string& kind) {
    std::vector<CaseRecord> out;
    for (auto& r : records) {
        if (!id_glob.empty() && !glob_match(id_glob, r.id)) continue;
        if (!kind.empty() && r.kind != kind) continue;
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(),
              [](const CaseRecord& a, const CaseRecord& b) { return a.id < b.id; });
    return out;
}

std::string default_catalog_dir() {
#ifdef SYMRED_CATALOG_DIR
    return SYMRED_CATALOG_DIR;
#else
    return "catalog";
#endif
}

} // namespace symred
