#include "symred/parser.hpp"

#include <cctype>
#include <cmath>
#include <set>

namespace symred {

namespace {

class Parser {
  public:
    Parser(const std::string& text, const SymbolTable& table) : s_(text), tab_(table) {}

    Expr run() {
        Expr e = parse_expr(0);
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    // precedence climbing: level 0 = +-, 1 = */, 2 = unary, 3 = ^
    Expr parse_expr(int level) {
        if (level == 2) {
            if (eat('-')) return -parse_expr(2);
            if (eat('+')) return parse_expr(2);
            return parse_expr(3);
        }
        if (level == 3) {
            Expr base = parse_atom();
            if (peek() == '^') {
                ++pos_;
                // right associative; exponent may itself be signed or parenthesized
                Expr e = parse_expr(2);
                return make_pow(base, e);
            }
            return base;
        }
        Expr lhs = parse_expr(level + 1);
        for (;;) {
            char c = peek();
            if (level == 0 && (c == '+' || c == '-')) {
                ++pos_;
                Expr rhs = parse_expr(1);
                lhs = (c == '+') ? lhs + rhs : lhs - rhs;
            } else if (level == 1 && (c == '*' || c == '/')) {
                ++pos_;
                Expr rhs = parse_expr(2);
                lhs = (c == '*') ? lhs * rhs : lhs / rhs;
            } else {
                return lhs;
            }
        }
    }

    Expr parse_atom() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr(0);
            expect(')');
            return e;
        }
        if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
        if (std::isalpha((unsigned char)c)) return parse_identifier();
        fail("expected expression");
    }

    Expr parse_number() {
        size_t start = pos_;
        long long ip = 0;
        bool any = false;
        while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) {
            ip = ip * 10 + (s_[pos_] - '0');
            ++pos_;
            any = true;
        }
        Rational v(ip);
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            long long num = 0, den = 1;
            while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) {
                num = num * 10 + (s_[pos_] - '0');
                den *= 10;
                ++pos_;
                any = true;
            }
            v += Rational(num, den);
        }
        if (!any) {
            pos_ = start;
            fail("malformed number");
        }
        return make_const(v);
    }

    std::string read_name() {
        skip_ws();
        size_t start = pos_;
        if (pos_ >= s_.size() || !std::isalpha((unsigned char)s_[pos_]))
            fail("expected identifier");
        while (pos_ < s_.size() && std::isalnum((unsigned char)s_[pos_])) ++pos_;
        return s_.substr(start, pos_ - start);
    }

    Expr parse_identifier() {
        size_t start = pos_;
        std::string name = read_name();

        static const std::set<std::string> funs = {"exp", "ln",   "sqrt", "sin",
                                                   "cos", "sinh", "cosh", "tanh"};
        if (funs.count(name) && peek() == '(') {
            expect('(');
            Expr a = parse_expr(0);
            expect(')');
            if (name == "exp") return make_fun(Kind::Exp, a);
            if (name == "ln") return make_fun(Kind::Ln, a);
            if (name == "sqrt") return make_pow(a, Rational(1, 2));
            if (name == "sin") return make_fun(Kind::Sin, a);
            if (name == "cos") return make_fun(Kind::Cos, a);
            if (name == "sinh") return make_fun(Kind::Sinh, a);
            if (name == "cosh") return make_fun(Kind::Cosh, a);
            // tanh desugars so hyperbolic identities reduce to one atom pair
            return make_fun(Kind::Sinh, a) / make_fun(Kind::Cosh, a);
        }
        if (name == "Int" && peek() == '(') return parse_integral();
        if (name == "Anti" && peek() == '(') return parse_antideriv();
        if (name == "D" && peek() == '(') return parse_jet_form();
        if (name == "d" && peek() == '(') return parse_partial();

        if (tab_.is_opaque(name)) {
            std::vector<Expr> args = parse_args();
            if ((int)args.size() != tab_.opaque_arity(name))
                throw ParseError("wrong arity for " + name, start);
            return make_opaque(name, std::move(args));
        }
        if (tab_.is_field(name)) {
            const FieldDecl* f = tab_.field(name);
            std::vector<int> orders(f->indeps.size(), 0);
            if (pos_ < s_.size() && s_[pos_] == '_') {
                ++pos_;
                parse_jet_suffix(*f, orders);
            }
            return make_jet(name, f->indeps, orders);
        }
        if (dummies_.count(name)) return make_symbol(name, SymKind::Dummy);
        if (tab_.is_independent(name)) return make_symbol(name, SymKind::Independent);
        if (tab_.is_parameter(name)) return make_symbol(name, SymKind::Parameter);
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    void parse_jet_suffix(const FieldDecl& f, std::vector<int>& orders) {
        size_t suffix_start = pos_;
        while (pos_ < s_.size() && std::isalnum((unsigned char)s_[pos_])) ++pos_;
        std::string suffix = s_.substr(suffix_start, pos_ - suffix_start);
        // match declared independent names greedily, longest first
        std::vector<std::string> names = f.indeps;
        std::sort(names.begin(), names.end(),
                  [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
        size_t i = 0;
        while (i < suffix.size()) {
            bool matched = false;
            for (auto& n : names) {
                if (suffix.compare(i, n.size(), n) == 0) {
                    for (size_t k = 0; k < f.indeps.size(); ++k)
                        if (f.indeps[k] == n) ++orders[k];
                    i += n.size();
                    matched = true;
                    break;
                }
            }
            if (!matched)
                throw ParseError("bad jet suffix '" + suffix + "' for field " + f.name,
                                 suffix_start);
        }
    }

    std::vector<Expr> parse_args() {
        expect('(');
        std::vector<Expr> args;
        if (peek() != ')') {
            args.push_back(parse_expr(0));
            while (eat(',')) args.push_back(parse_expr(0));
        }
        expect(')');
        return args;
    }

    Expr parse_jet_form() {
        expect('(');
        size_t p = pos_;
        std::string field = read_name();
        const FieldDecl* f = tab_.field(field);
        if (!f) throw ParseError("not a dependent field: " + field, p);
        std::vector<int> orders(f->indeps.size(), 0);
        while (eat(';')) {
            size_t q = pos_;
            std::string v = read_name();
            expect(',');
            Expr n = parse_number();
            bool found = false;
            for (size_t k = 0; k < f->indeps.size(); ++k)
                if (f->indeps[k] == v) {
                    orders[k] += (int)n->value.num();
                    found = true;
                }
            if (!found) throw ParseError(field + " does not depend on " + v, q);
        }
        expect(')');
        return make_jet(field, f->indeps, orders);
    }

    Expr parse_partial() {
        expect('(');
        size_t p = pos_;
        std::string name = read_name();
        if (!tab_.is_opaque(name)) throw ParseError("not an opaque function: " + name, p);
        int arity = tab_.opaque_arity(name);
        std::vector<int> dorders(arity, 0);
        while (eat(',')) {
            Expr n = parse_number();
            long long idx = n->value.num();
            if (!n->value.is_integer() || idx < 1 || idx > arity)
                fail("partial index out of range for " + name);
            ++dorders[idx - 1];
        }
        expect(')');
        std::vector<Expr> args = parse_args();
        if ((int)args.size() != arity) throw ParseError("wrong arity for " + name, p);
        return make_opaque(name, std::move(args), std::move(dorders));
    }

    Expr parse_integral() {
        expect('(');
        size_t p = pos_;
        std::string dummy = read_name();
        if (tab_.known(dummy)) throw ParseError("integral dummy shadows '" + dummy + "'", p);
        expect(',');
        Expr lo = parse_expr(0);
        expect(',');
        Expr hi = parse_expr(0);
        expect(',');
        dummies_.insert(dummy);
        Expr integrand = parse_expr(0);
        dummies_.erase(dummy);
        expect(')');
        return make_integral(dummy, lo, hi, integrand);
    }

    Expr parse_antideriv() {
        expect('(');
        Expr integrand = parse_expr(0);
        expect(',');
        size_t p = pos_;
        std::string var = read_name();
        if (!tab_.is_independent(var)) throw ParseError("not an independent variable: " + var, p);
        expect(')');
        return make_antideriv(integrand, var);
    }

    const std::string& s_;
    const SymbolTable& tab_;
    size_t pos_ = 0;
    std::multiset<std::string> dummies_;
};

} // namespace

Expr parse(const std::string& text, const SymbolTable& table) {
    return Parser(text, table).run();
}

} // namespace symred
