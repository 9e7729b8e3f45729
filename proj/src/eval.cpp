#include "symred/eval.hpp"

#include <cmath>

namespace symred {

void Bindings::set(const Expr& atom, double v) { values_[to_string(atom)] = v; }

const double* Bindings::find(const std::string& name) const {
    auto it = values_.find(name);
    return it == values_.end() ? nullptr : &it->second;
}

const OpaqueFn* Bindings::find_opaque(const std::string& name) const {
    auto it = opaques_.find(name);
    return it == opaques_.end() ? nullptr : &it->second;
}

namespace {

struct EvalCtx {
    const Bindings* b;
    std::map<std::string, double> locals; // integral dummies, rebound antideriv vars
};

double ev(const Expr& e, EvalCtx& ctx);

double ev_pow(const Expr& e, EvalCtx& ctx) {
    double base = ev(e->kids[0], ctx);
    const Rational& r = e->value;
    if (r.is_integer()) {
        if (base == 0.0 && r.is_negative()) throw EvalError("zero to negative power", to_string(e));
        return std::pow(base, (double)r.num());
    }
    if (base < 0.0) throw EvalError("negative base of fractional power", to_string(e));
    if (base == 0.0 && r.is_negative()) throw EvalError("zero to negative power", to_string(e));
    return std::pow(base, r.to_double());
}

double ev(const Expr& e, EvalCtx& ctx) {
    switch (e->kind) {
        case Kind::Const:
            return e->value.to_double();
        case Kind::Symbol: {
            auto it = ctx.locals.find(e->name);
            if (it != ctx.locals.end()) return it->second;
            if (const double* v = ctx.b->find(e->name)) return *v;
            throw EvalError("unbound symbol", e->name);
        }
        case Kind::Jet: {
            std::string key = to_string(e);
            auto it = ctx.locals.find(key);
            if (it != ctx.locals.end()) return it->second;
            if (const double* v = ctx.b->find(key)) return *v;
            throw EvalError("unbound jet", key);
        }
        case Kind::Add: {
            double s = 0.0;
            for (auto& k : e->kids) s += ev(k, ctx);
            return s;
        }
        case Kind::Mul: {
            double p = 1.0;
            for (auto& k : e->kids) p *= ev(k, ctx);
            return p;
        }
        case Kind::Pow:
            return ev_pow(e, ctx);
        case Kind::Exp:
            return std::exp(ev(e->kids[0], ctx));
        case Kind::Ln: {
            double a = ev(e->kids[0], ctx);
            if (a <= 0.0) throw EvalError("log of nonpositive value", to_string(e));
            return std::log(a);
        }
        case Kind::Sin:
            return std::sin(ev(e->kids[0], ctx));
        case Kind::Cos:
            return std::cos(ev(e->kids[0], ctx));
        case Kind::Sinh:
            return std::sinh(ev(e->kids[0], ctx));
        case Kind::Cosh:
            return std::cosh(ev(e->kids[0], ctx));
        case Kind::Opaque: {
            const OpaqueFn* f = ctx.b->find_opaque(e->name);
            if (!f) throw EvalError("unbound opaque function", e->name);
            std::vector<double> args;
            for (auto& k : e->kids) args.push_back(ev(k, ctx));
            return (*f)(args, e->dorders);
        }
        case Kind::Integral: {
            double lo = ev(e->kids[0], ctx);
            double hi = ev(e->kids[1], ctx);
            if (!std::isfinite(lo) || !std::isfinite(hi))
                throw EvalError("nonfinite integration bound", to_string(e));
            const Expr& f = e->kids[2];
            auto integrand = [&](double s) {
                EvalCtx inner = ctx;
                inner.locals[e->name] = s;
                return ev(f, inner);
            };
            try {
                return integrate_adaptive(integrand, lo, hi, 1e-12);
            } catch (const QuadratureError& qe) {
                throw EvalError(qe.what(), to_string(e));
            }
        }
        case Kind::Antideriv: {
            double hi;
            auto it = ctx.locals.find(e->name);
            if (it != ctx.locals.end())
                hi = it->second;
            else if (const double* v = ctx.b->find(e->name))
                hi = *v;
            else
                throw EvalError("unbound antiderivative variable", e->name);
            const Expr& f = e->kids[0];
            auto integrand = [&](double s) {
                EvalCtx inner = ctx;
                inner.locals[e->name] = s;
                return ev(f, inner);
            };
            try {
                return integrate_adaptive(integrand, ctx.b->anti_base(), hi, 1e-12);
            } catch (const QuadratureError& qe) {
                throw EvalError(qe.what(), to_string(e));
            }
        }
    }
    throw std::logic_error("unreachable");
}

// value together with the largest additive-term magnitude seen at any level
ScaledValue evs(const Expr& e, EvalCtx& ctx) {
    if (e->kind == Kind::Add) {
        double sum = 0.0, scale = 0.0;
        for (auto& k : e->kids) {
            ScaledValue t = evs(k, ctx);
            sum += t.value;
            scale = std::max({scale, std::abs(t.value), t.scale});
        }
        return {sum, scale};
    }
    if (e->kind == Kind::Mul) {
        double prod = 1.0, scale = 1.0;
        bool have_scale = false;
        for (auto& k : e->kids) {
            ScaledValue t = evs(k, ctx);
            prod *= t.value;
            if (k->kind == Kind::Add && t.scale > 0.0) {
                scale *= t.scale;
                have_scale = true;
            } else {
                scale *= std::abs(t.value);
            }
        }
        return {prod, have_scale ? scale : std::abs(prod)};
    }
    double v = ev(e, ctx);
    return {v, std::abs(v)};
}

} // namespace

double eval_num(const Expr& e, const Bindings& b) {
    EvalCtx ctx{&b, {}};
    return ev(e, ctx);
}

ScaledValue eval_scaled(const Expr& e, const Bindings& b) {
    EvalCtx ctx{&b, {}};
    return evs(e, ctx);
}

// ---- opaque instances --------------------------------------------------------

namespace {

double dpow(double c, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= c;
    return r;
}

} // namespace

int opaque_instance_count() { return 3; }

OpaqueFn make_opaque_instance(int arity, int which, Rng& rng) {
    std::vector<double> c;
    for (int i = 0; i < 8; ++i) c.push_back(rng.uniform(0.3, 1.1) * (rng.below(2) ? 1.0 : -1.0));
    // keep leading coefficients away from zero-ish cancellation
    c[0] = std::abs(c[0]) + 0.2;
    c[1] = std::abs(c[1]) + 0.2;
    which = ((which % 3) + 3) % 3;
    if (arity == 1) {
        if (which == 0) {
            // quadratic polynomial
            return [c](const std::vector<double>& a, const std::vector<int>& d) {
                int n = d.empty() ? 0 : d[0];
                double z = a[0];
                switch (n) {
                    case 0: return c[0] + c[1] * z + c[2] * z * z;
                    case 1: return c[1] + 2.0 * c[2] * z;
                    case 2: return 2.0 * c[2];
                    default: return 0.0;
                }
            };
        }
        if (which == 1) {
            // scaled exponential
            return [c](const std::vector<double>& a, const std::vector<int>& d) {
                int n = d.empty() ? 0 : d[0];
                return c[0] * dpow(c[1], n) * std::exp(c[1] * a[0]);
            };
        }
        // trigonometric
        return [c](const std::vector<double>& a, const std::vector<int>& d) {
            int n = d.empty() ? 0 : d[0];
            double base = n == 0 ? c[0] : 0.0;
            return base + c[1] * dpow(c[2], n) * std::sin(c[2] * a[0] + n * M_PI_2);
        };
    }
    // arity 2
    if (which == 0) {
        // quadratic in two variables
        return [c](const std::vector<double>& a, const std::vector<int>& d) {
            int m = d.size() > 0 ? d[0] : 0;
            int n = d.size() > 1 ? d[1] : 0;
            double y1 = a[0], y2 = a[1];
            if (m == 0 && n == 0)
                return c[0] + c[1] * y1 + c[2] * y2 + c[3] * y1 * y2 + c[4] * y1 * y1 +
                       c[5] * y2 * y2;
            if (m == 1 && n == 0) return c[1] + c[3] * y2 + 2.0 * c[4] * y1;
            if (m == 0 && n == 1) return c[2] + c[3] * y1 + 2.0 * c[5] * y2;
            if (m == 1 && n == 1) return c[3];
            if (m == 2 && n == 0) return 2.0 * c[4];
            if (m == 0 && n == 2) return 2.0 * c[5];
            return 0.0;
        };
    }
    if (which == 1) {
        return [c](const std::vector<double>& a, const std::vector<int>& d) {
            int m = d.size() > 0 ? d[0] : 0;
            int n = d.size() > 1 ? d[1] : 0;
            return c[0] * dpow(c[1], m) * dpow(c[2], n) * std::exp(c[1] * a[0] + c[2] * a[1]);
        };
    }
    // c0 + c1*sin(c2*y1) + c3*cos(c4*y2)
    return [c](const std::vector<double>& a, const std::vector<int>& d) {
        int m = d.size() > 0 ? d[0] : 0;
        int n = d.size() > 1 ? d[1] : 0;
        if (m > 0 && n > 0) return 0.0;
        double r = (m == 0 && n == 0) ? c[0] : 0.0;
        if (n == 0) r += c[1] * dpow(c[2], m) * std::sin(c[2] * a[0] + m * M_PI_2);
        if (m == 0) r += c[3] * dpow(c[4], n) * std::cos(c[4] * a[1] + n * M_PI_2);
        return r;
    };
}

} // namespace symred
