#ifndef SYMRED_EVAL_HPP
#define SYMRED_EVAL_HPP

#include "symred/expr.hpp"
#include "symred/numeric.hpp"

#include <functional>
#include <map>
#include <string>

namespace symred {

struct EvalError : std::runtime_error {
    EvalError(const std::string& msg, const std::string& subterm)
        : std::runtime_error(msg + " in " + subterm) {}
};

/// Numeric stand-in for an opaque function: value and formal partials.
using OpaqueFn =
    std::function<double(const std::vector<double>& args, const std::vector<int>& dorders)>;

/// Numeric bindings: symbols and jets by printed name, opaque functions by
/// name, plus the base point for antiderivative atoms.
class Bindings {
  public:
    void set(const std::string& name, double v) { values_[name] = v; }
    void set(const Expr& atom, double v);
    void set_opaque(const std::string& name, OpaqueFn f) { opaques_[name] = std::move(f); }
    void set_anti_base(double v) { anti_base_ = v; }

    const double* find(const std::string& name) const;
    const OpaqueFn* find_opaque(const std::string& name) const;
    double anti_base() const { return anti_base_; }

  private:
    std::map<std::string, double> values_;
    std::map<std::string, OpaqueFn> opaques_;
    double anti_base_ = 0.0;
};

/// Evaluate to double precision. Integral atoms use adaptive quadrature to
/// 1e-12; antiderivative atoms integrate from the bindings' base point.
/// Throws EvalError naming the offending subterm on unbound atoms, domain
/// errors, or quadrature failure.
double eval_num(const Expr& e, const Bindings& b);

struct ScaledValue {
    double value;
    double scale; // largest additive term magnitude encountered
    double relative() const { return std::abs(value) / (1.0 + scale); }
};

/// Evaluate together with the magnitude of the largest additive term, used
/// for scale-normalized residual tests.
ScaledValue eval_scaled(const Expr& e, const Bindings& b);

// ---- opaque function library ----------------------------------------------

/// Smooth test instantiations for opaque functions (polynomial, scaled
/// exponential, trigonometric), with analytically consistent partials.
OpaqueFn make_opaque_instance(int arity, int which, Rng& rng);
int opaque_instance_count();

} // namespace symred

#endif
