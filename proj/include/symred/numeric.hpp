#ifndef SYMRED_NUMERIC_HPP
#define SYMRED_NUMERIC_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace symred {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive Simpson quadrature to the given absolute/relative tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-12);

/// Fixed composite Simpson rule (used as an independent oracle in tests).
double integrate_composite_simpson(const std::function<double(double)>& f, double a, double b,
                                   long long panels);

/// Safeguarded Newton/bisection root finder on a bracketing interval.
/// `df` may return 0 to force a bisection step.
double find_root(const std::function<double(double)>& f, const std::function<double(double)>& df,
                 double lo, double hi, double tol = 1e-12);

/// Classic RK4 with global step halving until two refinements agree below
/// `tol` in the maximum norm. Returns the states at the requested times.
std::vector<std::vector<double>> rk4_integrate(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& rhs,
    const std::vector<double>& y0, const std::vector<double>& times, double tol = 1e-9);

// ---- small dense linear algebra ----------------------------------------------

/// Least squares min ||A x - b|| via Householder QR. A is row major, m >= n.
std::vector<double> least_squares(const std::vector<std::vector<double>>& A,
                                  const std::vector<double>& b);

struct SvdResult {
    std::vector<double> singular_values;        // descending
    std::vector<std::vector<double>> v_columns; // right singular vectors, matching order
};

/// One-sided Jacobi SVD: singular values and right singular vectors of the
/// (m x n, m >= 1, n small) matrix.
SvdResult svd_small(const std::vector<std::vector<double>>& A);

// ---- deterministic RNG ---------------------------------------------------------

/// Deterministic splitmix64-based stream; independent per (seed, label).
class Rng {
  public:
    Rng(uint64_t seed, const std::string& label);
    explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi].
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n);

  private:
    uint64_t state_;
};

} // namespace symred

#endif
