#include "symred/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symred {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_rec(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0) throw QuadratureError("adaptive quadrature did not converge");
    if (std::abs(delta) <= 15.0 * tol * (1.0 + std::abs(left + right)))
        return left + right + delta / 15.0;
    return adaptive_rec(f, a, fa, m, fm, lm, flm, left, tol * 0.5, depth - 1) +
           adaptive_rec(f, m, fm, b, fb, rm, frm, right, tol * 0.5, depth - 1);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
        throw QuadratureError("integrand not finite on the interval");
    double whole = simpson(a, fa, b, fb, fm);
    return adaptive_rec(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

double integrate_composite_simpson(const std::function<double(double)>& f, double a, double b,
                                   long long panels) {
    if (panels % 2) ++panels;
    double h = (b - a) / (double)panels;
    double sum = f(a) + f(b);
    for (long long i = 1; i < panels; ++i) sum += f(a + h * (double)i) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

double find_root(const std::function<double(double)>& f, const std::function<double(double)>& df,
                 double lo, double hi, double tol) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::runtime_error("root not bracketed");
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double fx = f(x);
        if (std::abs(fx) == 0.0) return x;
        if ((fx < 0.0) == (flo < 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        double d = df(x);
        double step = d != 0.0 ? fx / d : 0.0;
        double xn = x - step;
        if (step == 0.0 || xn <= lo || xn >= hi) xn = 0.5 * (lo + hi); // bisection fallback
        if (std::abs(xn - x) < tol * (1.0 + std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

std::vector<std::vector<double>> rk4_integrate(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& rhs,
    const std::vector<double>& y0, const std::vector<double>& times, double tol) {
    auto run = [&](int substeps) {
        std::vector<std::vector<double>> out;
        std::vector<double> y = y0;
        out.push_back(y);
        for (size_t i = 0; i + 1 < times.size(); ++i) {
            double t = times[i];
            double h = (times[i + 1] - times[i]) / (double)substeps;
            for (int k = 0; k < substeps; ++k) {
                auto k1 = rhs(t, y);
                std::vector<double> y2(y.size());
                for (size_t j = 0; j < y.size(); ++j) y2[j] = y[j] + 0.5 * h * k1[j];
                auto k2 = rhs(t + 0.5 * h, y2);
                for (size_t j = 0; j < y.size(); ++j) y2[j] = y[j] + 0.5 * h * k2[j];
                auto k3 = rhs(t + 0.5 * h, y2);
                for (size_t j = 0; j < y.size(); ++j) y2[j] = y[j] + h * k3[j];
                auto k4 = rhs(t + h, y2);
                for (size_t j = 0; j < y.size(); ++j)
                    y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                t += h;
            }
            out.push_back(y);
        }
        return out;
    };
    int substeps = 8;
    auto prev = run(substeps);
    for (int iter = 0; iter < 12; ++iter) {
        substeps *= 2;
        auto next = run(substeps);
        double diff = 0.0, scale = 1.0;
        for (size_t i = 0; i < next.size(); ++i)
            for (size_t j = 0; j < next[i].size(); ++j) {
                diff = std::max(diff, std::abs(next[i][j] - prev[i][j]));
                scale = std::max(scale, std::abs(next[i][j]));
            }
        if (diff <= tol * scale) return next;
        prev = std::move(next);
    }
    return prev;
}

std::vector<double> least_squares(const std::vector<std::vector<double>>& A,
                                  const std::vector<double>& b) {
    size_t m = A.size();
    size_t n = m ? A[0].size() : 0;
    std::vector<std::vector<double>> R = A;
    std::vector<double> rhs = b;
    // Householder QR applied in place
    for (size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (size_t i = k; i < m; ++i) norm += R[i][k] * R[i][k];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw std::runtime_error("rank-deficient least squares basis");
        double alpha = R[k][k] > 0 ? -norm : norm;
        std::vector<double> v(m, 0.0);
        for (size_t i = k; i < m; ++i) v[i] = R[i][k];
        v[k] -= alpha;
        double vnorm2 = 0.0;
        for (size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        for (size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (size_t i = k; i < m; ++i) dot += v[i] * R[i][j];
            double s = 2.0 * dot / vnorm2;
            for (size_t i = k; i < m; ++i) R[i][j] -= s * v[i];
        }
        double dot = 0.0;
        for (size_t i = k; i < m; ++i) dot += v[i] * rhs[i];
        double s = 2.0 * dot / vnorm2;
        for (size_t i = k; i < m; ++i) rhs[i] -= s * v[i];
    }
    std::vector<double> x(n, 0.0);
    for (size_t k = n; k-- > 0;) {
        double s = rhs[k];
        for (size_t j = k + 1; j < n; ++j) s -= R[k][j] * x[j];
        if (R[k][k] == 0.0) throw std::runtime_error("rank-deficient least squares basis");
        x[k] = s / R[k][k];
    }
    return x;
}

SvdResult svd_small(const std::vector<std::vector<double>>& A) {
    size_t m = A.size();
    size_t n = m ? A[0].size() : 0;
    std::vector<std::vector<double>> U = A; // columns rotated in place
    std::vector<std::vector<double>> V(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) V[i][i] = 1.0;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (size_t p = 0; p + 1 < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (size_t i = 0; i < m; ++i) {
                    app += U[i][p] * U[i][p];
                    aqq += U[i][q] * U[i][q];
                    apq += U[i][p] * U[i][q];
                }
                if (std::abs(apq) <= 1e-300) continue;
                if (std::abs(apq) < 1e-17 * std::sqrt(app * aqq)) continue;
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (size_t i = 0; i < m; ++i) {
                    double up = U[i][p], uq = U[i][q];
                    U[i][p] = c * up - s * uq;
                    U[i][q] = s * up + c * uq;
                }
                for (size_t i = 0; i < n; ++i) {
                    double vp = V[i][p], vq = V[i][q];
                    V[i][p] = c * vp - s * vq;
                    V[i][q] = s * vp + c * vq;
                }
                rotated = true;
            }
        }
        if (!rotated) break;
    }
    std::vector<std::pair<double, size_t>> sv;
    for (size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (size_t i = 0; i < m; ++i) norm += U[i][j] * U[i][j];
        sv.emplace_back(std::sqrt(norm), j);
    }
    std::sort(sv.begin(), sv.end(), [](auto& a, auto& b) { return a.first > b.first; });
    SvdResult r;
    for (auto& [s, j] : sv) {
        r.singular_values.push_back(s);
        std::vector<double> col(n);
        for (size_t i = 0; i < n; ++i) col[i] = V[i][j];
        r.v_columns.push_back(std::move(col));
    }
    return r;
}

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

Rng::Rng(uint64_t seed, const std::string& label) {
    uint64_t h = 1469598103934665603ULL;
    for (char c : label) {
        h ^= (unsigned char)c;
        h *= 1099511628211ULL;
    }
    state_ = seed ^ h;
    next_u64();
}

uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

uint64_t Rng::below(uint64_t n) { return n ? next_u64() % n : 0; }

} // namespace symred
