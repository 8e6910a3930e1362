#include "cvsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cvsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

SymmetricEigen jacobi_symmetric(const RMat& m) {
    const int n = m.rows();
    if (n != m.cols()) throw DimensionMismatch("jacobi_symmetric: square matrix required");
    RMat a = m;
    RMat v = RMat::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-15 * scale) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= 1e-18 * scale) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
    SymmetricEigen out;
    out.values.resize(static_cast<size_t>(n));
    out.vectors = RMat(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[static_cast<size_t>(j)] = a(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[static_cast<size_t>(j)]);
    }
    return out;
}

HermitianEigen jacobi_hermitian(const CMat& m) {
    const int n = m.rows();
    if (n != m.cols()) throw DimensionMismatch("jacobi_hermitian: square matrix required");
    const double scale = std::max(m.max_abs(), 1e-300);
    {
        double dev = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dev = std::max(dev, std::abs(m(i, j) - std::conj(m(j, i))));
        if (dev > 1e-12 * scale) throw NotHermitian("jacobi_hermitian: matrix is not Hermitian");
    }
    CMat a = m;
    // symmetrize away representation noise
    for (int i = 0; i < n; ++i) {
        a(i, i) = Complex(a(i, i).real(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = avg;
            a(j, i) = std::conj(avg);
        }
    }
    CMat v = CMat::identity(n);
    for (int sweep = 0; sweep < 120; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-15 * scale) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                // eigenvector of the 2x2 Hermitian block [[app,apq],[conj(apq),aqq]]
                // for the eigenvalue nearest app; cancellation-free small-angle
                // form: (1, y) with y = sgn(h) conj(apq) / (|h| + r)
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double h = 0.5 * (app - aqq);
                const double r = std::sqrt(h * h + std::norm(apq));
                const double sgn = (h >= 0) ? 1.0 : -1.0;
                const Complex y = sgn * std::conj(apq) / (std::abs(h) + r);
                const double nrm = std::sqrt(1.0 + std::norm(y));
                const Complex c = Complex(1.0 / nrm, 0.0), s = y / nrm;
                // unitary U = [[c, -conj(s)], [s, conj(c)]], columns orthonormal
                for (int k = 0; k < n; ++k) { // A <- U^dag A U : rows
                    const Complex akp = a(p, k), akq = a(q, k);
                    a(p, k) = std::conj(c) * akp + std::conj(s) * akq;
                    a(q, k) = -s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) { // columns
                    const Complex akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * c + akq * s;
                    a(k, q) = -akp * std::conj(s) + akq * std::conj(c);
                }
                for (int k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * c + vkq * s;
                    v(k, q) = -vkp * std::conj(s) + vkq * std::conj(c);
                }
            }
        }
    }
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
    HermitianEigen out;
    out.values.resize(static_cast<size_t>(n));
    out.vectors = CMat(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[static_cast<size_t>(j)] = a(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]).real();
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[static_cast<size_t>(j)]);
    }
    return out;
}

std::vector<double> hermitian_spectrum(const CMat& m) {
    return jacobi_hermitian(m).values;
}

namespace {

// Complex Hessenberg reduction by Householder reflectors (in place).
void hessenberg(CMat& h) {
    const int n = h.rows();
    for (int k = 0; k < n - 2; ++k) {
        double colnorm = 0;
        for (int i = k + 1; i < n; ++i) colnorm += std::norm(h(i, k));
        colnorm = std::sqrt(colnorm);
        if (colnorm <= 1e-300) continue;
        Complex alpha = h(k + 1, k);
        Complex phase = (std::abs(alpha) > 0) ? alpha / std::abs(alpha) : Complex(1, 0);
        Complex beta = -phase * colnorm;
        std::vector<Complex> u(static_cast<size_t>(n), Complex(0, 0));
        u[static_cast<size_t>(k + 1)] = alpha - beta;
        for (int i = k + 2; i < n; ++i) u[static_cast<size_t>(i)] = h(i, k);
        double unorm2 = 0;
        for (int i = k + 1; i < n; ++i) unorm2 += std::norm(u[static_cast<size_t>(i)]);
        if (unorm2 <= 1e-300) continue;
        // H <- (I - 2 u u^dag / |u|^2) H (I - 2 u u^dag / |u|^2)
        for (int j = 0; j < n; ++j) {
            Complex dot(0, 0);
            for (int i = k + 1; i < n; ++i) dot += std::conj(u[static_cast<size_t>(i)]) * h(i, j);
            dot *= 2.0 / unorm2;
            for (int i = k + 1; i < n; ++i) h(i, j) -= dot * u[static_cast<size_t>(i)];
        }
        for (int i = 0; i < n; ++i) {
            Complex dot(0, 0);
            for (int j = k + 1; j < n; ++j) dot += h(i, j) * u[static_cast<size_t>(j)];
            dot *= 2.0 / unorm2;
            for (int j = k + 1; j < n; ++j) h(i, j) -= dot * std::conj(u[static_cast<size_t>(j)]);
        }
    }
}

} // namespace

std::vector<Complex> eigenvalues(const RMat& m) {
    const int n = m.rows();
    if (n != m.cols()) throw DimensionMismatch("eigenvalues: square matrix required");
    if (n == 0) return {};
    if (n == 1) return {Complex(m(0, 0), 0)};
    CMat h = to_complex(m);
    hessenberg(h);
    std::vector<Complex> eig;
    eig.reserve(static_cast<size_t>(n));
    int hi = n - 1;
    int iter_budget = 80 * n;
    const double scale = std::max(h.max_abs(), 1e-300);
    while (hi >= 0) {
        if (hi == 0) {
            eig.push_back(h(0, 0));
            --hi;
            continue;
        }
        // deflation scan
        int lo = hi;
        while (lo > 0) {
            double sub = std::abs(h(lo, lo - 1));
            if (sub <= 1e-15 * (std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo)) + 1e-30 * scale)) {
                h(lo, lo - 1) = Complex(0, 0);
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig.push_back(h(hi, hi));
            --hi;
            continue;
        }
        if (--iter_budget < 0) throw NoConvergence("eigenvalues: QR iteration budget exhausted");
        // Wilkinson shift from trailing 2x2 of the active block
        const Complex a = h(hi - 1, hi - 1), b = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
        const Complex tr = a + d;
        const Complex det = a * d - b * c;
        const Complex disc = std::sqrt(tr * tr - 4.0 * det);
        Complex mu1 = 0.5 * (tr + disc), mu2 = 0.5 * (tr - disc);
        Complex mu = (std::abs(mu1 - d) < std::abs(mu2 - d)) ? mu1 : mu2;
        // explicit single-shift QR on the active block via Givens rotations
        const int nb = hi - lo + 1;
        std::vector<Complex> cs(static_cast<size_t>(nb)), sn(static_cast<size_t>(nb));
        for (int i = lo; i <= hi; ++i) h(i, i) -= mu;
        for (int k = lo; k < hi; ++k) {
            Complex x = h(k, k), y = h(k + 1, k);
            double r = std::sqrt(std::norm(x) + std::norm(y));
            Complex cc(1, 0), ss(0, 0);
            if (r > 1e-300) { cc = std::conj(x) / r; ss = std::conj(y) / r; }
            cs[static_cast<size_t>(k - lo)] = cc;
            sn[static_cast<size_t>(k - lo)] = ss;
            for (int j = k; j <= hi; ++j) {
                Complex t1 = h(k, j), t2 = h(k + 1, j);
                h(k, j) = cc * t1 + ss * t2;
                h(k + 1, j) = -std::conj(ss) * t1 + std::conj(cc) * t2;
            }
        }
        for (int k = lo; k < hi; ++k) {
            const Complex cc = cs[static_cast<size_t>(k - lo)], ss = sn[static_cast<size_t>(k - lo)];
            for (int i = lo; i <= hi; ++i) {
                Complex t1 = h(i, k), t2 = h(i, k + 1);
                h(i, k) = t1 * std::conj(cc) + t2 * std::conj(ss);
                h(i, k + 1) = -t1 * ss + t2 * cc;
            }
        }
        for (int i = lo; i <= hi; ++i) h(i, i) += mu;
    }
    // eigenvalues of a real matrix come in conjugate pairs; snap tiny imaginary parts
    for (Complex& e : eig) {
        if (std::abs(e.imag()) < 1e-12 * std::max(1.0, std::abs(e))) e = Complex(e.real(), 0.0);
    }
    return eig;
}

RMat solve_lyapunov(const RMat& a, const RMat& d) {
    const int n = a.rows();
    if (a.cols() != n || d.rows() != n || d.cols() != n)
        throw DimensionMismatch("solve_lyapunov: dimension mismatch");
    for (const Complex& e : eigenvalues(a)) {
        if (e.real() >= 0) throw UnstableDrift("solve_lyapunov: drift matrix is not Hurwitz");
    }
    // (I (x) A + A (x) I) vec(V) = -vec(D), column-major vec
    const int nn = n * n;
    std::vector<double> big(static_cast<size_t>(nn * nn), 0.0);
    auto at = [&](int r, int c) -> double& { return big[static_cast<size_t>(r * nn + c)]; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int row = j * n + i;
            for (int k = 0; k < n; ++k) {
                at(row, j * n + k) += a(i, k);  // A V term
                at(row, k * n + i) += a(j, k);  // V A^T term
            }
        }
    std::vector<double> rhs(static_cast<size_t>(nn));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) rhs[static_cast<size_t>(j * n + i)] = -d(i, j);
    std::vector<int> piv;
    lu_factor(big, nn, piv);
    lu_solve_inplace(big, nn, piv, rhs);
    RMat v(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) v(i, j) = rhs[static_cast<size_t>(j * n + i)];
    return 0.5 * (v + v.transpose());
}

namespace {

struct Panel {
    double a, b; // theta interval
};

// Adaptive Simpson on one theta panel, entrywise max-abs error control.
struct PanelWorker {
    const std::function<CMat(double)>* f;
    double scale;     // omega = scale * tan(theta)
    double tol;       // absolute tolerance for this panel
    int budget;       // interval budget
    bool exhausted = false;

    CMat eval(double theta) const {
        const double c = std::cos(theta);
        if (std::abs(c) < 1e-150) {
            // integrand must vanish at the compactified ends
            CMat probe = (*f)(scale * std::tan(std::copysign(1.5707963, theta)));
            return CMat::zero(probe.rows(), probe.cols());
        }
        const double w = scale * std::tan(theta);
        const double jac = scale / (c * c);
        CMat v = (*f)(w);
        return v * Complex(jac, 0);
    }

    CMat simpson(double a, double b, const CMat& fa, const CMat& fm, const CMat& fb) const {
        return (fa + 4.0 * fm + fb) * Complex((b - a) / 6.0, 0);
    }

    CMat run(double a, double b, const CMat& fa, const CMat& fm, const CMat& fb, const CMat& whole, int depth) {
        if (budget <= 0) { exhausted = true; return whole; }
        --budget;
        const double m = 0.5 * (a + b);
        const CMat fl = eval(0.5 * (a + m));
        const CMat fr = eval(0.5 * (m + b));
        const CMat left = simpson(a, m, fa, fl, fm);
        const CMat right = simpson(m, b, fm, fr, fb);
        const CMat sum = left + right;
        const CMat diff = sum - whole;
        if (depth > 0 && diff.max_abs() <= 15.0 * tol) {
            return sum + diff * Complex(1.0 / 15.0, 0);
        }
        if (depth > 48) { exhausted = true; return sum; }
        return run(a, m, fa, fl, fm, left, depth + 1) + run(m, b, fm, fr, fb, right, depth + 1);
    }

    CMat integrate(double a, double b) {
        const CMat fa = eval(a);
        const CMat fm = eval(0.5 * (a + b));
        const CMat fb = eval(b);
        return run(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 0);
    }
};

} // namespace

CMat integrate_matrix(const std::function<CMat(double)>& f, const QuadratureSpec& spec) {
    if (spec.omega_max <= 0) throw DomainError("integrate_matrix: omega_max must be positive");
    const double scale = spec.omega_max / 10.0;
    auto to_theta = [&](double w) { return std::atan(w / scale); };

    // Panel edges: compactified endpoints, mapped breakpoints, and a refined
    // neighborhood around each breakpoint when a feature width is known.
    std::vector<double> edges{-kPi / 2, kPi / 2, to_theta(-spec.omega_max), to_theta(spec.omega_max), 0.0};
    for (double bp : spec.breakpoints) {
        edges.push_back(to_theta(bp));
        if (spec.feature_width > 0) {
            for (double fac : {1.0, 4.0, 16.0, 64.0}) {
                edges.push_back(to_theta(bp - fac * spec.feature_width));
                edges.push_back(to_theta(bp + fac * spec.feature_width));
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-12; }),
                edges.end());
    // split long stretches so adaptivity starts from a sane pitch
    std::vector<double> panels_edges;
    const double max_pitch = kPi / 64.0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        double a = edges[i], b = edges[i + 1];
        panels_edges.push_back(a);
        int parts = static_cast<int>(std::ceil((b - a) / max_pitch));
        for (int k = 1; k < parts; ++k) panels_edges.push_back(a + (b - a) * k / parts);
    }
    panels_edges.push_back(edges.back());

    const size_t np = panels_edges.size() - 1;
    // coarse pass to find the magnitude scale for the relative tolerance
    CMat probe = f(0.0);
    const int rows = probe.rows(), cols = probe.cols();
    double coarse = 0;
    {
        PanelWorker w{&f, scale, 1.0, 0};
        CMat acc = CMat::zero(rows, cols);
        for (size_t i = 0; i < np; ++i) {
            double a = panels_edges[i], b = panels_edges[i + 1];
            acc += w.simpson(a, b, w.eval(a), w.eval(0.5 * (a + b)), w.eval(b));
        }
        coarse = acc.max_abs();
    }
    const double tol_total = std::max(spec.abs_tol, spec.rel_tol * coarse);

    std::vector<CMat> results(np, CMat::zero(rows, cols));
    std::vector<char> bad(np, 0);
    const int budget_per_panel = static_cast<int>(std::max<size_t>(64, static_cast<size_t>(spec.max_subdiv) / np));

    auto run_panel = [&](size_t i) {
        PanelWorker w{&f, scale, tol_total * (panels_edges[i + 1] - panels_edges[i]) / kPi, budget_per_panel};
        results[i] = w.integrate(panels_edges[i], panels_edges[i + 1]);
        bad[i] = w.exhausted ? 1 : 0;
    };

#ifdef _OPENMP
    if (spec.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(np); ++i) run_panel(static_cast<size_t>(i));
    } else {
        for (size_t i = 0; i < np; ++i) run_panel(i);
    }
#else
    for (size_t i = 0; i < np; ++i) run_panel(i);
#endif

    CMat total = CMat::zero(rows, cols);
    bool exhausted = false;
    for (size_t i = 0; i < np; ++i) { // fixed order: bitwise deterministic
        total += results[i];
        exhausted = exhausted || bad[i];
    }
    if (exhausted) throw ToleranceNotMet("integrate_matrix: subdivision budget exhausted");
    return total;
}

RMat integrate_matrix_real(const std::function<CMat(double)>& f, const QuadratureSpec& spec) {
    CMat v = integrate_matrix(f, spec);
    return real_part(v);
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double xtol) {
    double fa = f(lo), fb = f(hi);
    if (fa == 0) return lo;
    if (fb == 0) return hi;
    if (fa * fb > 0) throw NoBracket("find_root: no sign change over bracket");
    double a = lo, b = hi, c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < 300; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    throw NoConvergence("find_root: iteration cap reached");
}

std::pair<double, double> grow_bracket(const std::function<double(double)>& f, double seed,
                                       double growth, int max_steps) {
    if (seed == 0) throw DomainError("grow_bracket: seed must be nonzero");
    double x0 = seed;
    double f0 = f(x0);
    if (f0 == 0) return {x0, x0};
    double x1 = x0;
    for (int i = 0; i < max_steps; ++i) {
        x1 *= growth;
        const double f1 = f(x1);
        if (f0 * f1 <= 0) return {std::min(x0, x1), std::max(x0, x1)};
        x0 = x1;
        f0 = f1;
    }
    throw NoBracket("grow_bracket: no sign change found");
}

} // namespace cvsim
