#include "cvsim/gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace cvsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPosTol = 1e-10; // tolerance for all >= 0 tests on spectra

RMat symmetric_power(const RMat& m, double p) {
    SymmetricEigen e = jacobi_symmetric(m);
    const int n = m.rows();
    RMat r(n, n);
    for (int k = 0; k < n; ++k) {
        const double lam = e.values[static_cast<size_t>(k)];
        if (lam <= 0) throw NotPositiveDefinite("matrix power: nonpositive eigenvalue");
        const double f = std::pow(lam, p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(i, j) += f * e.vectors(i, k) * e.vectors(j, k);
    }
    return r;
}

} // namespace

GaussianState GaussianState::vacuum(int n_modes, Convention c) {
    GaussianState s;
    s.modes = n_modes;
    s.d.assign(static_cast<size_t>(2 * n_modes), 0.0);
    s.v = RMat::identity(2 * n_modes);
    if (c == Convention::VacuumHalf) s.v *= 0.5;
    s.conv = c;
    return s;
}

GaussianState to_convention(const GaussianState& s, Convention c) {
    if (s.conv == c) return s;
    GaussianState out = s;
    out.conv = c;
    const double f = (c == Convention::VacuumOne) ? 2.0 : 0.5;
    out.v = f * s.v;
    const double fd = std::sqrt(f);
    for (double& x : out.d) x *= fd;
    return out;
}

RMat symplectic_form(int n_modes) {
    RMat om(2 * n_modes, 2 * n_modes);
    for (int k = 0; k < n_modes; ++k) {
        om(2 * k, 2 * k + 1) = 1.0;
        om(2 * k + 1, 2 * k) = -1.0;
    }
    return om;
}

RMat pt_mask(int n_modes, const std::vector<int>& transposed_modes) {
    RMat lam = RMat::identity(2 * n_modes);
    for (int m : transposed_modes) {
        if (m < 0 || m >= n_modes) throw DimensionMismatch("pt_mask: mode index out of range");
        lam(2 * m + 1, 2 * m + 1) = -1.0;
    }
    return lam;
}

PhysicalityReport is_physical(const GaussianState& s) {
    const GaussianState one = to_convention(s, Convention::VacuumOne);
    if (one.v.rows() != 2 * s.modes) throw DimensionMismatch("is_physical: CM size vs mode count");
    const RMat om = symplectic_form(s.modes);
    CMat m = to_complex(one.v);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) += Complex(0.0, om(i, j));
    const std::vector<double> eig = hermitian_spectrum(m);
    return {eig.front() >= -kPosTol, eig.front()};
}

std::vector<double> symplectic_spectrum(const GaussianState& s) {
    const int n2 = s.v.rows();
    SymmetricEigen ev = jacobi_symmetric(s.v);
    if (ev.values.front() <= 0) throw NotPositiveDefinite("symplectic_spectrum: CM not positive definite");
    // |eig(i Omega V)| from the Hermitian similarity V^{1/2} (i Omega) V^{1/2}
    const RMat vh = symmetric_power(s.v, 0.5);
    const RMat k = vh * symplectic_form(s.modes) * vh;
    CMat ik(n2, n2);
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) ik(i, j) = Complex(0.0, k(i, j));
    std::vector<double> eig = hermitian_spectrum(ik); // +/- s_k pairs
    std::vector<double> out;
    for (double e : eig)
        if (e > 0) out.push_back(e);
    std::sort(out.begin(), out.end());
    if (static_cast<int>(out.size()) != s.modes)
        throw NoConvergence("symplectic_spectrum: +/- pairing failed");
    return out;
}

WilliamsonResult williamson_transform(const RMat& v) {
    const int n2 = v.rows();
    if (n2 % 2 != 0 || v.cols() != n2) throw DimensionMismatch("williamson_transform: even square matrix required");
    const int n = n2 / 2;
    SymmetricEigen ev = jacobi_symmetric(v);
    if (ev.values.front() <= 0) throw NotPositiveDefinite("williamson_transform: matrix not positive definite");
    const RMat vih = symmetric_power(v, -0.5);
    const RMat om = symplectic_form(n);
    const RMat w = vih * om * vih; // antisymmetric, eig +/- i/s_k
    // W^2 is symmetric negative semidefinite with doubly degenerate -1/s_k^2
    const RMat w2 = w * w;
    SymmetricEigen e2 = jacobi_symmetric(w2);
    // pair up eigenvectors: mu_k = 1/s_k from eigenvalue -mu^2
    std::vector<double> mus(static_cast<size_t>(n2));
    for (int i = 0; i < n2; ++i) mus[static_cast<size_t>(i)] = std::sqrt(std::max(0.0, -e2.values[static_cast<size_t>(i)]));
    // group by mu (ascending s = descending mu): jacobi returns w2 eigenvalues ascending,
    // i.e. -mu^2 ascending = mu descending = s ascending.
    WilliamsonResult res;
    res.s = RMat(n2, n2);
    res.values.resize(static_cast<size_t>(n));
    std::vector<int> used(static_cast<size_t>(n2), 0);
    int block = 0;
    const double mu_scale = std::max(mus.front(), mus.back());
    for (int i = 0; i < n2 && block < n; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        const double mu = mus[static_cast<size_t>(i)];
        // collect the degenerate group
        std::vector<int> group;
        for (int j = i; j < n2; ++j) {
            if (!used[static_cast<size_t>(j)] && std::abs(mus[static_cast<size_t>(j)] - mu) <= 1e-8 * mu_scale)
                group.push_back(j);
        }
        if (group.size() % 2 != 0) {
            // tolerance split a pair; widen once
            for (int j = i; j < n2; ++j) {
                if (!used[static_cast<size_t>(j)] && std::abs(mus[static_cast<size_t>(j)] - mu) <= 1e-5 * mu_scale &&
                    std::find(group.begin(), group.end(), j) == group.end())
                    group.push_back(j);
            }
        }
        if (group.size() > 2) res.degenerate = true;
        // orthonormal basis of the invariant subspace
        const int g = static_cast<int>(group.size());
        RMat basis(n2, g);
        for (int c = 0; c < g; ++c)
            for (int r = 0; r < n2; ++r) basis(r, c) = e2.vectors(r, group[static_cast<size_t>(c)]);
        // pairwise canonicalization: u, then w u / mu
        std::vector<std::vector<double>> taken;
        auto project_out = [&](std::vector<double>& x) {
            for (const auto& t : taken) {
                double dot = 0;
                for (int r = 0; r < n2; ++r) dot += t[static_cast<size_t>(r)] * x[static_cast<size_t>(r)];
                for (int r = 0; r < n2; ++r) x[static_cast<size_t>(r)] -= dot * t[static_cast<size_t>(r)];
            }
        };
        for (int pair = 0; pair < g / 2; ++pair) {
            // pick a unit vector in the subspace orthogonal to everything taken
            std::vector<double> u(static_cast<size_t>(n2), 0.0);
            for (int c = 0; c < g; ++c) {
                std::vector<double> cand(static_cast<size_t>(n2));
                for (int r = 0; r < n2; ++r) cand[static_cast<size_t>(r)] = basis(r, c);
                project_out(cand);
                double nrm = 0;
                for (double x : cand) nrm += x * x;
                if (nrm > 1e-16) {
                    for (int r = 0; r < n2; ++r) u[static_cast<size_t>(r)] = cand[static_cast<size_t>(r)] / std::sqrt(nrm);
                    break;
                }
            }
            std::vector<double> wu(static_cast<size_t>(n2), 0.0);
            for (int r = 0; r < n2; ++r) {
                double acc = 0;
                for (int c2 = 0; c2 < n2; ++c2) acc += w(r, c2) * u[static_cast<size_t>(c2)];
                wu[static_cast<size_t>(r)] = acc / mu;
            }
            // rows of P for this block: (w u / mu, u) gives the [[0,mu],[-mu,0]] pattern
            const int br = 2 * block;
            for (int r = 0; r < n2; ++r) {
                res.s(br, r) = wu[static_cast<size_t>(r)];
                res.s(br + 1, r) = u[static_cast<size_t>(r)];
            }
            res.values[static_cast<size_t>(block)] = 1.0 / mu;
            taken.push_back(u);
            taken.push_back(wu);
            ++block;
        }
        for (int j : group) used[static_cast<size_t>(j)] = 1;
    }
    // order the blocks by ascending symplectic eigenvalue
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return res.values[static_cast<size_t>(i)] < res.values[static_cast<size_t>(j)];
    });
    RMat p(n2, n2);
    std::vector<double> vals(static_cast<size_t>(n));
    for (int b = 0; b < n; ++b) {
        vals[static_cast<size_t>(b)] = res.values[static_cast<size_t>(order[static_cast<size_t>(b)])];
        for (int r = 0; r < n2; ++r) {
            p(2 * b, r) = res.s(2 * order[static_cast<size_t>(b)], r);
            p(2 * b + 1, r) = res.s(2 * order[static_cast<size_t>(b)] + 1, r);
        }
    }
    res.values = vals;
    // S = D^{1/2} P V^{-1/2}
    RMat dh(n2, n2);
    for (int b = 0; b < n; ++b) {
        dh(2 * b, 2 * b) = std::sqrt(res.values[static_cast<size_t>(b)]);
        dh(2 * b + 1, 2 * b + 1) = std::sqrt(res.values[static_cast<size_t>(b)]);
    }
    res.s = dh * p * vih;
    return res;
}

void validate_tgcp(const TgcpChannel& ch, double tol) {
    const int n2 = ch.s.rows();
    if (ch.s.cols() != n2 || ch.g.rows() != n2 || ch.g.cols() != n2)
        throw DimensionMismatch("validate_tgcp: S and G must be square and equal-sized");
    const RMat om = symplectic_form(n2 / 2);
    const RMat somst = ch.s * om * ch.s.transpose();
    CMat test = to_complex(ch.g);
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) test(i, j) += Complex(0.0, om(i, j) - somst(i, j));
    const std::vector<double> eig = hermitian_spectrum(test);
    if (eig.front() < -tol) throw InvalidChannel("validate_tgcp: complete positivity constraint violated");
}

GaussianState apply_tgcp(const GaussianState& s, const TgcpChannel& ch) {
    if (ch.s.cols() != s.v.rows()) throw DimensionMismatch("apply_tgcp: dimension mismatch");
    validate_tgcp(ch);
    GaussianState out = s;
    out.v = ch.s * s.v * ch.s.transpose() + ch.g;
    for (int i = 0; i < ch.s.rows(); ++i) {
        double acc = 0;
        for (int j = 0; j < ch.s.cols(); ++j) acc += ch.s(i, j) * s.d[static_cast<size_t>(j)];
        out.d[static_cast<size_t>(i)] = acc;
    }
    return out;
}

GaussianState apply_gcp(const GaussianState& s, const GcpChannel& ch) {
    const int in2 = s.v.rows();
    const int out2 = ch.gamma1.rows();
    if (ch.gamma2.rows() != in2 || ch.gamma12.rows() != out2 || ch.gamma12.cols() != in2)
        throw DimensionMismatch("apply_gcp: block dimensions inconsistent with input state");
    RMat lam = RMat::identity(in2);
    for (int k = 1; k < in2; k += 2) lam(k, k) = -1.0;
    const RMat core = lam * ch.gamma2 * lam + s.v;
    RMat core_inv;
    try {
        core_inv = inverse(core);
    } catch (const SingularSystem&) {
        throw SingularResolvent("apply_gcp: Lambda Gamma2 Lambda + V is singular");
    }
    GaussianState out;
    out.modes = out2 / 2;
    out.conv = s.conv;
    out.d.assign(static_cast<size_t>(out2), 0.0);
    out.v = ch.gamma1 - ch.gamma12 * lam * core_inv * lam * ch.gamma12.transpose();
    return out;
}

TwoModeBlocks two_mode_blocks(const RMat& v) {
    if (v.rows() != 4 || v.cols() != 4) throw DimensionMismatch("two_mode_blocks: 4x4 CM required");
    return {v.block(0, 0, 2, 2), v.block(2, 2, 2, 2), v.block(0, 2, 2, 2)};
}

double nu_min_pt(const GaussianState& s) {
    if (s.modes != 2) throw DimensionMismatch("nu_min_pt: two-mode state required");
    const GaussianState one = to_convention(s, Convention::VacuumOne);
    const TwoModeBlocks b = two_mode_blocks(one.v);
    const double sigma = determinant(b.a) + determinant(b.b) - 2.0 * determinant(b.c);
    const double detv = determinant(one.v);
    const double disc = sigma * sigma - 4.0 * detv;
    if (disc < -1e-9 * std::max(1.0, sigma * sigma))
        throw NegativeDiscriminant("nu_min_pt: discriminant negative (unphysical input)");
    // (sigma - sqrt(disc))/2 written without cancellation for large sigma
    const double arg = 2.0 * detv / (sigma + std::sqrt(std::max(disc, 0.0)));
    if (arg < 0) throw NegativeDiscriminant("nu_min_pt: negative symplectic eigenvalue squared");
    return std::sqrt(arg);
}

LogNegativityResult log_negativity(const GaussianState& s) {
    const double nu = nu_min_pt(s);
    LogNegativityResult r;
    r.nu = nu;
    r.e_n = std::max(0.0, -std::log(nu));
    if (nu < 1.0) {
        // the trace-norm argument requires that only one PT symplectic
        // eigenvalue drops below one; verify before reporting N
        const GaussianState one = to_convention(s, Convention::VacuumOne);
        const RMat lam = pt_mask(2, {1});
        GaussianState pt = one;
        pt.v = lam * one.v * lam;
        const std::vector<double> sp = symplectic_spectrum(pt);
        if (sp.size() == 2 && sp[1] < 1.0 - kPosTol)
            throw Unphysical("log_negativity: both PT symplectic eigenvalues below one");
        r.negativity = 0.5 * (1.0 / nu - 1.0);
    } else {
        r.negativity = 0.0;
    }
    return r;
}

std::vector<double> default_duan_grid(std::optional<double> lambda) {
    std::vector<double> grid;
    const int n = 61;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        grid.push_back(std::pow(10.0, -1.0 + 2.0 * t)); // log spaced in [0.1, 10]
    }
    if (lambda && *lambda != 0.0) grid.push_back(std::abs(*lambda));
    return grid;
}

SeparabilityReport separability_report(const GaussianState& s, const std::vector<double>& a_grid) {
    if (s.modes != 2) throw DimensionMismatch("separability_report: two-mode state required");
    const GaussianState one = to_convention(s, Convention::VacuumOne);
    SeparabilityReport rep{};
    {
        const RMat lam = pt_mask(2, {1});
        const RMat ptv = lam * one.v * lam;
        const RMat om = symplectic_form(2);
        CMat test = to_complex(ptv);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) test(i, j) += Complex(0.0, om(i, j));
        rep.simon_min_eig = hermitian_spectrum(test).front();
        rep.simon_entangled = rep.simon_min_eig < -kPosTol;
    }
    // Duan/Mancini variances live in the vacuum-variance-1/2 normalization
    const RMat vh = 0.5 * one.v;
    rep.duan_violation = -1e300;
    rep.mancini_violation = -1e300;
    for (double a : a_grid) {
        if (a == 0.0) continue;
        const double a2 = a * a;
        const double sgn = std::abs(a) / a;
        const double lx = a2 * vh(0, 0) + vh(2, 2) / a2 + 2.0 * sgn * vh(0, 2);
        const double mp = a2 * vh(1, 1) + vh(3, 3) / a2 - 2.0 * sgn * vh(1, 3);
        const double bound = a2 + 1.0 / a2;
        const double dv = bound - (lx + mp);
        if (dv > rep.duan_violation) {
            rep.duan_violation = dv;
            rep.duan_best_a = a;
        }
        const double mv = 0.25 * bound * bound - lx * mp;
        if (mv > rep.mancini_violation) {
            rep.mancini_violation = mv;
            rep.mancini_best_a = a;
        }
    }
    return rep;
}

double eof_symmetric(const GaussianState& s) {
    const GaussianState one = to_convention(s, Convention::VacuumOne);
    const TwoModeBlocks b = two_mode_blocks(one.v);
    const double da = determinant(b.a), db = determinant(b.b);
    if (std::abs(da - db) > 1e-8 * std::max({1.0, std::abs(da), std::abs(db)}))
        throw NotSymmetric("eof_symmetric: det A != det B");
    const double en = log_negativity(one).e_n;
    if (en <= 0) return 0.0;
    const double r = en / 2.0;
    const double th = std::tanh(r);
    const double ch = std::cosh(r);
    double ef = 0.0;
    double cn2 = 1.0 / (ch * ch); // tanh^{2n} r / cosh^2 r at n = 0
    for (int n = 0; n < 100000; ++n) {
        if (cn2 < 1e-300) break;
        ef -= cn2 * std::log(cn2);
        const double tail = cn2 * th * th / (1.0 - th * th); // geometric remainder bound
        if (tail * (std::abs(std::log(cn2)) + 10.0) < 1e-12) break;
        cn2 *= th * th;
    }
    return ef;
}

Complex eval_characteristic(const GaussianState& s, const std::vector<double>& xi) {
    const GaussianState one = to_convention(s, Convention::VacuumOne);
    const int n2 = one.v.rows();
    if (static_cast<int>(xi.size()) != n2) throw DimensionMismatch("eval_characteristic: point size");
    const RMat om = symplectic_form(s.modes);
    std::vector<double> oxi(static_cast<size_t>(n2), 0.0);
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) oxi[static_cast<size_t>(i)] += om(i, j) * xi[static_cast<size_t>(j)];
    double quad = 0, lin = 0;
    for (int i = 0; i < n2; ++i) {
        lin += one.d[static_cast<size_t>(i)] * oxi[static_cast<size_t>(i)];
        for (int j = 0; j < n2; ++j) quad += oxi[static_cast<size_t>(i)] * one.v(i, j) * oxi[static_cast<size_t>(j)];
    }
    return std::exp(Complex(-0.25 * quad, lin));
}

double eval_wigner(const GaussianState& s, const std::vector<double>& xi) {
    const GaussianState one = to_convention(s, Convention::VacuumOne);
    const int n2 = one.v.rows();
    if (static_cast<int>(xi.size()) != n2) throw DimensionMismatch("eval_wigner: point size");
    const double det = determinant(one.v);
    if (det <= 0) throw SingularCM("eval_wigner: CM not invertible");
    RMat vinv;
    try {
        vinv = inverse(one.v);
    } catch (const SingularSystem&) {
        throw SingularCM("eval_wigner: CM not invertible");
    }
    const RMat om = symplectic_form(s.modes);
    std::vector<double> y(static_cast<size_t>(n2), 0.0);
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j)
            y[static_cast<size_t>(i)] += om(i, j) * (xi[static_cast<size_t>(j)] - one.d[static_cast<size_t>(j)]);
    double quad = 0;
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) quad += y[static_cast<size_t>(i)] * vinv(i, j) * y[static_cast<size_t>(j)];
    return std::pow(kPi, -s.modes) / std::sqrt(det) * std::exp(-quad);
}

} // namespace cvsim
