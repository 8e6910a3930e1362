#include "cvsim/teleport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cvsim {

namespace {

RMat zmat() { return RMat(2, 2, {1.0, 0.0, 0.0, -1.0}); }

GaussianState wrap2(const RMat& v) {
    GaussianState s;
    s.modes = 2;
    s.d.assign(4, 0.0);
    s.v = v;
    s.conv = Convention::VacuumOne;
    return s;
}

// Symplectic 2x2 factor bringing a symmetric positive block to sqrt(det) I:
// S = sqrt(det A)^{1/2} A^{-1/2}, unit determinant.
RMat isotropize(const RMat& block) {
    SymmetricEigen e = jacobi_symmetric(block);
    if (e.values.front() <= 0) throw NotPositiveDefinite("standard_form_I: block not positive definite");
    const double target = std::sqrt(e.values[0] * e.values[1]);
    RMat r(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r(i, j) = std::sqrt(target / e.values[0]) * e.vectors(i, 0) * e.vectors(j, 0) +
                      std::sqrt(target / e.values[1]) * e.vectors(i, 1) * e.vectors(j, 1);
    return r;
}

RMat rot(double t) { return RMat(2, 2, {std::cos(t), std::sin(t), -std::sin(t), std::cos(t)}); }

// Rotation pair with ra * m * rb^T diagonal (det-1 rotations only):
// symmetrize with a left rotation, then Jacobi-diagonalize.
void svd_rotations(const RMat& m, RMat& ra, RMat& rb) {
    const double phi = std::atan2(m(1, 0) - m(0, 1), m(0, 0) + m(1, 1));
    const RMat s = rot(phi) * m; // symmetric
    const double psi = 0.5 * std::atan2(2.0 * s(0, 1), s(0, 0) - s(1, 1));
    ra = rot(psi) * rot(phi);
    rb = rot(psi);
}

} // namespace

RMat noise_matrix(const RMat& v_shared) {
    const TwoModeBlocks b = two_mode_blocks(v_shared);
    const RMat z = zmat();
    return z * b.a * z + z * b.c + b.c.transpose() * z + b.b;
}

TeleportResult teleport(const RMat& v_in, const RMat& v_shared) {
    if (v_in.rows() != 2 || v_in.cols() != 2) throw DimensionMismatch("teleport: input CM must be 2x2");
    const double det_in = determinant(v_in);
    if (std::abs(det_in - 1.0) > 1e-8)
        throw Unphysical("teleport: input CM must be pure (det = 1)");
    const RMat n = noise_matrix(v_shared);
    TeleportResult r;
    r.v_out = v_in + n;
    r.fidelity = 2.0 / std::sqrt(determinant(2.0 * v_in + n));
    const double dn = determinant(n);
    r.f_swap = (dn > 0) ? 2.0 / std::sqrt(dn) : std::numeric_limits<double>::infinity();
    return r;
}

FidelityBounds fidelity_bounds(double nu) {
    if (!(nu > 0.0) || nu > 1.0) throw DomainError("fidelity_bounds: nu must lie in (0, 1]");
    return {(1.0 + nu) / (1.0 + 3.0 * nu), 1.0 / (1.0 + nu)};
}

StandardFormI standard_form_I(const RMat& v) {
    const TwoModeBlocks blk = two_mode_blocks(v);
    RMat sa = isotropize(blk.a);
    RMat sb = isotropize(blk.b);
    RMat c = sa * blk.c * sb.transpose();
    RMat ra(2, 2), rb(2, 2);
    svd_rotations(c, ra, rb);
    sa = ra * sa;
    sb = rb * sb;
    c = ra * c * rb.transpose();
    // convention: C = diag(-c1, c2) with c1 >= |c2|
    if (std::abs(c(1, 1)) > std::abs(c(0, 0))) {
        const RMat q = rot(-M_PI / 2.0); // swaps the quadrature roles
        sa = q * sa;
        sb = q * sb;
        c = q * c * q.transpose();
    }
    if (c(0, 0) > 0) {
        const RMat flip = -RMat::identity(2); // pi rotation on mode a
        sa = flip * sa;
        c = flip * c;
    }
    StandardFormI out;
    out.sa = sa;
    out.sb = sb;
    out.a = std::sqrt(determinant(blk.a));
    out.b = std::sqrt(determinant(blk.b));
    out.c1 = -c(0, 0);
    out.c2 = c(1, 1);
    RMat s4(4, 4);
    s4.set_block(0, 0, sa);
    s4.set_block(2, 2, sb);
    out.v = s4 * v * s4.transpose();
    return out;
}

namespace {

// apply the squeezing pair fixed by (lambda, eta) on top of standard form I
NormalFormEta eta_form_from_lambda(const RMat& v, const StandardFormI& sf, double lambda,
                                   double eta) {
    auto r_of = [](double lam, double x) {
        return lam / (2.0 * x) + std::sqrt(1.0 + lam * lam / (4.0 * x * x));
    };
    const double ra = r_of(lambda, sf.a);
    const double rb = r_of(lambda / (eta * eta), sf.b);
    const RMat sq_a(2, 2, {std::sqrt(ra), 0.0, 0.0, 1.0 / std::sqrt(ra)});
    const RMat sq_b(2, 2, {std::sqrt(rb), 0.0, 0.0, 1.0 / std::sqrt(rb)});
    NormalFormEta out;
    out.sa = sq_a * sf.sa;
    out.sb = sq_b * sf.sb;
    RMat s4(4, 4);
    s4.set_block(0, 0, out.sa);
    s4.set_block(2, 2, out.sb);
    out.v = s4 * v * s4.transpose();
    out.form.lambda = lambda;
    out.form.eta = eta;
    out.form.n = out.v(1, 1);
    out.form.m = out.v(3, 3);
    out.form.d = out.v(1, 3);
    return out;
}

} // namespace

NormalFormEta normal_form_eta(const RMat& v, double eta) {
    if (!(eta > 0.0) || eta > 1.0) throw DomainError("normal_form_eta: eta must lie in (0, 1]");
    const StandardFormI sf = standard_form_I(v);
    const double a = sf.a, b = sf.b, c1 = sf.c1, c2 = sf.c2;
    auto r_of = [](double lam, double x) { return lam / (2.0 * x) + std::sqrt(1.0 + lam * lam / (4.0 * x * x)); };
    auto constraint = [&](double lam) {
        const double ra = r_of(lam, a);
        const double rb = r_of(lam / (eta * eta), b);
        const double s = std::sqrt(ra * rb);
        return c1 * s - c2 / s - lam / eta;
    };
    double lambda = 0.0;
    if (std::abs(c1 - c2) > 1e-14 * std::max(1.0, c1)) {
        // the root carries the sign of c1 - c2; grow a one-sided bracket
        const double seed = (c1 > c2 ? 1.0 : -1.0) * 1e-6;
        double x0 = seed, f0 = constraint(x0);
        double x1 = x0;
        bool found = false;
        for (int i = 0; i < 400; ++i) {
            x1 *= 1.5;
            const double f1 = constraint(x1);
            if (f0 * f1 <= 0) {
                lambda = find_root(constraint, std::min(x0, x1), std::max(x0, x1), 1e-14);
                found = true;
                break;
            }
            x0 = x1;
            f0 = f1;
        }
        if (!found) throw NoRoot("normal_form_eta: constraint root not bracketed");
    }
    return eta_form_from_lambda(v, sf, lambda, eta);
}

namespace {

// Invariant-based optimum search for one orientation (attenuation on the
// second mode of the blocks as ordered). Returns candidate list of
// (fidelity, lambda, eta).
struct Candidate {
    double f, lambda, eta;
};

struct InvariantProblem {
    double a, b, c, v;

    double n_(double lam) const { return -lam / 2 + std::sqrt(a * a + lam * lam / 4); }
    double m_(double lam, double eta) const {
        const double u = lam / (2 * eta * eta);
        return -u + std::sqrt(b * b + u * u);
    }
    double d_(double lam, double eta) const {
        const double u = lam / (2 * eta);
        return -u + std::sqrt(c * c + u * u);
    }
    double det_eta(double lam, double eta) const {
        const double n = n_(lam), m = m_(lam, eta), d = d_(lam, eta);
        return ((n + lam) * (m + lam / (eta * eta)) - (d + lam / eta) * (d + lam / eta)) * (n * m - d * d);
    }
    double fid(double lam, double eta) const {
        const double bracket = 2.0 + std::sqrt(a * a + lam * lam / 4) +
                               std::sqrt(b * b * eta * eta * eta * eta + lam * lam / 4) -
                               2.0 * std::sqrt(c * c * eta * eta + lam * lam / 4) + 1.0 - eta * eta;
        return 2.0 / bracket;
    }
    double residual(double lam, double eta) const { return eta * (m_(lam, eta) - 1.0) - d_(lam, eta); }

    std::vector<double> lambda_roots(double eta) const {
        auto g = [&](double lam) { return det_eta(lam, eta) - v; };
        const double span = 60.0 * std::max({a, b, 1.0}) * std::max({a, b, 1.0});
        std::vector<double> xs;
        const int half = 160;
        for (int i = half; i >= 1; --i) xs.push_back(-span * std::pow(10.0, -6.0 * (half - i) / (half - 1.0)));
        xs.push_back(0.0);
        for (int i = 1; i <= half; ++i) xs.push_back(span * std::pow(10.0, -6.0 * (half - i) / (half - 1.0)));
        std::vector<double> roots;
        double fprev = g(xs[0]);
        for (size_t i = 1; i < xs.size(); ++i) {
            const double fcur = g(xs[i]);
            if (fprev == 0.0) roots.push_back(xs[i - 1]);
            else if (fprev * fcur < 0) roots.push_back(find_root(g, xs[i - 1], xs[i], 1e-14));
            fprev = fcur;
        }
        return roots;
    }

    void collect(std::vector<Candidate>& out) const {
        for (double lam : lambda_roots(1.0)) out.push_back({fid(lam, 1.0), lam, 1.0});
        // continuation in eta over (0,1); refine sign changes of the residual
        const int grid_n = 400;
        std::vector<std::pair<double, double>> prev; // (lambda, residual)
        double eta_prev = 0;
        for (int k = 1; k <= grid_n; ++k) {
            const double eta = static_cast<double>(k) / (grid_n + 1);
            std::vector<double> roots = lambda_roots(eta);
            std::vector<std::pair<double, double>> cur;
            cur.reserve(roots.size());
            for (double lam : roots) cur.push_back({lam, residual(lam, eta)});
            for (const auto& [lam0, h0] : prev) {
                if (cur.empty()) break;
                auto nearest = std::min_element(cur.begin(), cur.end(), [&](const auto& x, const auto& y) {
                    return std::abs(x.first - lam0) < std::abs(y.first - lam0);
                });
                if (h0 * nearest->second < 0) {
                    // bisect in eta along the branch
                    double lo = eta_prev, hi = eta, lam_track = nearest->first, h_lo = h0;
                    for (int it = 0; it < 90; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        std::vector<double> rr = lambda_roots(mid);
                        if (rr.empty()) break;
                        auto nr = std::min_element(rr.begin(), rr.end(), [&](double x, double y) {
                            return std::abs(x - lam_track) < std::abs(y - lam_track);
                        });
                        lam_track = *nr;
                        const double hm = residual(lam_track, mid);
                        if (h_lo * hm <= 0) hi = mid;
                        else { lo = mid; h_lo = hm; }
                    }
                    const double eta_star = 0.5 * (lo + hi);
                    out.push_back({fid(lam_track, eta_star), lam_track, eta_star});
                }
            }
            prev = std::move(cur);
            eta_prev = eta;
        }
    }
};

} // namespace

OptimalMapResult optimal_tgcp(const RMat& v) {
    const GaussianState st = wrap2(v);
    const PhysicalityReport phys = is_physical(st);
    if (!phys.physical) throw Unphysical("optimal_tgcp: input CM is not physical");
    const double nu = nu_min_pt(st);
    OptimalMapResult res;
    res.nu = nu;
    if (nu >= 1.0 - 1e-12) {
        res.entangled = false;
        res.f_opt = 0.5;
        res.side = AttenuationSide::none;
        res.tau = 1.0;
        res.sa = RMat::identity(2);
        res.sb = RMat::identity(2);
        res.form = EtaForm{};
        return res;
    }
    res.entangled = true;
    const TwoModeBlocks blk = two_mode_blocks(v);
    const double a = std::sqrt(determinant(blk.a));
    const double b = std::sqrt(determinant(blk.b));
    const double c = std::sqrt(std::abs(determinant(blk.c)));
    const double detv = determinant(v);

    std::vector<Candidate> cand_bob, cand_alice;
    InvariantProblem{a, b, c, detv}.collect(cand_bob);
    InvariantProblem{b, a, c, detv}.collect(cand_alice); // attenuation on the other side

    double best_f = -1;
    Candidate best{};
    bool best_is_alice = false;
    for (const Candidate& cd : cand_bob)
        if (cd.f > best_f) { best_f = cd.f; best = cd; best_is_alice = false; }
    for (const Candidate& cd : cand_alice)
        if (cd.f > best_f) { best_f = cd.f; best = cd; best_is_alice = true; }
    if (best_f < 0) throw NoRoot("optimal_tgcp: no candidate solutions found");

    res.f_opt = best_f;
    res.tau = best.eta;
    if (best.eta >= 1.0 - 1e-12) {
        res.side = AttenuationSide::none;
        res.tau = 1.0;
    } else {
        res.side = best_is_alice ? AttenuationSide::alice : AttenuationSide::bob;
    }
    // realize the first symplectic map. The invariant search may return the
    // sign-reflected twin of the directly reachable root, so enumerate the
    // constraint roots on the standard form and keep the one that reproduces
    // the reported optimum.
    RMat vwork = v;
    if (best_is_alice) {
        RMat p(4, 4);
        p.set_block(0, 2, RMat::identity(2));
        p.set_block(2, 0, RMat::identity(2));
        vwork = p * v * p.transpose();
    }
    const StandardFormI sfw = standard_form_I(vwork);
    const double eta = best.eta;
    auto r_of = [](double lam, double x) {
        return lam / (2.0 * x) + std::sqrt(1.0 + lam * lam / (4.0 * x * x));
    };
    auto constraint = [&](double lam) {
        const double s = std::sqrt(r_of(lam, sfw.a) * r_of(lam / (eta * eta), sfw.b));
        return sfw.c1 * s - sfw.c2 / s - lam / eta;
    };
    std::vector<double> lam_candidates{0.0, best.lambda, -best.lambda};
    {
        const double span = 60.0 * std::max({sfw.a, sfw.b, 1.0}) * std::max({sfw.a, sfw.b, 1.0});
        std::vector<double> xs{0.0};
        for (int i = 0; i <= 120; ++i) {
            const double x = span * std::pow(10.0, -6.0 * (120 - i) / 120.0);
            xs.push_back(x);
            xs.push_back(-x);
        }
        std::sort(xs.begin(), xs.end());
        for (size_t i = 0; i + 1 < xs.size(); ++i) {
            const double f0 = constraint(xs[i]), f1 = constraint(xs[i + 1]);
            if (f0 == 0.0) lam_candidates.push_back(xs[i]);
            else if (f0 * f1 < 0)
                lam_candidates.push_back(find_root(constraint, xs[i], xs[i + 1], 1e-14));
        }
    }
    double best_err = 1e300;
    for (double lam : lam_candidates) {
        const NormalFormEta nf = eta_form_from_lambda(vwork, sfw, lam, eta);
        RMat sa = best_is_alice ? nf.sb : nf.sa;
        RMat sb = best_is_alice ? nf.sa : nf.sb;
        RMat s4(4, 4);
        s4.set_block(0, 0, sa);
        s4.set_block(2, 2, sb);
        RMat w = s4 * v * s4.transpose();
        if (res.side != AttenuationSide::none) {
            const double t = res.tau;
            RMat att = RMat::identity(4), g(4, 4);
            const int off = (res.side == AttenuationSide::alice) ? 0 : 2;
            att.set_block(off, off, t * RMat::identity(2));
            g.set_block(off, off, (1 - t * t) * RMat::identity(2));
            w = att * w * att.transpose() + g;
        }
        const RMat n = noise_matrix(w);
        const double f = 2.0 / std::sqrt(determinant(2.0 * RMat::identity(2) + n));
        const double err = std::abs(f - res.f_opt);
        if (err < best_err) {
            best_err = err;
            res.sa = sa;
            res.sb = sb;
            res.form = nf.form;
        }
    }
    if (best_err > 1e-7 * std::max(1.0, res.f_opt))
        throw NoRoot("optimal_tgcp: map decomposition failed to reproduce the optimum");
    return res;
}

OmegaThetaMap build_omega_theta(const RMat& v) {
    const GaussianState st = wrap2(v);
    const double nu = nu_min_pt(st);
    if (nu >= 1.0) throw Unphysical("build_omega_theta: state must be entangled");
    // transpose the first mode: the upper block row of the diagonalizer then
    // ties (Wa, Wb) to the noise matrix through Z A Z and Z C
    const RMat lam = pt_mask(2, {0});
    const WilliamsonResult wl = williamson_transform(lam * v * lam);
    const RMat wa = wl.s.block(0, 0, 2, 2);
    const RMat wb = wl.s.block(0, 2, 2, 2);
    OmegaThetaMap out;
    out.nu = nu;
    out.eps = determinant(wb) - determinant(wa);
    const double eps = out.eps;
    out.theta = std::atan(std::sqrt((1.0 - eps) / (1.0 + eps)));
    const RMat z = zmat();
    const double cth = std::cos(out.theta), sth = std::sin(out.theta);
    if (out.theta <= M_PI / 4.0) {
        out.sa = (1.0 / cth) * (z * wa * z);
        out.sb = (1.0 / cth) * wb;
        const double t2 = std::tan(out.theta) * std::tan(out.theta);
        out.ga = (1.0 - t2) * RMat::identity(2);
        out.gb = RMat::zero(2, 2);
    } else {
        out.sa = (1.0 / sth) * (z * wa * z);
        out.sb = (1.0 / sth) * wb;
        const double c2 = 1.0 / (std::tan(out.theta) * std::tan(out.theta));
        out.ga = RMat::zero(2, 2);
        out.gb = (1.0 - c2) * RMat::identity(2);
    }
    out.fidelity = (1.0 + std::abs(eps)) / (1.0 + nu + 2.0 * std::abs(eps));
    return out;
}

SwapResult swap_cm(double n, double r) {
    if (n < 0 || r < 0) throw DomainError("swap_cm: parameters must be nonnegative");
    const double ch = std::cosh(r), sh = std::sinh(r);
    RMat w(4, 4);
    w.set_block(0, 0, ch * RMat::identity(2));
    w.set_block(2, 2, (2.0 * n + ch) * RMat::identity(2));
    w.set_block(0, 2, -sh * zmat());
    w.set_block(2, 0, -sh * zmat());
    SwapResult out;
    out.w = w;
    out.nu_swap = nu_min_pt(wrap2(w));
    return out;
}

} // namespace cvsim
