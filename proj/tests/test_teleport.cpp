#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cvsim/teleport.hpp"

using namespace cvsim;

namespace {

constexpr double kPi = 3.14159265358979323846;

RMat tms_cm(double r) {
    RMat v(4, 4);
    const double ch = std::cosh(r), sh = std::sinh(r);
    v.set_block(0, 0, ch * RMat::identity(2));
    v.set_block(2, 2, ch * RMat::identity(2));
    RMat mz(2, 2, {-sh, 0.0, 0.0, sh});
    v.set_block(0, 2, mz);
    v.set_block(2, 0, mz);
    return v;
}

GaussianState two_mode(const RMat& v) {
    GaussianState s;
    s.modes = 2;
    s.d.assign(4, 0.0);
    s.v = v;
    s.conv = Convention::VacuumOne;
    return s;
}

RMat rot2(double t) { return RMat(2, 2, {std::cos(t), std::sin(t), -std::sin(t), std::cos(t)}); }

RMat random_local(std::mt19937& rng) {
    std::uniform_real_distribution<double> ang(0, 2 * kPi);
    std::uniform_real_distribution<double> sq(0.7, 1.5);
    const double r = sq(rng);
    return rot2(ang(rng)) * RMat(2, 2, {r, 0, 0, 1 / r}) * rot2(ang(rng));
}

// Random physical two-mode CM from a standard-form core, optionally
// symmetric or entangled, scrambled by local symplectics.
RMat random_state(std::mt19937& rng, bool symmetric, bool entangled_only) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (;;) {
        const double a = 1.0 + 1.2 * u01(rng);
        const double b = symmetric ? a : 1.0 + 1.2 * u01(rng);
        const double cmax = std::sqrt((a * a - 1) * (b * b - 1));
        const double c1 = u01(rng) * std::min(std::sqrt(a * b) * 0.99, cmax);
        const double c2 = c1 * (0.25 + 0.75 * u01(rng));
        RMat v(4, 4);
        v.set_block(0, 0, a * RMat::identity(2));
        v.set_block(2, 2, b * RMat::identity(2));
        v(0, 2) = v(2, 0) = -c1;
        v(1, 3) = v(3, 1) = c2;
        GaussianState st = two_mode(v);
        if (!is_physical(st).physical) continue;
        double nu;
        try {
            nu = nu_min_pt(st);
        } catch (const NegativeDiscriminant&) {
            continue;
        }
        if (entangled_only && nu >= 0.98) continue;
        RMat loc(4, 4);
        loc.set_block(0, 0, random_local(rng));
        loc.set_block(2, 2, random_local(rng));
        return loc * v * loc.transpose();
    }
}

// Exhaustive map search: local squeezings r in [0.2, 5] (60 log steps each)
// and attenuations tau in [0.05, 1] (40 steps each side), fidelity from the
// noise matrix of the transformed standard form.
double brute_force_fidelity(const RMat& v) {
    const StandardFormI sf = standard_form_I(v);
    const double a = sf.a, b = sf.b, c1 = sf.c1, c2 = sf.c2;
    double best = 0;
    for (int ir = 0; ir < 60; ++ir) {
        const double ra = 0.2 * std::pow(25.0, ir / 59.0);
        for (int jr = 0; jr < 60; ++jr) {
            const double rb = 0.2 * std::pow(25.0, jr / 59.0);
            const double s = std::sqrt(ra * rb);
            const double n1 = a * ra, n2 = a / ra, m1 = b * rb, m2 = b / rb;
            const double d1 = c1 * s, d2 = c2 / s;
            for (int it = 0; it < 40; ++it) {
                const double ta = 0.05 + 0.95 * it / 39.0;
                for (int jt = 0; jt < 40; ++jt) {
                    const double tb = 0.05 + 0.95 * jt / 39.0;
                    const double n11 = ta * ta * n1 + tb * tb * m1 + 2 - ta * ta - tb * tb -
                                       2 * ta * tb * d1;
                    const double n22 = ta * ta * n2 + tb * tb * m2 + 2 - ta * ta - tb * tb -
                                       2 * ta * tb * d2;
                    const double f = 2.0 / std::sqrt((2 + n11) * (2 + n22));
                    if (f > best) best = f;
                }
            }
        }
    }
    return best;
}

// Apply the returned optimal map to V and recompute the fidelity through the
// teleportation formula; checks the decomposition is self-consistent.
RMat apply_optimal_map(const RMat& v, const OptimalMapResult& res) {
    RMat s4(4, 4);
    s4.set_block(0, 0, res.sa);
    s4.set_block(2, 2, res.sb);
    RMat out = s4 * v * s4.transpose();
    if (res.side != AttenuationSide::none) {
        const double t = res.tau;
        RMat att(4, 4), g(4, 4);
        if (res.side == AttenuationSide::alice) {
            att.set_block(0, 0, t * RMat::identity(2));
            att.set_block(2, 2, RMat::identity(2));
            g.set_block(0, 0, (1 - t * t) * RMat::identity(2));
        } else {
            att.set_block(0, 0, RMat::identity(2));
            att.set_block(2, 2, t * RMat::identity(2));
            g.set_block(2, 2, (1 - t * t) * RMat::identity(2));
        }
        out = att * out * att.transpose() + g;
    }
    return out;
}

} // namespace

TEST_CASE("noise matrix: squeezed, vacuum pair, ideal limit") {
    const double r = 0.8;
    RMat n = noise_matrix(tms_cm(r));
    CHECK(n(0, 0) == doctest::Approx(2 * std::exp(-r)).epsilon(1e-12));
    CHECK(n(1, 1) == doctest::Approx(2 * std::exp(-r)).epsilon(1e-12));
    CHECK(std::abs(n(0, 1)) < 1e-14);

    RMat nv = noise_matrix(RMat::identity(4));
    CHECK((nv - 2.0 * RMat::identity(2)).max_abs() < 1e-14);

    CHECK(noise_matrix(tms_cm(30.0)).max_abs() < 1e-12);
}

TEST_CASE("teleportation fidelities") {
    for (double r : {0.0, 0.5, 1.0, 2.0}) {
        TeleportResult t = teleport(RMat::identity(2), tms_cm(r));
        CHECK(t.fidelity == doctest::Approx(1.0 / (1.0 + std::exp(-r))).epsilon(1e-12));
    }
    // vacuum shared state: the classical ceiling
    TeleportResult tv = teleport(RMat::identity(2), RMat::identity(4));
    CHECK(tv.fidelity == doctest::Approx(0.5).epsilon(1e-13));
    // ideal EPR: unit fidelity, F_swap reported as +inf
    TeleportResult ti = teleport(RMat::identity(2), tms_cm(40.0));
    CHECK(ti.fidelity == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::isinf(ti.f_swap));
    // V_out = V_in + N
    TeleportResult t1 = teleport(RMat::identity(2), tms_cm(1.0));
    CHECK((t1.v_out - RMat::identity(2) - noise_matrix(tms_cm(1.0))).max_abs() < 1e-14);
}

TEST_CASE("fidelity bounds and the 0.086 gap") {
    auto b1 = fidelity_bounds(1.0);
    CHECK(b1.lower == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b1.upper == doctest::Approx(0.5).epsilon(1e-14));
    auto b0 = fidelity_bounds(1e-12);
    CHECK(b0.lower == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b0.upper == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(fidelity_bounds(0.0), DomainError);
    CHECK_THROWS_AS(fidelity_bounds(1.5), DomainError);
    double gap = 0;
    for (int i = 1; i <= 10000; ++i) {
        const double nu = static_cast<double>(i) / 10000.0;
        auto b = fidelity_bounds(nu);
        CHECK(b.lower <= b.upper);
        gap = std::max(gap, b.upper - b.lower);
    }
    CHECK(gap <= 0.086);
    CHECK(gap > 0.08); // the bound is tight
}

TEST_CASE("standard form I") {
    // already standard: entries recovered unchanged
    const double r = 1.0;
    StandardFormI sf = standard_form_I(tms_cm(r));
    CHECK(sf.a == doctest::Approx(std::cosh(r)).epsilon(1e-12));
    CHECK(sf.b == doctest::Approx(std::cosh(r)).epsilon(1e-12));
    CHECK(sf.c1 == doctest::Approx(std::sinh(r)).epsilon(1e-10));
    CHECK(sf.c2 == doctest::Approx(std::sinh(r)).epsilon(1e-10));

    // scrambling recovery: invariants pin (a, b, c1, c2)
    std::mt19937 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        RMat v = random_state(rng, false, false);
        StandardFormI f = standard_form_I(v);
        // the transformed CM really is in normal form
        const RMat& w = f.v;
        CHECK(w(0, 0) == doctest::Approx(w(1, 1)).epsilon(1e-9));
        CHECK(w(2, 2) == doctest::Approx(w(3, 3)).epsilon(1e-9));
        CHECK(std::abs(w(0, 1)) < 1e-9 * w.max_abs());
        CHECK(std::abs(w(0, 3)) < 1e-9 * w.max_abs());
        CHECK(std::abs(w(1, 2)) < 1e-9 * w.max_abs());
        CHECK(w(0, 2) == doctest::Approx(-f.c1).epsilon(1e-8).scale(1.0));
        CHECK(w(1, 3) == doctest::Approx(f.c2).epsilon(1e-8).scale(1.0));
        CHECK(f.c1 >= std::abs(f.c2) - 1e-12);
        // symplectic invariants recover the same entries after scrambling
        RMat loc(4, 4);
        loc.set_block(0, 0, random_local(rng));
        loc.set_block(2, 2, random_local(rng));
        StandardFormI f2 = standard_form_I(loc * v * loc.transpose());
        CHECK(f2.a == doctest::Approx(f.a).epsilon(1e-8));
        CHECK(f2.b == doctest::Approx(f.b).epsilon(1e-8));
        CHECK(f2.c1 == doctest::Approx(f.c1).epsilon(1e-7).scale(1.0));
        CHECK(f2.c2 == doctest::Approx(f.c2).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("normal form eta") {
    // symmetric squeezed state: lambda = 0 at eta = 1
    NormalFormEta nf = normal_form_eta(tms_cm(1.0), 1.0);
    CHECK(nf.form.lambda == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((nf.v - tms_cm(1.0)).max_abs() < 1e-9);

    std::mt19937 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        RMat v = random_state(rng, false, true);
        for (double eta : {1.0, 0.7}) {
            NormalFormEta f = normal_form_eta(v, eta);
            const RMat& w = f.v;
            const double n1 = w(0, 0), n2 = w(1, 1), m1 = w(2, 2), m2 = w(3, 3);
            const double d1 = -w(0, 2), d2 = w(1, 3);
            const double scale = std::max(1.0, w.max_abs());
            CHECK(std::abs((n1 - n2) - f.form.lambda) < 1e-9 * scale);
            CHECK(std::abs(eta * (d1 - d2) - f.form.lambda) < 1e-9 * scale);
            CHECK(std::abs(eta * eta * (m1 - m2) - f.form.lambda) < 1e-9 * scale);
            // the sign of lambda follows the standard-form asymmetry
            const StandardFormI sf = standard_form_I(v);
            if (std::abs(sf.c1 - sf.c2) > 1e-9)
                CHECK(f.form.lambda * (sf.c1 - sf.c2) >= 0);
            // determinant is a local-symplectic invariant
            CHECK(determinant(w) == doctest::Approx(determinant(v)).epsilon(1e-8));
        }
    }
}

TEST_CASE("optimal map: squeezed state and symmetric upper bound") {
    OptimalMapResult r1 = optimal_tgcp(tms_cm(1.0));
    CHECK(r1.entangled);
    CHECK(r1.f_opt == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-10));
    CHECK(r1.side == AttenuationSide::none);

    std::mt19937 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        RMat v = random_state(rng, true, true);
        OptimalMapResult r = optimal_tgcp(v);
        const double nu = nu_min_pt(two_mode(v));
        CHECK(r.f_opt == doctest::Approx(1.0 / (1.0 + nu)).epsilon(1e-8));
        CHECK(r.side == AttenuationSide::none);
    }
}

TEST_CASE("optimal map: not entangled input reports the classical optimum") {
    RMat th = 1.5 * RMat::identity(4);
    OptimalMapResult r = optimal_tgcp(th);
    CHECK_FALSE(r.entangled);
    CHECK(r.f_opt == doctest::Approx(0.5));
}

TEST_CASE("optimal map beats the brute-force grid and stays within bounds") {
    std::mt19937 rng(97);
    for (int trial = 0; trial < 25; ++trial) {
        RMat v = random_state(rng, false, true);
        const double nu = nu_min_pt(two_mode(v));
        OptimalMapResult r = optimal_tgcp(v);
        const auto b = fidelity_bounds(nu);
        CHECK(r.f_opt >= b.lower - 1e-8);
        CHECK(r.f_opt <= b.upper + 1e-8);
        const double fb = brute_force_fidelity(v);
        CHECK(r.f_opt >= fb - 1e-6);
    }
}

TEST_CASE("optimal map decomposition reproduces its own fidelity and scalar noise") {
    std::mt19937 rng(133);
    for (int trial = 0; trial < 40; ++trial) {
        RMat v = random_state(rng, false, true);
        OptimalMapResult r = optimal_tgcp(v);
        const RMat w = apply_optimal_map(v, r);
        const RMat n = noise_matrix(w);
        const double f = 2.0 / std::sqrt(determinant(2.0 * RMat::identity(2) + n));
        CHECK(f == doctest::Approx(r.f_opt).epsilon(1e-7));
        // optimal noise is a multiple of the identity
        const double iso = 0.5 * n.trace();
        CHECK((n - iso * RMat::identity(2)).max_abs() <= 1e-6 * std::max(1.0, iso));
    }
}

TEST_CASE("optimal fidelity is invariant under pre-applied local symplectics") {
    std::mt19937 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        RMat v = random_state(rng, false, true);
        OptimalMapResult r1 = optimal_tgcp(v);
        RMat loc(4, 4);
        loc.set_block(0, 0, random_local(rng));
        loc.set_block(2, 2, random_local(rng));
        OptimalMapResult r2 = optimal_tgcp(loc * v * loc.transpose());
        CHECK(r1.f_opt == doctest::Approx(r2.f_opt).epsilon(1e-7));
    }
}

TEST_CASE("asymmetric standard-form states stay strictly below the upper bound") {
    std::mt19937 rng(202);
    int checked = 0;
    while (checked < 30) {
        RMat v = random_state(rng, false, true);
        const StandardFormI sf = standard_form_I(v);
        if (std::abs(sf.a - sf.b) < 0.05) continue;
        const double nu = nu_min_pt(two_mode(v));
        OptimalMapResult r = optimal_tgcp(v);
        CHECK(r.f_opt < 1.0 / (1.0 + nu) - 1e-10);
        ++checked;
    }
}

TEST_CASE("omega-theta map: symmetric case, closed-form noise, bound endpoints") {
    OmegaThetaMap m = build_omega_theta(tms_cm(1.0));
    CHECK(std::abs(m.eps) < 1e-9);
    CHECK(m.theta == doctest::Approx(kPi / 4).epsilon(1e-8));
    CHECK(m.fidelity == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-8));

    // the formula hits the lower bound at |eps| = nu and the upper at eps = 0
    const double nu = 0.4;
    CHECK((1.0 + nu) / (1.0 + nu + 2.0 * nu) == doctest::Approx(fidelity_bounds(nu).lower));
    CHECK(1.0 / (1.0 + nu) == doctest::Approx(fidelity_bounds(nu).upper));

    std::mt19937 rng(303);
    for (int trial = 0; trial < 30; ++trial) {
        RMat v = random_state(rng, false, true);
        const double nuv = nu_min_pt(two_mode(v));
        OmegaThetaMap w = build_omega_theta(v);
        CHECK(std::abs(w.eps) <= nuv + 1e-8);
        // apply-then-measure oracle: the constructed map produces the scalar
        // noise 2 (nu + |eps|) / (1 + |eps|) I
        RMat s4(4, 4), g4(4, 4);
        s4.set_block(0, 0, w.sa);
        s4.set_block(2, 2, w.sb);
        g4.set_block(0, 0, w.ga);
        g4.set_block(2, 2, w.gb);
        const RMat vout = s4 * v * s4.transpose() + g4;
        const RMat n = noise_matrix(vout);
        const double expect = 2.0 * (nuv + std::abs(w.eps)) / (1.0 + std::abs(w.eps));
        CHECK((n - expect * RMat::identity(2)).max_abs() < 1e-8 * std::max(1.0, expect));
        const double f = 2.0 / std::sqrt(determinant(2.0 * RMat::identity(2) + n));
        CHECK(f == doctest::Approx(w.fidelity).epsilon(1e-8));
        CHECK(w.fidelity >= fidelity_bounds(nuv).lower - 1e-9);
        CHECK(w.fidelity <= fidelity_bounds(nuv).upper + 1e-9);
    }
}

TEST_CASE("fidelity above one half certifies entanglement") {
    std::mt19937 rng(611);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    int above = 0;
    for (int trial = 0; trial < 200; ++trial) {
        // alternate generic scrambled states with noisy squeezed ones so both
        // sides of the threshold are exercised
        RMat v = (trial % 2) ? random_state(rng, false, false)
                             : tms_cm(u(rng)) + (0.1 * u(rng)) * RMat::identity(4);
        const double f = teleport(RMat::identity(2), v).fidelity;
        if (f > 0.5 + 1e-12) {
            ++above;
            CHECK(nu_min_pt(two_mode(v)) < 1.0);
        }
    }
    CHECK(above > 10);
}

TEST_CASE("entanglement swapping covariance matrix") {
    SwapResult s1 = swap_cm(0.0, 1.0);
    CHECK(s1.nu_swap == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK((s1.w - tms_cm(1.0)).max_abs() < 1e-12);

    SwapResult s2 = swap_cm(0.3, 15.0);
    CHECK(s2.nu_swap == doctest::Approx(0.3).epsilon(1e-4));

    // separable boundary: the grid pins nu_swap at 1 for every squeezing
    for (double r : {1.0, 3.0, 6.0, 10.0, 14.0}) {
        SwapResult s = swap_cm(1.0, r);
        CHECK(s.nu_swap >= 1.0 - 1e-10);
        CHECK(s.nu_swap == doctest::Approx(1.0).epsilon(1e-9));
    }
    // below the boundary the limit is approached monotonically from above
    double prev = 1e300;
    for (double r : {1.0, 2.0, 4.0, 8.0}) {
        SwapResult s = swap_cm(0.5, r);
        CHECK(s.nu_swap > 0.5);
        CHECK(s.nu_swap < prev);
        prev = s.nu_swap;
    }
}
