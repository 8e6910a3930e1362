#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cvsim/gaussian.hpp"

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

GaussianState two_mode(const RMat& v, Convention c = Convention::VacuumOne) {
    GaussianState s;
    s.modes = 2;
    s.d.assign(4, 0.0);
    s.v = v;
    s.conv = c;
    return s;
}

RMat rot2(double t) { return RMat(2, 2, {std::cos(t), std::sin(t), -std::sin(t), std::cos(t)}); }
RMat squeeze2(double r) { return RMat(2, 2, {r, 0.0, 0.0, 1.0 / r}); }

RMat random_local_symplectic(std::mt19937& rng) {
    std::uniform_real_distribution<double> ang(0, 2 * kPi);
    std::uniform_real_distribution<double> sq(0.6, 1.6);
    return rot2(ang(rng)) * squeeze2(sq(rng)) * rot2(ang(rng));
}

// generic two-mode symplectic: local layers around a beam-splitter rotation
RMat random_symplectic4(std::mt19937& rng) {
    std::uniform_real_distribution<double> ang(0, 2 * kPi);
    RMat s(4, 4);
    s.set_block(0, 0, random_local_symplectic(rng));
    s.set_block(2, 2, random_local_symplectic(rng));
    const double t = ang(rng);
    RMat bs(4, 4);
    bs.set_block(0, 0, std::cos(t) * RMat::identity(2));
    bs.set_block(2, 2, std::cos(t) * RMat::identity(2));
    bs.set_block(0, 2, std::sin(t) * RMat::identity(2));
    bs.set_block(2, 0, -std::sin(t) * RMat::identity(2));
    RMat l2(4, 4);
    l2.set_block(0, 0, random_local_symplectic(rng));
    l2.set_block(2, 2, random_local_symplectic(rng));
    return l2 * bs * s;
}

GaussianState random_physical_state(std::mt19937& rng) {
    std::uniform_real_distribution<double> th(1.0, 1.8);
    RMat core = RMat::diag({th(rng), th(rng), th(rng), th(rng)});
    core(1, 1) = core(0, 0);
    core(3, 3) = core(2, 2);
    const RMat s = random_symplectic4(rng);
    return two_mode(s * core * s.transpose());
}

} // namespace

TEST_CASE("physicality: vacuum, sub-vacuum, squeezed") {
    CHECK(is_physical(GaussianState::vacuum(1)).physical);
    CHECK(std::abs(is_physical(GaussianState::vacuum(1)).min_eig) < 1e-12);

    GaussianState bad = GaussianState::vacuum(1);
    bad.v *= 0.5; // below the Heisenberg floor in VacuumOne
    CHECK_FALSE(is_physical(bad).physical);

    // two-mode squeezed: pure, symplectic eigenvalues both 1
    GaussianState tms = two_mode(tms_cm(1.0));
    CHECK(is_physical(tms).physical);
    auto sp = symplectic_spectrum(tms);
    CHECK(sp[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sp[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(determinant(tms.v) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("symplectic spectrum: vacuum, thermal, convention") {
    auto sp = symplectic_spectrum(GaussianState::vacuum(3));
    for (double s : sp) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

    const double nbar = 2.5;
    GaussianState th = GaussianState::vacuum(2);
    th.v = (2 * nbar + 1) * RMat::identity(4);
    auto spt = symplectic_spectrum(th);
    for (double s : spt) CHECK(s == doctest::Approx(2 * nbar + 1).epsilon(1e-12));

    // VacuumHalf carries its own normalization
    GaussianState h = GaussianState::vacuum(1, Convention::VacuumHalf);
    CHECK(symplectic_spectrum(h)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(is_physical(h).physical);
}

TEST_CASE("symplectic spectrum is invariant under symplectics") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianState s = random_physical_state(rng);
        const RMat sym = random_symplectic4(rng);
        GaussianState s2 = s;
        s2.v = sym * s.v * sym.transpose();
        auto a = symplectic_spectrum(s);
        auto b = symplectic_spectrum(s2);
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-8));
    }
}

TEST_CASE("williamson transform reconstructs and is symplectic") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianState s = random_physical_state(rng);
        WilliamsonResult w = williamson_transform(s.v);
        const RMat d = w.s * s.v * w.s.transpose();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double expect = (i == j) ? w.values[static_cast<size_t>(i / 2)] : 0.0;
                CHECK(d(i, j) == doctest::Approx(expect).epsilon(1e-8).scale(1.0));
            }
        const RMat om = symplectic_form(2);
        CHECK((w.s * om * w.s.transpose() - om).max_abs() < 1e-8);
        // oracle: spectrum via |eig(i Omega V)|
        auto sp = symplectic_spectrum(s);
        CHECK(w.values[0] == doctest::Approx(sp[0]).epsilon(1e-9));
        CHECK(w.values[1] == doctest::Approx(sp[1]).epsilon(1e-9));
    }
}

TEST_CASE("williamson of an already-diagonal form and of a degenerate one") {
    RMat d = RMat::diag({1.3, 1.3, 2.0, 2.0});
    WilliamsonResult w = williamson_transform(d);
    CHECK(w.values[0] == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(w.values[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((w.s * d * w.s.transpose() - d).max_abs() < 1e-10);

    // degenerate Williamson spectrum (thermal product): still a valid S
    RMat deg = 1.7 * RMat::identity(4);
    WilliamsonResult wd = williamson_transform(deg);
    const RMat om = symplectic_form(2);
    CHECK((wd.s * om * wd.s.transpose() - om).max_abs() < 1e-9);
    CHECK((wd.s * deg * wd.s.transpose() - deg).max_abs() < 1e-9);
}

TEST_CASE("williamson of the partially transposed two-mode squeezed state") {
    const double r = 1.0;
    const RMat lam = pt_mask(2, {1});
    const RMat pt = lam * tms_cm(r) * lam;
    WilliamsonResult w = williamson_transform(pt);
    CHECK(w.values[0] == doctest::Approx(std::exp(-r)).epsilon(1e-9));
    CHECK(w.values[1] == doctest::Approx(std::exp(r)).epsilon(1e-9));
}

TEST_CASE("tgcp channels: identity, attenuation on vacuum, squeezing") {
    GaussianState vac = GaussianState::vacuum(1);
    TgcpChannel id{RMat::identity(2), RMat::zero(2, 2)};
    GaussianState out = apply_tgcp(vac, id);
    CHECK((out.v - vac.v).max_abs() < 1e-14);

    const double tau = 0.7;
    TgcpChannel att{tau * RMat::identity(2), (1 - tau * tau) * RMat::identity(2)};
    GaussianState att_out = apply_tgcp(vac, att);
    CHECK((att_out.v - RMat::identity(2)).max_abs() < 1e-14); // vacuum is a fixed point

    const double r = 1.4;
    TgcpChannel sq{RMat(2, 2, {r, 0, 0, 1 / r}), RMat::zero(2, 2)};
    GaussianState sq_out = apply_tgcp(vac, sq);
    CHECK(sq_out.v(0, 0) == doctest::Approx(r * r).epsilon(1e-12));
    CHECK(sq_out.v(1, 1) == doctest::Approx(1 / (r * r)).epsilon(1e-12));

    // an attenuation without its noise term is not completely positive
    TgcpChannel badch{tau * RMat::identity(2), RMat::zero(2, 2)};
    CHECK_THROWS_AS(apply_tgcp(vac, badch), InvalidChannel);
}

TEST_CASE("tgcp preserves physicality on random states and channels") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> tau(0.2, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        GaussianState s = random_physical_state(rng);
        const double ta = tau(rng), tb = tau(rng);
        RMat sm(4, 4), gm(4, 4);
        sm.set_block(0, 0, ta * random_local_symplectic(rng));
        sm.set_block(2, 2, tb * random_local_symplectic(rng));
        gm.set_block(0, 0, (1 - ta * ta) * RMat::identity(2));
        gm.set_block(2, 2, (1 - tb * tb) * RMat::identity(2));
        GaussianState out = apply_tgcp(s, TgcpChannel{sm, gm});
        CHECK(is_physical(out).physical);
    }
}

namespace {

// vacuum projection of mode B encoded as a finite-squeezing channel kernel
GcpChannel vacuum_projection_channel(double r) {
    const double ch = std::cosh(r), sh = std::sinh(r);
    GcpChannel g;
    g.gamma1 = ch * RMat::identity(2);
    g.gamma12 = RMat(2, 4, {sh, 0, 0, 0, 0, -sh, 0, 0});
    g.gamma2 = RMat(4, 4);
    g.gamma2.set_block(0, 0, ch * RMat::identity(2));
    g.gamma2.set_block(2, 2, RMat::identity(2));
    return g;
}

} // namespace

TEST_CASE("gcp vacuum projection: product state, squeezed state, finite-r limit") {
    // product state: C = 0, conditional state equals the A block. At finite
    // kernel squeezing the exact output is ch I - sh^2 (ch I + A)^{-1}.
    RMat prod(4, 4);
    prod.set_block(0, 0, 1.8 * RMat::identity(2));
    prod.set_block(2, 2, 1.3 * RMat::identity(2));
    const double r0 = 10.0;
    const double ch = std::cosh(r0), sh = std::sinh(r0);
    GaussianState out = apply_gcp(two_mode(prod), vacuum_projection_channel(r0));
    const double exact = ch - sh * sh / (ch + 1.8);
    CHECK(out.v(0, 0) == doctest::Approx(exact).epsilon(1e-11));
    CHECK(out.v(0, 0) == doctest::Approx(1.8).epsilon(1e-3)); // already near the limit
    CHECK(std::abs(out.v(0, 1)) < 1e-10);

    // two-mode squeezed: limit formula A - C (B + I)^{-1} C^T at r = 20
    const RMat v = tms_cm(1.0);
    const TwoModeBlocks b = two_mode_blocks(v);
    const RMat expect = b.a - b.c * inverse(b.b + RMat::identity(2)) * b.c.transpose();
    GaussianState out2 = apply_gcp(two_mode(v), vacuum_projection_channel(20.0));
    CHECK((out2.v - expect).max_abs() < 1e-6);

    // limit-convergence oracle: deviation shrinks along an r ladder (noisy
    // input, where the finite-r kernel is not exact)
    RMat vn = v + 0.3 * RMat::identity(4);
    const TwoModeBlocks bn = two_mode_blocks(vn);
    const RMat expect_n = bn.a - bn.c * inverse(bn.b + RMat::identity(2)) * bn.c.transpose();
    double prev = 1e300;
    for (double r : {6.0, 9.0, 12.0}) {
        GaussianState o = apply_gcp(two_mode(vn), vacuum_projection_channel(r));
        const double dev = (o.v - expect_n).max_abs();
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("nu_min_pt: squeezed, vacuum, formula vs williamson route") {
    for (double r : {0.3, 1.0, 2.0})
        CHECK(nu_min_pt(two_mode(tms_cm(r))) == doctest::Approx(std::exp(-r)).epsilon(1e-10));
    CHECK(nu_min_pt(GaussianState::vacuum(2)) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937 rng(3);
    const RMat lam = pt_mask(2, {1});
    for (int trial = 0; trial < 100; ++trial) {
        GaussianState s = random_physical_state(rng);
        const double nu = nu_min_pt(s);
        GaussianState pt = s;
        pt.v = lam * s.v * lam;
        const double nu_w = symplectic_spectrum(pt)[0];
        CHECK(nu == doctest::Approx(nu_w).epsilon(1e-10));
    }
}

TEST_CASE("log negativity: squeezed value, vacuum, convention agreement") {
    auto ln = log_negativity(two_mode(tms_cm(1.0)));
    CHECK(ln.e_n == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ln.negativity == doctest::Approx(0.5 * (std::exp(1.0) - 1.0)).epsilon(1e-10));

    CHECK(log_negativity(GaussianState::vacuum(2)).e_n == 0.0);

    std::mt19937 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianState s = random_physical_state(rng);
        GaussianState h = to_convention(s, Convention::VacuumHalf);
        CHECK(log_negativity(s).e_n == doctest::Approx(log_negativity(h).e_n).epsilon(1e-10));
    }
}

TEST_CASE("log negativity is invariant under local symplectics") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianState s = random_physical_state(rng);
        RMat loc(4, 4);
        loc.set_block(0, 0, random_local_symplectic(rng));
        loc.set_block(2, 2, random_local_symplectic(rng));
        GaussianState s2 = s;
        s2.v = loc * s.v * loc.transpose();
        CHECK(log_negativity(s).e_n == doctest::Approx(log_negativity(s2).e_n).epsilon(1e-8));
    }
}

TEST_CASE("simon verdict matches E_N > 0 on random states") {
    std::mt19937 rng(31);
    const auto grid = default_duan_grid();
    int entangled_seen = 0, separable_seen = 0;
    for (int trial = 0; trial < 200; ++trial) {
        GaussianState s = random_physical_state(rng);
        const auto rep = separability_report(s, grid);
        const double en = log_negativity(s).e_n;
        if (rep.simon_entangled) {
            ++entangled_seen;
            CHECK(en > 0.0);
        } else {
            ++separable_seen;
            CHECK(en == 0.0);
            // Simon is necessary and sufficient here, so no witness may fire
            CHECK(rep.duan_violation <= 1e-9);
        }
    }
    CHECK(entangled_seen > 10);
    CHECK(separable_seen > 10);
}

TEST_CASE("duan and mancini witnesses on the squeezed state and a thermal product") {
    const auto grid = default_duan_grid();
    const double r = 1.0;
    auto rep = separability_report(two_mode(tms_cm(r)), grid);
    CHECK(rep.simon_entangled);
    CHECK(rep.duan_violation > 0.0);
    // at a = 1 both EPR variances equal e^{-r}
    CHECK(rep.duan_best_a == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.mancini_violation > 0.0);

    RMat th(4, 4);
    th.set_block(0, 0, 3.0 * RMat::identity(2));
    th.set_block(2, 2, 1.5 * RMat::identity(2));
    auto rp = separability_report(two_mode(th), grid);
    CHECK_FALSE(rp.simon_entangled);
    CHECK(rp.duan_violation <= 0.0);
    CHECK(rp.mancini_violation <= 0.0);
}

TEST_CASE("entanglement of formation for symmetric states") {
    // separable symmetric state
    RMat th = 2.0 * RMat::identity(4);
    CHECK(eof_symmetric(two_mode(th)) == 0.0);

    // two-mode squeezed r: E_F equals the entropy of entanglement of the
    // squeezed state with r' = E_N / 2 = r / ... (E_N = 2 r'); direct series
    const double r = 1.0;
    const double en = log_negativity(two_mode(tms_cm(r))).e_n;
    const double rr = en / 2.0;
    double expect = 0.0;
    for (int n = 0; n < 2000; ++n) {
        const double cn2 = std::pow(std::tanh(rr), 2 * n) / (std::cosh(rr) * std::cosh(rr));
        if (cn2 < 1e-300) break;
        expect -= cn2 * std::log(cn2);
    }
    CHECK(eof_symmetric(two_mode(tms_cm(r))) == doctest::Approx(expect).epsilon(1e-10));

    RMat asym(4, 4);
    asym.set_block(0, 0, 2.0 * RMat::identity(2));
    asym.set_block(2, 2, 3.0 * RMat::identity(2));
    CHECK_THROWS_AS(eof_symmetric(two_mode(asym)), NotSymmetric);
}

TEST_CASE("phase-space functions") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        GaussianState s = random_physical_state(rng);
        CHECK(std::abs(eval_characteristic(s, {0, 0, 0, 0}) - Complex(1, 0)) < 1e-14);
    }
    GaussianState vac = GaussianState::vacuum(1);
    CHECK(eval_wigner(vac, {0.0, 0.0}) == doctest::Approx(1.0 / kPi).epsilon(1e-13));

    // normalization oracle: 2d Simpson quadrature of the Wigner function
    GaussianState sq = GaussianState::vacuum(1);
    sq.v = RMat(2, 2, {2.2, 0.4, 0.4, 0.6});
    sq.d = {0.3, -0.2};
    const int n = 240;
    const double span = 12.0, h = 2 * span / n;
    double total = 0;
    for (int i = 0; i <= n; ++i) {
        const double wx = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        for (int j = 0; j <= n; ++j) {
            const double wy = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            total += wx * wy * eval_wigner(sq, {-span + i * h, -span + j * h});
        }
    }
    total *= h * h / 9.0;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));

    GaussianState singular = vac;
    singular.v = RMat(2, 2, {1.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(eval_wigner(singular, {0.0, 0.0}), SingularCM);
}

TEST_CASE("purity via symplectic spectrum for symplectic images of vacuum") {
    std::mt19937 rng(55);
    for (int trial = 0; trial < 30; ++trial) {
        const RMat s = random_symplectic4(rng);
        GaussianState pure = two_mode(s * s.transpose());
        CHECK(determinant(pure.v) == doctest::Approx(1.0).epsilon(1e-8));
        for (double v : symplectic_spectrum(pure)) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
    }
}
