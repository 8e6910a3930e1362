#include "cvsim/dual.hpp"

#include <algorithm>
#include <cmath>

namespace cvsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

DualSteadyState steady_state_dual(const DualConfig& cfg) {
    if (cfg.omega_m <= 0 || cfg.quality <= 0 || cfg.mass <= 0 || cfg.length <= 0 ||
        cfg.finesse <= 0 || cfg.wavelength_a <= 0 || cfg.wavelength_b <= 0 ||
        cfg.power_a < 0 || cfg.power_b < 0 || cfg.temperature < 0)
        throw NonPositiveInput("steady_state_dual: nonpositive configuration value");
    DualSteadyState ss{};
    ss.omega_m = cfg.omega_m;
    ss.gamma_m = cfg.omega_m / cfg.quality;
    ss.temperature = cfg.temperature;
    ss.kappa = kPi * constants::c / (cfg.length * cfg.finesse);
    ss.nbar = (cfg.temperature > 0)
                  ? 1.0 / std::expm1(constants::hbar * cfg.omega_m / (constants::kb * cfg.temperature))
                  : 0.0;
    const double wca = 2.0 * kPi * constants::c / cfg.wavelength_a;
    const double wcb = 2.0 * kPi * constants::c / cfg.wavelength_b;
    ss.g0a = (wca / cfg.length) * std::sqrt(constants::hbar / (cfg.mass * cfg.omega_m));
    ss.g0b = (wcb / cfg.length) * std::sqrt(constants::hbar / (cfg.mass * cfg.omega_m));

    auto amplitudes = [&](double da, double db) {
        const double ea = std::sqrt(2.0 * cfg.power_a * ss.kappa / (constants::hbar * (wca - da)));
        const double eb = std::sqrt(2.0 * cfg.power_b * ss.kappa / (constants::hbar * (wcb - db)));
        const double as = ea / std::sqrt(ss.kappa * ss.kappa + da * da);
        const double bs = eb / std::sqrt(ss.kappa * ss.kappa + db * db);
        return std::array<double, 4>{ea, eb, as, bs};
    };

    if (cfg.detuning_mode == DetuningMode::effective) {
        ss.delta_a = cfg.detuning_a;
        ss.delta_b = cfg.detuning_b;
        auto [ea, eb, as, bs] = amplitudes(ss.delta_a, ss.delta_b);
        ss.e_a = ea;
        ss.e_b = eb;
        ss.a_s = as;
        ss.b_s = bs;
    } else {
        double da = cfg.detuning_a, db = cfg.detuning_b;
        bool converged = false;
        for (int it = 0; it < 20000; ++it) {
            auto [ea, eb, as, bs] = amplitudes(da, db);
            (void)ea;
            (void)eb;
            const double qs = (ss.g0a * as * as + ss.g0b * bs * bs) / cfg.omega_m;
            const double na = cfg.detuning_a - ss.g0a * qs;
            const double nb = cfg.detuning_b - ss.g0b * qs;
            const double ua = da + 0.5 * (na - da);
            const double ub = db + 0.5 * (nb - db);
            if (std::abs(ua - da) <= 1e-12 * std::max(1.0, std::abs(ua)) &&
                std::abs(ub - db) <= 1e-12 * std::max(1.0, std::abs(ub))) {
                da = ua;
                db = ub;
                converged = true;
                break;
            }
            da = ua;
            db = ub;
        }
        if (!converged) throw FixedPointDiverged("steady_state_dual: detuning fixed point did not converge");
        ss.delta_a = da;
        ss.delta_b = db;
        auto [ea, eb, as, bs] = amplitudes(da, db);
        ss.e_a = ea;
        ss.e_b = eb;
        ss.a_s = as;
        ss.b_s = bs;
    }
    ss.q_s = (ss.g0a * ss.a_s * ss.a_s + ss.g0b * ss.b_s * ss.b_s) / cfg.omega_m;
    ss.g_a = ss.g0a * ss.a_s * std::sqrt(2.0);
    ss.g_b = ss.g0b * ss.b_s * std::sqrt(2.0);
    return ss;
}

std::array<double, 3> steady_state_residuals(const DualSteadyState& ss) {
    const double mod_a = std::sqrt(ss.kappa * ss.kappa + ss.delta_a * ss.delta_a);
    const double mod_b = std::sqrt(ss.kappa * ss.kappa + ss.delta_b * ss.delta_b);
    const double ra = (ss.e_a > 0) ? std::abs(ss.a_s * mod_a - ss.e_a) / ss.e_a : std::abs(ss.a_s);
    const double rb = (ss.e_b > 0) ? std::abs(ss.b_s * mod_b - ss.e_b) / ss.e_b : std::abs(ss.b_s);
    const double qs = (ss.g0a * ss.a_s * ss.a_s + ss.g0b * ss.b_s * ss.b_s) / ss.omega_m;
    const double rq = (qs != 0.0) ? std::abs(ss.q_s - qs) / std::abs(qs) : std::abs(ss.q_s);
    return {ra, rb, rq};
}

RMat drift_matrix_dual(const DualSteadyState& ss) {
    RMat a(6, 6);
    a(0, 1) = ss.omega_m;
    a(1, 0) = -ss.omega_m;
    a(1, 1) = -ss.gamma_m;
    a(1, 2) = ss.g_a;
    a(1, 4) = ss.g_b;
    a(2, 2) = -ss.kappa;
    a(2, 3) = ss.delta_a;
    a(3, 2) = -ss.delta_a;
    a(3, 3) = -ss.kappa;
    a(3, 0) = ss.g_a;
    a(4, 4) = -ss.kappa;
    a(4, 5) = ss.delta_b;
    a(5, 4) = -ss.delta_b;
    a(5, 5) = -ss.kappa;
    a(5, 0) = ss.g_b;
    return a;
}

RMat diffusion_dual(const DualSteadyState& ss) {
    return RMat::diag({0.0, ss.gamma_m * (2.0 * ss.nbar + 1.0), ss.kappa, ss.kappa, ss.kappa, ss.kappa});
}

CharPolyCoeffs char_poly_coeffs(const DualSteadyState& ss) {
    const double gm = ss.gamma_m, k = ss.kappa, wm = ss.omega_m;
    const double da = ss.delta_a, db = ss.delta_b, ga = ss.g_a, gb = ss.g_b;
    const double k2 = k * k, wm2 = wm * wm, da2 = da * da, db2 = db * db;
    const double gmix = ga * ga * da + gb * gb * db;
    CharPolyCoeffs out{};
    out.c[0] = gm + 4.0 * k;
    out.c[1] = da2 + db2 + 4.0 * gm * k + 6.0 * k2 + wm2;
    out.c[2] = gm * (da2 + db2 + 6.0 * k2) + 2.0 * k * (da2 + db2 + 2.0 * (k2 + wm2));
    out.c[3] = k2 * k2 + 2.0 * gm * k * (db2 + 2.0 * k2) + 6.0 * k2 * wm2 + db2 * (k2 + wm2) +
               da2 * (db2 + 2.0 * gm * k + k2 + wm2) - wm * gmix;
    out.c[4] = gm * (da2 + k2) * (db2 + k2) + 2.0 * k * wm2 * (da2 + db2 + 2.0 * k2) -
               2.0 * k * wm * gmix;
    out.c[5] = wm2 * (da2 + k2) * (db2 + k2) -
               wm * (gb * gb * db * (da2 + k2) + ga * ga * da * (db2 + k2));
    return out;
}

CharPolyCoeffs char_poly_from_matrix(const RMat& a) {
    const int n = a.rows();
    if (n != 6 || a.cols() != 6) throw DimensionMismatch("char_poly_from_matrix: 6x6 matrix required");
    // Faddeev-LeVerrier: M1 = A, c1 = -tr M1; Mk = A(M_{k-1} + c_{k-1} I)
    CharPolyCoeffs out{};
    RMat m = a;
    double c = -m.trace();
    out.c[0] = c;
    for (int k = 2; k <= n; ++k) {
        m = a * (m + c * RMat::identity(n));
        c = -m.trace() / k;
        out.c[static_cast<size_t>(k - 1)] = c;
    }
    return out;
}

DualStability assess_stability_dual(const DualSteadyState& ss) {
    DualStability out{};
    const double scale = std::max({std::abs(ss.g_a), std::abs(ss.g_b), std::abs(ss.delta_a), 1.0});
    out.balanced = std::abs(std::abs(ss.g_a) - std::abs(ss.g_b)) <= 1e-9 * scale &&
                   std::abs(ss.delta_a + ss.delta_b) <= 1e-9 * scale;
    double mr = -1e300;
    for (const Complex& e : eigenvalues(drift_matrix_dual(ss))) mr = std::max(mr, e.real());
    out.max_re = mr;
    out.stable = mr < 0;
    return out;
}

std::pair<FilterSpec, FilterSpec> make_exp_filters(double omega_a, double omega_b,
                                                   double gamma, double omega_m) {
    if (gamma <= 0 || omega_m <= 0) throw DomainError("make_exp_filters: gamma and omega_m must be positive");
    FilterSpec fa{FilterShape::exponential, omega_a, omega_m / gamma, omega_m};
    FilterSpec fb{FilterShape::exponential, omega_b, omega_m / gamma, omega_m};
    return {fa, fb};
}

RMat intracavity_cm_dual(const DualSteadyState& ss) {
    return solve_lyapunov(drift_matrix_dual(ss), diffusion_dual(ss));
}

RMat output_cm_dual(const DualSteadyState& ss, const FilterSpec& filter_a,
                    const FilterSpec& filter_b, bool exact_thermal,
                    const QuadratureSpec* spec_in) {
    const RMat a = drift_matrix_dual(ss);
    for (const Complex& e : eigenvalues(a))
        if (e.real() >= 0) throw UnstableDrift("output_cm_dual: drift matrix is not Hurwitz");
    QuadratureSpec spec;
    if (spec_in) {
        spec = *spec_in;
    } else {
        spec.omega_max = 50.0 * std::max({ss.omega_m, ss.kappa, std::abs(ss.delta_a), std::abs(ss.delta_b),
                                          std::abs(filter_a.center), std::abs(filter_b.center)});
        spec.abs_tol = 1e-10;
        spec.rel_tol = 1e-9;
        spec.max_subdiv = 800000;
        double min_width = ss.kappa;
        for (const Complex& e : eigenvalues(a)) {
            spec.breakpoints.push_back(e.imag());
            if (std::abs(e.real()) > 0) min_width = std::min(min_width, std::abs(e.real()));
        }
        for (const FilterSpec* f : {&filter_a, &filter_b}) {
            spec.breakpoints.push_back(f->center);
            spec.breakpoints.push_back(-f->center);
            min_width = std::min(min_width, f->gamma());
        }
        spec.breakpoints.push_back(0.0);
        spec.feature_width = min_width;
    }
    RMat p_out(6, 6);
    for (int i = 2; i < 6; ++i) p_out(i, i) = 1.0;
    // P D / kappa: unit blocks on the optical diagonal, no cross terms
    RMat r_const(6, 6);
    for (int i = 2; i < 6; ++i) r_const(i, i) = 1.0;
    const double d22_markov = ss.gamma_m * (2.0 * ss.nbar + 1.0);
    DriftModel kernel_helper{};
    kernel_helper.gamma_m = ss.gamma_m;
    kernel_helper.omega_m = ss.omega_m;
    kernel_helper.nbar = ss.nbar;
    kernel_helper.temperature = ss.temperature;
    const double wcap = spec.omega_max; // freeze the growing coth kernel past the cutoff
    auto f = [&, wcap](double omega) {
        RMat d = diffusion_dual(ss);
        if (exact_thermal) d(1, 1) = thermal_kernel(kernel_helper, std::clamp(omega, -wcap, wcap));
        else d(1, 1) = d22_markov;
        CMat m = to_complex(a);
        for (int i = 0; i < 6; ++i) m(i, i) += Complex(0.0, omega);
        const CMat mt = inverse(m);
        CMat t(6, 6);
        const Complex mech(1.0 / std::sqrt(2.0 * kPi), 0.0);
        t(0, 0) = mech;
        t(1, 1) = mech;
        auto blk = [&](const FilterSpec& fs) {
            const Complex av = filter_transform(fs, omega);
            const Complex bv = std::conj(filter_transform(fs, -omega));
            CMat b(2, 2);
            b(0, 0) = 0.5 * (av + bv);
            b(0, 1) = Complex(0.0, 0.5) * (av - bv);
            b(1, 0) = -b(0, 1);
            b(1, 1) = b(0, 0);
            return std::sqrt(2.0 * ss.kappa) * b;
        };
        t.set_block(2, 2, blk(filter_a));
        t.set_block(4, 4, blk(filter_b));
        const CMat core = mt * to_complex(d) * adjoint(mt);
        const CMat cross = mt * to_complex(r_const) + to_complex(r_const) * adjoint(mt);
        return t * (core + 0.5 * cross) * adjoint(t);
    };
    RMat v = integrate_matrix_real(f, spec);
    v += 0.5 * p_out;
    return 0.5 * (v + v.transpose());
}

double pair_log_negativity(const RMat& v6_half, int i, int j) {
    if (i == j || i < 0 || j < 0 || i > 2 || j > 2)
        throw DimensionMismatch("pair_log_negativity: need two distinct modes in 0..2");
    GaussianState s;
    s.modes = 2;
    s.d.assign(4, 0.0);
    s.conv = Convention::VacuumHalf;
    s.v = RMat(4, 4);
    s.v.set_block(0, 0, v6_half.block(2 * i, 2 * i, 2, 2));
    s.v.set_block(2, 2, v6_half.block(2 * j, 2 * j, 2, 2));
    s.v.set_block(0, 2, v6_half.block(2 * i, 2 * j, 2, 2));
    s.v.set_block(2, 0, v6_half.block(2 * j, 2 * i, 2, 2));
    return log_negativity(s).e_n;
}

} // namespace cvsim
