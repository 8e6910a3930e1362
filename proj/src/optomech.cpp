#include "cvsim/optomech.hpp"

#include <algorithm>
#include <cmath>

namespace cvsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

double nbar_of(double omega_m, double temperature) {
    if (temperature <= 0) return 0.0;
    return 1.0 / std::expm1(constants::hbar * omega_m / (constants::kb * temperature));
}

} // namespace

DerivedParams derive_params(const OptomechConfig& cfg) {
    if (cfg.omega_m <= 0 || cfg.quality <= 0 || cfg.mass <= 0 || cfg.length <= 0 ||
        cfg.finesse <= 0 || cfg.wavelength <= 0 || cfg.power < 0 || cfg.temperature < 0)
        throw NonPositiveInput("derive_params: nonpositive configuration value");
    DerivedParams dp{};
    dp.omega_m = cfg.omega_m;
    dp.gamma_m = cfg.omega_m / cfg.quality;
    dp.temperature = cfg.temperature;
    dp.kappa = kPi * constants::c / (cfg.length * cfg.finesse);
    const double omega_c = 2.0 * kPi * constants::c / cfg.wavelength;
    dp.g0 = (omega_c / cfg.length) * std::sqrt(constants::hbar / (cfg.mass * cfg.omega_m));
    dp.nbar = nbar_of(cfg.omega_m, cfg.temperature);

    auto amplitude = [&](double delta) {
        const double omega_0 = omega_c - delta;
        const double e = std::sqrt(2.0 * cfg.power * dp.kappa / (constants::hbar * omega_0));
        return std::pair{e, e / std::sqrt(dp.kappa * dp.kappa + delta * delta)};
    };

    if (cfg.detuning_mode == DetuningMode::effective) {
        dp.delta = cfg.detuning;
        auto [e, alpha] = amplitude(dp.delta);
        dp.drive_e = e;
        dp.alpha_s = alpha;
    } else {
        // Delta = Delta0 - g0^2 alpha_s(Delta)^2 / omega_m, damped iteration
        double delta = cfg.detuning;
        bool converged = false;
        for (int it = 0; it < 10000; ++it) {
            auto [e, alpha] = amplitude(delta);
            (void)e;
            const double next = cfg.detuning - dp.g0 * dp.g0 * alpha * alpha / cfg.omega_m;
            const double upd = delta + 0.5 * (next - delta);
            if (std::abs(upd - delta) <= 1e-10 * std::max(1.0, std::abs(upd))) {
                delta = upd;
                converged = true;
                break;
            }
            delta = upd;
        }
        if (!converged) throw FixedPointDiverged("derive_params: detuning fixed point did not converge");
        dp.delta = delta;
        auto [e, alpha] = amplitude(delta);
        dp.drive_e = e;
        dp.alpha_s = alpha;
    }
    dp.g = dp.g0 * dp.alpha_s * std::sqrt(2.0);
    return dp;
}

DriftModel drift_matrix(const DerivedParams& dp) {
    DriftModel m{};
    m.omega_m = dp.omega_m;
    m.gamma_m = dp.gamma_m;
    m.kappa = dp.kappa;
    m.delta = dp.delta;
    m.g = dp.g;
    m.nbar = dp.nbar;
    m.temperature = dp.temperature;
    m.a = RMat(4, 4,
               {0, dp.omega_m, 0, 0,
                -dp.omega_m, -dp.gamma_m, dp.g, 0,
                0, 0, -dp.kappa, dp.delta,
                dp.g, 0, -dp.delta, -dp.kappa});
    m.d_markov = RMat::diag({0.0, dp.gamma_m * (2.0 * dp.nbar + 1.0), dp.kappa, dp.kappa});
    return m;
}

StabilityReport assess_stability_raw(double omega_m, double gamma_m, double kappa, double delta, double g) {
    StabilityReport r{};
    const double k2 = kappa * kappa;
    const double om2 = omega_m * omega_m;
    const double dm = omega_m - delta, dp_ = omega_m + delta;
    r.s1 = 2.0 * gamma_m * kappa *
               ((k2 + dm * dm) * (k2 + dp_ * dp_) +
                gamma_m * ((gamma_m + 2.0 * kappa) * (k2 + delta * delta) + 2.0 * kappa * om2)) +
           delta * omega_m * g * g * (gamma_m + 2.0 * kappa) * (gamma_m + 2.0 * kappa);
    r.s2 = omega_m * (k2 + delta * delta) - g * g * delta;
    r.stable = r.s1 > 0 && r.s2 > 0;
    return r;
}

StabilityReport assess_stability(const DerivedParams& dp) {
    return assess_stability_raw(dp.omega_m, dp.gamma_m, dp.kappa, dp.delta, dp.g);
}

double thermal_kernel(const DriftModel& model, double omega) {
    if (model.temperature <= 0) return model.gamma_m * std::abs(omega) / model.omega_m;
    const double x = constants::hbar * omega / (2.0 * constants::kb * model.temperature);
    if (std::abs(x) < 1e-6) {
        // omega coth(x) -> (2 kB T / hbar)(1 + x^2/3 + ...)
        const double flat = 2.0 * constants::kb * model.temperature / (constants::hbar * model.omega_m);
        return model.gamma_m * flat * (1.0 + x * x / 3.0);
    }
    return model.gamma_m * (omega / model.omega_m) / std::tanh(x);
}

namespace {

QuadratureSpec default_spec(const DriftModel& model) {
    QuadratureSpec spec;
    spec.omega_max = 50.0 * std::max({model.omega_m, model.kappa, std::abs(model.delta)});
    spec.abs_tol = 1e-10;
    spec.rel_tol = 1e-9;
    // narrow features sit at the drift eigenfrequencies with widths set by
    // the eigenvalue real parts
    double min_width = model.kappa;
    for (const Complex& e : eigenvalues(model.a)) {
        spec.breakpoints.push_back(e.imag());
        if (std::abs(e.real()) > 0) min_width = std::min(min_width, std::abs(e.real()));
    }
    spec.breakpoints.push_back(0.0);
    spec.feature_width = min_width;
    return spec;
}

CMat resolvent(const RMat& a, double omega) {
    const int n = a.rows();
    CMat m = to_complex(a);
    for (int i = 0; i < n; ++i) m(i, i) += Complex(0.0, omega);
    return inverse(m);
}

} // namespace

RMat steady_cm(const DriftModel& model, SteadyMethod method, const QuadratureSpec* spec_in) {
    for (const Complex& e : eigenvalues(model.a))
        if (e.real() >= 0) throw UnstableDrift("steady_cm: drift matrix is not Hurwitz");
    if (method == SteadyMethod::lyapunov) return solve_lyapunov(model.a, model.d_markov);
    QuadratureSpec spec = spec_in ? *spec_in : default_spec(model);
    const bool exact = method == SteadyMethod::spectral_exact;
    const double wcap = spec.omega_max; // the coth kernel grows linearly; freeze it past the cutoff
    auto f = [&, wcap](double omega) {
        CMat mt = resolvent(model.a, omega);
        RMat d = model.d_markov;
        if (exact) d(1, 1) = thermal_kernel(model, std::clamp(omega, -wcap, wcap));
        return mt * to_complex(d) * adjoint(mt) * Complex(1.0 / (2.0 * kPi), 0.0);
    };
    RMat v = integrate_matrix_real(f, spec);
    return 0.5 * (v + v.transpose());
}

IntracavityReport intracavity_report(const RMat& v, const DriftModel& model) {
    IntracavityReport rep{};
    GaussianState st;
    st.modes = 2;
    st.d.assign(4, 0.0);
    st.v = v;
    st.conv = Convention::VacuumHalf;
    rep.e_n = log_negativity(st).e_n;
    rep.n_eff = 0.5 * (v(0, 0) + v(1, 1) - 1.0);
    const double g2k = model.g * model.g * model.kappa / 2.0;
    rep.a_plus = g2k / (model.kappa * model.kappa + (model.delta + model.omega_m) * (model.delta + model.omega_m));
    rep.a_minus = g2k / (model.kappa * model.kappa + (model.delta - model.omega_m) * (model.delta - model.omega_m));
    rep.cool_rate = rep.a_minus - rep.a_plus;
    rep.n_eff_perturbative = (model.gamma_m * model.nbar + rep.a_plus) / (model.gamma_m + rep.cool_rate);
    return rep;
}

Complex filter_transform(const FilterSpec& f, double omega) {
    if (f.shape == FilterShape::step) {
        const double tau = f.tau();
        const double x = (omega - f.center) * tau / 2.0;
        const double sinc = (std::abs(x) < 1e-8) ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        return std::sqrt(tau / (2.0 * kPi)) * std::exp(Complex(0.0, x)) * sinc;
    }
    const double g = f.gamma();
    return std::sqrt(g / kPi) / Complex(g, f.center - omega);
}

Complex filter_overlap(const FilterSpec& f1, const FilterSpec& f2) {
    // integral over t >= 0 of g1(t)* g2(t)
    if (f1.shape == FilterShape::step && f2.shape == FilterShape::step) {
        const double t1 = f1.tau(), t2 = f2.tau();
        const double tmin = std::min(t1, t2);
        const double dw = f2.center - f1.center; // g1* g2 ~ e^{-i dw t}
        if (std::abs(dw) < 1e-300) return Complex(tmin / std::sqrt(t1 * t2), 0.0);
        const Complex num = std::exp(Complex(0.0, -dw * tmin)) - 1.0;
        return num / Complex(0.0, -dw) / std::sqrt(t1 * t2);
    }
    if (f1.shape == FilterShape::exponential && f2.shape == FilterShape::exponential) {
        const double g1 = f1.gamma(), g2 = f2.gamma();
        const double dw = f2.center - f1.center;
        return 2.0 * std::sqrt(g1 * g2) / Complex(g1 + g2, dw);
    }
    // mixed shapes: finite-interval closed form
    const FilterSpec& st = (f1.shape == FilterShape::step) ? f1 : f2;
    const FilterSpec& ex = (f1.shape == FilterShape::step) ? f2 : f1;
    const bool conj_first = (f1.shape == FilterShape::step);
    const double tau = st.tau(), g = ex.gamma();
    const double dw = conj_first ? (ex.center - st.center) : (st.center - ex.center);
    const Complex rate(-g, -dw);
    const Complex integral = (std::exp(rate * tau) - 1.0) / rate;
    return std::sqrt(2.0 * g / tau) * integral;
}

double filter_norm_quadrature(const FilterSpec& f) {
    if (f.shape == FilterShape::exponential) {
        const double g = f.gamma();
        QuadratureSpec spec;
        spec.omega_max = std::max(50.0 * g, 50.0 * std::abs(f.center));
        spec.abs_tol = 1e-10;
        spec.rel_tol = 1e-10;
        spec.breakpoints = {f.center};
        spec.feature_width = g;
        auto fn = [&](double w) {
            CMat m(1, 1);
            m(0, 0) = std::norm(filter_transform(f, w));
            return m;
        };
        return integrate_matrix_real(fn, spec)(0, 0);
    }
    // step filter: |g~|^2 dw = (1/pi) sinc^2(x) dx. Integrate bump by bump
    // between the zeros, then add the asymptotic remainder
    // 1/(2X) + sin(2X)/(4X^2) + O(X^-3) on each side.
    const int bumps = 400;
    double acc = 0;
    const int sub = 16;
    auto sinc2 = [](double x) {
        if (std::abs(x) < 1e-8) return 1.0 - x * x / 3.0;
        const double s = std::sin(x) / x;
        return s * s;
    };
    for (int k = -bumps; k < bumps; ++k) {
        const double a = k * kPi, b = (k + 1) * kPi;
        const double h = (b - a) / sub;
        double simp = sinc2(a) + sinc2(b);
        for (int i = 1; i < sub; ++i) simp += (i % 2 ? 4.0 : 2.0) * sinc2(a + i * h);
        acc += simp * h / 3.0;
    }
    const double x_edge = bumps * kPi;
    const double tail = 1.0 / (2.0 * x_edge) + std::sin(2.0 * x_edge) / (4.0 * x_edge * x_edge);
    return (acc + 2.0 * tail) / kPi;
}

FilterSet make_filters(const std::vector<FilterSpec>& specs, bool require_orthogonal) {
    FilterSet set;
    set.filters = specs;
    const int n = static_cast<int>(specs.size());
    set.overlap = CMat(n, n);
    for (int i = 0; i < n; ++i) {
        if (specs[static_cast<size_t>(i)].epsilon <= 0 || specs[static_cast<size_t>(i)].omega_m <= 0)
            throw DomainError("make_filters: epsilon and omega_m must be positive");
        for (int j = 0; j < n; ++j)
            set.overlap(i, j) = filter_overlap(specs[static_cast<size_t>(i)], specs[static_cast<size_t>(j)]);
    }
    for (int i = 0; i < n; ++i) {
        if (std::abs(set.overlap(i, i) - 1.0) > 1e-10)
            throw DomainError("make_filters: filter not normalized");
        if (require_orthogonal)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(set.overlap(i, j)) > 1e-8)
                    throw NotOrthogonal("make_filters: filters are not independent");
    }
    return set;
}

namespace {

// Extended drift for the replicated-cavity construction: the mechanical rows
// couple to the first copy only; every copy sees the mirror.
RMat extended_drift(const DriftModel& m, int n_filters) {
    const int n = 2 * n_filters + 2;
    RMat a(n, n);
    a(0, 1) = m.omega_m;
    a(1, 0) = -m.omega_m;
    a(1, 1) = -m.gamma_m;
    a(1, 2) = m.g;
    for (int k = 0; k < n_filters; ++k) {
        const int i = 2 + 2 * k;
        a(i, i) = -m.kappa;
        a(i, i + 1) = m.delta;
        a(i + 1, i) = -m.delta;
        a(i + 1, i + 1) = -m.kappa;
        a(i + 1, 0) = m.g;
    }
    return a;
}

RMat extended_diffusion(const DriftModel& m, int n_filters, double d22) {
    const int n = 2 * n_filters + 2;
    RMat d(n, n);
    d(1, 1) = d22;
    for (int j = 0; j < n_filters; ++j)
        for (int k = 0; k < n_filters; ++k) {
            d(2 + 2 * j, 2 + 2 * k) = m.kappa; // copies share one input field
            d(3 + 2 * j, 3 + 2 * k) = m.kappa;
        }
    return d;
}

// 2x2 block representing multiplication by the (complex) filter response in
// the quadrature basis, Fourier side.
CMat filter_block(const FilterSpec& f, double omega, double kappa) {
    const Complex a = filter_transform(f, omega);
    const Complex b = std::conj(filter_transform(f, -omega));
    const Complex apb = 0.5 * (a + b);
    const Complex amb = Complex(0.0, 0.5) * (a - b);
    CMat blk(2, 2);
    blk(0, 0) = apb;
    blk(0, 1) = amb;
    blk(1, 0) = -amb;
    blk(1, 1) = apb;
    return std::sqrt(2.0 * kappa) * blk;
}

CMat transfer_matrix(const std::vector<FilterSpec>& filters, double omega, double kappa) {
    const int nf = static_cast<int>(filters.size());
    const int n = 2 * nf + 2;
    CMat t(n, n);
    const Complex mech(1.0 / std::sqrt(2.0 * kPi), 0.0);
    t(0, 0) = mech;
    t(1, 1) = mech;
    for (int k = 0; k < nf; ++k)
        t.set_block(2 + 2 * k, 2 + 2 * k, filter_block(filters[static_cast<size_t>(k)], omega, kappa));
    return t;
}

QuadratureSpec output_spec(const DriftModel& model, const std::vector<FilterSpec>& filters) {
    QuadratureSpec spec = default_spec(model);
    double min_bw = spec.feature_width;
    for (const FilterSpec& f : filters) {
        spec.breakpoints.push_back(f.center);
        spec.breakpoints.push_back(-f.center);
        const double bw = (f.shape == FilterShape::step) ? 1.0 / f.tau() : f.gamma();
        min_bw = std::min(min_bw, bw);
        spec.omega_max = std::max(spec.omega_max, 50.0 * std::abs(f.center));
    }
    spec.feature_width = min_bw;
    spec.max_subdiv = 800000;
    return spec;
}

} // namespace

RMat output_cm(const DriftModel& model, const std::vector<FilterSpec>& filters,
               bool exact_thermal, const QuadratureSpec* spec_in) {
    for (const Complex& e : eigenvalues(model.a))
        if (e.real() >= 0) throw UnstableDrift("output_cm: drift matrix is not Hurwitz");
    make_filters(filters, filters.size() > 1); // modes must be independent
    const int nf = static_cast<int>(filters.size());
    const int n = 2 * nf + 2;
    const RMat a_ext = extended_drift(model, nf);
    QuadratureSpec spec = spec_in ? *spec_in : output_spec(model, filters);
    // the vacuum passthrough of the filters is exactly P_out/2; the remaining
    // two terms decay fast enough for the panel quadrature
    RMat p_out(n, n);
    for (int i = 2; i < n; ++i) p_out(i, i) = 1.0;
    const RMat r_const = extended_diffusion(model, nf, 0.0) * (1.0 / model.kappa); // P D / kappa, mech row zero
    const double wcap = spec.omega_max;
    auto f = [&, wcap](double omega) {
        const double d22 = exact_thermal ? thermal_kernel(model, std::clamp(omega, -wcap, wcap))
                                         : model.gamma_m * (2.0 * model.nbar + 1.0);
        const RMat d_ext = extended_diffusion(model, nf, d22);
        CMat mt(n, n);
        {
            CMat m = to_complex(a_ext);
            for (int i = 0; i < n; ++i) m(i, i) += Complex(0.0, omega);
            mt = inverse(m);
        }
        const CMat t = transfer_matrix(filters, omega, model.kappa);
        const CMat td = adjoint(t);
        const CMat core = mt * to_complex(d_ext) * adjoint(mt);
        const CMat cross = mt * to_complex(r_const) + to_complex(r_const) * adjoint(mt);
        return t * (core + 0.5 * cross) * td;
    };
    RMat v = integrate_matrix_real(f, spec);
    v += 0.5 * p_out;
    return 0.5 * (v + v.transpose());
}

RMat output_projector_identity(const std::vector<FilterSpec>& filters, double kappa,
                               const QuadratureSpec* spec_in) {
    const int nf = static_cast<int>(filters.size());
    const int n = 2 * nf + 2;
    QuadratureSpec spec;
    if (spec_in) {
        spec = *spec_in;
    } else {
        double wmax = 0, bw = 1e300, om = 0;
        for (const FilterSpec& f : filters) {
            om = std::max(om, std::abs(f.center) + f.omega_m);
            bw = std::min(bw, (f.shape == FilterShape::step) ? 1.0 / f.tau() : f.gamma());
        }
        // the truncated tail of |g|^2 scales like 1/(pi tau W); reach far out
        wmax = std::max(4000.0 * bw, 40.0 * om);
        spec.omega_max = wmax;
        spec.abs_tol = 1e-9;
        spec.rel_tol = 1e-8;
        spec.max_subdiv = 1200000;
        for (const FilterSpec& f : filters) {
            spec.breakpoints.push_back(f.center);
            spec.breakpoints.push_back(-f.center);
        }
        spec.feature_width = bw;
    }
    RMat dopt(n, n);
    for (int j = 0; j < nf; ++j)
        for (int k = 0; k < nf; ++k) {
            dopt(2 + 2 * j, 2 + 2 * k) = kappa;
            dopt(3 + 2 * j, 3 + 2 * k) = kappa;
        }
    auto f = [&](double omega) {
        const CMat t = transfer_matrix(filters, omega, kappa);
        return t * to_complex(dopt) * adjoint(t) * Complex(1.0 / (4.0 * kappa * kappa), 0.0);
    };
    return integrate_matrix_real(f, spec);
}

std::vector<double> output_spectrum(const DriftModel& model, const std::vector<double>& omega_grid) {
    for (const Complex& e : eigenvalues(model.a))
        if (e.real() >= 0) throw UnstableDrift("output_spectrum: drift matrix is not Hurwitz");
    std::vector<double> out;
    out.reserve(omega_grid.size());
    for (double omega : omega_grid) {
        const CMat mt = resolvent(model.a, omega);
        // non-symmetrized noise spectra: optical vacuum ordering carries the
        // i kappa block; mechanical kernel gets the antisymmetric +omega part
        CMat cn(4, 4);
        cn(1, 1) = thermal_kernel(model, omega) + model.gamma_m * omega / model.omega_m;
        cn(2, 2) = model.kappa;
        cn(3, 3) = model.kappa;
        cn(2, 3) = Complex(0.0, model.kappa);
        cn(3, 2) = Complex(0.0, -model.kappa);
        const CMat phi = mt * cn * adjoint(mt);
        const Complex s = 0.5 * (phi(2, 2) + phi(3, 3) + Complex(0, 1) * phi(2, 3) - Complex(0, 1) * phi(3, 2));
        out.push_back(std::max(0.0, s.real()));
    }
    return out;
}

std::array<double, 3> tripartite_min_pt(const RMat& v6_half) {
    if (v6_half.rows() != 6 || v6_half.cols() != 6)
        throw DimensionMismatch("tripartite_min_pt: 6x6 CM required");
    const RMat v1 = 2.0 * v6_half; // VacuumOne
    const RMat om = symplectic_form(3);
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) {
        const RMat lam = pt_mask(3, {k});
        const RMat pt = lam * v1 * lam;
        CMat test = to_complex(pt);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) test(i, j) += Complex(0.0, om(i, j));
        out[static_cast<size_t>(k)] = hermitian_spectrum(test).front();
    }
    return out;
}

MembraneSplit membrane_split(const MembraneSpec& spec) {
    if (spec.reflectivity <= 0 || spec.reflectivity >= 1)
        throw DomainError("membrane_split: reflectivity must lie in (0,1)");
    const double el = spec.half_length;
    const double sqrt_r = std::sqrt(spec.reflectivity);
    const double omega_n = spec.mode_index * kPi * constants::c / el;
    const double k_n = omega_n / constants::c;
    const double cos2 = std::cos(2.0 * k_n * spec.rest_position);
    const double sin2 = std::sin(2.0 * k_n * spec.rest_position);
    const double denom = 1.0 / spec.reflectivity - cos2 * cos2;
    if (denom <= 0) throw DomainError("membrane_split: coupling factor undefined");
    MembraneSplit out{};
    out.delta_minus = constants::c / (2.0 * el) * (std::asin(sqrt_r) - std::asin(sqrt_r * cos2));
    out.delta_plus = constants::c / (2.0 * el) * (kPi - std::asin(sqrt_r * cos2) - std::asin(sqrt_r));
    out.f = sin2 / std::sqrt(denom);
    // self-consistent split frequencies: the shift formulas hold with the wave
    // vector of the solution itself
    auto lower = [&](double w) {
        const double cc = std::cos(2.0 * (w / constants::c) * spec.rest_position);
        return w - omega_n - constants::c / (2.0 * el) * (std::asin(sqrt_r * cc) - std::asin(sqrt_r));
    };
    auto upper = [&](double w) {
        const double cc = std::cos(2.0 * (w / constants::c) * spec.rest_position);
        return w - omega_n - constants::c / (2.0 * el) * (kPi - std::asin(sqrt_r * cc) - std::asin(sqrt_r));
    };
    const double fsr = kPi * constants::c / el;
    out.omega_minus = find_root(lower, omega_n - 0.49 * fsr, omega_n + 0.49 * fsr, 1e-9);
    try {
        out.omega_plus = find_root(upper, omega_n + 1e-9 * fsr, omega_n + 0.99 * fsr, 1e-9);
    } catch (const NoBracket&) {
        out.omega_plus = omega_n + out.delta_plus; // degenerate R -> 1, q0 -> 0 corner
    }
    return out;
}

double membrane_eigenmode_residual(const MembraneSpec& spec, double omega) {
    const double k = omega / constants::c;
    const double t = (spec.transmissivity > 0) ? spec.transmissivity : 1.0 - spec.reflectivity;
    return 1.0 / std::tan(k * (spec.half_length + spec.rest_position)) +
           1.0 / std::tan(k * (spec.half_length - spec.rest_position)) -
           2.0 * std::sqrt(spec.reflectivity / t);
}

} // namespace cvsim
