// Benchmark comparing the serial reference paths against the OpenMP kernels:
// the panel-parallel frequency quadrature and the grid-sweep engine.

#include <chrono>
#include <cstdio>

#include "cvsim/io.hpp"
#include "cvsim/optomech.hpp"
#include "cvsim/sweep.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cvsim;

namespace {

constexpr double kPi = 3.14159265358979323846;

double seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

OptomechConfig reference_config() {
    OptomechConfig cfg;
    cfg.omega_m = 2 * kPi * 10e6;
    cfg.quality = 1e5;
    cfg.mass = 50e-12;
    cfg.length = 1e-3;
    cfg.finesse = 2e4;
    cfg.wavelength = 810e-9;
    cfg.power = 30e-3;
    cfg.detuning_mode = DetuningMode::effective;
    cfg.detuning = cfg.omega_m;
    cfg.temperature = 0.4;
    return cfg;
}

} // namespace

int main() {
    const DerivedParams dp = derive_params(reference_config());
    const DriftModel model = drift_matrix(dp);
    const FilterSpec stokes{FilterShape::step, -dp.omega_m, 10.0, dp.omega_m};

#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    std::printf("benchmark (max threads: %d)\n\n", threads);

    // 1. output-mode covariance quadrature: serial panels vs parallel panels
    {
        {
            RMat warm = output_cm(model, {stokes}); // warm caches
            (void)warm;
        }
        double t_par = seconds([&] { output_cm(model, {stokes}); });
        RMat v_par = output_cm(model, {stokes});
        // serial reference: same integral with the panel loop pinned
        QuadratureSpec spec;
        spec.omega_max = 50.0 * std::max(dp.omega_m, dp.kappa);
        spec.abs_tol = 1e-10;
        spec.rel_tol = 1e-9;
        spec.max_subdiv = 800000;
        for (const Complex& e : eigenvalues(model.a)) spec.breakpoints.push_back(e.imag());
        spec.breakpoints.push_back(0.0);
        spec.breakpoints.push_back(stokes.center);
        spec.breakpoints.push_back(-stokes.center);
        spec.feature_width = model.gamma_m * 100;
        spec.parallel = false;
        double t_ser = seconds([&] { output_cm(model, {stokes}, false, &spec); });
        RMat v_ser = output_cm(model, {stokes}, false, &spec);
        std::printf("output-mode quadrature   serial %7.3f s   parallel %7.3f s   speedup %.2fx"
                    "   max|diff| %.2e\n",
                    t_ser, t_par, t_ser / t_par, (v_par - v_ser).max_abs());
    }

    // 2. sweep engine on the filtered-output entanglement metric (each grid
    //    point runs the quadrature serially inside its worker)
    {
        SweepAxis a1{"filter_center", -1.2, -0.8, 3};
        SweepAxis a2{"power", 20e-3, 40e-3, 3};
        SweepEval eval = [&](double c_over, double pwr) {
            OptomechConfig cfg = reference_config();
            cfg.power = pwr;
            SweepCell cell;
            const DerivedParams p = derive_params(cfg);
            if (!assess_stability(p).stable) {
                cell.metrics = {std::nan("")};
                cell.stable = false;
                return cell;
            }
            const DriftModel m = drift_matrix(p);
            const FilterSpec f{FilterShape::step, c_over * p.omega_m, 10.0, p.omega_m};
            // pin the inner quadrature serial so only the sweep engine differs
            QuadratureSpec spec;
            spec.omega_max = 50.0 * std::max({p.omega_m, p.kappa, std::abs(f.center)});
            spec.abs_tol = 1e-10;
            spec.rel_tol = 1e-9;
            spec.max_subdiv = 800000;
            for (const Complex& e : eigenvalues(m.a)) spec.breakpoints.push_back(e.imag());
            spec.breakpoints.push_back(0.0);
            spec.breakpoints.push_back(f.center);
            spec.breakpoints.push_back(-f.center);
            spec.feature_width = 1.0 / f.tau();
            spec.parallel = false;
            const RMat vo = output_cm(m, {f}, false, &spec);
            GaussianState s;
            s.modes = 2;
            s.d.assign(4, 0.0);
            s.v = vo;
            s.conv = Convention::VacuumHalf;
            cell.metrics = {log_negativity(s).e_n};
            return cell;
        };
        const std::vector<std::string> names{"E_N_output"};
        double t_ser = seconds([&] { run_sweep_serial(a1, a2, names, eval); });
        double t_par = seconds([&] { run_sweep_parallel(a1, a2, names, eval, 0); });
        const std::string s1 = run_sweep_serial(a1, a2, names, eval);
        const std::string s2 = run_sweep_parallel(a1, a2, names, eval, 0);
        std::printf("sweep engine (9 points)  serial %7.3f s   parallel %7.3f s   speedup %.2fx"
                    "   identical %s\n",
                    t_ser, t_par, t_ser / t_par, s1 == s2 ? "yes" : "NO");
    }
    return 0;
}
