#pragma once

#include "cvsim/optomech.hpp"

namespace cvsim {

/// Bichromatically driven cavity: shared geometry plus two lasers. The decay
/// rate kappa is common to both driven modes.
struct DualConfig {
    double omega_m = 0;
    double quality = 0;
    double mass = 0;
    double length = 0;
    double finesse = 0;
    double temperature = 0;
    double power_a = 0, power_b = 0;           // W
    double wavelength_a = 0, wavelength_b = 0; // m
    DetuningMode detuning_mode = DetuningMode::effective;
    double detuning_a = 0, detuning_b = 0;     // rad/s
};

struct DualSteadyState {
    double omega_m, gamma_m, kappa, nbar, temperature;
    double g0a, g0b;
    double e_a, e_b;         // drive strengths |E|
    double a_s, b_s;         // phase-fixed real amplitudes
    double q_s;              // static displacement (dimensionless)
    double delta_a, delta_b; // effective detunings
    double g_a, g_b;         // effective couplings
};

DualSteadyState steady_state_dual(const DualConfig& cfg);

/// Residuals of the stationarity equations (relative); all ~0 at a solution.
std::array<double, 3> steady_state_residuals(const DualSteadyState& ss);

/// 6x6 drift matrix in the order (dq, dp, dXA, dYA, dXB, dYB).
RMat drift_matrix_dual(const DualSteadyState& ss);

/// Markov diffusion diag[0, gamma_m(2 nbar + 1), kappa, kappa, kappa, kappa].
RMat diffusion_dual(const DualSteadyState& ss);

struct CharPolyCoeffs {
    std::array<double, 6> c; // x^6 + c1 x^5 + ... + c6
};
/// Closed-form characteristic coefficients of the 6x6 drift.
CharPolyCoeffs char_poly_coeffs(const DualSteadyState& ss);
/// Same coefficients extracted from an arbitrary matrix (Faddeev-LeVerrier).
CharPolyCoeffs char_poly_from_matrix(const RMat& a);

struct DualStability {
    bool stable;
    bool balanced; // |G_A| = |G_B| and Delta_A = -Delta_B
    double max_re; // largest eigenvalue real part
};
DualStability assess_stability_dual(const DualSteadyState& ss);

/// Two exponential filters with common bandwidth gamma.
std::pair<FilterSpec, FilterSpec> make_exp_filters(double omega_a, double omega_b,
                                                   double gamma, double omega_m);

/// Intracavity steady CM (6x6, VacuumHalf) via the Lyapunov route.
RMat intracavity_cm_dual(const DualSteadyState& ss);

/// Stationary CM of (mirror, filtered mode A, filtered mode B), VacuumHalf.
RMat output_cm_dual(const DualSteadyState& ss, const FilterSpec& filter_a,
                    const FilterSpec& filter_b, bool exact_thermal = false,
                    const QuadratureSpec* spec = nullptr);

/// Log-negativity of the (i, j) mode pair of a three-mode VacuumHalf CM
/// (modes indexed 0 = mirror, 1 = A, 2 = B).
double pair_log_negativity(const RMat& v6_half, int i, int j);

} // namespace cvsim
