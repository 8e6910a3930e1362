#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cvsim/gaussian.hpp"

namespace cvsim {

namespace constants {
inline constexpr double c = 299792458.0;        // m/s
inline constexpr double hbar = 1.054571817e-34; // J s
inline constexpr double kb = 1.380649e-23;      // J/K
} // namespace constants

enum class DetuningMode { effective, bare };

/// Cavity + movable mirror, single driving laser. SI units; omega_m in rad/s.
struct OptomechConfig {
    double omega_m = 0;
    double quality = 0;     // gamma_m = omega_m / Q
    double mass = 0;        // kg
    double length = 0;      // m
    double finesse = 0;
    double wavelength = 0;  // m
    double power = 0;       // W
    DetuningMode detuning_mode = DetuningMode::effective;
    double detuning = 0;    // rad/s; effective Delta or bare Delta_0
    double temperature = 0; // K
};

struct DerivedParams {
    double omega_m, gamma_m, temperature;
    double kappa;   // pi c / (L F)
    double g0;      // (omega_c / L) sqrt(hbar / (m omega_m))
    double drive_e; // |E| = sqrt(2 P kappa / hbar omega_0)
    double alpha_s; // intracavity amplitude, phase-fixed real
    double delta;   // effective detuning
    double g;       // g0 * alpha_s * sqrt(2)
    double nbar;    // thermal phonon number
};

DerivedParams derive_params(const OptomechConfig& cfg);

/// Linearized drift/diffusion data. Quadrature order (dq, dp, dX, dY),
/// VacuumHalf convention throughout.
struct DriftModel {
    RMat a;        // 4x4 drift
    RMat d_markov; // diag[0, gamma_m (2 nbar + 1), kappa, kappa]
    double omega_m, gamma_m, kappa, delta, g, nbar, temperature;
};

DriftModel drift_matrix(const DerivedParams& dp);

/// Routh-Hurwitz data for the 4x4 drift.
struct StabilityReport {
    double s1, s2;
    bool stable;
};
StabilityReport assess_stability(const DerivedParams& dp);
StabilityReport assess_stability_raw(double omega_m, double gamma_m, double kappa, double delta, double g);

enum class SteadyMethod { lyapunov, spectral_markov, spectral_exact };

/// Exact mechanical diffusion entry gamma_m (omega/omega_m) coth(hbar omega / 2 kB T).
double thermal_kernel(const DriftModel& model, double omega);

/// Steady-state 4x4 CM (VacuumHalf). The two spectral methods integrate the
/// frequency-domain solution; the Markov one must agree with the Lyapunov
/// route to quadrature accuracy.
RMat steady_cm(const DriftModel& model, SteadyMethod method,
               const QuadratureSpec* spec = nullptr);

struct IntracavityReport {
    double e_n;
    double n_eff;    // (V11 + V22 - 1)/2
    double a_plus;   // Stokes scattering rate
    double a_minus;  // anti-Stokes scattering rate
    double cool_rate;             // A- - A+
    double n_eff_perturbative;    // (gamma_m nbar + A+)/(gamma_m + cool_rate)
};
IntracavityReport intracavity_report(const RMat& v, const DriftModel& model);

enum class FilterShape { step, exponential };

/// Causal output-mode filter. Center frequency in the rotating frame;
/// epsilon = omega_m * tau (step) or omega_m / gamma (exponential) fixes the
/// bandwidth relative to the mechanical frequency.
struct FilterSpec {
    FilterShape shape = FilterShape::step;
    double center = 0;  // rad/s
    double epsilon = 0; // dimensionless bandwidth parameter
    double omega_m = 0; // reference frequency defining epsilon

    double tau() const { return epsilon / omega_m; }    // step duration
    double gamma() const { return omega_m / epsilon; }  // exponential decay
};

/// Fourier transform of the filter amplitude (unitary 1/sqrt(2 pi) convention).
Complex filter_transform(const FilterSpec& f, double omega);

/// Time-domain overlap integral of two filters.
Complex filter_overlap(const FilterSpec& f1, const FilterSpec& f2);

/// Frequency-side normalization integral |g~|^2 over the real axis, by
/// quadrature (step filters get zero-aligned panels plus the closed
/// asymptotic tail). Equals 1 to ~1e-8 for a normalized filter.
double filter_norm_quadrature(const FilterSpec& f);

struct FilterSet {
    std::vector<FilterSpec> filters;
    CMat overlap; // pairwise time-domain overlaps
};
/// Validates normalization and, when required, pairwise independence.
FilterSet make_filters(const std::vector<FilterSpec>& specs, bool require_orthogonal = true);

/// Stationary CM of (mirror, N filtered output modes), size (2N+2),
/// VacuumHalf. The analytically known vacuum projection is added in closed
/// form; the remaining terms are integrated.
RMat output_cm(const DriftModel& model, const std::vector<FilterSpec>& filters,
               bool exact_thermal = false, const QuadratureSpec* spec = nullptr);

/// Left-hand side of the filter completeness identity
/// integral dw T P D P T^dag / (4 kappa^2); equals P_out/2 for normalized filters.
RMat output_projector_identity(const std::vector<FilterSpec>& filters, double kappa,
                               const QuadratureSpec* spec = nullptr);

/// Photon-number fluctuation spectrum <da^dag da>(omega) of the intracavity
/// field; nonnegative, vanishes for g = 0.
std::vector<double> output_spectrum(const DriftModel& model, const std::vector<double>& omega_grid);

/// Minimum eigenvalues of the three partially transposed bona fide matrices
/// of a three-mode CM (VacuumHalf input). All negative indicates full
/// tripartite entanglement under the applied test.
std::array<double, 3> tripartite_min_pt(const RMat& v6_half);

struct MembraneSpec {
    double half_length = 0;   // m (membrane sits between two cavities of this length)
    double rest_position = 0; // m
    double reflectivity = 0;  // in [0,1)
    double transmissivity = 0;
    int mode_index = 1;
};

struct MembraneSplit {
    double omega_minus, omega_plus; // split eigenfrequencies at q = 0
    double delta_minus, delta_plus; // linearized shifts
    double f;                       // coupling reduction factor
};
MembraneSplit membrane_split(const MembraneSpec& spec);

/// Residual of the implicit eigenmode relation cot k(L+q0) + cot k(L-q0) = 2 sqrt(R/T).
double membrane_eigenmode_residual(const MembraneSpec& spec, double omega);

} // namespace cvsim
