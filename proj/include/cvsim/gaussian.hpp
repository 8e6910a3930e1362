#pragma once

#include <optional>
#include <vector>

#include "cvsim/numerics.hpp"

namespace cvsim {

/// Covariance-matrix normalization. VacuumOne: vacuum CM = I (quadrature
/// variance 1). VacuumHalf: vacuum CM = I/2, the convention of the
/// optomechanics modules. Conversion: V_one = 2 V_half.
enum class Convention { VacuumOne, VacuumHalf };

struct GaussianState {
    int modes = 0;
    std::vector<double> d; // 2N displacement
    RMat v;                // 2N x 2N covariance matrix
    Convention conv = Convention::VacuumOne;

    static GaussianState vacuum(int n_modes, Convention c = Convention::VacuumOne);
};

/// Convert between CM conventions (no-op when already there).
GaussianState to_convention(const GaussianState& s, Convention c);

/// Block-diagonal symplectic form, blocks [[0,1],[-1,0]].
RMat symplectic_form(int n_modes);

/// Momentum-flip mask for partial transposition of the listed modes.
RMat pt_mask(int n_modes, const std::vector<int>& transposed_modes);

struct PhysicalityReport {
    bool physical;
    double min_eig; // of V_one + i Omega
};
PhysicalityReport is_physical(const GaussianState& s);

/// Symplectic eigenvalues (moduli of eig(i Omega V)), ascending, in the
/// state's own convention. Physical iff all >= 1 in VacuumOne.
std::vector<double> symplectic_spectrum(const GaussianState& s);

struct WilliamsonResult {
    RMat s;                     // symplectic with S V S^T = diag(d1,d1,...)
    std::vector<double> values; // ascending symplectic eigenvalues
    bool degenerate = false;
};
/// Symplectic diagonalization of a positive definite matrix.
WilliamsonResult williamson_transform(const RMat& v);

struct TgcpChannel {
    RMat s;
    RMat g;
};
/// Throws InvalidChannel unless G + i Omega - i S Omega S^T >= 0.
void validate_tgcp(const TgcpChannel& ch, double tol = 1e-9);
GaussianState apply_tgcp(const GaussianState& s, const TgcpChannel& ch);

/// General Gaussian channel given by the doubled-space blocks. gamma12 may be
/// rectangular (output dimension x input dimension).
struct GcpChannel {
    RMat gamma1;
    RMat gamma12;
    RMat gamma2;
};
GaussianState apply_gcp(const GaussianState& s, const GcpChannel& ch);

struct TwoModeBlocks {
    RMat a, b, c;
};
TwoModeBlocks two_mode_blocks(const RMat& v);

/// Smallest symplectic eigenvalue of the partially transposed two-mode CM,
/// from the invariant formula (VacuumOne). Cross-checked against the
/// Williamson route in tests.
double nu_min_pt(const GaussianState& s);

struct LogNegativityResult {
    double e_n;        // max{0, -ln nu}
    double negativity; // max{0, (1/nu - 1)/2}
    double nu;
};
LogNegativityResult log_negativity(const GaussianState& s);

struct SeparabilityReport {
    bool simon_entangled;
    double simon_min_eig;     // min eig of PT bona fide matrix
    double duan_violation;    // max over grid of (bound - lhs); > 0 means entangled
    double duan_best_a;
    double mancini_violation; // same for the product form
    double mancini_best_a;
};
SeparabilityReport separability_report(const GaussianState& s, const std::vector<double>& a_grid);
std::vector<double> default_duan_grid(std::optional<double> lambda = std::nullopt);

/// Entanglement of formation of a symmetric two-mode state (det A = det B)
/// by series summation over the squeezed-state Schmidt spectrum.
double eof_symmetric(const GaussianState& s);

/// Phase-space functions at a point xi (length 2N).
Complex eval_characteristic(const GaussianState& s, const std::vector<double>& xi);
double eval_wigner(const GaussianState& s, const std::vector<double>& xi);

} // namespace cvsim
