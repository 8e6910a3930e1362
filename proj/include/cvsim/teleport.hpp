#pragma once

#include "cvsim/gaussian.hpp"

namespace cvsim {

/// EPR noise matrix of a shared two-mode CM (VacuumOne):
/// N = Z A Z + Z C + C^T Z + B with Z = diag(1,-1).
RMat noise_matrix(const RMat& v_shared);

struct TeleportResult {
    RMat v_out;    // V_in + N
    double fidelity;
    double f_swap; // +inf sentinel when det N == 0
};

/// Braunstein-Kimble teleportation of a pure input CM through a shared
/// two-mode CM, both in VacuumOne.
TeleportResult teleport(const RMat& v_in, const RMat& v_shared);

struct FidelityBounds {
    double lower; // (1+nu)/(1+3nu)
    double upper; // 1/(1+nu)
};
FidelityBounds fidelity_bounds(double nu);

/// Local-symplectic reduction of a two-mode CM to the tridiagonal normal
/// form diag-blocks (aI, bI) with C = diag(-c1, c2), c1 >= |c2|. c2 carries
/// the sign of -det C (negative for classically correlated states).
struct StandardFormI {
    double a, b, c1, c2;
    RMat sa, sb; // the local symplectics that were applied
    RMat v;      // the transformed CM
};
StandardFormI standard_form_I(const RMat& v);

struct EtaForm {
    double n, m, d;
    double lambda;
    double eta;
};

struct NormalFormEta {
    EtaForm form;
    RMat v;      // transformed CM
    RMat sa, sb; // cumulative local symplectics
};

/// Local-symplectic normal form with n1-n2 = eta (d1-d2) = eta^2 (m1-m2) = lambda.
/// eta = 1 is the fixed point of the fidelity optimization.
NormalFormEta normal_form_eta(const RMat& v, double eta);

enum class AttenuationSide { none, alice, bob };

struct OptimalMapResult {
    bool entangled;
    double nu;
    double f_opt;
    AttenuationSide side;
    double tau;  // attenuation transmissivity (1 when side == none)
    RMat sa, sb; // first local symplectic map
    EtaForm form;
};

/// Optimal trace-preserving Gaussian map for coherent-state teleportation:
/// local symplectics to a normal form of the eta family, optionally followed
/// by a single-mode attenuation. When the input is not entangled the
/// classical optimum F = 1/2 is reported with entangled = false.
OptimalMapResult optimal_tgcp(const RMat& v);

struct OmegaThetaMap {
    RMat sa, sb, ga, gb;
    double theta;
    double eps;      // det Wb - det Wa of the PT diagonalizer
    double nu;
    double fidelity; // (1+|eps|)/(1+nu+2|eps|)
};

/// The interpolating local map built from the symplectic diagonalizer of the
/// partially transposed CM; achieves scalar noise 2(nu+|eps|)/(1+|eps|) I.
OmegaThetaMap build_omega_theta(const RMat& v);

struct SwapResult {
    RMat w;         // 4x4 CM after entanglement swapping through noise 2nI
    double nu_swap;
};
SwapResult swap_cm(double n, double r);

} // namespace cvsim
