#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "cvsim/matrix.hpp"

namespace cvsim {

struct SymmetricEigen {
    std::vector<double> values; // ascending
    RMat vectors;               // columns are eigenvectors
};

/// Cyclic Jacobi diagonalization of a real symmetric matrix.
SymmetricEigen jacobi_symmetric(const RMat& m);

/// Eigenvalues of a complex Hermitian matrix, ascending. Throws NotHermitian
/// if the deviation from Hermiticity exceeds 1e-12 relative to the norm.
std::vector<double> hermitian_spectrum(const CMat& m);

struct HermitianEigen {
    std::vector<double> values;
    CMat vectors;
};
HermitianEigen jacobi_hermitian(const CMat& m);

/// Eigenvalues of a general real square matrix via complex Hessenberg QR with
/// Wilkinson shifts. Dimension <= 16.
std::vector<Complex> eigenvalues(const RMat& m);

/// Steady-state covariance from the drift/diffusion pair: A V + V A^T = -D.
/// Solved by vectorization to an n^2 x n^2 linear system. Throws UnstableDrift
/// when A has an eigenvalue with nonnegative real part.
RMat solve_lyapunov(const RMat& a, const RMat& d);

/// Frequency-axis quadrature control. The axis is compactified through
/// omega = scale * tan(theta), so the full real line is covered; omega_max
/// bounds the finely panelled core and breakpoints mark narrow features
/// (resonances, filter centers) that seed extra panel edges.
struct QuadratureSpec {
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double omega_max = 0;            // required: core half-width, rad/s
    int max_subdiv = 400000;         // total adaptive interval budget
    std::vector<double> breakpoints; // feature frequencies, any order
    double feature_width = 0;        // optional: narrowest linewidth to resolve
    bool parallel = true;            // OpenMP over panels (serial path is the reference)
};

/// Entrywise adaptive Simpson integration of a matrix-valued function of
/// omega over the whole real axis. Deterministic: panel sums are accumulated
/// in panel order independent of thread count. Throws ToleranceNotMet if the
/// subdivision budget is exhausted before the tolerance is reached.
CMat integrate_matrix(const std::function<CMat(double)>& f, const QuadratureSpec& spec);

/// Same, for integrands known to be real symmetric after the +/- omega
/// combination; imaginary residue is checked and dropped.
RMat integrate_matrix_real(const std::function<CMat(double)>& f, const QuadratureSpec& spec);

/// Brent root finding on a bracketing interval. |f(root)| need not be small
/// for steep functions; convergence is on the x interval.
double find_root(const std::function<double(double)>& f, double lo, double hi, double xtol = 1e-12);

/// Grow a bracket geometrically from a signed seed until f changes sign.
/// Returns {lo, hi}; throws NoBracket when growth exhausts max_steps.
std::pair<double, double> grow_bracket(const std::function<double(double)>& f, double seed,
                                       double growth = 2.0, int max_steps = 200);

} // namespace cvsim
