#ifndef GAUSSGEO_MATCORE_HPP
#define GAUSSGEO_MATCORE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gaussgeo/errors.hpp"

namespace gaussgeo {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Relative floor under which an eigenvalue counts as non-positive:
/// a matrix is accepted as SPD when lambda_min > dim * 1e-12 * lambda_max.
constexpr double kSpdRelTol = 1e-12;

/// Orthogonal diagonalization M = rotation * diag(eigenvalues) * rotation^T,
/// eigenvalues sorted descending.
struct EigenDecomposition {
    Mat rotation;
    Vec eigenvalues;
};

/// Returns (M + M^T)/2.
Mat symmetrize(const Mat& M);

/// Validates that M is square and symmetric within 1e-12 relative; throws
/// InvalidInput otherwise. Returns the symmetrized matrix.
Mat require_symmetric(const Mat& M, const char* what);

/// Validates that P is SPD (symmetric, lambda_min > dim*1e-12*lambda_max);
/// throws InvalidInput otherwise.
void require_spd(const Mat& P, const char* what);

/// True when P passes the SPD validation, without throwing.
bool is_spd(const Mat& P);

/// Diagonalizes a symmetric matrix with cyclic Jacobi rotations.
/// Throws InvalidInput on non-finite entries, NumericalFailure if the
/// off-diagonal mass has not vanished within the sweep budget.
EigenDecomposition sym_eig(const Mat& M);

/// P^p through the eigendecomposition; spd_power(P,0) = I, spd_power(P,1) = P.
Mat spd_power(const Mat& P, double p);

/// Geodesic of the trace metric on the SPD cone:
/// P0^{1/2} (P0^{-1/2} P1 P0^{-1/2})^t P0^{1/2}.
/// t in [0,1] interpolates; values outside extrapolate along the same curve.
Mat spd_geodesic(const Mat& P0, const Mat& P1, double t);

/// scale * sqrt(sum_i log^2 lambda_i(P0^{-1/2} P1 P0^{-1/2})): the trace-metric
/// distance when scale = 1, its 1/2-metric variant when scale = 1/sqrt(2).
double spd_trace_distance(const Mat& P0, const Mat& P1, double scale);

/// Convergence record of the arithmetic-harmonic mean iteration.
struct AhmStats {
    int iterations = 0;
    std::vector<double> gaps;  // relative Frobenius gap per iteration
};

/// Limit of A <- (A+H)/2, H <- 2 (A^{-1} + H^{-1})^{-1} starting from (X, Y);
/// equals the geodesic midpoint spd_geodesic(X, Y, 1/2). Stops when
/// ||A - H||_F <= tol * ||A||_F; throws NumericalFailure after 64 iterations.
Mat ahm_mean(const Mat& X, const Mat& Y, double tol, AhmStats* stats = nullptr);

struct ExtremeEigs {
    double lambda_max = 0.0;
    double lambda_min = 0.0;
};

/// Power-method estimates of the extreme eigenvalues of an SPD matrix.
/// Runs 8 restarts from seeded random {-1,+1} vectors, keeps the best
/// Rayleigh quotient after `iterations` steps; lambda_min comes from the
/// same procedure on the explicit inverse. Estimates never overshoot the
/// true extremes (Rayleigh quotients are bounded by the spectrum).
/// Throws NumericalFailure when the 1-norm condition estimate exceeds 1e14.
ExtremeEigs power_method_extreme(const Mat& P, int iterations, std::uint64_t seed);

enum class SymFunc { exp, sinh, cosh, log };

/// O diag(f(lambda_i)) O^T for the scalar function selected by `kind`.
/// log requires an SPD argument.
Mat sym_func(const Mat& M, SymFunc kind);

} // namespace gaussgeo

#endif
