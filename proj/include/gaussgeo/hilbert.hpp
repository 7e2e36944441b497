#pragma once

#include "gaussgeo/gaussian.hpp"
#include "gaussgeo/matcore.hpp"

namespace gaussgeo {

// Eigenvalue extraction backend for the Hilbert metric routines.
enum class EigMethod {
    exact,  // full symmetric eigendecomposition
    power,  // power iteration for the extreme eigenvalues only
};

// Endpoint spectrum bounds used by the projective geodesic coefficients.
// alpha and beta are the extreme eigenvalues of P0^{-1} P1; with this
// orientation the curve built from them has metric speed d_H(P0, P1),
// i.e. d_H(P0, gamma(t)) = t * d_H(P0, P1).
struct HilbertGeodesicCoeffs {
    double alpha = 0.0;
    double beta = 0.0;
};

// Result of projecting an SPD matrix onto the slice of embedded normals
// (unit bottom-right corner). The distance is the Hilbert distance from
// the input to the slice, scaled by the caller's metric scale factor.
struct ProjectionResult {
    Mat projection;
    double distance = 0.0;
};

// Hilbert projective distance between SPD matrices:
// log(lambda_max / lambda_min) of P0^{-1/2} P1 P0^{-1/2}.
// The power backend uses a fixed-seed power iteration and reports
// NumericalFailure when the whitened matrix is too ill-conditioned.
double hilbert_distance_spd(const Mat& p0, const Mat& p1,
                            EigMethod method = EigMethod::exact);

// Hilbert distance between normals, computed on their cone embeddings.
double hilbert_distance_mvn(const Mvn& n0, const Mvn& n1,
                            EigMethod method = EigMethod::exact);

// Extreme eigenvalues of P0^{-1} P1 feeding hilbert_geodesic_spd.
HilbertGeodesicCoeffs hilbert_geodesic_coeffs(const Mat& p0, const Mat& p1);

// Constant-speed Hilbert geodesic between SPD matrices, t in [0, 1].
// Falls back to linear interpolation when the endpoint spectrum is
// degenerate (p1 projectively equal to p0).
Mat hilbert_geodesic_spd(const Mat& p0, const Mat& p1, double t);

// Pullback of the cone geodesic to normals: the embedded endpoints are
// connected in the cone, the result is rescaled to unit corner and
// mapped back through the embedding. Coincides with the mixture
// geodesic as a point set, traversed at Hilbert speed.
Mvn hilbert_geodesic_mvn(const Mvn& n0, const Mvn& n1, double t);

// Nearest point on the embedded-normal slice under the trace metric,
// together with the (scaled) distance to it. Reads off the corner beta
// and the mean, keeps the covariance block, and resets the corner to 1:
// embed(n, a) projects to embed(n, 1) at distance scale * |log a|.
ProjectionResult project_to_embedded(const Mat& p, double scale = 1.0);

}  // namespace gaussgeo
