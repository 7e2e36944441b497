#pragma once

#include <vector>

#include "gaussgeo/gaussian.hpp"
#include "gaussgeo/matcore.hpp"

namespace gaussgeo {

// One point of a discretized geodesic, tagged with its curve parameter.
struct GeodesicSample {
    double t;
    Mvn point;
};

// Lower/upper bracket of one terminated segment of the recursive
// distance approximation.
struct SegmentBound {
    double lower;
    double upper;
};

// Result of the recursive (1+epsilon)-approximation. `value` equals `upper`,
// the sum of per-segment upper bounds; `lower` sums the per-segment lower
// bounds, so lower <= value always holds.
struct ApproxResult {
    double value;
    double lower;
    double upper;
    int segments;
    std::vector<SegmentBound> segment_bounds;
};

// Divergence used for one step of the polyline length approximation:
// either the Jeffreys divergence or twice the forward Kullback-Leibler.
enum class StepDivergence { jeffreys, kl_twice };

// Midpoint used by the recursive approximation: the solved Fisher-Rao
// geodesic midpoint (default), or the arithmetic-harmonic mean of the
// embedded cone matrices pulled back to an MVN. The embedded variant avoids
// geodesic solves but is an approximation: the embedded image of the MVN
// family is not totally geodesic in the cone.
enum class MidpointRule { geodesic, embedded_ahm };

// Closed-form Fisher-Rao distance between univariate normals.
double fr_distance_univariate(const Mvn& n0, const Mvn& n1);

// Closed-form Fisher-Rao distance for a shared mean (covariances may differ).
double fr_distance_same_mean(const Mvn& n0, const Mvn& n1);

// Closed-form Fisher-Rao distance for a shared covariance (means may differ).
double fr_distance_same_cov(const Mvn& n0, const Mvn& n1);

// Fisher-Rao geodesic between two normals, solved once and sampled many
// times. Construction canonicalizes the first endpoint to the standard
// normal, warm-starts the initial direction from the embedded-cone curve
// between the endpoints, and refines it by damped Gauss-Newton shooting on
// the closed-form initial-value solution until the t=1 residual vanishes.
class FrGeodesic {
  public:
    FrGeodesic(const Mvn& n0, const Mvn& n1);

    // Point at curve parameter t; t=0 gives the first endpoint. Values
    // outside [0,1] extrapolate along the same geodesic.
    Mvn at(double t) const;

    // Constant Fisher-Rao speed of the parameterization. Over [0,1] the
    // curve has unit parameter span, so this equals the endpoint distance.
    double speed() const { return speed_; }

    int dim() const { return n0_.dim(); }

  private:
    Mvn n0_;
    Mvn n1_;
    AffineMap to_standard_;
    AffineMap from_standard_;
    Vec tangent_a_;   // natural-coordinate direction solved at the standard normal
    Mat tangent_b_;
    double speed_ = 0.0;
    bool degenerate_ = false;
};

// Convenience wrapper: solves the boundary-value problem and returns the
// single point at parameter t. Use FrGeodesic directly to sample many points
// from one solve.
Mvn fr_geodesic_bvp(const Mvn& n0, const Mvn& n1, double t);

// Geodesic emanating from the standard normal N(0, I) with initial velocity
// given in natural coordinates (vector part = d/dt of Sigma^{-1} mu, matrix
// part = d/dt of Sigma^{-1}), computed through a symmetric matrix exponential
// of dimension 2d+1.
Mvn fr_geodesic_ivp_eriksen(const TangentVector& v, double t);

// Constant-speed geodesic from an arbitrary normal with initial velocity in
// natural coordinates, computed by a closed form built from hyperbolic
// functions of one symmetric matrix.
Mvn fr_geodesic_ivp_calvo_oller(const Mvn& n0, const TangentVector& v, double t);

// Polyline upper approximation of the Fisher-Rao distance: sums per-step
// divergence square roots along T geodesic segments.
double fr_length_approx(const Mvn& n0, const Mvn& n1, int segments,
                        StepDivergence step = StepDivergence::jeffreys);

// Distance between the embedded cone matrices under half the trace metric;
// a lower bound of the Fisher-Rao distance.
double calvo_oller_lower_bound(const Mvn& n0, const Mvn& n1);

// Recursive (1+epsilon)-approximation: bisects a segment at the geodesic
// midpoint while its Jeffreys upper bound exceeds (1+epsilon) times its
// embedded-cone lower bound, then sums the per-segment upper bounds.
ApproxResult fr_distance_approx(const Mvn& n0, const Mvn& n1, double epsilon,
                                MidpointRule midpoint = MidpointRule::geodesic);

}  // namespace gaussgeo
