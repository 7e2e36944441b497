#pragma once

#include <vector>

#include "gaussgeo/matcore.hpp"

namespace gaussgeo {

// d-variate normal distribution N(mean, cov). Construction validates that
// the covariance is SPD and matches the mean's dimension.
struct Mvn {
    Vec mean;
    Mat cov;

    Mvn(Vec mean_in, Mat cov_in);

    int dim() const { return static_cast<int>(mean.size()); }
};

// Finite mixture of same-dimension normals. Weights must be positive and sum
// to 1 within 1e-9 on input; they are renormalized exactly on construction.
struct Gmm {
    Vec weights;
    std::vector<Mvn> components;

    Gmm(Vec weights_in, std::vector<Mvn> components_in);

    int dim() const { return components.front().dim(); }
    int size() const { return static_cast<int>(components.size()); }
};

// Orientation-preserving affine map x -> shift + linear * x. The linear part
// must have positive determinant (checked through its LU factorization).
struct AffineMap {
    Vec shift;
    Mat linear;

    AffineMap(Vec shift_in, Mat linear_in);

    int dim() const { return static_cast<int>(shift.size()); }
};

// Tangent direction at an MVN: a mean velocity plus a symmetric covariance
// velocity. The covariance part is symmetrized on construction.
struct TangentVector {
    Vec dmean;
    Mat dcov;

    TangentVector(Vec dmean_in, Mat dcov_in);

    int dim() const { return static_cast<int>(dmean.size()); }
};

// MVN recovered from the SPD cone together with the leaf parameter a of the
// embedding that reproduces it: embed(point, a) gives back the cone matrix.
struct EmbeddedNormal {
    Mvn point;
    double a;
};

// Lifts N(mu, Sigma) to the (d+1)-dimensional SPD cone:
//   [[Sigma + a*mu*mu^T, a*mu], [a*mu^T, a]]  with leaf parameter a > 0.
Mat embed(const Mvn& n, double a = 1.0);

// Inverse of embed for any SPD input: reads a from the bottom-right entry,
// then recovers mu and Sigma from the border column and the Schur complement.
// Throws InvalidInput when the recovered covariance fails SPD validation.
EmbeddedNormal embed_inverse(const Mat& p);

// Group action (a, A).N(mu, Sigma) = N(a + A*mu, A*Sigma*A^T).
Mvn affine_apply(const AffineMap& map, const Mvn& n);

AffineMap affine_identity(int dim);
AffineMap affine_compose(const AffineMap& m1, const AffineMap& m2);
AffineMap affine_inverse(const AffineMap& m);

// Kullback-Leibler divergence KL(N0 || N1); asymmetric, >= 0.
double kl_divergence(const Mvn& n0, const Mvn& n1);

// Jeffreys divergence, the symmetrized KL: kl(N0,N1) + kl(N1,N0).
double jeffreys(const Mvn& n0, const Mvn& n1);

// Mixture geodesic: linear interpolation of the second-moment parameters.
// curve(0) is n0, curve(1) is n1; t outside [0,1] is rejected.
Mvn mixture_geodesic(const Mvn& n0, const Mvn& n1, double t);

// Exponential geodesic: linear interpolation of the natural parameters
// (Sigma^{-1} mu, Sigma^{-1}). Same endpoint and domain conventions.
Mvn exponential_geodesic(const Mvn& n0, const Mvn& n1, double t);

}  // namespace gaussgeo
