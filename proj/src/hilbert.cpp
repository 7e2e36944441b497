#include "gaussgeo/hilbert.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "gaussgeo/errors.hpp"

namespace gaussgeo {

namespace {

constexpr int kPowerIterations = 200;
// Fixed seed so repeated runs over the same inputs are byte-identical.
constexpr std::uint64_t kPowerSeed = 0x6a09e667f3bcc909ULL;

// Relative spectrum width under which the endpoints are projectively
// equal and the geodesic collapses to linear interpolation.
constexpr double kDegenerateSpectrum = 1e-12;

void check_pair(const Mat& p0, const Mat& p1, const char* who) {
    require_spd(p0, who);
    require_spd(p1, who);
    if (p0.rows() != p1.rows())
        throw InvalidInput(std::string(who) + ": dimension mismatch");
}

// P0^{-1/2} P1 P0^{-1/2}, the matrix whose spectrum drives every
// Hilbert-metric quantity for the pair.
Mat whiten(const Mat& p0, const Mat& p1) {
    const Mat root = spd_power(p0, -0.5);
    return symmetrize(root * p1 * root);
}

// Deterministic order on equally sized matrices. The distance is
// orientation-symmetric in exact arithmetic; whitening by the canonically
// first endpoint makes the computed value symmetric bit for bit.
bool canonical_before(const Mat& x, const Mat& y) {
    const double tx = x.trace();
    const double ty = y.trace();
    if (tx != ty) return tx < ty;
    for (int j = 0; j < x.cols(); ++j)
        for (int i = 0; i < x.rows(); ++i)
            if (x(i, j) != y(i, j)) return x(i, j) < y(i, j);
    return true;
}

void check_curve_parameter(double t, const char* who) {
    if (!std::isfinite(t) || t < 0.0 || t > 1.0)
        throw InvalidInput(std::string(who) + ": t must lie in [0, 1]");
}

}  // namespace

double hilbert_distance_spd(const Mat& p0, const Mat& p1, EigMethod method) {
    check_pair(p0, p1, "hilbert_distance_spd");
    const Mat w = canonical_before(p0, p1) ? whiten(p0, p1) : whiten(p1, p0);
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    if (method == EigMethod::exact) {
        const EigenDecomposition eig = sym_eig(w);
        lambda_max = eig.eigenvalues(0);
        lambda_min = eig.eigenvalues(eig.eigenvalues.size() - 1);
    } else {
        const ExtremeEigs eigs = power_method_extreme(w, kPowerIterations, kPowerSeed);
        lambda_max = eigs.lambda_max;
        lambda_min = eigs.lambda_min;
    }
    if (!(lambda_min > 0.0))
        throw NumericalFailure("hilbert_distance_spd: whitened spectrum is not positive");
    return std::max(0.0, std::log(lambda_max / lambda_min));
}

double hilbert_distance_mvn(const Mvn& n0, const Mvn& n1, EigMethod method) {
    if (n0.dim() != n1.dim())
        throw InvalidInput("hilbert_distance_mvn: dimension mismatch");
    return hilbert_distance_spd(embed(n0), embed(n1), method);
}

HilbertGeodesicCoeffs hilbert_geodesic_coeffs(const Mat& p0, const Mat& p1) {
    check_pair(p0, p1, "hilbert_geodesic_coeffs");
    const EigenDecomposition eig = sym_eig(whiten(p0, p1));
    HilbertGeodesicCoeffs coeffs;
    coeffs.beta = eig.eigenvalues(0);
    coeffs.alpha = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (!(coeffs.alpha > 0.0))
        throw NumericalFailure("hilbert_geodesic_coeffs: whitened spectrum is not positive");
    return coeffs;
}

Mat hilbert_geodesic_spd(const Mat& p0, const Mat& p1, double t) {
    check_curve_parameter(t, "hilbert_geodesic_spd");
    const HilbertGeodesicCoeffs coeffs = hilbert_geodesic_coeffs(p0, p1);
    const double alpha = coeffs.alpha;
    const double beta = coeffs.beta;
    if (beta - alpha < kDegenerateSpectrum * beta)
        return symmetrize((1.0 - t) * p0 + t * p1);
    const double at = std::pow(alpha, t);
    const double bt = std::pow(beta, t);
    const double ca = (beta * at - alpha * bt) / (beta - alpha);
    const double cb = (bt - at) / (beta - alpha);
    return symmetrize(ca * p0 + cb * p1);
}

Mvn hilbert_geodesic_mvn(const Mvn& n0, const Mvn& n1, double t) {
    check_curve_parameter(t, "hilbert_geodesic_mvn");
    if (n0.dim() != n1.dim())
        throw InvalidInput("hilbert_geodesic_mvn: dimension mismatch");
    if (t == 0.0) return n0;
    if (t == 1.0) return n1;
    const Mat point = hilbert_geodesic_spd(embed(n0), embed(n1), t);
    const int d = n0.dim();
    const double corner = point(d, d);
    try {
        return embed_inverse(point / corner).point;
    } catch (const InvalidInput& e) {
        throw NumericalFailure(
            std::string("hilbert_geodesic_mvn: pullback left the embedded region: ") + e.what());
    }
}

ProjectionResult project_to_embedded(const Mat& p, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw InvalidInput("project_to_embedded: scale must be positive");
    require_spd(p, "project_to_embedded");
    const int d = static_cast<int>(p.rows()) - 1;
    if (d < 1) throw InvalidInput("project_to_embedded: input must have dimension >= 2");
    const double beta = p(d, d);
    const Vec mu = p.col(d).head(d) / beta;
    const Mat sigma = symmetrize(p.topLeftCorner(d, d) - beta * mu * mu.transpose());
    if (!is_spd(sigma))
        throw InvalidInput("project_to_embedded: recovered covariance is not SPD");
    ProjectionResult result;
    result.projection = embed(Mvn(mu, sigma));
    result.distance = scale * std::abs(std::log(beta));
    return result;
}

}  // namespace gaussgeo
