#include "gaussgeo/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <utility>

#include "gaussgeo/errors.hpp"

namespace gaussgeo {

namespace {

void require_finite_vec(const Vec& v, const char* who) {
    if (!v.allFinite()) throw InvalidInput(std::string(who) + ": non-finite entries");
}

void require_same_dim(const Mvn& n0, const Mvn& n1, const char* who) {
    if (n0.dim() != n1.dim()) throw InvalidInput(std::string(who) + ": dimension mismatch");
}

Eigen::LLT<Mat> cholesky(const Mat& spd, const char* who) {
    Eigen::LLT<Mat> llt(spd);
    if (llt.info() != Eigen::Success) {
        throw NumericalFailure(std::string(who) + ": Cholesky factorization failed");
    }
    return llt;
}

double logdet(const Eigen::LLT<Mat>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void require_unit_interval(double t, const char* who) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw InvalidInput(std::string(who) + ": t must lie in [0, 1]");
    }
}

}  // namespace

Mvn::Mvn(Vec mean_in, Mat cov_in) : mean(std::move(mean_in)), cov(std::move(cov_in)) {
    if (mean.size() < 1) throw InvalidInput("Mvn: dimension must be >= 1");
    require_finite_vec(mean, "Mvn");
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw InvalidInput("Mvn: covariance dimensions do not match the mean");
    }
    require_spd(cov, "Mvn");
}

Gmm::Gmm(Vec weights_in, std::vector<Mvn> components_in)
    : weights(std::move(weights_in)), components(std::move(components_in)) {
    if (components.empty()) throw InvalidInput("Gmm: at least one component required");
    if (weights.size() != static_cast<Eigen::Index>(components.size())) {
        throw InvalidInput("Gmm: weight count does not match component count");
    }
    require_finite_vec(weights, "Gmm");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0)) throw InvalidInput("Gmm: weights must be positive");
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidInput("Gmm: weights must sum to 1 within 1e-9");
    }
    weights /= sum;
    const int d = components.front().dim();
    for (const Mvn& c : components) {
        if (c.dim() != d) throw InvalidInput("Gmm: components must share one dimension");
    }
}

AffineMap::AffineMap(Vec shift_in, Mat linear_in)
    : shift(std::move(shift_in)), linear(std::move(linear_in)) {
    if (shift.size() < 1) throw InvalidInput("AffineMap: dimension must be >= 1");
    require_finite_vec(shift, "AffineMap");
    if (linear.rows() != shift.size() || linear.cols() != shift.size()) {
        throw InvalidInput("AffineMap: linear part dimensions do not match the shift");
    }
    if (!linear.allFinite()) throw InvalidInput("AffineMap: non-finite entries");
    const double det = Eigen::PartialPivLU<Mat>(linear).determinant();
    if (!(det > 0.0) || !std::isfinite(det)) {
        throw InvalidInput("AffineMap: linear part must have positive determinant");
    }
}

TangentVector::TangentVector(Vec dmean_in, Mat dcov_in)
    : dmean(std::move(dmean_in)), dcov(std::move(dcov_in)) {
    if (dmean.size() < 1) throw InvalidInput("TangentVector: dimension must be >= 1");
    require_finite_vec(dmean, "TangentVector");
    if (dcov.rows() != dmean.size() || dcov.cols() != dmean.size()) {
        throw InvalidInput("TangentVector: covariance part dimensions do not match");
    }
    dcov = require_symmetric(dcov, "TangentVector");
}

Mat embed(const Mvn& n, double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("embed: a must be positive");
    const int d = n.dim();
    Mat p(d + 1, d + 1);
    p.topLeftCorner(d, d) = n.cov + a * n.mean * n.mean.transpose();
    p.col(d).head(d) = a * n.mean;
    p.row(d).head(d) = a * n.mean.transpose();
    p(d, d) = a;
    return p;
}

EmbeddedNormal embed_inverse(const Mat& p) {
    require_spd(p, "embed_inverse");
    const int d = static_cast<int>(p.rows()) - 1;
    if (d < 1) throw InvalidInput("embed_inverse: input must have dimension >= 2");
    const double a = p(d, d);
    const Vec mu = p.col(d).head(d) / a;
    const Mat sigma = symmetrize(p.topLeftCorner(d, d) - a * mu * mu.transpose());
    if (!is_spd(sigma)) {
        throw InvalidInput("embed_inverse: recovered covariance is not SPD");
    }
    return EmbeddedNormal{Mvn(mu, sigma), a};
}

Mvn affine_apply(const AffineMap& map, const Mvn& n) {
    if (map.dim() != n.dim()) throw InvalidInput("affine_apply: dimension mismatch");
    const Vec mean = map.shift + map.linear * n.mean;
    const Mat cov = symmetrize(map.linear * n.cov * map.linear.transpose());
    return Mvn(mean, cov);
}

AffineMap affine_identity(int dim) {
    if (dim < 1) throw InvalidInput("affine_identity: dimension must be >= 1");
    return AffineMap(Vec::Zero(dim), Mat::Identity(dim, dim));
}

AffineMap affine_compose(const AffineMap& m1, const AffineMap& m2) {
    if (m1.dim() != m2.dim()) throw InvalidInput("affine_compose: dimension mismatch");
    return AffineMap(m1.shift + m1.linear * m2.shift, m1.linear * m2.linear);
}

AffineMap affine_inverse(const AffineMap& m) {
    Eigen::PartialPivLU<Mat> lu(m.linear);
    const Mat inv = lu.inverse();
    if (!inv.allFinite()) throw InvalidInput("affine_inverse: linear part is singular");
    return AffineMap(-(inv * m.shift), inv);
}

double kl_divergence(const Mvn& n0, const Mvn& n1) {
    require_same_dim(n0, n1, "kl_divergence");
    const int d = n0.dim();
    const auto llt0 = cholesky(n0.cov, "kl_divergence");
    const auto llt1 = cholesky(n1.cov, "kl_divergence");
    const Vec dmu = n1.mean - n0.mean;
    const double value = 0.5 * (llt1.solve(n0.cov).trace() - d + dmu.dot(llt1.solve(dmu)) +
                                logdet(llt1) - logdet(llt0));
    return std::max(0.0, value);
}

double jeffreys(const Mvn& n0, const Mvn& n1) {
    require_same_dim(n0, n1, "jeffreys");
    const int d = n0.dim();
    const auto llt0 = cholesky(n0.cov, "jeffreys");
    const auto llt1 = cholesky(n1.cov, "jeffreys");
    const double trace_term =
        0.5 * (llt1.solve(n0.cov).trace() + llt0.solve(n1.cov).trace()) - d;
    const Vec dmu = n1.mean - n0.mean;
    const double mean_term = 0.5 * (dmu.dot(llt0.solve(dmu)) + dmu.dot(llt1.solve(dmu)));
    return std::max(0.0, trace_term + mean_term);
}

Mvn mixture_geodesic(const Mvn& n0, const Mvn& n1, double t) {
    require_same_dim(n0, n1, "mixture_geodesic");
    require_unit_interval(t, "mixture_geodesic");
    if (t == 0.0) return n0;
    if (t == 1.0) return n1;
    const Vec mean = (1.0 - t) * n0.mean + t * n1.mean;
    const Mat s0 = n0.cov + n0.mean * n0.mean.transpose();
    const Mat s1 = n1.cov + n1.mean * n1.mean.transpose();
    const Mat cov = symmetrize((1.0 - t) * s0 + t * s1 - mean * mean.transpose());
    return Mvn(mean, cov);
}

Mvn exponential_geodesic(const Mvn& n0, const Mvn& n1, double t) {
    require_same_dim(n0, n1, "exponential_geodesic");
    require_unit_interval(t, "exponential_geodesic");
    if (t == 0.0) return n0;
    if (t == 1.0) return n1;
    const int d = n0.dim();
    const auto llt0 = cholesky(n0.cov, "exponential_geodesic");
    const auto llt1 = cholesky(n1.cov, "exponential_geodesic");
    const Mat eye = Mat::Identity(d, d);
    const Mat lambda = symmetrize((1.0 - t) * llt0.solve(eye) + t * llt1.solve(eye));
    const Vec eta = (1.0 - t) * llt0.solve(n0.mean) + t * llt1.solve(n1.mean);
    const auto llt_t = cholesky(lambda, "exponential_geodesic");
    const Mat cov = symmetrize(llt_t.solve(eye));
    const Vec mean = llt_t.solve(eta);
    return Mvn(mean, cov);
}

}  // namespace gaussgeo
