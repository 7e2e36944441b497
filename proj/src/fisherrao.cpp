#include "gaussgeo/fisherrao.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "gaussgeo/errors.hpp"

namespace gaussgeo {

namespace {

constexpr double kDegenerateJeffreys = 1e-24;

void require_same_dim(const Mvn& n0, const Mvn& n1, const char* who) {
    if (n0.dim() != n1.dim()) throw InvalidInput(std::string(who) + ": dimension mismatch");
}

Mat spd_inverse(const Mat& spd) {
    return symmetrize(Eigen::LLT<Mat>(spd).solve(Mat::Identity(spd.rows(), spd.cols())));
}

struct NaturalCoords {
    Vec xi;         // Sigma^{-1} mu
    Mat precision;  // Sigma^{-1}
};

NaturalCoords to_natural(const Mvn& n) {
    Eigen::LLT<Mat> llt(n.cov);
    const Mat precision = symmetrize(llt.solve(Mat::Identity(n.dim(), n.dim())));
    return NaturalCoords{llt.solve(n.mean), precision};
}

// Constant-speed geodesic flow in natural coordinates, closed form built
// from hyperbolic functions of one symmetric matrix. Shared by the public
// initial-value operation and the boundary-value shooting loop.
Mvn natural_flow(const Mvn& n0, const Vec& va, const Mat& vb, double t, const char* who) {
    const int d = n0.dim();
    const Mat precision0 = spd_inverse(n0.cov);
    const Mat prec_sqrt = spd_power(precision0, 0.5);
    const Mat prec_isqrt = spd_power(precision0, -0.5);
    const Vec xi0 = precision0 * n0.mean;

    const Mat bc = symmetrize(-(prec_isqrt * vb * prec_isqrt));
    const Vec ac = prec_isqrt * va + bc * (prec_isqrt * xi0);

    const Mat g_sq = symmetrize(bc * bc + 2.0 * ac * ac.transpose());
    const EigenDecomposition eig = sym_eig(g_sq);
    Vec cosh_eigs(d), sinh_pinv_eigs(d);
    double g_max = 0.0;
    for (int i = 0; i < d; ++i) g_max = std::max(g_max, std::sqrt(std::max(eig.eigenvalues[i], 0.0)));
    const double cut = 1e-12 * std::max(1.0, g_max);
    for (int i = 0; i < d; ++i) {
        const double g = std::sqrt(std::max(eig.eigenvalues[i], 0.0));
        const double x = 0.5 * g * t;
        cosh_eigs[i] = std::cosh(x);
        // sinh(g t/2) g^{-1} extended by its limit t/2 across the kernel of G.
        sinh_pinv_eigs[i] = (g > cut) ? std::sinh(x) / g : 0.5 * t;
    }
    const Mat cosh_m = eig.rotation * cosh_eigs.asDiagonal() * eig.rotation.transpose();
    const Mat sinh_pinv = eig.rotation * sinh_pinv_eigs.asDiagonal() * eig.rotation.transpose();

    const Mat r = cosh_m - bc * sinh_pinv;
    const Mat precision_t = symmetrize(prec_sqrt * (r * r.transpose()) * prec_sqrt);
    const Vec xi_t = 2.0 * (prec_sqrt * (r * (sinh_pinv * ac))) + precision_t * n0.mean;

    if (!is_spd(precision_t)) {
        throw NumericalFailure(std::string(who) + ": extracted precision matrix is not SPD");
    }
    Eigen::LLT<Mat> llt(precision_t);
    const Mat sigma_t = symmetrize(llt.solve(Mat::Identity(d, d)));
    const Vec mu_t = llt.solve(xi_t);
    if (!is_spd(sigma_t)) {
        throw NumericalFailure(std::string(who) + ": extracted covariance is not SPD");
    }
    return Mvn(mu_t, sigma_t);
}

// Curve through the SPD cone of dimension 2d+1 whose trace geodesic connects
// the lifted endpoints. It is not the Fisher-Rao geodesic; its initial
// direction is used to warm-start the shooting solver.
Mat cone_lift(const Mvn& n) {
    const int d = n.dim();
    const int k = 2 * d + 1;
    Mat m = Mat::Identity(k, k);
    m.block(d, 0, 1, d) = n.mean.transpose();
    m.block(d + 1, d, d, 1) = -n.mean;
    Mat dm = Mat::Zero(k, k);
    dm.topLeftCorner(d, d) = spd_inverse(n.cov);
    dm(d, d) = 1.0;
    dm.bottomRightCorner(d, d) = n.cov;
    return symmetrize(m * dm * m.transpose());
}

int packed_size(int d) { return d + d * (d + 1) / 2; }

Vec pack_direction(const Vec& a, const Mat& b, int d) {
    Vec z(packed_size(d));
    z.head(d) = a;
    int k = d;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) z[k++] = b(i, j);
    return z;
}

void unpack_direction(const Vec& z, int d, Vec& a, Mat& b) {
    a = z.head(d);
    b = Mat(d, d);
    int k = d;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            b(i, j) = z[k];
            b(j, i) = z[k];
            ++k;
        }
}

struct ShootingTarget {
    Vec xi;
    Mat precision;
    int d;
};

std::optional<Vec> shooting_residual(const Vec& z, const Mvn& n_std,
                                     const ShootingTarget& target) {
    Vec a;
    Mat b;
    unpack_direction(z, target.d, a, b);
    try {
        const NaturalCoords nat = to_natural(natural_flow(n_std, a, b, 1.0, "fr_geodesic_bvp"));
        Vec r(z.size());
        r.head(target.d) = nat.xi - target.xi;
        const Mat dprec = nat.precision - target.precision;
        int k = target.d;
        for (int i = 0; i < target.d; ++i)
            for (int j = i; j < target.d; ++j) r[k++] = dprec(i, j);
        return r;
    } catch (const NumericalFailure&) {
        return std::nullopt;
    } catch (const InvalidInput&) {
        return std::nullopt;
    }
}

// Damped Gauss-Newton on the t=1 residual of the closed-form flow. The warm
// start is close enough that plain Gauss-Newton steps normally converge in
// under ten iterations; damping only engages when a step overshoots.
Vec solve_shooting(const Vec& z0, const Mvn& n_std, const ShootingTarget& target) {
    const int m = static_cast<int>(z0.size());
    Vec z = z0;
    std::optional<Vec> r = shooting_residual(z, n_std, target);
    if (!r) throw NumericalFailure("fr_geodesic_bvp: warm-start direction could not be integrated");
    const double scale =
        1.0 + std::max(target.xi.cwiseAbs().maxCoeff(), target.precision.cwiseAbs().maxCoeff());
    const double tol = 1e-11 * scale;
    double lambda = 0.0;
    for (int iter = 0; iter < 80; ++iter) {
        if (r->cwiseAbs().maxCoeff() <= tol) return z;
        Mat jac(m, m);
        for (int j = 0; j < m; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(z[j]));
            Vec zp = z, zm = z;
            zp[j] += h;
            zm[j] -= h;
            const auto rp = shooting_residual(zp, n_std, target);
            const auto rm = shooting_residual(zm, n_std, target);
            if (!rp || !rm) {
                throw NumericalFailure("fr_geodesic_bvp: Jacobian evaluation left the SPD cone");
            }
            jac.col(j) = (*rp - *rm) / (2.0 * h);
        }
        const Mat jtj = jac.transpose() * jac;
        const Vec jtr = jac.transpose() * (*r);
        bool accepted = false;
        for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
            Mat damped = jtj;
            if (lambda > 0.0) damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Vec delta = Eigen::LDLT<Mat>(damped).solve(-jtr);
            const Vec z_try = z + delta;
            const auto r_try = shooting_residual(z_try, n_std, target);
            if (r_try && r_try->squaredNorm() < r->squaredNorm()) {
                z = z_try;
                r = r_try;
                accepted = true;
                lambda = (lambda > 1e-10) ? 0.25 * lambda : 0.0;
            } else {
                lambda = (lambda == 0.0) ? 1e-4 : 8.0 * lambda;
                if (lambda > 1e12) break;
            }
        }
        if (!accepted) throw NumericalFailure("fr_geodesic_bvp: shooting iteration stalled");
    }
    if (r->cwiseAbs().maxCoeff() <= tol) return z;
    throw NumericalFailure("fr_geodesic_bvp: shooting did not converge");
}

// Far-apart endpoints can push the t=1 residual outside the Gauss-Newton
// basin: the natural coordinates of the flow grow exponentially in the
// tangent norm. When the direct solve fails, march the target along the
// natural-parameter segment from the identity to the requested endpoint,
// reusing each converged direction to warm-start the next leg. Both natural
// coordinates stay valid along the segment because the parameter set is
// convex.
Vec solve_shooting_continuation(const Vec& z0, const Mvn& n_std, const ShootingTarget& target) {
    try {
        return solve_shooting(z0, n_std, target);
    } catch (const NumericalFailure&) {
    }
    const int d = target.d;
    const Mat prec0 = Mat::Identity(d, d);
    Vec z = Vec::Zero(z0.size());
    double s = 0.0;
    double ds = 0.5;
    for (int leg = 0; s < 1.0; ++leg) {
        if (leg >= 200 || ds < 1e-3) {
            throw NumericalFailure("fr_geodesic_bvp: shooting did not converge");
        }
        const double s_try = std::min(1.0, s + ds);
        const ShootingTarget stage{s_try * target.xi,
                                   symmetrize((1.0 - s_try) * prec0 + s_try * target.precision),
                                   d};
        try {
            z = solve_shooting(z, n_std, stage);
            s = s_try;
            ds *= 1.5;
        } catch (const NumericalFailure&) {
            ds *= 0.5;
        }
    }
    return z;
}

double step_length(const Mvn& a, const Mvn& b, StepDivergence step) {
    return (step == StepDivergence::jeffreys) ? std::sqrt(jeffreys(a, b))
                                              : std::sqrt(2.0 * kl_divergence(a, b));
}

}  // namespace

double fr_distance_univariate(const Mvn& n0, const Mvn& n1) {
    if (n0.dim() != 1 || n1.dim() != 1) {
        throw InvalidInput("fr_distance_univariate: univariate inputs required");
    }
    const double dm = n1.mean[0] - n0.mean[0];
    const double s0 = std::sqrt(n0.cov(0, 0));
    const double s1 = std::sqrt(n1.cov(0, 0));
    const double num = dm * dm + 2.0 * (s1 - s0) * (s1 - s0);
    const double den = dm * dm + 2.0 * (s1 + s0) * (s1 + s0);
    const double delta = std::sqrt(num / den);
    return 2.0 * std::sqrt(2.0) * std::atanh(delta);
}

double fr_distance_same_mean(const Mvn& n0, const Mvn& n1) {
    require_same_dim(n0, n1, "fr_distance_same_mean");
    if ((n0.mean - n1.mean).norm() > 1e-12 * (1.0 + n0.mean.norm())) {
        throw InvalidInput("fr_distance_same_mean: means differ");
    }
    return spd_trace_distance(n0.cov, n1.cov, 1.0 / std::sqrt(2.0));
}

double fr_distance_same_cov(const Mvn& n0, const Mvn& n1) {
    require_same_dim(n0, n1, "fr_distance_same_cov");
    if ((n0.cov - n1.cov).norm() > 1e-12 * n0.cov.norm()) {
        throw InvalidInput("fr_distance_same_cov: covariances differ");
    }
    const Vec dmu = n0.mean - n1.mean;
    const double maha_sq = dmu.dot(Eigen::LLT<Mat>(n0.cov).solve(dmu));
    return std::sqrt(2.0) * std::acosh(1.0 + 0.25 * maha_sq);
}

FrGeodesic::FrGeodesic(const Mvn& n0, const Mvn& n1)
    : n0_(n0),
      n1_(n1),
      to_standard_(affine_identity(n0.dim())),
      from_standard_(affine_identity(n0.dim())),
      tangent_a_(Vec::Zero(n0.dim())),
      tangent_b_(Mat::Zero(n0.dim(), n0.dim())) {
    require_same_dim(n0, n1, "fr_geodesic_bvp");
    if (jeffreys(n0, n1) < kDegenerateJeffreys) {
        degenerate_ = true;
        return;
    }
    const int d = n0.dim();
    const Eigen::LLT<Mat> llt(n0.cov);
    from_standard_ = AffineMap(n0.mean, Mat(llt.matrixL()));
    to_standard_ = affine_inverse(from_standard_);
    const Mvn n1c = affine_apply(to_standard_, n1);
    const Mvn n_std(Vec::Zero(d), Mat::Identity(d, d));

    Vec a0;
    Mat b0;
    try {
        // The lifted endpoint curve leaves the identity; its blocks are the
        // natural coordinates, so a one-sided second-order difference gives
        // the warm-start direction directly.
        const Mat g1 = cone_lift(n1c);
        const double h = 1e-5;
        const Mat gh = spd_power(g1, h);
        const Mat g2h = spd_power(g1, 2.0 * h);
        const Vec xi_h = gh.block(0, d, d, 1);
        const Vec xi_2h = g2h.block(0, d, d, 1);
        const Mat prec_h = gh.topLeftCorner(d, d);
        const Mat prec_2h = g2h.topLeftCorner(d, d);
        a0 = (4.0 * xi_h - xi_2h) / (2.0 * h);
        b0 = symmetrize((-3.0 * Mat::Identity(d, d) + 4.0 * prec_h - prec_2h) / (2.0 * h));
    } catch (const InvalidInput& e) {
        throw NumericalFailure(std::string("fr_geodesic_bvp: warm start failed: ") + e.what());
    }

    const NaturalCoords nat1 = to_natural(n1c);
    const ShootingTarget target{nat1.xi, nat1.precision, d};
    const Vec z = solve_shooting_continuation(pack_direction(a0, b0, d), n_std, target);
    unpack_direction(z, d, tangent_a_, tangent_b_);
    speed_ = std::sqrt(tangent_a_.squaredNorm() + 0.5 * (tangent_b_ * tangent_b_).trace());
}

Mvn FrGeodesic::at(double t) const {
    if (!std::isfinite(t)) throw InvalidInput("FrGeodesic: non-finite curve parameter");
    if (degenerate_ || t == 0.0) return n0_;
    const int d = n0_.dim();
    const Mvn n_std(Vec::Zero(d), Mat::Identity(d, d));
    const Mvn p = natural_flow(n_std, tangent_a_, tangent_b_, t, "fr_geodesic_bvp");
    return affine_apply(from_standard_, p);
}

Mvn fr_geodesic_bvp(const Mvn& n0, const Mvn& n1, double t) {
    return FrGeodesic(n0, n1).at(t);
}

Mvn fr_geodesic_ivp_eriksen(const TangentVector& v, double t) {
    const int d = v.dim();
    const int k = 2 * d + 1;
    // Corner-block signs are fixed so that the extracted curve satisfies
    // d/dt Sigma^{-1}(0) = v.dcov and d/dt (Sigma^{-1} mu)(0) = v.dmean;
    // the tests cross-check this against the closed-form solver.
    Mat gen = Mat::Zero(k, k);
    gen.topLeftCorner(d, d) = v.dcov;
    gen.block(0, d, d, 1) = v.dmean;
    gen.block(d, 0, 1, d) = v.dmean.transpose();
    gen.block(d, d + 1, 1, d) = -v.dmean.transpose();
    gen.block(d + 1, d, d, 1) = -v.dmean;
    gen.bottomRightCorner(d, d) = -v.dcov;

    const Mat m = sym_func(t * gen, SymFunc::exp);
    const Mat precision_t = symmetrize(m.topLeftCorner(d, d));
    if (!is_spd(precision_t)) {
        throw NumericalFailure("fr_geodesic_ivp_eriksen: extraction block is not SPD");
    }
    Eigen::LLT<Mat> llt(precision_t);
    const Mat sigma_t = symmetrize(llt.solve(Mat::Identity(d, d)));
    const Vec mu_t = llt.solve(m.block(0, d, d, 1));
    if (!is_spd(sigma_t)) {
        throw NumericalFailure("fr_geodesic_ivp_eriksen: extracted covariance is not SPD");
    }
    return Mvn(mu_t, sigma_t);
}

Mvn fr_geodesic_ivp_calvo_oller(const Mvn& n0, const TangentVector& v, double t) {
    if (n0.dim() != v.dim()) {
        throw InvalidInput("fr_geodesic_ivp_calvo_oller: dimension mismatch");
    }
    return natural_flow(n0, v.dmean, v.dcov, t, "fr_geodesic_ivp_calvo_oller");
}

double fr_length_approx(const Mvn& n0, const Mvn& n1, int segments, StepDivergence step) {
    require_same_dim(n0, n1, "fr_length_approx");
    if (segments < 1) throw InvalidInput("fr_length_approx: segment count must be >= 1");
    if (segments == 1) return step_length(n0, n1, step);
    if (jeffreys(n0, n1) < kDegenerateJeffreys) return 0.0;
    const FrGeodesic geod(n0, n1);
    double total = 0.0;
    Mvn prev = n0;
    for (int i = 1; i <= segments; ++i) {
        const Mvn cur =
            (i == segments) ? n1 : geod.at(static_cast<double>(i) / segments);
        total += step_length(prev, cur, step);
        prev = cur;
    }
    return total;
}

double calvo_oller_lower_bound(const Mvn& n0, const Mvn& n1) {
    require_same_dim(n0, n1, "calvo_oller_lower_bound");
    return spd_trace_distance(embed(n0, 1.0), embed(n1, 1.0), 1.0 / std::sqrt(2.0));
}

ApproxResult fr_distance_approx(const Mvn& n0, const Mvn& n1, double epsilon,
                                MidpointRule midpoint) {
    require_same_dim(n0, n1, "fr_distance_approx");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InvalidInput("fr_distance_approx: epsilon must be positive");
    }

    ApproxResult result{0.0, 0.0, 0.0, 0, {}};
    if (jeffreys(n0, n1) < kDegenerateJeffreys) {
        result.segments = 1;
        result.segment_bounds.push_back({0.0, 0.0});
        return result;
    }

    auto settle = [&result](double lower, double upper) {
        result.lower += lower;
        result.upper += upper;
        result.segment_bounds.push_back({lower, upper});
    };
    // Returns true when the segment terminated; false asks for a bisection.
    auto try_settle = [&](const Mvn& p0, const Mvn& p1) {
        const double dj = jeffreys(p0, p1);
        if (dj < kDegenerateJeffreys) {
            settle(0.0, 0.0);
            return true;
        }
        const double upper = std::sqrt(dj);
        const double lower = calvo_oller_lower_bound(p0, p1);
        if (upper <= (1.0 + epsilon) * lower) {
            settle(lower, upper);
            return true;
        }
        return false;
    };

    if (midpoint == MidpointRule::geodesic) {
        // One boundary-value solve serves every midpoint: geodesics between
        // normals are unique, so the restriction of the solved curve to a
        // parameter subinterval is the geodesic between its endpoints.
        const FrGeodesic geod(n0, n1);
        const std::function<void(double, double, const Mvn&, const Mvn&, int)> split =
            [&](double t0, double t1, const Mvn& p0, const Mvn& p1, int depth) {
                if (depth > 48) {
                    throw NumericalFailure("fr_distance_approx: recursion depth exceeded");
                }
                if (try_settle(p0, p1)) return;
                const double tm = 0.5 * (t0 + t1);
                const Mvn mid = geod.at(tm);
                split(t0, tm, p0, mid, depth + 1);
                split(tm, t1, mid, p1, depth + 1);
            };
        split(0.0, 1.0, n0, n1, 0);
    } else {
        const std::function<void(const Mvn&, const Mvn&, int)> split =
            [&](const Mvn& p0, const Mvn& p1, int depth) {
                if (depth > 48) {
                    throw NumericalFailure("fr_distance_approx: recursion depth exceeded");
                }
                if (try_settle(p0, p1)) return;
                const Mvn mid =
                    embed_inverse(ahm_mean(embed(p0, 1.0), embed(p1, 1.0), 1e-12)).point;
                split(p0, mid, depth + 1);
                split(mid, p1, depth + 1);
            };
        split(n0, n1, 0);
    }
    result.segments = static_cast<int>(result.segment_bounds.size());
    result.value = result.upper;
    return result;
}

}  // namespace gaussgeo
