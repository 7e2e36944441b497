#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gaussgeo/errors.hpp"
#include "gaussgeo/gaussian.hpp"
#include "gaussgeo/hilbert.hpp"

using namespace gaussgeo;

namespace {

Vec vec1(double x) {
    Vec v(1);
    v << x;
    return v;
}

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

Mvn uni(double mean, double var) { return Mvn(vec1(mean), vec1(var).asDiagonal()); }

Mat random_spd(int n, std::mt19937_64& rng, double cond) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
    const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
    Vec spectrum(n);
    for (int i = 0; i < n; ++i) {
        const double u = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
        spectrum[i] = std::pow(cond, -u);
    }
    return symmetrize(q * spectrum.asDiagonal() * q.transpose());
}

Mvn random_mvn(int d, std::mt19937_64& rng, double cond = 20.0) {
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    Vec mean(d);
    for (int i = 0; i < d; ++i) mean[i] = unif(rng);
    return Mvn(mean, random_spd(d, rng, cond));
}

double max_abs_gap(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

double mvn_gap(const Mvn& a, const Mvn& b) {
    return std::max((a.mean - b.mean).cwiseAbs().maxCoeff(),
                    (a.cov - b.cov).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("hilbert_distance_spd on proportional and diagonal pairs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat p = random_spd(3, rng, 50.0);
        CHECK(hilbert_distance_spd(p, 3.0 * p) < 1e-12);
    }
    const Mat eye = Mat::Identity(2, 2);
    CHECK(hilbert_distance_spd(eye, vec2(4, 1).asDiagonal()) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-14));
    CHECK(hilbert_distance_spd(eye, vec2(8, 2).asDiagonal()) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("hilbert_distance_spd is projectively invariant") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat p0 = random_spd(3, rng, 100.0);
        const Mat p1 = random_spd(3, rng, 100.0);
        const double base = hilbert_distance_spd(p0, p1);
        const double c0 = scale(rng);
        const double c1 = scale(rng);
        CHECK(std::abs(hilbert_distance_spd(c0 * p0, c1 * p1) - base) < 1e-12);
    }
}

TEST_CASE("hilbert_distance_mvn satisfies the metric axioms") {
    std::mt19937_64 rng(13);
    const Mvn n0 = random_mvn(2, rng);
    CHECK(hilbert_distance_mvn(n0, n0) < 1e-12);

    const Mvn zero_iso = Mvn(vec2(0, 0), Mat::Identity(2, 2));
    const Mvn zero_wide = Mvn(vec2(0, 0), 4.0 * Mat::Identity(2, 2));
    CHECK(hilbert_distance_mvn(zero_iso, zero_wide) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-14));

    for (int trial = 0; trial < 1000; ++trial) {
        const Mvn a = random_mvn(2, rng);
        const Mvn b = random_mvn(2, rng);
        const Mvn c = random_mvn(2, rng);
        const double ab = hilbert_distance_mvn(a, b);
        const double bc = hilbert_distance_mvn(b, c);
        const double ac = hilbert_distance_mvn(a, c);
        // Bitwise symmetric: the whitening orientation is canonicalized.
        CHECK(ab == hilbert_distance_mvn(b, a));
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("hilbert_distance_mvn separates distinct normals") {
    std::mt19937_64 rng(14);
    const Mvn n0 = random_mvn(3, rng);
    Mvn shifted = n0;
    shifted.mean[0] += 1e-6;
    CHECK(hilbert_distance_mvn(n0, shifted) > 1e-12);

    Mvn widened = n0;
    widened.cov(0, 0) += 1e-6;
    CHECK(hilbert_distance_mvn(n0, widened) > 1e-12);

    // Unlike the plain SPD distance, proportional covariances with equal
    // means are separated: the unit corner of the embedding pins the scale.
    const Mvn iso = Mvn(vec2(0, 0), Mat::Identity(2, 2));
    const Mvn scaled = Mvn(vec2(0, 0), 2.0 * Mat::Identity(2, 2));
    CHECK(hilbert_distance_mvn(iso, scaled) > 0.5);
}

TEST_CASE("power eigenvalue backend tracks the exact one") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat p0 = random_spd(3, rng, 100.0);
        const Mat p1 = random_spd(3, rng, 100.0);
        const double exact = hilbert_distance_spd(p0, p1, EigMethod::exact);
        const double power = hilbert_distance_spd(p0, p1, EigMethod::power);
        CHECK(std::abs(power - exact) <= 1e-4 * std::max(exact, 1e-30));
    }
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Mvn a = random_mvn(2, rng, 50.0);
        const Mvn b = random_mvn(2, rng, 50.0);
        const double exact = hilbert_distance_mvn(a, b, EigMethod::exact);
        const double power = hilbert_distance_mvn(a, b, EigMethod::power);
        CHECK(std::abs(power - exact) <= 1e-4 * std::max(exact, 1e-30));
    }
}

TEST_CASE("power backend rejects a near-singular whitened spectrum") {
    // Each endpoint passes SPD validation on its own; the pair is so
    // dissimilar that the whitened matrix crosses the conditioning gate.
    const Mat p0 = vec2(1e-5, 1e5).asDiagonal();
    const Mat p1 = vec2(1e5, 1e-5).asDiagonal();
    CHECK_THROWS_AS(hilbert_distance_spd(p0, p1, EigMethod::power), NumericalFailure);
    CHECK(hilbert_distance_spd(p0, p1, EigMethod::exact) ==
          doctest::Approx(std::log(1e20)).epsilon(1e-12));
}

TEST_CASE("distance inputs are validated") {
    const Mat eye2 = Mat::Identity(2, 2);
    const Mat eye3 = Mat::Identity(3, 3);
    CHECK_THROWS_AS(hilbert_distance_spd(eye2, eye3), InvalidInput);
    Mat indefinite = eye2;
    indefinite(1, 1) = -1.0;
    CHECK_THROWS_AS(hilbert_distance_spd(indefinite, eye2), InvalidInput);
    CHECK_THROWS_AS(hilbert_distance_mvn(uni(0, 1), Mvn(vec2(0, 0), eye2)), InvalidInput);
}

TEST_CASE("hilbert_geodesic_spd hits its endpoints and stays SPD") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat p0 = random_spd(3, rng, 100.0);
        const Mat p1 = random_spd(3, rng, 100.0);
        CHECK(max_abs_gap(hilbert_geodesic_spd(p0, p1, 0.0), p0) < 1e-12);
        CHECK(max_abs_gap(hilbert_geodesic_spd(p0, p1, 1.0), p1) < 1e-12);
        for (double t : {0.25, 0.5, 0.75}) CHECK(is_spd(hilbert_geodesic_spd(p0, p1, t)));
    }
    CHECK_THROWS_AS(hilbert_geodesic_spd(Mat::Identity(2, 2), Mat::Identity(2, 2), -0.1),
                    InvalidInput);
    CHECK_THROWS_AS(hilbert_geodesic_spd(Mat::Identity(2, 2), Mat::Identity(2, 2), 1.5),
                    InvalidInput);
}

TEST_CASE("proportional endpoints fall back to linear interpolation") {
    std::mt19937_64 rng(17);
    const Mat p0 = random_spd(3, rng, 30.0);
    const Mat p1 = 3.0 * p0;
    for (double t : {0.0, 0.3, 0.5, 0.8, 1.0}) {
        const Mat expected = (1.0 + 2.0 * t) * p0;
        CHECK(max_abs_gap(hilbert_geodesic_spd(p0, p1, t), expected) < 1e-12);
    }
}

TEST_CASE("geodesic parameter is metric arc length") {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat p0 = random_spd(3, rng, 100.0);
        const Mat p1 = random_spd(3, rng, 100.0);
        const double total = hilbert_distance_spd(p0, p1);
        for (double t : {0.25, 0.5, 0.75}) {
            const Mat mid = hilbert_geodesic_spd(p0, p1, t);
            CHECK(std::abs(hilbert_distance_spd(p0, mid) - t * total) < 1e-9);
        }
    }
}

TEST_CASE("geodesic segments add up") {
    std::mt19937_64 rng(19);
    const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int trial = 0; trial < 5; ++trial) {
        const Mat p0 = random_spd(4, rng, 100.0);
        const Mat p1 = random_spd(4, rng, 100.0);
        const double total = hilbert_distance_spd(p0, p1);
        for (double s : grid)
            for (double t : grid) {
                const Mat gs = hilbert_geodesic_spd(p0, p1, s);
                const Mat gt = hilbert_geodesic_spd(p0, p1, t);
                CHECK(std::abs(hilbert_distance_spd(gs, gt) - std::abs(s - t) * total) < 1e-9);
            }
    }
}

TEST_CASE("hilbert_geodesic_mvn recovers its endpoints") {
    std::mt19937_64 rng(20);
    for (int trial = 0; trial < 10; ++trial) {
        const Mvn n0 = random_mvn(2, rng);
        const Mvn n1 = random_mvn(2, rng);
        CHECK(mvn_gap(hilbert_geodesic_mvn(n0, n1, 0.0), n0) == 0.0);
        CHECK(mvn_gap(hilbert_geodesic_mvn(n0, n1, 1.0), n1) == 0.0);
    }
}

TEST_CASE("pullback curve matches the mixture geodesic as a point set") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Mvn n0 = random_mvn(3, rng);
        const Mvn n1 = random_mvn(3, rng);
        const HilbertGeodesicCoeffs coeffs = hilbert_geodesic_coeffs(embed(n0), embed(n1));
        for (double t : {0.2, 0.5, 0.9}) {
            const double at = std::pow(coeffs.alpha, t);
            const double bt = std::pow(coeffs.beta, t);
            const double ca = coeffs.beta * at - coeffs.alpha * bt;
            const double cb = bt - at;
            // The rescaled line point is the convex combination with weights
            // ca, cb normalized to sum one, which is the mixture point there.
            const Mvn expected = mixture_geodesic(n0, n1, cb / (ca + cb));
            CHECK(mvn_gap(hilbert_geodesic_mvn(n0, n1, t), expected) < 1e-9);
        }
    }
}

TEST_CASE("univariate pullback hand values") {
    const Mvn narrow = uni(0, 1);
    const Mvn wide = uni(0, 4);

    // Metric midpoint: both halves measure (1/2) log 4 = log 2.
    const Mvn mid = hilbert_geodesic_mvn(narrow, wide, 0.5);
    CHECK(std::abs(mid.mean[0]) < 1e-12);
    CHECK(mid.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hilbert_distance_mvn(narrow, mid) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Midpoint of the embedded line (equal-weight mixture) sits at the
    // curve parameter solving 4^t = 2.5, with variance 2.5.
    const double t_lerp_mid = std::log(2.5) / std::log(4.0);
    const Mvn lerp_mid = hilbert_geodesic_mvn(narrow, wide, t_lerp_mid);
    CHECK(lerp_mid.cov(0, 0) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(mvn_gap(lerp_mid, mixture_geodesic(narrow, wide, 0.5)) < 1e-9);
}

TEST_CASE("project_to_embedded fixes slice members and scales off-slice ones") {
    std::mt19937_64 rng(22);

    // On the slice already: projection is the identity map, distance zero.
    const Mvn n = random_mvn(2, rng);
    const ProjectionResult on_slice = project_to_embedded(embed(n));
    CHECK(max_abs_gap(on_slice.projection, embed(n)) < 1e-12);
    CHECK(on_slice.distance < 1e-12);

    // 2I has corner 2, zero mean block, and covariance block 2I.
    const ProjectionResult doubled = project_to_embedded(2.0 * Mat::Identity(3, 3));
    Mat expected = Mat::Identity(3, 3);
    expected(0, 0) = 2.0;
    expected(1, 1) = 2.0;
    CHECK(max_abs_gap(doubled.projection, expected) < 1e-12);
    CHECK(doubled.distance == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    // Scaled embeddings of one normal all project to the unit-corner copy.
    for (double a : {0.5, 1.0, 2.0, 7.0}) {
        const ProjectionResult res = project_to_embedded(embed(n, a));
        CHECK(max_abs_gap(res.projection, embed(n)) < 1e-12);
        CHECK(res.distance == doctest::Approx(std::abs(std::log(a))).epsilon(1e-12));
    }

    // The scale parameter multiplies the reported distance only.
    const double half_trace = 1.0 / std::sqrt(2.0);
    const ProjectionResult scaled = project_to_embedded(embed(n, 3.0), half_trace);
    CHECK(scaled.distance == doctest::Approx(half_trace * std::log(3.0)).epsilon(1e-12));
    CHECK(max_abs_gap(scaled.projection, embed(n)) < 1e-12);
}

TEST_CASE("project_to_embedded round trips through the embedding") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat p = random_spd(4, rng, 50.0);
        const ProjectionResult res = project_to_embedded(p);
        CHECK(res.projection(3, 3) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(max_abs_gap(embed(embed_inverse(res.projection).point), res.projection) < 1e-12);
        // Projecting a point already on the slice changes nothing.
        const ProjectionResult again = project_to_embedded(res.projection);
        CHECK(max_abs_gap(again.projection, res.projection) < 1e-12);
        CHECK(again.distance < 1e-12);
    }
}

TEST_CASE("project_to_embedded validates its inputs") {
    Mat indefinite = Mat::Identity(3, 3);
    indefinite(2, 2) = -1.0;
    CHECK_THROWS_AS(project_to_embedded(indefinite), InvalidInput);
    CHECK_THROWS_AS(project_to_embedded(Mat::Identity(1, 1)), InvalidInput);
    CHECK_THROWS_AS(project_to_embedded(Mat::Identity(3, 3), 0.0), InvalidInput);
    CHECK_THROWS_AS(project_to_embedded(Mat::Identity(3, 3), -1.0), InvalidInput);
}
