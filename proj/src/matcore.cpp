#include "gaussgeo/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace gaussgeo {

namespace {

void require_finite(const Mat& M, const char* what) {
    if (!M.allFinite()) {
        throw InvalidInput(std::string(what) + ": non-finite entries");
    }
}

void require_square(const Mat& M, const char* what) {
    if (M.rows() == 0 || M.rows() != M.cols()) {
        throw InvalidInput(std::string(what) + ": expected a square matrix, got " +
                           std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    }
}

void require_same_dim(const Mat& A, const Mat& B, const char* what) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw InvalidInput(std::string(what) + ": dimension mismatch " +
                           std::to_string(A.rows()) + "x" + std::to_string(A.cols()) + " vs " +
                           std::to_string(B.rows()) + "x" + std::to_string(B.cols()));
    }
}

} // namespace

Mat symmetrize(const Mat& M) {
    return 0.5 * (M + M.transpose());
}

Mat require_symmetric(const Mat& M, const char* what) {
    require_square(M, what);
    require_finite(M, what);
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidInput(std::string(what) + ": matrix is not symmetric");
    }
    return symmetrize(M);
}

bool is_spd(const Mat& P) {
    if (P.rows() == 0 || P.rows() != P.cols() || !P.allFinite()) return false;
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
    const EigenDecomposition ed = sym_eig(symmetrize(P));
    const double lmax = ed.eigenvalues(0);
    const double lmin = ed.eigenvalues(ed.eigenvalues.size() - 1);
    return lmax > 0.0 && lmin > static_cast<double>(P.rows()) * kSpdRelTol * lmax;
}

void require_spd(const Mat& P, const char* what) {
    require_square(P, what);
    require_finite(P, what);
    if (!is_spd(P)) {
        throw InvalidInput(std::string(what) + ": matrix is not symmetric positive-definite");
    }
}

EigenDecomposition sym_eig(const Mat& M_in) {
    require_square(M_in, "sym_eig");
    require_finite(M_in, "sym_eig");
    Mat A = symmetrize(M_in);
    const int n = static_cast<int>(A.rows());
    Mat V = Mat::Identity(n, n);

    if (n > 1) {
        // Cyclic-by-rows Jacobi. Each rotation zeroes one off-diagonal entry;
        // off-diagonal mass decays quadratically once sweeps settle.
        const double norm = std::max(A.norm(), 1e-300);
        const double tol = 1e-15 * norm;
        const int max_sweeps = 64;
        int sweep = 0;
        for (; sweep < max_sweeps; ++sweep) {
            double off = 0.0;
            for (int p = 0; p < n; ++p)
                for (int q = p + 1; q < n; ++q) off += 2.0 * A(p, q) * A(p, q);
            if (std::sqrt(off) <= tol) break;
            for (int p = 0; p < n - 1; ++p) {
                for (int q = p + 1; q < n; ++q) {
                    if (std::abs(A(p, q)) <= 0.25 * tol / n) continue;
                    Eigen::JacobiRotation<double> rot;
                    if (!rot.makeJacobi(A, p, q)) continue;
                    A.applyOnTheLeft(p, q, rot.transpose());
                    A.applyOnTheRight(p, q, rot);
                    V.applyOnTheRight(p, q, rot);
                    A(p, q) = A(q, p) = 0.0;
                }
            }
        }
        if (sweep == max_sweeps) {
            throw NumericalFailure("sym_eig: Jacobi iteration did not converge in 64 sweeps");
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return A(i, i) > A(j, j); });

    EigenDecomposition ed;
    ed.rotation.resize(n, n);
    ed.eigenvalues.resize(n);
    for (int k = 0; k < n; ++k) {
        ed.eigenvalues(k) = A(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        ed.rotation.col(k) = V.col(order[static_cast<std::size_t>(k)]);
    }
    return ed;
}

Mat spd_power(const Mat& P, double p) {
    require_spd(P, "spd_power");
    const EigenDecomposition ed = sym_eig(P);
    Vec powered = ed.eigenvalues.array().pow(p).matrix();
    return symmetrize(ed.rotation * powered.asDiagonal() * ed.rotation.transpose());
}

Mat spd_geodesic(const Mat& P0, const Mat& P1, double t) {
    require_same_dim(P0, P1, "spd_geodesic");
    require_spd(P0, "spd_geodesic");
    require_spd(P1, "spd_geodesic");
    const Mat r = spd_power(P0, 0.5);
    const Mat ri = spd_power(P0, -0.5);
    const Mat w = symmetrize(ri * P1 * ri);
    return symmetrize(r * spd_power(w, t) * r);
}

double spd_trace_distance(const Mat& P0, const Mat& P1, double scale) {
    require_same_dim(P0, P1, "spd_trace_distance");
    if (scale <= 0.0) throw InvalidInput("spd_trace_distance: scale must be positive");
    require_spd(P0, "spd_trace_distance");
    require_spd(P1, "spd_trace_distance");
    const Mat ri = spd_power(P0, -0.5);
    const EigenDecomposition ed = sym_eig(symmetrize(ri * P1 * ri));
    double sum = 0.0;
    for (int i = 0; i < ed.eigenvalues.size(); ++i) {
        const double l = std::log(ed.eigenvalues(i));
        sum += l * l;
    }
    return scale * std::sqrt(sum);
}

Mat ahm_mean(const Mat& X, const Mat& Y, double tol, AhmStats* stats) {
    require_same_dim(X, Y, "ahm_mean");
    require_spd(X, "ahm_mean");
    require_spd(Y, "ahm_mean");
    if (tol <= 0.0) throw InvalidInput("ahm_mean: tol must be positive");

    Mat A = symmetrize(X);
    Mat H = symmetrize(Y);
    if (stats) {
        stats->iterations = 0;
        stats->gaps.clear();
    }
    for (int it = 0; it < 64; ++it) {
        const double gap = (A - H).norm() / std::max(A.norm(), 1e-300);
        if (stats) stats->gaps.push_back(gap);
        if (gap <= tol) {
            if (stats) stats->iterations = it;
            return symmetrize(0.5 * (A + H));
        }
        const Mat An = 0.5 * (A + H);
        const Mat Hn = 2.0 * (A.inverse() + H.inverse()).inverse();
        A = symmetrize(An);
        H = symmetrize(Hn);
    }
    throw NumericalFailure("ahm_mean: no convergence within 64 iterations");
}

namespace {

// Best Rayleigh quotient over seeded restarts of the plain power iteration.
double power_rayleigh(const Mat& P, int iterations, std::uint64_t seed) {
    const int n = static_cast<int>(P.rows());
    double best = -std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 8; ++restart) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(restart) * 0x9e3779b97f4a7c15ULL);
        Vec x(n);
        for (int i = 0; i < n; ++i) x(i) = (rng() & 1u) ? 1.0 : -1.0;
        x.normalize();
        for (int it = 0; it < iterations; ++it) {
            x = P * x;
            const double nrm = x.norm();
            if (!(nrm > 0.0) || !std::isfinite(nrm)) {
                throw NumericalFailure("power_method_extreme: iterate vanished or overflowed");
            }
            x /= nrm;
        }
        best = std::max(best, x.dot(P * x));
    }
    return best;
}

} // namespace

ExtremeEigs power_method_extreme(const Mat& P, int iterations, std::uint64_t seed) {
    require_symmetric(P, "power_method_extreme");
    if (iterations < 1) throw InvalidInput("power_method_extreme: iterations must be >= 1");

    // Conditioning gate comes before the SPD gate: a numerically singular
    // matrix must surface as NumericalFailure, not as an SPD-validation error.
    const Mat Pinv = P.inverse();
    const double cond1 = P.cwiseAbs().colwise().sum().maxCoeff() *
                         Pinv.cwiseAbs().colwise().sum().maxCoeff();
    if (!(cond1 < 1e14)) {
        throw NumericalFailure("power_method_extreme: matrix condition estimate exceeds 1e14");
    }
    require_spd(P, "power_method_extreme");

    ExtremeEigs out;
    out.lambda_max = power_rayleigh(P, iterations, seed);
    out.lambda_min = 1.0 / power_rayleigh(symmetrize(Pinv), iterations, seed);
    return out;
}

Mat sym_func(const Mat& M, SymFunc kind) {
    const Mat S = require_symmetric(M, "sym_func");
    if (kind == SymFunc::log) require_spd(S, "sym_func(log)");
    const EigenDecomposition ed = sym_eig(S);
    Vec mapped(ed.eigenvalues.size());
    for (int i = 0; i < ed.eigenvalues.size(); ++i) {
        const double l = ed.eigenvalues(i);
        switch (kind) {
            case SymFunc::exp: mapped(i) = std::exp(l); break;
            case SymFunc::sinh: mapped(i) = std::sinh(l); break;
            case SymFunc::cosh: mapped(i) = std::cosh(l); break;
            case SymFunc::log: mapped(i) = std::log(l); break;
        }
    }
    return symmetrize(ed.rotation * mapped.asDiagonal() * ed.rotation.transpose());
}

} // namespace gaussgeo
