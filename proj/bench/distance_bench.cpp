// Times the serial and OpenMP-parallel pairwise distance paths on synthetic
// datasets and reports the speedup. The parallel path is required to return
// a bitwise-identical matrix, so every run re-checks that before printing.
//
// Usage: distance_bench [points] [dim]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include <omp.h>

#include "gaussgeo/cluster.hpp"
#include "gaussgeo/gaussian.hpp"
#include "gaussgeo/matcore.hpp"

using namespace gaussgeo;

namespace {

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

std::vector<Mvn> random_points(int count, int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    std::vector<Mvn> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Vec mean(dim);
        for (int k = 0; k < dim; ++k) mean[k] = unif(rng);
        pts.push_back(Mvn(mean, random_spd(dim, rng, 10.0)));
    }
    return pts;
}

double time_ms(const std::vector<Mvn>& pts, const MetricSpace& metric, Exec exec, Mat& result) {
    const auto start = std::chrono::steady_clock::now();
    result = distance_matrix(pts, metric, exec);
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    const int count = argc > 1 ? std::atoi(argv[1]) : 128;
    const int dim = argc > 2 ? std::atoi(argv[2]) : 3;
    if (count < 2 || dim < 1) {
        std::fprintf(stderr, "usage: distance_bench [points >= 2] [dim >= 1]\n");
        return 2;
    }

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-16s %7s %12s %12s %9s\n", "metric", "points", "serial ms", "parallel ms",
                "speedup");

    struct Case {
        MetricSpace metric;
        int count;
    };
    std::mt19937_64 rng(2024);
    const Case cases[] = {
        {metric_jeffreys_sqrt(), count},
        {metric_calvo_oller(), count},
        {metric_hilbert(), count},
        // The solved Fisher-Rao lengths cost orders of magnitude more per
        // pair, so the point count is reduced to keep the run short.
        {metric_fisher_rao_fixed(8), std::max(2, count / 4)},
    };

    bool all_equal = true;
    for (const Case& c : cases) {
        const std::vector<Mvn> pts = random_points(c.count, dim, rng);
        Mat serial, parallel;
        const double t_serial = time_ms(pts, c.metric, Exec::serial, serial);
        const double t_parallel = time_ms(pts, c.metric, Exec::parallel, parallel);
        const bool equal = serial == parallel;
        all_equal = all_equal && equal;
        std::printf("%-16s %7d %12.2f %12.2f %8.2fx%s\n", c.metric.name.c_str(), c.count,
                    t_serial, t_parallel, t_serial / t_parallel,
                    equal ? "" : "  MISMATCH");
    }

    if (!all_equal) {
        std::fprintf(stderr, "error: serial and parallel matrices differ\n");
        return 1;
    }
    return 0;
}
