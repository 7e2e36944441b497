#include "gaussgeo/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <utility>

#include "gaussgeo/errors.hpp"
#include "gaussgeo/fisherrao.hpp"

namespace gaussgeo {

namespace {

const double kHalfTraceScale = 1.0 / std::sqrt(2.0);

void check_points(std::size_t count, const char* who) {
    if (count == 0) throw InvalidInput(std::string(who) + ": at least one point required");
}

void check_cluster_count(int k, std::size_t n, const char* who) {
    if (k < 1) throw InvalidInput(std::string(who) + ": k must be >= 1");
    if (static_cast<std::size_t>(k) > n)
        throw InvalidInput(std::string(who) + ": k exceeds the point count");
}

void check_iterations(int iterations, const char* who) {
    if (iterations < 1) throw InvalidInput(std::string(who) + ": iterations must be >= 1");
}

// Runs fn(i) for i in [0, count), in parallel under the policy. The first
// exception thrown by any task is rethrown on the calling thread.
template <typename Fn>
void for_each_index(int count, Exec exec, Fn fn) {
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
    for (int i = 0; i < count; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

int draw_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<int>(rng() % n);
}

// Farthest-first traversal shared by k-center and the k-medioid seeding.
// Fills nearest-center distances and assignments as a side effect.
std::vector<int> farthest_first(PairwiseCache& cache, int n, int k, std::uint64_t seed, Exec exec,
                                std::vector<int>& assignment, std::vector<double>& nearest) {
    std::mt19937_64 rng(seed);
    std::vector<int> centers;
    centers.reserve(k);
    std::vector<bool> used(n, false);

    int first = draw_index(rng, n);
    centers.push_back(first);
    used[first] = true;
    cache.ensure_rows({first}, exec);
    assignment.assign(n, 0);
    nearest.resize(n);
    for (int i = 0; i < n; ++i) nearest[i] = cache.at(first, i);

    while (static_cast<int>(centers.size()) < k) {
        int next = -1;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            if (used[i]) continue;
            if (nearest[i] > best) {
                best = nearest[i];
                next = i;
            }
        }
        centers.push_back(next);
        used[next] = true;
        cache.ensure_rows({next}, exec);
        const int label = static_cast<int>(centers.size()) - 1;
        for (int i = 0; i < n; ++i) {
            const double d = cache.at(next, i);
            if (d < nearest[i]) {
                nearest[i] = d;
                assignment[i] = label;
            }
        }
    }
    return centers;
}

double weighted_cost(PairwiseCache& cache, const std::vector<double>& weights,
                     const std::vector<int>& medioids, const std::vector<int>& assignment) {
    double cost = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        cost += weights[i] * cache.at(static_cast<int>(i), medioids[assignment[i]]);
    return cost;
}

void assign_nearest(PairwiseCache& cache, const std::vector<int>& medioids,
                    std::vector<int>& assignment) {
    const int n = cache.size();
    for (int i = 0; i < n; ++i) {
        int label = 0;
        double best = cache.at(i, medioids[0]);
        for (std::size_t c = 1; c < medioids.size(); ++c) {
            const double d = cache.at(i, medioids[c]);
            if (d < best) {
                best = d;
                label = static_cast<int>(c);
            }
        }
        assignment[i] = label;
    }
}

double realized_radius(PairwiseCache& cache, const std::vector<int>& medioids,
                       const std::vector<int>& assignment) {
    double radius = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        radius = std::max(radius, cache.at(static_cast<int>(i), medioids[assignment[i]]));
    return radius;
}

// One farthest-point scan from a moving center; returns the argmax with
// ties broken toward the lowest index.
template <typename DistFn>
std::pair<int, double> farthest_from(int n, Exec exec, DistFn dist) {
    std::vector<double> d(n);
    for_each_index(n, exec, [&](int i) { d[i] = dist(i); });
    int far = 0;
    for (int i = 1; i < n; ++i)
        if (d[i] > d[far]) far = i;
    return {far, d[far]};
}

Mat cone_walk(const std::vector<Mat>& points, int iterations, Exec exec, MiniballStats* stats) {
    Mat center = points[0];
    const int n = static_cast<int>(points.size());
    const int stride = stats ? std::max(1, stats->stride) : 1;
    for (int t = 1; t <= iterations; ++t) {
        const auto [far, dist] = farthest_from(
            n, exec, [&](int i) { return spd_trace_distance(center, points[i], kHalfTraceScale); });
        if (stats && t % stride == 0) stats->radii.push_back(dist);
        if (dist == 0.0) break;
        center = spd_geodesic(center, points[far], 1.0 / (t + 1));
    }
    return center;
}

}  // namespace

MetricSpace metric_fisher_rao_approx(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidInput("metric_fisher_rao_approx: epsilon must be positive");
    MetricSpace m;
    m.name = "fisher_rao_approx";
    m.distance = [epsilon](const Mvn& a, const Mvn& b) {
        return fr_distance_approx(a, b, epsilon).value;
    };
    m.geodesic = [](const Mvn& a, const Mvn& b, double t) { return fr_geodesic_bvp(a, b, t); };
    m.metric_pruning = false;
    return m;
}

MetricSpace metric_fisher_rao_fixed(int segments) {
    if (segments < 1) throw InvalidInput("metric_fisher_rao_fixed: segments must be >= 1");
    MetricSpace m;
    m.name = "fisher_rao_T";
    m.distance = [segments](const Mvn& a, const Mvn& b) {
        return fr_length_approx(a, b, segments);
    };
    m.geodesic = [](const Mvn& a, const Mvn& b, double t) { return fr_geodesic_bvp(a, b, t); };
    m.metric_pruning = false;
    return m;
}

MetricSpace metric_hilbert(EigMethod method) {
    MetricSpace m;
    m.name = "hilbert";
    m.distance = [method](const Mvn& a, const Mvn& b) {
        return hilbert_distance_mvn(a, b, method);
    };
    m.geodesic = [](const Mvn& a, const Mvn& b, double t) {
        return hilbert_geodesic_mvn(a, b, t);
    };
    m.metric_pruning = true;
    return m;
}

MetricSpace metric_jeffreys_sqrt() {
    MetricSpace m;
    m.name = "jeffreys_sqrt";
    m.distance = [](const Mvn& a, const Mvn& b) { return std::sqrt(jeffreys(a, b)); };
    m.geodesic = [](const Mvn& a, const Mvn& b, double t) { return mixture_geodesic(a, b, t); };
    m.metric_pruning = false;
    return m;
}

MetricSpace metric_calvo_oller() {
    MetricSpace m;
    m.name = "calvo_oller";
    m.distance = [](const Mvn& a, const Mvn& b) { return calvo_oller_lower_bound(a, b); };
    m.metric_pruning = false;
    return m;
}

PairwiseCache::PairwiseCache(const std::vector<Mvn>& points, const MetricSpace& metric)
    : points_(&points), metric_(&metric) {
    check_points(points.size(), "PairwiseCache");
    const int n = static_cast<int>(points.size());
    values_ = Mat::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    values_.diagonal().setZero();
}

double PairwiseCache::at(int i, int j) {
    const int lo = std::min(i, j);
    const int hi = std::max(i, j);
    double& slot = values_(lo, hi);
    if (std::isnan(slot)) slot = metric_->distance((*points_)[lo], (*points_)[hi]);
    return slot;
}

void PairwiseCache::fill_missing(std::vector<std::pair<int, int>>& missing, Exec exec) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::vector<double> computed(missing.size());
    for_each_index(static_cast<int>(missing.size()), exec, [&](int idx) {
        const auto [lo, hi] = missing[idx];
        computed[idx] = metric_->distance((*points_)[lo], (*points_)[hi]);
    });
    for (std::size_t idx = 0; idx < missing.size(); ++idx)
        values_(missing[idx].first, missing[idx].second) = computed[idx];
}

void PairwiseCache::ensure_rows(const std::vector<int>& rows, Exec exec) {
    std::vector<std::pair<int, int>> missing;
    const int n = size();
    for (int r : rows)
        for (int j = 0; j < n; ++j) {
            const int lo = std::min(r, j);
            const int hi = std::max(r, j);
            if (std::isnan(values_(lo, hi))) missing.emplace_back(lo, hi);
        }
    fill_missing(missing, exec);
}

void PairwiseCache::ensure_block(const std::vector<int>& indices, Exec exec) {
    std::vector<std::pair<int, int>> missing;
    for (std::size_t a = 0; a < indices.size(); ++a)
        for (std::size_t b = a + 1; b < indices.size(); ++b) {
            const int lo = std::min(indices[a], indices[b]);
            const int hi = std::max(indices[a], indices[b]);
            if (std::isnan(values_(lo, hi))) missing.emplace_back(lo, hi);
        }
    fill_missing(missing, exec);
}

Mat distance_matrix(const std::vector<Mvn>& points, const MetricSpace& metric, Exec exec) {
    check_points(points.size(), "distance_matrix");
    const int n = static_cast<int>(points.size());
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    Mat out = Mat::Zero(n, n);
    for_each_index(static_cast<int>(pairs.size()), exec, [&](int idx) {
        const auto [i, j] = pairs[idx];
        const double d = metric.distance(points[i], points[j]);
        out(i, j) = d;
        out(j, i) = d;
    });
    return out;
}

VpTree::VpTree(std::vector<Mvn> points, MetricSpace metric, std::uint64_t seed)
    : points_(std::move(points)), metric_(std::move(metric)) {
    check_points(points_.size(), "VpTree");
    nodes_.reserve(points_.size());
    std::vector<int> subset(points_.size());
    for (std::size_t i = 0; i < subset.size(); ++i) subset[i] = static_cast<int>(i);
    std::mt19937_64 rng(seed);
    build(subset, rng);
}

int VpTree::build(std::vector<int>& subset, std::mt19937_64& rng) {
    const int pick = draw_index(rng, subset.size());
    const int vantage = subset[pick];
    subset[pick] = subset.back();
    subset.pop_back();

    const int me = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{vantage, 0.0, -1, -1});
    if (subset.empty()) return me;

    std::vector<double> dists(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i)
        dists[i] = metric_.distance(points_[vantage], points_[subset[i]]);
    std::vector<double> sorted = dists;
    std::nth_element(sorted.begin(), sorted.begin() + (sorted.size() - 1) / 2, sorted.end());
    const double radius = sorted[(sorted.size() - 1) / 2];

    std::vector<int> inside;
    std::vector<int> outside;
    for (std::size_t i = 0; i < subset.size(); ++i)
        (dists[i] <= radius ? inside : outside).push_back(subset[i]);

    nodes_[me].radius = radius;
    const int in = inside.empty() ? -1 : build(inside, rng);
    const int out = outside.empty() ? -1 : build(outside, rng);
    nodes_[me].inside = in;
    nodes_[me].outside = out;
    return me;
}

void VpTree::search(int node, const Mvn& query, VpResult& best) const {
    const Node& v = nodes_[node];
    const double d = metric_.distance(query, points_[v.point]);
    if (best.index < 0 || d < best.distance) best = VpResult{v.point, d};
    if (v.inside < 0 && v.outside < 0) return;

    if (!metric_.metric_pruning) {
        if (v.inside >= 0) search(v.inside, query, best);
        if (v.outside >= 0) search(v.outside, query, best);
        return;
    }
    // Triangle-inequality bounds: inside points are at least d - radius
    // away from the query, outside points at least radius - d.
    const bool inside_first = d <= v.radius;
    for (int leg = 0; leg < 2; ++leg) {
        const bool take_inside = (leg == 0) == inside_first;
        if (take_inside) {
            if (v.inside >= 0 && d - v.radius < best.distance) search(v.inside, query, best);
        } else {
            if (v.outside >= 0 && v.radius - d < best.distance) search(v.outside, query, best);
        }
    }
}

VpResult VpTree::nearest(const Mvn& query) const {
    VpResult best;
    best.distance = std::numeric_limits<double>::infinity();
    search(0, query, best);
    return best;
}

Clustering kcenter_gonzalez(const std::vector<Mvn>& points, int k, const MetricSpace& metric,
                            std::uint64_t seed, Exec exec) {
    check_points(points.size(), "kcenter_gonzalez");
    check_cluster_count(k, points.size(), "kcenter_gonzalez");
    PairwiseCache cache(points, metric);
    std::vector<int> assignment;
    std::vector<double> nearest;
    const std::vector<int> centers =
        farthest_first(cache, static_cast<int>(points.size()), k, seed, exec, assignment, nearest);

    Clustering result;
    for (int c : centers) result.centers.push_back(points[c]);
    result.assignment = std::move(assignment);
    result.radius = *std::max_element(nearest.begin(), nearest.end());
    return result;
}

Clustering kmedioid(const std::vector<Mvn>& points, const std::vector<double>& weights, int k,
                    const MetricSpace& metric, std::uint64_t seed, Exec exec,
                    KmedioidStats* stats) {
    check_points(points.size(), "kmedioid");
    check_cluster_count(k, points.size(), "kmedioid");
    const int n = static_cast<int>(points.size());
    std::vector<double> w = weights;
    if (w.empty()) w.assign(n, 1.0);
    if (static_cast<int>(w.size()) != n)
        throw InvalidInput("kmedioid: weight count does not match the point count");
    for (double x : w)
        if (!(x > 0.0) || !std::isfinite(x))
            throw InvalidInput("kmedioid: weights must be positive");

    PairwiseCache cache(points, metric);
    std::vector<int> assignment;
    std::vector<double> nearest;
    std::vector<int> medioids = farthest_first(cache, n, k, seed, exec, assignment, nearest);
    double cost = weighted_cost(cache, w, medioids, assignment);
    if (stats) stats->costs.push_back(cost);

    for (int sweep = 0; sweep < 1000; ++sweep) {
        // Re-pick each cluster's medioid as the weighted cost minimizer
        // over its members.
        std::vector<std::vector<int>> members(k);
        for (int i = 0; i < n; ++i) members[assignment[i]].push_back(i);
        std::vector<int> updated = medioids;
        for (int c = 0; c < k; ++c) {
            if (members[c].empty()) continue;
            cache.ensure_block(members[c], exec);
            double best = std::numeric_limits<double>::infinity();
            for (int candidate : members[c]) {
                double total = 0.0;
                for (int j : members[c]) total += w[j] * cache.at(j, candidate);
                if (total < best) {
                    best = total;
                    updated[c] = candidate;
                }
            }
        }
        std::vector<int> reassigned(n);
        cache.ensure_rows(updated, exec);
        assign_nearest(cache, updated, reassigned);
        const double updated_cost = weighted_cost(cache, w, updated, reassigned);
        if (!(updated_cost < cost)) break;
        medioids = std::move(updated);
        assignment = std::move(reassigned);
        cost = updated_cost;
        if (stats) stats->costs.push_back(cost);
    }

    Clustering result;
    for (int m : medioids) result.centers.push_back(points[m]);
    result.radius = realized_radius(cache, medioids, assignment);
    result.assignment = std::move(assignment);
    return result;
}

MiniballResult miniball(const std::vector<Mvn>& points, const MetricSpace& metric, int iterations,
                        Exec exec, MiniballStats* stats) {
    check_points(points.size(), "miniball");
    check_iterations(iterations, "miniball");
    if (!metric.has_geodesic())
        throw InvalidInput("miniball: the metric does not provide a geodesic");

    const int n = static_cast<int>(points.size());
    Mvn center = points[0];
    const int stride = stats ? std::max(1, stats->stride) : 1;
    for (int t = 1; t <= iterations; ++t) {
        const auto [far, dist] =
            farthest_from(n, exec, [&](int i) { return metric.distance(center, points[i]); });
        if (stats && t % stride == 0) stats->radii.push_back(dist);
        if (dist == 0.0) break;
        center = metric.geodesic(center, points[far], 1.0 / (t + 1));
    }
    const auto [far, dist] =
        farthest_from(n, exec, [&](int i) { return metric.distance(center, points[i]); });
    (void)far;
    return MiniballResult{std::move(center), dist};
}

MiniballResult miniball_embedded(const std::vector<Mvn>& points, int iterations, Exec exec,
                                 MiniballStats* stats) {
    check_points(points.size(), "miniball_embedded");
    check_iterations(iterations, "miniball_embedded");

    std::vector<Mat> lifted;
    lifted.reserve(points.size());
    for (const Mvn& p : points) lifted.push_back(embed(p));
    const Mat walked = cone_walk(lifted, iterations, exec, stats);
    const Mat slice = project_to_embedded(walked, kHalfTraceScale).projection;

    const auto [far, dist] = farthest_from(static_cast<int>(lifted.size()), exec, [&](int i) {
        return spd_trace_distance(slice, lifted[i], kHalfTraceScale);
    });
    (void)far;
    return MiniballResult{embed_inverse(slice).point, dist};
}

Mat stochastic_centroid_spd(const std::vector<Mat>& points, int iterations, std::uint64_t seed) {
    check_points(points.size(), "stochastic_centroid_spd");
    check_iterations(iterations, "stochastic_centroid_spd");
    for (const Mat& p : points) require_spd(p, "stochastic_centroid_spd");

    std::mt19937_64 rng(seed);
    Mat center = points[draw_index(rng, points.size())];
    for (int i = 2; i <= iterations; ++i)
        center = spd_geodesic(center, points[draw_index(rng, points.size())], 1.0 / i);
    return center;
}

Mvn stochastic_centroid_mvn(const std::vector<Mvn>& points, int iterations, std::uint64_t seed) {
    check_points(points.size(), "stochastic_centroid_mvn");
    check_iterations(iterations, "stochastic_centroid_mvn");

    std::vector<Mat> lifted;
    lifted.reserve(points.size());
    for (const Mvn& p : points) lifted.push_back(embed(p));

    std::mt19937_64 rng(seed);
    Mat center = lifted[draw_index(rng, lifted.size())];
    for (int i = 2; i <= iterations; ++i)
        center = spd_geodesic(center, lifted[draw_index(rng, lifted.size())], 1.0 / i);
    return embed_inverse(project_to_embedded(center, kHalfTraceScale).projection).point;
}

Gmm gmm_simplify(const Gmm& g, int k, const MetricSpace& metric, std::uint64_t seed, Exec exec) {
    check_cluster_count(k, g.size(), "gmm_simplify");
    std::vector<double> weights(g.weights.data(), g.weights.data() + g.size());
    const Clustering clustering = kmedioid(g.components, weights, k, metric, seed, exec);

    Vec merged = Vec::Zero(k);
    for (int i = 0; i < g.size(); ++i) merged[clustering.assignment[i]] += g.weights[i];
    return Gmm(merged, clustering.centers);
}

QuantizeResult gmm_quantize(const std::vector<Gmm>& gmms, int k, const MetricSpace& metric,
                            std::uint64_t seed, Exec exec) {
    if (gmms.empty()) throw InvalidInput("gmm_quantize: at least one mixture required");
    std::vector<Mvn> pooled;
    for (const Gmm& g : gmms)
        for (const Mvn& c : g.components) pooled.push_back(c);
    check_cluster_count(k, pooled.size(), "gmm_quantize");

    const Clustering clustering = kcenter_gonzalez(pooled, k, metric, seed, exec);

    QuantizeResult result;
    result.codebook = clustering.centers;
    std::size_t offset = 0;
    for (const Gmm& g : gmms) {
        Vec q = Vec::Zero(k);
        for (int j = 0; j < g.size(); ++j)
            q[clustering.assignment[offset + j]] += g.weights[j];
        result.quantized.push_back(std::move(q));
        offset += g.size();
    }
    return result;
}

}  // namespace gaussgeo
