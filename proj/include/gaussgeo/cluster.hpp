#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gaussgeo/gaussian.hpp"
#include "gaussgeo/hilbert.hpp"
#include "gaussgeo/matcore.hpp"

namespace gaussgeo {

// Execution policy for batched distance evaluations. Distances are pure
// functions, so the parallel policy produces bit-identical results to the
// serial one; only wall-clock time differs.
enum class Exec { serial, parallel };

// A named dissimilarity over normals, optionally paired with a geodesic.
// Instances come from the factory functions below; the factories guarantee
// symmetry and nonnegativity of the distance. metric_pruning is set only
// when the triangle inequality is established, enabling ball pruning in
// nearest-neighbor search; all other distances use a conservative search
// that visits both branches.
struct MetricSpace {
    std::string name;
    std::function<double(const Mvn&, const Mvn&)> distance;
    std::function<Mvn(const Mvn&, const Mvn&, double)> geodesic;
    bool metric_pruning = false;

    bool has_geodesic() const { return static_cast<bool>(geodesic); }
};

// Adaptive geodesic-subdivision approximation of the Fisher-Rao distance,
// refined until the bound gap falls under epsilon. Paired with the
// boundary-value geodesic.
MetricSpace metric_fisher_rao_approx(double epsilon = 1e-3);

// Fixed-resolution Fisher-Rao length proxy with the given segment count.
// Paired with the boundary-value geodesic.
MetricSpace metric_fisher_rao_fixed(int segments);

// Hilbert projective distance on embedded normals, a proper metric.
// Paired with the cone pullback geodesic.
MetricSpace metric_hilbert(EigMethod method = EigMethod::exact);

// Square root of the Jeffreys divergence. Paired with the mixture
// geodesic.
MetricSpace metric_jeffreys_sqrt();

// Closed-form lower bound on the Fisher-Rao distance through the cone
// embedding. No geodesic.
MetricSpace metric_calvo_oller();

// Memoized pairwise distances keyed by point indices. Clustering drivers
// route every point-to-point evaluation through one of these; the
// expensive distances make the cache load-bearing, not cosmetic.
// ensure_rows fills missing entries in batch, optionally in parallel;
// at() fills lazily and is single-threaded.
class PairwiseCache {
  public:
    PairwiseCache(const std::vector<Mvn>& points, const MetricSpace& metric);

    double at(int i, int j);
    void ensure_rows(const std::vector<int>& rows, Exec exec);
    void ensure_block(const std::vector<int>& indices, Exec exec);
    int size() const { return static_cast<int>(points_->size()); }

  private:
    void fill_missing(std::vector<std::pair<int, int>>& missing, Exec exec);

    const std::vector<Mvn>* points_;
    const MetricSpace* metric_;
    Mat values_;  // NaN marks entries not yet computed
};

// Full symmetric distance matrix with zero diagonal.
Mat distance_matrix(const std::vector<Mvn>& points, const MetricSpace& metric,
                    Exec exec = Exec::serial);

struct VpResult {
    int index = -1;
    double distance = 0.0;
};

// Vantage-point tree over a fixed point set. Vantage points are drawn
// from the current subset by the build seed; the split radius is the
// median distance to the vantage point, keeping the tree balanced.
// Immutable after construction and safe to query concurrently.
class VpTree {
  public:
    struct Node {
        int point = -1;
        double radius = 0.0;
        int inside = -1;
        int outside = -1;
    };

    VpTree(std::vector<Mvn> points, MetricSpace metric, std::uint64_t seed);

    // Global minimizer of the metric over the stored points. With
    // metric_pruning the usual ball bounds cut branches; otherwise both
    // children are always visited, so the result matches a linear scan
    // for approximate distances too. Ties may resolve to any index at
    // the same distance.
    VpResult nearest(const Mvn& query) const;

    const std::vector<Mvn>& points() const { return points_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return 0; }

  private:
    int build(std::vector<int>& subset, std::mt19937_64& rng);
    void search(int node, const Mvn& query, VpResult& best) const;

    std::vector<Mvn> points_;
    MetricSpace metric_;
    std::vector<Node> nodes_;
};

// A hard clustering: centers drawn from the input, the index of the
// assigned center per point, and the realized maximum point-to-center
// distance.
struct Clustering {
    std::vector<Mvn> centers;
    std::vector<int> assignment;
    double radius = 0.0;
};

// Farthest-first traversal. The first center is drawn uniformly by the
// seed; each following center is the point farthest from the chosen
// ones (ties to the lowest index). Radius is at most twice the optimal
// k-center radius when the distance is a true metric.
Clustering kcenter_gonzalez(const std::vector<Mvn>& points, int k, const MetricSpace& metric,
                            std::uint64_t seed, Exec exec = Exec::serial);

struct KmedioidStats {
    std::vector<double> costs;  // weighted cost after each accepted sweep
};

// PAM-style alternation seeded by farthest-first traversal: assign each
// point to its nearest medioid, then re-pick each cluster's medioid as
// the weighted in-cluster cost minimizer, until the total cost stops
// decreasing. Empty weights mean unweighted.
Clustering kmedioid(const std::vector<Mvn>& points, const std::vector<double>& weights, int k,
                    const MetricSpace& metric, std::uint64_t seed, Exec exec = Exec::serial,
                    KmedioidStats* stats = nullptr);

struct MiniballResult {
    Mvn center;
    double radius = 0.0;
};

struct MiniballStats {
    // Eccentricity of the running center sampled every stride iterations.
    std::vector<double> radii;
    int stride = 100;
};

// Minimax center by geodesic walking: starting from the first point,
// step toward the current farthest point (ties to the lowest index)
// with shrinking step 1/(t+1) for exactly `iterations` steps. Requires
// a metric with a geodesic.
MiniballResult miniball(const std::vector<Mvn>& points, const MetricSpace& metric, int iterations,
                        Exec exec = Exec::serial, MiniballStats* stats = nullptr);

// Same walk run in the SPD cone over embedded normals under the
// sqrt(1/2)-scaled trace metric, followed by orthogonal projection back
// onto the embedded slice. The radius is the cone eccentricity of the
// projected center.
MiniballResult miniball_embedded(const std::vector<Mvn>& points, int iterations,
                                 Exec exec = Exec::serial, MiniballStats* stats = nullptr);

// Inductive geometric-mean walk C <- geodesic(C, S, 1/i) over uniformly
// drawn inputs; converges in probability to the Karcher mean of the set
// under the trace metric. Deterministic for a fixed seed.
Mat stochastic_centroid_spd(const std::vector<Mat>& points, int iterations, std::uint64_t seed);

// The same walk over normals, lifted to the cone through the embedding
// and projected back onto the embedded slice at the end.
Mvn stochastic_centroid_mvn(const std::vector<Mvn>& points, int iterations, std::uint64_t seed);

// Mixture simplification: k-medioid over the weighted components; merged
// component weights are summed.
Gmm gmm_simplify(const Gmm& g, int k, const MetricSpace& metric, std::uint64_t seed,
                 Exec exec = Exec::serial);

struct QuantizeResult {
    std::vector<Mvn> codebook;
    std::vector<Vec> quantized;  // one weight vector over the codebook per input mixture
};

// Shared codebook over the pooled components of several mixtures via
// farthest-first k-center; each mixture's weights are accumulated onto
// the nearest codeword in component order.
QuantizeResult gmm_quantize(const std::vector<Gmm>& gmms, int k, const MetricSpace& metric,
                            std::uint64_t seed, Exec exec = Exec::serial);

}  // namespace gaussgeo
