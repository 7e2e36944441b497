// Command-line front end: dataset I/O, distance and geodesic computation,
// clustering, quantization, and miniball drivers over the gaussgeo library.
//
// Exit codes: 0 on success, 2 for input errors (malformed files, bad
// indices, bad flags, unwritable paths), 3 for numerical failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"

#include "gaussgeo/cluster.hpp"
#include "gaussgeo/errors.hpp"
#include "gaussgeo/fisherrao.hpp"
#include "gaussgeo/gaussian.hpp"
#include "gaussgeo/hilbert.hpp"
#include "gaussgeo/io.hpp"

namespace {

using namespace gaussgeo;

struct Options {
    std::string input;
    int i = 0;
    int j = 0;
    std::string method;
    std::string curve;
    std::string metric;
    std::string algo;
    std::string eig = "exact";
    std::string out;
    double epsilon = 1e-3;
    int steps = 100;
    int samples = 100;
    int k = 1;
    int iters = 1000;
    std::uint64_t seed = 0;
    bool ellipses = false;
};

EigMethod parse_eig(const std::string& name) {
    return name == "power" ? EigMethod::power : EigMethod::exact;
}

MetricSpace make_metric(const Options& opt) {
    if (opt.metric == "fr-approx") return metric_fisher_rao_approx(opt.epsilon);
    if (opt.metric == "fr-T") return metric_fisher_rao_fixed(opt.steps);
    if (opt.metric == "jeffreys-sqrt") return metric_jeffreys_sqrt();
    if (opt.metric == "calvo-oller") return metric_calvo_oller();
    if (opt.metric == "hilbert") return metric_hilbert(parse_eig(opt.eig));
    throw InvalidInput("unknown metric: " + opt.metric);
}

// Echoes the metric choice and whichever of its tuning flags apply.
void echo_metric(const Options& opt, nlohmann::json& params) {
    params["metric"] = opt.metric;
    if (opt.metric == "fr-approx") params["epsilon"] = opt.epsilon;
    if (opt.metric == "fr-T") params["steps"] = opt.steps;
    if (opt.metric == "hilbert") params["eig"] = opt.eig;
}

const std::vector<Mvn>& require_mvns(const Dataset& ds, const char* command) {
    if (ds.mvns.empty()) {
        throw InvalidInput(std::string(command) + ": dataset must hold \"mvns\" records");
    }
    return ds.mvns;
}

void check_index(int index, const std::vector<Mvn>& pts, const char* command) {
    if (index < 0 || index >= static_cast<int>(pts.size())) {
        throw InvalidInput(std::string(command) + ": index " + std::to_string(index) +
                           " outside the dataset (size " + std::to_string(pts.size()) + ")");
    }
}

nlohmann::json mvn_list(const std::vector<Mvn>& pts) {
    nlohmann::json list = nlohmann::json::array();
    for (const Mvn& p : pts) list.push_back(mvn_to_json(p));
    return list;
}

RunReport run_distance(const Options& opt) {
    const Dataset ds = load_dataset(opt.input);
    const std::vector<Mvn>& pts = require_mvns(ds, "distance");
    check_index(opt.i, pts, "distance");
    check_index(opt.j, pts, "distance");

    RunReport report;
    report.command = "distance";
    report.parameters["input"] = opt.input;
    report.parameters["i"] = opt.i;
    report.parameters["j"] = opt.j;
    report.parameters["method"] = opt.method;
    if (opt.method == "fr-approx") report.parameters["epsilon"] = opt.epsilon;
    if (opt.method == "fr-T") report.parameters["steps"] = opt.steps;
    if (opt.method == "hilbert") report.parameters["eig"] = opt.eig;

    if (opt.i == opt.j) {
        // The same record twice is zero by the metric axioms; skip the
        // computation so the report states it exactly.
        report.outputs["value"] = 0.0;
        if (opt.method == "fr-approx") {
            report.outputs["lower"] = 0.0;
            report.outputs["upper"] = 0.0;
            report.outputs["segments"] = 1;
        }
        return report;
    }

    const Mvn& a = pts[static_cast<std::size_t>(opt.i)];
    const Mvn& b = pts[static_cast<std::size_t>(opt.j)];
    if (opt.method == "fr-approx") {
        const ApproxResult r = fr_distance_approx(a, b, opt.epsilon);
        report.outputs["value"] = r.value;
        report.outputs["lower"] = r.lower;
        report.outputs["upper"] = r.upper;
        report.outputs["segments"] = r.segments;
    } else if (opt.method == "fr-T") {
        report.outputs["value"] = fr_length_approx(a, b, opt.steps);
    } else if (opt.method == "jeffreys-sqrt") {
        report.outputs["value"] = std::sqrt(jeffreys(a, b));
    } else if (opt.method == "calvo-oller") {
        report.outputs["value"] = calvo_oller_lower_bound(a, b);
    } else if (opt.method == "hilbert") {
        report.outputs["value"] = hilbert_distance_mvn(a, b, parse_eig(opt.eig));
    } else if (opt.method == "kl") {
        report.outputs["value"] = kl_divergence(a, b);
    } else {
        throw InvalidInput("unknown method: " + opt.method);
    }
    return report;
}

RunReport run_geodesic(const Options& opt) {
    if (opt.samples < 2) {
        throw InvalidInput("geodesic: at least two samples required");
    }
    const Dataset ds = load_dataset(opt.input);
    const std::vector<Mvn>& pts = require_mvns(ds, "geodesic");
    check_index(opt.i, pts, "geodesic");
    check_index(opt.j, pts, "geodesic");
    const Mvn& a = pts[static_cast<std::size_t>(opt.i)];
    const Mvn& b = pts[static_cast<std::size_t>(opt.j)];

    std::function<Mvn(double)> curve;
    if (opt.curve == "fisher-rao") {
        curve = [geo = FrGeodesic(a, b)](double t) { return geo.at(t); };
    } else if (opt.curve == "mixture") {
        curve = [&](double t) { return mixture_geodesic(a, b, t); };
    } else if (opt.curve == "exponential") {
        curve = [&](double t) { return exponential_geodesic(a, b, t); };
    } else if (opt.curve == "hilbert") {
        curve = [&](double t) { return hilbert_geodesic_mvn(a, b, t); };
    } else {
        throw InvalidInput("unknown curve: " + opt.curve);
    }

    std::vector<GeodesicSample> rows;
    rows.reserve(static_cast<std::size_t>(opt.samples));
    for (int k = 0; k < opt.samples; ++k) {
        const double t = static_cast<double>(k) / (opt.samples - 1);
        rows.push_back(GeodesicSample{t, curve(t)});
    }

    std::ofstream out(opt.out, std::ios::binary);
    if (!out) {
        throw InvalidInput("geodesic: cannot write " + opt.out);
    }
    write_curve_csv(out, rows);
    if (!out.flush()) {
        throw InvalidInput("geodesic: write to " + opt.out + " failed");
    }

    RunReport report;
    report.command = "geodesic";
    report.parameters["input"] = opt.input;
    report.parameters["i"] = opt.i;
    report.parameters["j"] = opt.j;
    report.parameters["curve"] = opt.curve;
    report.parameters["samples"] = opt.samples;
    report.parameters["out"] = opt.out;
    report.parameters["ellipses"] = opt.ellipses;
    report.outputs["csv"] = opt.out;
    report.outputs["rows"] = opt.samples;

    if (opt.ellipses) {
        std::string epath = opt.out;
        const std::string suffix = ".csv";
        if (epath.size() >= suffix.size() &&
            epath.compare(epath.size() - suffix.size(), suffix.size(), suffix) == 0) {
            epath.resize(epath.size() - suffix.size());
        }
        epath += ".ellipses.csv";
        std::ofstream eout(epath, std::ios::binary);
        if (!eout) {
            throw InvalidInput("geodesic: cannot write " + epath);
        }
        write_ellipse_csv(eout, rows, 64);
        if (!eout.flush()) {
            throw InvalidInput("geodesic: write to " + epath + " failed");
        }
        report.outputs["ellipses"] = epath;
    }
    return report;
}

RunReport run_cluster(const Options& opt) {
    const Dataset ds = load_dataset(opt.input);
    const std::vector<Mvn>& pts = require_mvns(ds, "cluster");
    const MetricSpace metric = make_metric(opt);

    RunReport report;
    report.command = "cluster";
    report.parameters["input"] = opt.input;
    report.parameters["k"] = opt.k;
    report.parameters["algo"] = opt.algo;
    report.parameters["seed"] = opt.seed;
    echo_metric(opt, report.parameters);

    if (opt.algo == "kcenter") {
        const Clustering c = kcenter_gonzalez(pts, opt.k, metric, opt.seed, Exec::parallel);
        report.outputs["centers"] = mvn_list(c.centers);
        report.outputs["assignment"] = c.assignment;
        report.outputs["radius"] = c.radius;
    } else if (opt.algo == "kmedioid") {
        KmedioidStats stats;
        const Clustering c =
            kmedioid(pts, {}, opt.k, metric, opt.seed, Exec::parallel, &stats);
        report.outputs["centers"] = mvn_list(c.centers);
        report.outputs["assignment"] = c.assignment;
        report.outputs["radius"] = c.radius;
        report.outputs["cost"] = stats.costs.back();
    } else {
        throw InvalidInput("unknown algorithm: " + opt.algo);
    }
    return report;
}

RunReport run_quantize(const Options& opt) {
    const Dataset ds = load_dataset(opt.input);
    if (ds.gmms.empty()) {
        throw InvalidInput("quantize: dataset must hold \"gmms\" records");
    }
    const MetricSpace metric = make_metric(opt);
    const QuantizeResult q = gmm_quantize(ds.gmms, opt.k, metric, opt.seed, Exec::parallel);

    RunReport report;
    report.command = "quantize";
    report.parameters["input"] = opt.input;
    report.parameters["k"] = opt.k;
    report.parameters["seed"] = opt.seed;
    echo_metric(opt, report.parameters);
    report.outputs["codebook"] = mvn_list(q.codebook);
    nlohmann::json weights = nlohmann::json::array();
    for (const Vec& w : q.quantized) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < w.size(); ++c) row.push_back(w[c]);
        weights.push_back(row);
    }
    report.outputs["weights"] = weights;
    return report;
}

RunReport run_miniball(const Options& opt, bool metric_given) {
    const Dataset ds = load_dataset(opt.input);
    const std::vector<Mvn>& pts = require_mvns(ds, "miniball");

    RunReport report;
    report.command = "miniball";
    report.parameters["input"] = opt.input;
    report.parameters["algo"] = opt.algo;
    report.parameters["iters"] = opt.iters;
    report.parameters["seed"] = opt.seed;

    const MiniballResult ball = [&]() {
        if (opt.algo == "direct") {
            if (!metric_given) {
                throw InvalidInput("miniball: --metric is required for the direct algorithm");
            }
            echo_metric(opt, report.parameters);
            const MetricSpace metric = make_metric(opt);
            return miniball(pts, metric, opt.iters, Exec::parallel);
        }
        if (opt.algo == "embedded") {
            if (metric_given) {
                report.warnings.push_back("the embedded algorithm ignores --metric");
            }
            return miniball_embedded(pts, opt.iters, Exec::parallel);
        }
        throw InvalidInput("unknown algorithm: " + opt.algo);
    }();
    report.outputs["center"] = mvn_to_json(ball.center);
    report.outputs["radius"] = ball.radius;
    return report;
}

void apply_thread_cap(std::vector<std::string>& warnings) {
    const char* env = std::getenv("GAUSSGEO_THREADS");
    if (env == nullptr) return;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
        warnings.push_back("ignoring GAUSSGEO_THREADS: expected a positive integer");
        return;
    }
    const long cap = std::min<long>(v, omp_get_max_threads());
    omp_set_num_threads(static_cast<int>(cap));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian geometry toolkit: Fisher-Rao and Hilbert distances, geodesics, "
                 "clustering, and mixture quantization"};
    app.require_subcommand(1);
    Options opt;

    const auto metric_choices =
        CLI::IsMember({"fr-approx", "fr-T", "jeffreys-sqrt", "calvo-oller", "hilbert"});
    const auto eig_choices = CLI::IsMember({"exact", "power"});

    CLI::App* distance = app.add_subcommand("distance", "Distance between two dataset entries");
    distance->add_option("--input", opt.input, "Dataset JSON file")->required();
    distance->add_option("-i,--first", opt.i, "Index of the first normal")->required();
    distance->add_option("-j,--second", opt.j, "Index of the second normal")->required();
    distance
        ->add_option("--method", opt.method, "Distance method")
        ->required()
        ->check(CLI::IsMember(
            {"fr-approx", "fr-T", "jeffreys-sqrt", "calvo-oller", "hilbert", "kl"}));
    distance->add_option("--epsilon", opt.epsilon, "Relative tolerance for fr-approx");
    distance->add_option("--steps", opt.steps, "Segment count for fr-T");
    distance->add_option("--eig", opt.eig, "Eigenvalue solver for hilbert")->check(eig_choices);

    CLI::App* geodesic = app.add_subcommand("geodesic", "Sample a curve between two entries");
    geodesic->add_option("--input", opt.input, "Dataset JSON file")->required();
    geodesic->add_option("-i,--first", opt.i, "Index of the first normal")->required();
    geodesic->add_option("-j,--second", opt.j, "Index of the second normal")->required();
    geodesic->add_option("--curve", opt.curve, "Curve family")
        ->required()
        ->check(CLI::IsMember({"fisher-rao", "mixture", "exponential", "hilbert"}));
    geodesic->add_option("--samples", opt.samples, "Number of sampled points (>= 2)");
    geodesic->add_option("--out", opt.out, "Output CSV path")->required();
    geodesic->add_flag("--ellipses", opt.ellipses,
                       "Also write one-standard-deviation ellipse polylines (bivariate only)");

    CLI::App* cluster = app.add_subcommand("cluster", "Cluster dataset entries");
    cluster->add_option("--input", opt.input, "Dataset JSON file")->required();
    cluster->add_option("--k", opt.k, "Number of clusters")->required();
    cluster->add_option("--algo", opt.algo, "Clustering algorithm")
        ->required()
        ->check(CLI::IsMember({"kcenter", "kmedioid"}));
    cluster->add_option("--metric", opt.metric, "Metric")->required()->check(metric_choices);
    cluster->add_option("--seed", opt.seed, "Random seed");
    cluster->add_option("--epsilon", opt.epsilon, "Relative tolerance for fr-approx");
    cluster->add_option("--steps", opt.steps, "Segment count for fr-T");
    cluster->add_option("--eig", opt.eig, "Eigenvalue solver for hilbert")->check(eig_choices);

    CLI::App* quantize = app.add_subcommand("quantize", "Quantize mixtures onto a codebook");
    quantize->add_option("--input", opt.input, "Dataset JSON file with gmms")->required();
    quantize->add_option("--k", opt.k, "Codebook size")->required();
    quantize->add_option("--metric", opt.metric, "Metric")->required()->check(metric_choices);
    quantize->add_option("--seed", opt.seed, "Random seed");
    quantize->add_option("--epsilon", opt.epsilon, "Relative tolerance for fr-approx");
    quantize->add_option("--steps", opt.steps, "Segment count for fr-T");
    quantize->add_option("--eig", opt.eig, "Eigenvalue solver for hilbert")->check(eig_choices);

    CLI::App* miniball_cmd = app.add_subcommand("miniball", "Smallest enclosing ball");
    miniball_cmd->add_option("--input", opt.input, "Dataset JSON file")->required();
    CLI::Option* metric_opt =
        miniball_cmd->add_option("--metric", opt.metric, "Metric (direct algorithm)")
            ->check(metric_choices);
    miniball_cmd->add_option("--iters", opt.iters, "Walk iterations (>= 1)");
    miniball_cmd->add_option("--algo", opt.algo, "Ball algorithm")
        ->default_val(std::string("direct"))
        ->check(CLI::IsMember({"direct", "embedded"}));
    miniball_cmd->add_option("--seed", opt.seed, "Accepted for interface uniformity");
    miniball_cmd->add_option("--epsilon", opt.epsilon, "Relative tolerance for fr-approx");
    miniball_cmd->add_option("--steps", opt.steps, "Segment count for fr-T");
    miniball_cmd->add_option("--eig", opt.eig, "Eigenvalue solver for hilbert")
        ->check(eig_choices);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        RunReport report;
        apply_thread_cap(report.warnings);
        std::vector<std::string> early_warnings = report.warnings;
        if (distance->parsed()) {
            report = run_distance(opt);
        } else if (geodesic->parsed()) {
            report = run_geodesic(opt);
        } else if (cluster->parsed()) {
            report = run_cluster(opt);
        } else if (quantize->parsed()) {
            report = run_quantize(opt);
        } else if (miniball_cmd->parsed()) {
            report = run_miniball(opt, metric_opt->count() > 0);
        }
        report.warnings.insert(report.warnings.begin(), early_warnings.begin(),
                               early_warnings.end());
        std::cout << report_to_json(report);
        const auto stop = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
        std::fprintf(stderr, "wall clock: %.3f ms\n", ms);
        return 0;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
