#include "gaussgeo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gaussgeo/errors.hpp"

namespace gaussgeo {

namespace {

using nlohmann::json;

std::string item_label(const char* list, std::size_t index) {
    return std::string(list) + "[" + std::to_string(index) + "]";
}

Vec parse_vector(const json& node, const std::string& where) {
    if (!node.is_array() || node.empty()) {
        throw InvalidInput(where + ": expected a non-empty array of numbers");
    }
    Vec v(static_cast<int>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].is_number()) {
            throw InvalidInput(where + ": expected a non-empty array of numbers");
        }
        v[static_cast<int>(i)] = node[i].get<double>();
    }
    return v;
}

Mat parse_covariance(const json& node, const std::string& where, int d) {
    if (!node.is_array() || static_cast<int>(node.size()) != d) {
        throw InvalidInput(where + ": expected a " + std::to_string(d) + "x" +
                           std::to_string(d) + " matrix");
    }
    Mat m(d, d);
    for (int i = 0; i < d; ++i) {
        const json& row = node[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != d) {
            throw InvalidInput(where + ": expected a " + std::to_string(d) + "x" +
                               std::to_string(d) + " matrix");
        }
        for (int j = 0; j < d; ++j) {
            const json& cell = row[static_cast<std::size_t>(j)];
            if (!cell.is_number()) {
                throw InvalidInput(where + ": covariance entries must be numbers");
            }
            m(i, j) = cell.get<double>();
        }
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw InvalidInput(where + ": covariance is not symmetric within 1e-9");
    }
    return symmetrize(m);
}

Mvn parse_mvn(const json& node, const std::string& where) {
    if (!node.is_object() || !node.contains("mean") || !node.contains("cov")) {
        throw InvalidInput(where + ": expected an object with \"mean\" and \"cov\"");
    }
    const Vec mean = parse_vector(node["mean"], where + ".mean");
    const Mat cov = parse_covariance(node["cov"], where + ".cov", static_cast<int>(mean.size()));
    try {
        return Mvn(mean, cov);
    } catch (const InvalidInput& e) {
        throw InvalidInput(where + ": " + e.what());
    }
}

Gmm parse_gmm(const json& node, const std::string& where) {
    if (!node.is_object() || !node.contains("weights") || !node.contains("components")) {
        throw InvalidInput(where + ": expected an object with \"weights\" and \"components\"");
    }
    Vec weights = parse_vector(node["weights"], where + ".weights");
    const json& comps = node["components"];
    if (!comps.is_array() || comps.size() != static_cast<std::size_t>(weights.size())) {
        throw InvalidInput(where + ": component count must match the weight count");
    }
    for (int i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw InvalidInput(where + ".weights: weights must be positive");
        }
    }
    weights /= weights.sum();
    std::vector<Mvn> components;
    components.reserve(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        components.push_back(parse_mvn(comps[i], where + ".components[" + std::to_string(i) + "]"));
    }
    try {
        return Gmm(weights, std::move(components));
    } catch (const InvalidInput& e) {
        throw InvalidInput(where + ": " + e.what());
    }
}

}  // namespace

Dataset parse_dataset(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("dataset: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw InvalidInput("dataset: top-level value must be an object");
    }
    const bool has_mvns = doc.contains("mvns");
    const bool has_gmms = doc.contains("gmms");
    if (has_mvns == has_gmms) {
        throw InvalidInput("dataset: exactly one of \"mvns\" or \"gmms\" is required");
    }
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "mvns" && key != "gmms") {
            throw InvalidInput("dataset: unknown key \"" + key + "\"");
        }
    }

    Dataset ds;
    if (has_mvns) {
        const json& list = doc["mvns"];
        if (!list.is_array() || list.empty()) {
            throw InvalidInput("dataset: \"mvns\" must be a non-empty array");
        }
        ds.mvns.reserve(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            ds.mvns.push_back(parse_mvn(list[i], item_label("mvns", i)));
        }
    } else {
        const json& list = doc["gmms"];
        if (!list.is_array() || list.empty()) {
            throw InvalidInput("dataset: \"gmms\" must be a non-empty array");
        }
        ds.gmms.reserve(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            ds.gmms.push_back(parse_gmm(list[i], item_label("gmms", i)));
        }
    }
    return ds;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("dataset: cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str());
}

nlohmann::json mvn_to_json(const Mvn& n) {
    json record;
    record["mean"] = json::array();
    for (int i = 0; i < n.dim(); ++i) record["mean"].push_back(n.mean[i]);
    record["cov"] = json::array();
    for (int i = 0; i < n.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < n.dim(); ++j) row.push_back(n.cov(i, j));
        record["cov"].push_back(row);
    }
    return record;
}

Mvn mvn_from_json(const nlohmann::json& record) { return parse_mvn(record, "mvn"); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_curve_csv(std::ostream& out, const std::vector<GeodesicSample>& samples) {
    if (samples.empty()) {
        throw InvalidInput("write_curve_csv: no samples");
    }
    const int d = samples.front().point.dim();
    out << "t";
    for (int i = 0; i < d; ++i) out << ",mean" << i;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) out << ",cov" << i << "_" << j;
    out << "\n";
    for (const GeodesicSample& s : samples) {
        if (s.point.dim() != d) {
            throw InvalidInput("write_curve_csv: samples have mixed dimensions");
        }
        out << format_double(s.t);
        for (int i = 0; i < d; ++i) out << "," << format_double(s.point.mean[i]);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) out << "," << format_double(s.point.cov(i, j));
        out << "\n";
    }
}

void write_ellipse_csv(std::ostream& out, const std::vector<GeodesicSample>& samples,
                       int segments) {
    if (samples.empty()) {
        throw InvalidInput("write_ellipse_csv: no samples");
    }
    if (segments < 3) {
        throw InvalidInput("write_ellipse_csv: at least three segments required");
    }
    out << "t,x,y\n";
    for (const GeodesicSample& s : samples) {
        if (s.point.dim() != 2) {
            throw InvalidInput("write_ellipse_csv: ellipse output requires bivariate normals");
        }
        const Mat chol = Eigen::LLT<Mat>(s.point.cov).matrixL();
        for (int k = 0; k <= segments; ++k) {
            const double angle = 2.0 * M_PI * (k % segments) / segments;
            Vec unit(2);
            unit << std::cos(angle), std::sin(angle);
            const Vec p = s.point.mean + chol * unit;
            out << format_double(s.t) << "," << format_double(p[0]) << ","
                << format_double(p[1]) << "\n";
        }
    }
}

std::string report_to_json(const RunReport& report) {
    json doc;
    doc["command"] = report.command;
    doc["parameters"] = report.parameters;
    doc["outputs"] = report.outputs;
    doc["warnings"] = report.warnings;
    return doc.dump(2) + "\n";
}

}  // namespace gaussgeo
