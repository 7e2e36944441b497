#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaussgeo/fisherrao.hpp"
#include "gaussgeo/gaussian.hpp"

namespace gaussgeo {

// Parsed dataset document. Exactly one of the two lists is populated,
// matching the two accepted document shapes.
struct Dataset {
    std::vector<Mvn> mvns;
    std::vector<Gmm> gmms;
};

// Parses and validates a dataset document: a JSON object holding either an
// "mvns" array of {"mean": [...], "cov": [[...]]} records or a "gmms" array
// of {"weights": [...], "components": [mvn records]} records. Covariances
// must be symmetric within 1e-9 relative and are symmetrized on load;
// mixture weights must be positive and are renormalized to sum one. Throws
// InvalidInput with the offending record's position for malformed input.
Dataset parse_dataset(const std::string& text);

// parse_dataset applied to a file's contents. Unreadable paths throw
// InvalidInput.
Dataset load_dataset(const std::string& path);

// JSON record {"cov": [[...]], "mean": [...]}. Numbers re-parse to the same
// double values.
nlohmann::json mvn_to_json(const Mvn& n);

// Reads one normal back from its JSON record, with the same validation as
// parse_dataset.
Mvn mvn_from_json(const nlohmann::json& record);

// Fixed 17-significant-digit decimal form, enough for the decimal text to
// re-parse to the same double.
std::string format_double(double v);

// Sampled curve as CSV: a header row, then one row per sample holding t, the
// mean entries, and the row-major upper triangle of the covariance.
void write_curve_csv(std::ostream& out, const std::vector<GeodesicSample>& samples);

// One-standard-deviation ellipse polylines for bivariate samples: for each
// sample, `segments` + 1 rows t,x,y tracing mu + L(cos h, sin h) over a full
// turn, where L is the Cholesky factor of the covariance. The final row of
// each polyline repeats its first point so plotting tools close the loop.
// Throws InvalidInput unless the samples are bivariate and segments >= 3.
void write_ellipse_csv(std::ostream& out, const std::vector<GeodesicSample>& samples,
                       int segments);

// Outcome of one CLI run: the subcommand name, the effective parameter
// values including defaults, command-specific outputs, and any warnings.
struct RunReport {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    nlohmann::json outputs = nlohmann::json::object();
    std::vector<std::string> warnings;
};

// Serialized report with keys sorted at every level and no timing or other
// run-varying fields, so repeated runs over the same inputs emit identical
// bytes.
std::string report_to_json(const RunReport& report);

}  // namespace gaussgeo
