#pragma once

// JSON and CSV serialization. Complex numbers are [re, im] pairs; matrices are
// arrays of rows whose entries are either plain reals or [re, im] pairs.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfilter/commute.hpp"
#include "qfilter/ensemble.hpp"
#include "qfilter/network.hpp"

namespace qfilter::io {

using json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors become ConfigError carrying line and column.
json parse_json(const std::string& text, const std::string& source = "<input>");
json load_json_file(const std::filesystem::path& path);

json to_json(cplx z);
cplx complex_from_json(const json& j);
json matrix_to_json(const Eigen::MatrixXcd& m);
/// Accepts a nested row array, or a named operator
///   {"annihilation" | "creation" | "number" | "identity" | "zero": dim, "scale": c}.
Eigen::MatrixXcd matrix_from_json(const json& j);

// ---- configs ----

json config_to_json(const ensemble::SimulationConfig& config);
/// Unknown keys are rejected so typos do not silently fall back to defaults.
ensemble::SimulationConfig config_from_json(const json& j);
/// Applies "key=value" overrides; the value is read as JSON when it parses,
/// otherwise as a string.
void apply_overrides(json& j, const std::vector<std::string>& overrides);

// ---- measurement specs ----

json measurement_to_json(const commute::MeasurementSpec& spec);
commute::MeasurementSpec measurement_from_json(const json& j);
json report_to_json(const commute::CommutativityReport& report);

// ---- SLH networks ----

json slh_to_json(const network::SLHModel& model);
/// Explicit {"S", "L", "H"}, or {"beam_splitter": {"r", "theta", "dim"}},
/// or {"passthrough": {"channels", "dim"}}.
network::SLHModel slh_from_json(const json& j);

/// Evaluates {"components": {name: slh, ...}, "expression": expr} where expr is
/// a component name, an inline SLH object, {"series": [e1, e2, ...]} (signal
/// passes e1 first) or {"concatenate": [e1, e2, ...]}.
network::SLHModel compose_from_json(const json& j);

// ---- CSV ----

std::string ensemble_csv(const ensemble::EnsembleSummary& summary);
std::string comparison_csv(const ensemble::ComparisonReport& report);
std::string records_csv(const ensemble::SimulationConfig& config,
                        const std::vector<filter::StepRecord>& records);
/// Reads (t, dY1, dN) rows; '#' lines and a header row are skipped.
std::vector<filter::Record> read_records_csv(const std::filesystem::path& path);

// ---- metadata ----

/// SHA-1 of "blob <size>\0" + content, as `git hash-object` prints it.
std::string git_blob_sha1(const std::string& content);

json ensemble_metadata(const ensemble::EnsembleSummary& summary, const std::string& csv);
json comparison_metadata(const ensemble::ComparisonReport& report, const std::string& csv);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace qfilter::io
