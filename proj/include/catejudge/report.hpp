#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "catejudge/benchmark.hpp"
#include "catejudge/harness.hpp"
#include "catejudge/types.hpp"

namespace catejudge {

using Json = nlohmann::json;

// Version of every JSON document this artifact reads or writes.
inline constexpr int kSchemaVersion = 1;

Json estimate_to_json(const ErrorEstimate& est);
Json verdict_to_json(const ComparisonVerdict& v);
Json oracle_to_json(const OracleTruth& truth);

// DgpSpec round-trip (used by `generate` output and `--nuisance true:<file>`).
Json dgp_to_json(const DgpSpec& dgp);
DgpSpec dgp_from_json(const Json& j);
void write_dgp_json(const std::string& path, const DgpSpec& dgp);
DgpSpec read_dgp_json(const std::string& path);

Json study_config_to_json(const StudyConfig& config);
Json metrics_to_json(const MetricsTable& table, const StudyConfig& config);
Json fig1_to_json(const Fig1Result& r, std::uint64_t seed);
Json fig2_to_json(const Fig2Result& r, std::uint64_t seed);

// Strict run-config file: schema_version is required and checked, unknown
// fields are rejected, known fields override StudyConfig defaults.
struct ParsedRunConfig {
    StudyConfig study;
    std::string out_dir;  // empty if the file does not set one
};
ParsedRunConfig parse_run_config(const Json& j);
ParsedRunConfig read_run_config(const std::string& path);

// Loads a results document, raising config_error on parse failure, missing
// or mismatched schema_version, or unknown kind.
Json load_results_json(const std::string& path);

// Pure renderers: every number printed into a figure is the dump() of the
// corresponding JSON node, so figures never carry figure-only numbers.
std::string render_estimates_svg(const Json& doc);
std::string render_metric_svg(const Json& doc, const std::string& method,
                              const std::string& metric);

// Writes results.json plus the kind-appropriate CSV tables and SVG figures,
// all derived purely from `doc`. Returns the written paths.
std::vector<std::string> write_report_bundle(const std::string& out_dir, const Json& doc);

}  // namespace catejudge
