#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "isp/clustering.hpp"
#include "isp/explore.hpp"
#include "isp/pipeline.hpp"
#include "isp/warmstart.hpp"

namespace isp::report {

/// Bumped whenever a report's shape changes incompatibly.
inline constexpr const char* kSchemaVersion = "1";

using json = nlohmann::ordered_json;

json label_json(const Label& label);
json selection_json(const Selection& selection);
json coverage_json(const CoverageReport& coverage);
/// Rows, item ids, per-row coverage counts, uncoverable labels.
json incidence_json(const IncidenceMatrix& incidence);
json clusters_json(const ClusterModel& model);
json isp_result_json(const IspResult& result, bool include_incidence = false,
                     bool include_clusters = false);
json warm_start_json(const WarmStartMap& map);
json simulation_json(const SimulationResult& result);

/// Canonical rendering used for every report: 2-space indent, trailing
/// newline. Key order is insertion order, so equal values render to equal
/// bytes.
std::string render(const json& value);

/// FNV-1a 64-bit digest of a file's bytes (manifest input digests).
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

}  // namespace isp::report
