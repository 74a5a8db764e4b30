#pragma once

// JSON reports, CSV writers and the forest-plot SVG.

#include "semimed/inference.hpp"
#include "semimed/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semimed {

inline constexpr int kReportSchemaVersion = 1;

struct ReportMetadata {
  std::string command;
  std::string version = SEMIMED_VERSION;
  std::optional<std::uint64_t> seed;
  std::string timestamp;  // UTC, ISO 8601
  std::optional<std::string> data_path;
  std::size_t rows_used = 0;
  std::size_t rows_dropped = 0;
};

std::string utc_timestamp();

nlohmann::json effects_json(const EffectEstimates& effects);

// Top-level keys: schema_version, metadata, model, methods, warnings.
nlohmann::json mediation_report(const MediationResult& result, const MediationRequest& request,
                                const ReportMetadata& meta, const std::vector<std::string>& warnings);

// Top-level keys: schema_version, metadata, design, truth, methods,
// published_reference, warnings.
nlohmann::json power_report(const PowerReport& report, const ReportMetadata& meta);

struct ForestSeries {
  Method method = Method::ols;
  EffectEstimates effects;
};

// One row per effect and one marker group per (effect, method). OLS is drawn
// with open circles and solid whiskers, the semiparametric estimator with filled
// circles and dashed whiskers. Throws DataError for an empty series list.
std::string forest_svg(const std::vector<ForestSeries>& series);

// Throws IoError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace semimed
