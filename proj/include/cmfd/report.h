#pragma once

#include <string>

#include "json.hpp"

#include "cmfd/pipeline.h"

namespace cmfd {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json ToJson(const MatchPair& match);
nlohmann::json ToJson(const DetectionReport& report);
nlohmann::json ToJson(const DatasetSummary& summary);

// Fixed-width text table with one row per image and the aggregate rates.
std::string FormatSummaryTable(const DatasetSummary& summary);

// Writes `value` pretty-printed. Throws IoError.
void WriteJson(const nlohmann::json& value, const std::filesystem::path& path);

}  // namespace cmfd
