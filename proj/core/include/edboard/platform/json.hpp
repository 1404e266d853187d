#pragma once

// JSON forms of the platform records, shared by the store journal and the HTTP API.
// Timestamps are ISO-8601 UTC strings; doubles round-trip exactly.

#include <nlohmann/json.hpp>

#include "edboard/features.hpp"
#include "edboard/platform/types.hpp"

namespace edboard {
void to_json(nlohmann::json& j, const ContextRecord& r);
void from_json(const nlohmann::json& j, ContextRecord& r);
void to_json(nlohmann::json& j, const InpatientEvent& e);
void from_json(const nlohmann::json& j, InpatientEvent& e);
void to_json(nlohmann::json& j, const TimeRange& r);
void from_json(const nlohmann::json& j, TimeRange& r);
}  // namespace edboard

namespace edboard::features {
/// {"hour_ts": ..., "values": {column name: value, ...}}
void to_json(nlohmann::json& j, const HourlyFeatureRow& r);
void from_json(const nlohmann::json& j, HourlyFeatureRow& r);
}  // namespace edboard::features

namespace edboard::eval {
void to_json(nlohmann::json& j, const MetricReport& m);
void from_json(const nlohmann::json& j, MetricReport& m);
}  // namespace edboard::eval

namespace edboard::platform {

nlohmann::json timestamp_json(Timestamp ts);
Timestamp timestamp_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const EncounterEvent& e);
void from_json(const nlohmann::json& j, EncounterEvent& e);
void to_json(nlohmann::json& j, const ForecastRecord& f);
void from_json(const nlohmann::json& j, ForecastRecord& f);
void to_json(nlohmann::json& j, const MetricSnapshot& s);
void from_json(const nlohmann::json& j, MetricSnapshot& s);
void to_json(nlohmann::json& j, const ModelRegistryEntry& e);
void from_json(const nlohmann::json& j, ModelRegistryEntry& e);
void to_json(nlohmann::json& j, const RetrainJob& r);
void from_json(const nlohmann::json& j, RetrainJob& r);
void to_json(nlohmann::json& j, const JobLogEntry& e);
void from_json(const nlohmann::json& j, JobLogEntry& e);

}  // namespace edboard::platform
