#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edboard/records.hpp"
#include "edboard/time.hpp"

namespace edboard::synth {

inline constexpr const char* kGeneratorName = "edboard-synthgen";
inline constexpr const char* kGeneratorVersion = "1.0";

struct EventMultipliers {
    double holiday = 1.0;
    double football_a = 1.0;
    double football_b = 1.0;
};

/// Parameters of a synthetic hospital. Durations are minutes, rates are per hour.
struct ScenarioConfig {
    std::uint64_t seed = 42;
    Timestamp start_ts = from_civil(2019, 1, 1);
    Timestamp end_ts = from_civil(2019, 1, 1) + Hours{24 * 90};
    double base_arrival_rate = 8.0;
    double daily_amplitude = 0.45;
    double weekly_amplitude = 0.1;
    /// Probabilities for ESI 1..5.
    std::array<double, 5> esi_mix{0.03, 0.25, 0.45, 0.22, 0.05};
    double mean_wait_min = 45.0;
    double mean_treat_min = 180.0;
    double mean_board_min = 420.0;
    /// Log-scale standard deviation shared by the three duration laws.
    double duration_log_sd = 0.75;
    double congestion_coupling = 0.3;
    double admit_probability = 0.25;
    EventMultipliers event_rate_multipliers{1.15, 1.1, 1.1};
};

/// Throws ValidationError naming every violated field.
void validate(const ScenarioConfig& cfg);

/// Expected arrivals per hour at t. Throws RangeError when t is outside [start_ts, end_ts).
double arrival_rate(Timestamp t, const ScenarioConfig& cfg);

/// The 11 U.S. federal holidays of `year`, as midnight UTC dates (actual, not observed).
std::vector<Timestamp> federal_holidays(int year);
bool is_federal_holiday(Timestamp t);

struct FootballFlags {
    bool team_a = false;
    bool team_b = false;
};
/// Saturdays of September..November alternate between team A and team B, starting with A.
FootballFlags football_flags(Timestamp t);

struct Corpus {
    std::vector<EncounterRecord> encounters;
    std::vector<ContextRecord> context;
    std::vector<InpatientEvent> inpatient;
};

/// Byte-for-byte reproducible for a given config. Encounters are ordered by arrival,
/// context by hour, inpatient events by (ts, kind, unit).
Corpus generate_corpus(const ScenarioConfig& cfg);

void to_json(nlohmann::json& j, const ScenarioConfig& cfg);
void from_json(const nlohmann::json& j, ScenarioConfig& cfg);

/// Writes encounters.csv, context.csv, inpatient.csv and manifest.json into `dir`.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus,
                  const ScenarioConfig& cfg);
Corpus read_corpus(const std::filesystem::path& dir);

void write_encounters_csv(std::ostream& out, const std::vector<EncounterRecord>& rows);
void write_context_csv(std::ostream& out, const std::vector<ContextRecord>& rows);
void write_inpatient_csv(std::ostream& out, const std::vector<InpatientEvent>& rows);
std::vector<EncounterRecord> read_encounters_csv(std::istream& in);
std::vector<ContextRecord> read_context_csv(std::istream& in);
std::vector<InpatientEvent> read_inpatient_csv(std::istream& in);

}  // namespace edboard::synth
