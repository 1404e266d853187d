#pragma once

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "edboard/features.hpp"
#include "edboard/platform/store.hpp"
#include "edboard/synthgen.hpp"

namespace edboard::platform {

/// One event of the replayed feed.
struct StreamEvent {
    Timestamp ts;
    std::variant<EncounterEvent, ContextRecord, InpatientEvent> payload;
};

struct ReplayState {
    Timestamp clock;
    /// Index of the next event to emit.
    std::size_t cursor = 0;
    std::optional<Timestamp> last_aggregated_hour;
};

struct TickResult {
    std::vector<StreamEvent> events;
    /// Rows of the hours completed during this tick, oldest first. Excluded hours are
    /// skipped. A step that crosses several hour boundaries yields several rows.
    std::vector<features::HourlyFeatureRow> rows;
    bool end_of_stream = false;
};

/// Replays a corpus as a time-ordered event feed on a simulated clock and aggregates
/// each hour as soon as the clock reaches its end instant.
///
/// The cleaning rules need complete visit durations, so the feed carries the cleaned
/// encounters, as an upstream filter would deliver them. Each visit is split into its
/// arrival, treatment-start, bed-request and checkout events; until an event arrives
/// the corresponding time is unknown to the aggregator. Rows are therefore identical
/// to the batch build of the same corpus.
class Replayer {
public:
    /// Events are persisted to `store` when it is non-null. The clock starts at the
    /// first context hour.
    Replayer(const synth::Corpus& corpus, std::vector<TimeRange> exclusions, Store* store = nullptr);
    /// Uses the default exclusion window.
    explicit Replayer(const synth::Corpus& corpus, Store* store = nullptr);

    /// Advances the clock by `step` (> 0), emitting every event with ts <= the new clock
    /// and every completed hour row.
    TickResult tick(Seconds step);
    /// Ticks in `step` increments until the feed ends; returns the number of rows produced.
    std::size_t run_to_end(Seconds step = Hours{1});

    [[nodiscard]] const ReplayState& state() const { return state_; }
    [[nodiscard]] TimeRange range() const { return range_; }
    [[nodiscard]] bool finished() const;
    [[nodiscard]] const features::CleaningReport& cleaning_report() const { return cleaning_; }

private:
    void apply(const StreamEvent& e);
    void finalize_before(Timestamp ts, bool inclusive, TickResult& out);
    void finalize(Timestamp hour, TickResult& out);
    void persist(const TickResult& out);

    TimeRange range_;
    std::vector<TimeRange> exclusions_;
    Store* store_;
    features::CleaningReport cleaning_;
    std::vector<StreamEvent> events_;
    ReplayState state_;
    Timestamp next_hour_;
    std::map<std::string, EncounterRecord> in_ed_;
    std::map<Timestamp, ContextRecord> context_;
    std::int64_t census_ = 0;
    std::int64_t surgical_ = 0;
};

}  // namespace edboard::platform
