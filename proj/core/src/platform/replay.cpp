#include "edboard/platform/replay.hpp"

#include <algorithm>

#include "edboard/pipeline.hpp"

namespace edboard::platform {

namespace {

/// Order among events sharing a timestamp. Any order yields the same hour rows, since
/// aggregation happens only after all events up to the hour end are applied.
int source_rank(const StreamEvent& e) { return static_cast<int>(e.payload.index()); }

bool in_any(const std::vector<TimeRange>& ranges, Timestamp t) {
    return std::any_of(ranges.begin(), ranges.end(),
                       [t](const TimeRange& r) { return r.contains(t); });
}

}  // namespace

Replayer::Replayer(const synth::Corpus& corpus, Store* store)
    : Replayer(corpus, {features::default_exclusion()}, store) {}

Replayer::Replayer(const synth::Corpus& corpus, std::vector<TimeRange> exclusions, Store* store)
    : range_(pipeline::corpus_range(corpus)), exclusions_(std::move(exclusions)), store_(store) {
    auto cleaned = features::clean_encounters(corpus.encounters);
    cleaning_ = cleaned.report;
    events_.reserve(cleaned.kept.size() * 4 + corpus.context.size() + corpus.inpatient.size());
    for (const auto& r : cleaned.kept) {
        const auto event = [&r](EncounterEventKind k, Timestamp ts) {
            return StreamEvent{ts, EncounterEvent{k, ts, r.visit_id, r.patient_id, r.esi}};
        };
        events_.push_back(event(EncounterEventKind::kArrival, r.arrival_ts));
        events_.push_back(event(EncounterEventKind::kTreatmentStart, r.treatment_start_ts));
        if (r.bed_request_ts) events_.push_back(event(EncounterEventKind::kBedRequest, *r.bed_request_ts));
        events_.push_back(event(EncounterEventKind::kCheckout, r.checkout_ts));
    }
    for (const auto& c : corpus.context) events_.push_back({c.hour_ts, c});
    for (const auto& e : corpus.inpatient) events_.push_back({e.ts, e});
    std::stable_sort(events_.begin(), events_.end(), [](const StreamEvent& a, const StreamEvent& b) {
        if (a.ts != b.ts) return a.ts < b.ts;
        return source_rank(a) < source_rank(b);
    });
    state_.clock = range_.from;
    next_hour_ = range_.from;
}

bool Replayer::finished() const {
    return state_.cursor == events_.size() && next_hour_ >= range_.to;
}

TickResult Replayer::tick(Seconds step) {
    if (step <= Seconds{0}) throw ValidationError("replay step must be positive", {"step"});
    TickResult out;
    const Timestamp new_clock = state_.clock + step;
    while (state_.cursor < events_.size() && events_[state_.cursor].ts <= new_clock) {
        const auto& e = events_[state_.cursor];
        finalize_before(e.ts, false, out);
        apply(e);
        out.events.push_back(e);
        ++state_.cursor;
    }
    finalize_before(new_clock, true, out);
    state_.clock = new_clock;
    out.end_of_stream = finished();
    persist(out);
    return out;
}

std::size_t Replayer::run_to_end(Seconds step) {
    std::size_t rows = 0;
    while (!finished()) rows += tick(step).rows.size();
    return rows;
}

void Replayer::apply(const StreamEvent& e) {
    if (const auto* enc = std::get_if<EncounterEvent>(&e.payload)) {
        switch (enc->kind) {
            case EncounterEventKind::kArrival: {
                EncounterRecord r;
                r.patient_id = enc->patient_id;
                r.visit_id = enc->visit_id;
                r.esi = enc->esi;
                r.arrival_ts = enc->ts;
                r.treatment_start_ts = features::kNotYetObserved;
                r.checkout_ts = features::kNotYetObserved;
                in_ed_[enc->visit_id] = std::move(r);
                break;
            }
            case EncounterEventKind::kTreatmentStart:
                in_ed_.at(enc->visit_id).treatment_start_ts = enc->ts;
                break;
            case EncounterEventKind::kBedRequest:
                in_ed_.at(enc->visit_id).bed_request_ts = enc->ts;
                break;
            case EncounterEventKind::kCheckout:
                in_ed_.erase(enc->visit_id);
                break;
        }
    } else if (const auto* ctx = std::get_if<ContextRecord>(&e.payload)) {
        if (!context_.emplace(ctx->hour_ts, *ctx).second) {
            throw DuplicateKeyError("context hour " + format_iso8601(ctx->hour_ts) +
                                    " appears twice in the feed");
        }
    } else {
        const auto& inp = std::get<InpatientEvent>(e.payload);
        switch (inp.kind) {
            case InpatientEventKind::kAdmission: ++census_; break;
            case InpatientEventKind::kDischarge: --census_; break;
            case InpatientEventKind::kSurgeryStart: ++surgical_; break;
            case InpatientEventKind::kSurgeryEnd: --surgical_; break;
        }
    }
}

void Replayer::finalize_before(Timestamp ts, bool inclusive, TickResult& out) {
    while (next_hour_ < range_.to) {
        const Timestamp end = next_hour_ + Hours{1};
        if (inclusive ? end > ts : end >= ts) break;
        finalize(next_hour_, out);
        next_hour_ = end;
    }
}

void Replayer::finalize(Timestamp hour, TickResult& out) {
    const auto ctx = context_.find(hour);
    if (in_any(exclusions_, hour)) {
        if (ctx != context_.end()) context_.erase(ctx);
        return;
    }
    if (ctx == context_.end()) {
        throw DataGapError("no context record for hour " + format_iso8601(hour));
    }
    features::HourAccumulator acc(hour);
    for (const auto& [id, r] : in_ed_) acc.add(r);
    out.rows.push_back(acc.finish({census_, surgical_}, ctx->second));
    context_.erase(ctx);
    state_.last_aggregated_hour = hour;
}

void Replayer::persist(const TickResult& out) {
    if (store_ == nullptr) return;
    std::vector<EncounterEvent> enc;
    std::vector<ContextRecord> ctx;
    std::vector<InpatientEvent> inp;
    for (const auto& e : out.events) {
        if (const auto* p = std::get_if<EncounterEvent>(&e.payload)) {
            enc.push_back(*p);
        } else if (const auto* c = std::get_if<ContextRecord>(&e.payload)) {
            ctx.push_back(*c);
        } else {
            inp.push_back(std::get<InpatientEvent>(e.payload));
        }
    }
    if (!enc.empty()) store_->append_encounter_events(enc);
    if (!ctx.empty()) store_->append_context(ctx);
    if (!inp.empty()) store_->append_inpatient(inp);
    for (const auto& row : out.rows) store_->insert_feature_row(row);
}

}  // namespace edboard::platform
