#include "edboard/platform/types.hpp"

namespace edboard::platform {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view text, const std::array<E, N>& values, const char* what) {
    for (E v : values) {
        if (to_string(v) == text) return v;
    }
    throw ValidationError(std::string("unknown ") + what + " '" + std::string(text) + "'", {what});
}

}  // namespace

std::string_view to_string(EncounterEventKind k) {
    switch (k) {
        case EncounterEventKind::kArrival: return "arrival";
        case EncounterEventKind::kTreatmentStart: return "treatment_start";
        case EncounterEventKind::kBedRequest: return "bed_request";
        case EncounterEventKind::kCheckout: return "checkout";
    }
    return "arrival";
}

EncounterEventKind parse_encounter_event_kind(std::string_view text) {
    return parse_enum(text,
                      std::array{EncounterEventKind::kArrival, EncounterEventKind::kTreatmentStart,
                                 EncounterEventKind::kBedRequest, EncounterEventKind::kCheckout},
                      "encounter event kind");
}

std::string model_display_name(int horizon, models::Algorithm algorithm) {
    return std::to_string(horizon) + " hours - " + std::string(models::display_name(algorithm));
}

std::string_view to_string(JobTrigger t) {
    switch (t) {
        case JobTrigger::kThreshold: return "threshold";
        case JobTrigger::kScheduled: return "scheduled";
        case JobTrigger::kManual: return "manual";
    }
    return "manual";
}

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::kQueued: return "queued";
        case JobStatus::kRunning: return "running";
        case JobStatus::kDone: return "done";
        case JobStatus::kFailed: return "failed";
    }
    return "queued";
}

JobTrigger parse_job_trigger(std::string_view text) {
    return parse_enum(text, std::array{JobTrigger::kThreshold, JobTrigger::kScheduled, JobTrigger::kManual},
                      "job trigger");
}

JobStatus parse_job_status(std::string_view text) {
    return parse_enum(text,
                      std::array{JobStatus::kQueued, JobStatus::kRunning, JobStatus::kDone,
                                 JobStatus::kFailed},
                      "job status");
}

bool is_valid_transition(JobStatus from, JobStatus to) {
    switch (from) {
        case JobStatus::kQueued: return to == JobStatus::kRunning;
        case JobStatus::kRunning: return to == JobStatus::kDone || to == JobStatus::kFailed;
        default: return false;
    }
}

}  // namespace edboard::platform
