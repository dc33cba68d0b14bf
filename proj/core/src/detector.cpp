#include "wattsentry/detector.hpp"

#include <utility>

#include "wattsentry/errors.hpp"

namespace wattsentry {

std::string_view to_string(DetectionPhase p) {
    switch (p) {
        case DetectionPhase::Monitoring: return "MONITORING";
        case DetectionPhase::Cooldown: return "COOLDOWN";
        case DetectionPhase::RegisteredAbnormal: return "REGISTERED_ABNORMAL";
    }
    return "MONITORING";
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::CooldownStarted: return "COOLDOWN_STARTED";
        case EventKind::AbnormalRegistered: return "ABNORMAL_REGISTERED";
        case EventKind::AttackConfirmed: return "ATTACK_CONFIRMED";
        case EventKind::TrafficOnlyAnomaly: return "TRAFFIC_ONLY_ANOMALY";
        case EventKind::WindowVerdict: return "WINDOW_VERDICT";
    }
    return "COOLDOWN_STARTED";
}

EventKind event_kind_from_string(std::string_view token) {
    if (token == "COOLDOWN_STARTED") return EventKind::CooldownStarted;
    if (token == "ABNORMAL_REGISTERED") return EventKind::AbnormalRegistered;
    if (token == "ATTACK_CONFIRMED") return EventKind::AttackConfirmed;
    if (token == "TRAFFIC_ONLY_ANOMALY") return EventKind::TrafficOnlyAnomaly;
    if (token == "WINDOW_VERDICT") return EventKind::WindowVerdict;
    throw ConfigError("unknown event kind token: " + std::string(token));
}

nlohmann::json event_to_json(const DetectionEvent& event) {
    nlohmann::json doc{
        {"kind", to_string(event.kind)},
        {"device", event.device_id},
        {"scope", to_string(event.scope)},
        {"t", event.timestamp},
        {"slot_index", event.slot_index},
        {"slot_count", event.slot_count},
        {"window_average", event.window_average},
        {"normal_upper", event.normal_upper},
        {"counter", event.counter},
    };
    if (event.energy) {
        doc["energy"] = {{"mean_sample_joules", event.energy->mean_sample_joules},
                         {"threshold", event.energy->threshold},
                         {"data_gap", event.energy->data_gap}};
    }
    if (event.kind == EventKind::WindowVerdict) {
        doc["verdict"] = to_string(event.verdict);
    }
    if (!event.note.empty()) {
        doc["note"] = event.note;
    }
    return doc;
}

DetectionEvent event_from_json(const nlohmann::json& doc) {
    DetectionEvent event;
    try {
        event.kind = event_kind_from_string(doc.at("kind").get<std::string>());
        event.device_id = doc.at("device").get<std::string>();
        event.scope = scope_from_string(doc.at("scope").get<std::string>());
        event.timestamp = doc.at("t").get<double>();
        event.slot_index = doc.at("slot_index").get<std::size_t>();
        event.slot_count = doc.at("slot_count").get<std::uint64_t>();
        event.window_average = doc.at("window_average").get<double>();
        event.normal_upper = doc.at("normal_upper").get<std::uint64_t>();
        event.counter = doc.at("counter").get<std::uint32_t>();
        if (doc.contains("energy")) {
            const auto& e = doc.at("energy");
            event.energy = EnergyEvidence{e.at("mean_sample_joules").get<double>(),
                                          e.at("threshold").get<double>(),
                                          e.at("data_gap").get<bool>()};
        }
        if (doc.contains("verdict")) {
            const auto v = doc.at("verdict").get<std::string>();
            event.verdict = v == "NORMAL"     ? Verdict::Normal
                            : v == "ABNORMAL" ? Verdict::Abnormal
                                              : Verdict::Undecided;
        }
        if (doc.contains("note")) {
            event.note = doc.at("note").get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("event", 0, std::string("bad event payload: ") + e.what());
    }
    return event;
}

std::string format_alert_line(const DetectionEvent& event) {
    std::string line = "ALERT ";
    line += to_string(event.kind);
    line += " device=";
    line += event.device_id;
    line += " scope=";
    line += to_string(event.scope);
    line += " A=";
    line += format_number(event.window_average);
    line += " y=";
    line += std::to_string(event.normal_upper);
    line += " energy=";
    line += event.energy ? format_number(event.energy->mean_sample_joules) : "na";
    line += " t=";
    line += format_number(event.timestamp);
    return line;
}

bool cross_check_energy(const EnergySlot* energy,
                        const BaselineProfile& profile,
                        std::string* note) {
    if (energy == nullptr) {
        if (note) *note = "no energy telemetry for slot";
        return false;
    }
    if (energy->data_gap) {
        if (note) *note = "energy telemetry gap";
        return false;
    }
    if (energy->mean_sample_joules > profile.energy_threshold) {
        return true;
    }
    if (note) *note = "slot energy within normal envelope";
    return false;
}

SlotEvaluation evaluate_slot(const SlotMetrics& slot,
                             const BaselineProfile& profile,
                             DetectionState state,
                             double window_average,
                             const DetectorConfig& config,
                             const EnergySlot* energy) {
    const Scope scope = state.scope;
    const ScopeThresholds thresholds = threshold_for(profile, scope);
    const double now = slot.slot_end();

    SlotEvaluation result;
    if (window_average <= static_cast<double>(thresholds.normal_upper)) {
        // Rate within bounds: keep monitoring.
        result.state = std::move(state);
        return result;
    }

    // Exceedance: stop listening for the cooldown span and count it.
    state.counter += 1;
    state.cooldown_until = now + config.cooldown_for(slot.slot_length);

    DetectionEvent base;
    base.timestamp = now;
    base.device_id = slot.device_id;
    base.scope = scope;
    base.slot_index = slot.slot_index;
    base.slot_count = slot.counts.of(scope);
    base.window_average = window_average;
    base.normal_upper = thresholds.normal_upper;
    base.counter = state.counter;
    if (energy != nullptr) {
        base.energy = EnergyEvidence{energy->mean_sample_joules,
                                     thresholds.energy_threshold,
                                     energy->data_gap};
    }

    DetectionEvent cooldown = base;
    cooldown.kind = EventKind::CooldownStarted;
    result.events.push_back(std::move(cooldown));

    if (state.counter > config.counter_limit) {
        DetectionEvent registered = base;
        registered.kind = EventKind::AbnormalRegistered;
        result.events.push_back(std::move(registered));

        std::string note;
        DetectionEvent outcome = base;
        if (cross_check_energy(energy, profile, &note)) {
            outcome.kind = EventKind::AttackConfirmed;
        } else {
            outcome.kind = EventKind::TrafficOnlyAnomaly;
            outcome.note = std::move(note);
        }
        result.events.push_back(std::move(outcome));
    }

    result.state = std::move(state);
    return result;
}

Verdict classify_window(const WindowSummary& window,
                        const BaselineProfile& profile,
                        Scope scope) {
    const ScopeThresholds thresholds = threshold_for(profile, scope);
    const auto i = static_cast<std::size_t>(scope);
    if (window.evaluated_slots[i] == 0) {
        return Verdict::Undecided;
    }
    return window.mean_count[i] <= static_cast<double>(thresholds.normal_upper)
               ? Verdict::Normal
               : Verdict::Abnormal;
}

ScopeDetector::ScopeDetector(std::string device_id,
                             Scope scope,
                             const BaselineProfile* profile,
                             DetectorConfig config,
                             double slot_length)
    : profile_(profile), config_(config), slot_length_(slot_length) {
    if (profile_ == nullptr) {
        throw ConfigError("scope detector needs a baseline profile");
    }
    threshold_for(*profile_, scope);  // fail fast on a missing band
    state_.device_id = std::move(device_id);
    state_.scope = scope;
}

bool ScopeDetector::should_suppress(const SlotMetrics& slot) const {
    return state_.cooldown_until.has_value() &&
           slot.slot_start < *state_.cooldown_until;
}

void ScopeDetector::note_suppressed(SlotMetrics& slot) {
    slot.suppressed_for[static_cast<std::size_t>(state_.scope)] = true;
}

std::vector<DetectionEvent> ScopeDetector::on_slot(const SlotMetrics& slot,
                                                   const EnergySlot* energy) {
    const double count = static_cast<double>(slot.counts.of(state_.scope));
    const double average =
        (window_sum_ + count) / static_cast<double>(window_evaluated_ + 1);

    SlotEvaluation evaluation =
        evaluate_slot(slot, *profile_, state_, average, config_, energy);
    state_ = std::move(evaluation.state);
    window_sum_ += count;
    window_evaluated_ += 1;
    return std::move(evaluation.events);
}

std::vector<DetectionEvent> ScopeDetector::on_window_complete(WindowSummary& window) {
    const Verdict verdict = classify_window(window, *profile_, state_.scope);
    window.scope_verdicts[static_cast<std::size_t>(state_.scope)] = verdict;

    DetectionEvent event;
    event.kind = EventKind::WindowVerdict;
    event.timestamp = window.window_start +
                      static_cast<double>(window.window_slots) * slot_length_;
    event.device_id = state_.device_id;
    event.scope = state_.scope;
    event.slot_index = window.window_index;
    event.window_average = window.mean_of(state_.scope);
    event.normal_upper = threshold_for(*profile_, state_.scope).normal_upper;
    event.counter = state_.counter;
    event.verdict = verdict;

    if (verdict == Verdict::Normal) {
        // The device behaved across a whole window; forgive old exceedances.
        state_.counter = 0;
        state_.cooldown_until.reset();
        event.counter = 0;
    }
    window_sum_ = 0.0;
    window_evaluated_ = 0;
    return {std::move(event)};
}

}  // namespace wattsentry
