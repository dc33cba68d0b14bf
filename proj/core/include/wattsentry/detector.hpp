#pragma once

// Cooldown-counter detection. Each closed slot updates a per-scope state
// machine: while the window average stays at or under the scope's normal
// upper bound the detector just keeps monitoring. An exceedance starts a
// listening cooldown and bumps a counter; once the counter passes its limit
// the scope is registered abnormal and the slot's energy footprint decides
// between a confirmed attack and a traffic-only anomaly.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wattsentry/baseline.hpp"
#include "wattsentry/energy.hpp"
#include "wattsentry/types.hpp"
#include "wattsentry/windowing.hpp"

namespace wattsentry {

struct DetectorConfig {
    // Exceedances tolerated before a scope is registered abnormal; the
    // fourth consecutive exceedance (counter > 3) trips registration.
    std::uint32_t counter_limit = 3;
    // How long the scope stops listening after an exceedance. Defaults to
    // one slot length when unset.
    std::optional<double> cooldown_length;
    std::size_t window_slots = 10;

    double cooldown_for(double slot_length) const {
        return cooldown_length.value_or(slot_length);
    }
};

enum class DetectionPhase : std::uint8_t {
    Monitoring,
    Cooldown,
    RegisteredAbnormal,
};

std::string_view to_string(DetectionPhase p);

struct DetectionState {
    std::string device_id;
    Scope scope = Scope::Aggregate;
    std::uint32_t counter = 0;
    std::optional<double> cooldown_until;  // stream time the cooldown ends

    bool in_cooldown(double now) const {
        return cooldown_until.has_value() && now < *cooldown_until;
    }

    DetectionPhase phase_at(double now, std::uint32_t counter_limit) const {
        if (in_cooldown(now)) return DetectionPhase::Cooldown;
        if (counter > counter_limit) return DetectionPhase::RegisteredAbnormal;
        return DetectionPhase::Monitoring;
    }
};

enum class EventKind : std::uint8_t {
    CooldownStarted,
    AbnormalRegistered,
    AttackConfirmed,
    TrafficOnlyAnomaly,
    WindowVerdict,
};

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view token);

struct EnergyEvidence {
    double mean_sample_joules = 0.0;
    double threshold = 0.0;
    bool data_gap = false;
};

struct DetectionEvent {
    double timestamp = 0.0;  // slot or window close time
    std::string device_id;
    Scope scope = Scope::Aggregate;
    EventKind kind = EventKind::CooldownStarted;
    std::size_t slot_index = 0;

    std::uint64_t slot_count = 0;     // detection-counted packets this slot
    double window_average = 0.0;      // A at evaluation time
    std::uint64_t normal_upper = 0;   // y the average was checked against
    std::uint32_t counter = 0;        // counter value after the update

    std::optional<EnergyEvidence> energy;
    Verdict verdict = Verdict::Undecided;  // WindowVerdict events only
    std::string note;
};

nlohmann::json event_to_json(const DetectionEvent& event);
DetectionEvent event_from_json(const nlohmann::json& doc);

// One line per alert-worthy event:
//   ALERT <kind> device=<id> scope=<scope> A=<avg> y=<bound> energy=<J|na> t=<secs>
std::string format_alert_line(const DetectionEvent& event);

struct SlotEvaluation {
    DetectionState state;
    std::vector<DetectionEvent> events;
};

// Applies the per-slot check to one scope. `window_average` is the mean
// over the window's evaluated slots including this one. Pure: the returned
// state is the only mutation. `energy` may be null when no sensor stream
// covers the slot.
SlotEvaluation evaluate_slot(const SlotMetrics& slot,
                             const BaselineProfile& profile,
                             DetectionState state,
                             double window_average,
                             const DetectorConfig& config,
                             const EnergySlot* energy);

// True when the slot's energy footprint clears the profile threshold and
// may confirm an abnormal rate as an attack. Null or gap-flagged energy
// never confirms; `note` explains why when it does not.
bool cross_check_energy(const EnergySlot* energy,
                        const BaselineProfile& profile,
                        std::string* note = nullptr);

// Window-level verdict for one scope: mean over the slots evaluated for
// that scope against its normal upper bound. No evaluated slots at all
// leaves the verdict Undecided.
Verdict classify_window(const WindowSummary& window,
                        const BaselineProfile& profile,
                        Scope scope);

// Drives one (device, scope) lane across slots and windows: decides
// suppression, delegates the slot check, and resets the counter whenever a
// completed window comes back normal.
class ScopeDetector {
public:
    ScopeDetector(std::string device_id,
                  Scope scope,
                  const BaselineProfile* profile,
                  DetectorConfig config,
                  double slot_length);

    // A slot is skipped when any part of it lies inside the cooldown.
    bool should_suppress(const SlotMetrics& slot) const;

    // Marks the slot suppressed for this scope (no evaluation happens).
    void note_suppressed(SlotMetrics& slot);

    // Evaluates a non-suppressed slot and returns the events it produced.
    std::vector<DetectionEvent> on_slot(const SlotMetrics& slot,
                                        const EnergySlot* energy);

    // Fills this scope's verdict into the summary, emits the verdict event,
    // and resets the counter when the window is normal.
    std::vector<DetectionEvent> on_window_complete(WindowSummary& window);

    const DetectionState& state() const { return state_; }
    Scope scope() const { return state_.scope; }

private:
    const BaselineProfile* profile_;
    DetectorConfig config_;
    double slot_length_;
    DetectionState state_;
    double window_sum_ = 0.0;
    std::size_t window_evaluated_ = 0;
};

}  // namespace wattsentry
