#pragma once

// Fixed time-slot metering. Packet events are bucketed into short samples
// (5 s by default), samples roll up into slots (180 s), and consecutive
// slots form the sliding windows the detector averages over.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wattsentry/types.hpp"

namespace wattsentry {

struct BaselineProfile;  // baseline.hpp

// Non-counted traffic seen during a slot, kept for reporting.
struct SlotDiagnostics {
    std::uint64_t tcp_retransmissions = 0;
    std::uint64_t tcp_acknowledged = 0;
    std::uint64_t mqtt_published = 0;
    std::uint64_t other = 0;

    bool operator==(const SlotDiagnostics&) const = default;
};

// One closed metering slot for one device.
struct SlotMetrics {
    std::string device_id;
    std::size_t slot_index = 0;
    double slot_start = 0.0;
    double slot_length = 180.0;

    ScopeCounts counts;                       // detection-counted totals
    std::vector<ScopeCounts> sample_counts;   // per 5 s sample, sums to counts
    SlotDiagnostics diagnostics;

    // Normalized reception rate per scope, filled at close time when a
    // profile with the matching band is available, else 0.
    std::array<double, 4> normalized{};

    // Marked by the detector layer when a scope sat out this slot because a
    // cooldown covered it. Such scopes are excluded from window averages.
    std::array<bool, 4> suppressed_for{};

    double slot_end() const { return slot_start + slot_length; }
    double normalized_of(Scope s) const { return normalized[static_cast<std::size_t>(s)]; }
    bool suppressed(Scope s) const { return suppressed_for[static_cast<std::size_t>(s)]; }
};

// Ten consecutive slots (by default) rolled up for window-level verdicts.
struct WindowSummary {
    std::string device_id;
    std::size_t window_index = 0;
    double window_start = 0.0;
    std::size_t window_slots = 10;       // configured capacity
    std::vector<SlotMetrics> slots;      // slots actually observed

    // Mean detection-counted packets per slot and scope, over slots not
    // suppressed for that scope. NaN-free: 0 when no slot qualified.
    std::array<double, 4> mean_count{};
    // Slots contributing to the mean, per scope.
    std::array<std::size_t, 4> evaluated_slots{};

    Verdict verdict = Verdict::Undecided;            // across all scopes
    std::array<Verdict, 4> scope_verdicts{Verdict::Undecided, Verdict::Undecided,
                                          Verdict::Undecided, Verdict::Undecided};

    double mean_of(Scope s) const { return mean_count[static_cast<std::size_t>(s)]; }
    Verdict verdict_of(Scope s) const { return scope_verdicts[static_cast<std::size_t>(s)]; }
};

// Maps a packet count onto [0, 1] against the band extrema: 0 at or below
// the least packets ever received, 1 at or above the most. Requires
// max_pkt > min_pkt, otherwise InvalidBaselineError.
double normalize_rate(double packets, double min_pkt, double max_pkt);

// Mean detection-counted packets per slot for one scope. The caller decides
// which slots qualify (suppressed slots are usually filtered out first).
// Empty input raises InsufficientDataError.
double window_average(std::span<const SlotMetrics> slots, Scope scope);

// Rolls packet events into slots for a single device. Events must arrive in
// non-decreasing timestamp order; slots are aligned to the stream epoch
// (slot k covers [k*slot_length, (k+1)*slot_length)). Slots between the
// first observed event and the current time are emitted even when empty.
class SlotAccumulator {
public:
    SlotAccumulator(std::string device_id,
                    double slot_length = 180.0,
                    double sample_length = 5.0,
                    const BaselineProfile* profile = nullptr);

    // Feeds one event; returns any slots that closed because time moved past
    // their end. Events for other devices or with regressing timestamps
    // raise MalformedStreamError.
    std::vector<SlotMetrics> accumulate(const PacketEvent& event);

    // Advances the clock without an event, closing slots that ended at or
    // before `timestamp`.
    std::vector<SlotMetrics> advance_to(double timestamp);

    // Closes the currently open slot, if any. Called at end of stream; the
    // closed slot covers its full nominal span even if data stopped early.
    std::optional<SlotMetrics> flush();

    const std::string& device_id() const { return device_id_; }
    double slot_length() const { return slot_length_; }
    std::size_t samples_per_slot() const { return samples_per_slot_; }
    bool has_open_slot() const { return open_.has_value(); }

private:
    void open_slot(std::size_t index);
    SlotMetrics close_open_slot();

    std::string device_id_;
    double slot_length_;
    double sample_length_;
    std::size_t samples_per_slot_;
    const BaselineProfile* profile_;
    std::optional<SlotMetrics> open_;
    double last_timestamp_ = 0.0;
    bool saw_input_ = false;
};

// Fills SlotMetrics::normalized from the profile's bands; scopes without a
// band stay at 0. Exposed for re-normalizing slots captured while learning.
void apply_normalization(SlotMetrics& slot, const BaselineProfile& profile);

// Builds a WindowSummary over the given slots (all belonging to the same
// window). Means skip scope-suppressed slots; verdicts stay Undecided here,
// the detector fills them in.
WindowSummary summarize_window(std::span<const SlotMetrics> slots,
                               std::size_t window_index,
                               double window_start,
                               std::size_t window_slots);

}  // namespace wattsentry
