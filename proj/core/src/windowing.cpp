#include "wattsentry/windowing.hpp"

#include <algorithm>
#include <cmath>

#include "wattsentry/baseline.hpp"
#include "wattsentry/errors.hpp"

namespace wattsentry {

double normalize_rate(double packets, double min_pkt, double max_pkt) {
    if (!(max_pkt > min_pkt)) {
        throw InvalidBaselineError(
            "rate band is degenerate: max_pkt (" + format_number(max_pkt) +
            ") must exceed min_pkt (" + format_number(min_pkt) + ")");
    }
    const double v = (packets - min_pkt) / (max_pkt - min_pkt);
    return std::clamp(v, 0.0, 1.0);
}

double window_average(std::span<const SlotMetrics> slots, Scope scope) {
    if (slots.empty()) {
        throw InsufficientDataError("window average needs at least one slot");
    }
    double sum = 0.0;
    for (const auto& slot : slots) {
        sum += static_cast<double>(slot.counts.of(scope));
    }
    return sum / static_cast<double>(slots.size());
}

void apply_normalization(SlotMetrics& slot, const BaselineProfile& profile) {
    for (Scope scope : kAllScopes) {
        const RateBand* band = profile.band(scope);
        slot.normalized[static_cast<std::size_t>(scope)] =
            band ? normalize_rate(static_cast<double>(slot.counts.of(scope)),
                                  static_cast<double>(band->min_pkt),
                                  static_cast<double>(band->max_pkt))
                 : 0.0;
    }
}

SlotAccumulator::SlotAccumulator(std::string device_id,
                                 double slot_length,
                                 double sample_length,
                                 const BaselineProfile* profile)
    : device_id_(std::move(device_id)),
      slot_length_(slot_length),
      sample_length_(sample_length),
      profile_(profile) {
    if (!(slot_length_ > 0.0) || !(sample_length_ > 0.0)) {
        throw ConfigError("slot and sample lengths must be positive");
    }
    if (sample_length_ > slot_length_) {
        throw ConfigError("sample length cannot exceed slot length");
    }
    samples_per_slot_ = static_cast<std::size_t>(
        std::ceil(slot_length_ / sample_length_ - 1e-9));
}

void SlotAccumulator::open_slot(std::size_t index) {
    SlotMetrics slot;
    slot.device_id = device_id_;
    slot.slot_index = index;
    slot.slot_start = static_cast<double>(index) * slot_length_;
    slot.slot_length = slot_length_;
    slot.sample_counts.assign(samples_per_slot_, ScopeCounts{});
    open_ = std::move(slot);
}

SlotMetrics SlotAccumulator::close_open_slot() {
    SlotMetrics slot = std::move(*open_);
    open_.reset();
    if (profile_ != nullptr) {
        apply_normalization(slot, *profile_);
    }
    return slot;
}

std::vector<SlotMetrics> SlotAccumulator::advance_to(double timestamp) {
    std::vector<SlotMetrics> closed;
    if (saw_input_ && timestamp <= last_timestamp_) {
        return closed;  // clock hints never move time backwards
    }
    last_timestamp_ = timestamp;
    saw_input_ = true;
    while (open_ && open_->slot_end() <= timestamp) {
        const std::size_t next_index = open_->slot_index + 1;
        closed.push_back(close_open_slot());
        open_slot(next_index);
    }
    return closed;
}

std::vector<SlotMetrics> SlotAccumulator::accumulate(const PacketEvent& event) {
    if (event.device_id != device_id_) {
        throw MalformedStreamError("slot accumulator for " + device_id_ +
                                   " fed event for " + event.device_id);
    }
    if (saw_input_ && event.timestamp < last_timestamp_) {
        throw MalformedStreamError(
            "packet timestamps for " + device_id_ + " went backwards: " +
            format_fixed(event.timestamp) + " after " +
            format_fixed(last_timestamp_));
    }
    if (event.timestamp < 0.0) {
        throw MalformedStreamError("packet timestamp before stream epoch");
    }

    std::vector<SlotMetrics> closed = advance_to(event.timestamp);
    last_timestamp_ = event.timestamp;
    if (!open_) {
        open_slot(static_cast<std::size_t>(event.timestamp / slot_length_));
    }

    SlotMetrics& slot = *open_;
    if (detection_counted(event)) {
        std::size_t sample = static_cast<std::size_t>(
            (event.timestamp - slot.slot_start) / sample_length_);
        sample = std::min(sample, samples_per_slot_ - 1);
        slot.sample_counts[sample].add(event.protocol);
        slot.counts.add(event.protocol);
    } else {
        switch (event.protocol) {
            case Protocol::Tcp:
                if (event.kind == PacketKind::Retransmission) {
                    ++slot.diagnostics.tcp_retransmissions;
                } else {
                    ++slot.diagnostics.tcp_acknowledged;
                }
                break;
            case Protocol::MqttPub:
                ++slot.diagnostics.mqtt_published;
                break;
            default:
                ++slot.diagnostics.other;
                break;
        }
    }
    return closed;
}

std::optional<SlotMetrics> SlotAccumulator::flush() {
    if (!open_) {
        return std::nullopt;
    }
    return close_open_slot();
}

WindowSummary summarize_window(std::span<const SlotMetrics> slots,
                               std::size_t window_index,
                               double window_start,
                               std::size_t window_slots) {
    WindowSummary window;
    window.window_index = window_index;
    window.window_start = window_start;
    window.window_slots = window_slots;
    window.slots.assign(slots.begin(), slots.end());
    if (!slots.empty()) {
        window.device_id = slots.front().device_id;
    }
    for (Scope scope : kAllScopes) {
        const auto i = static_cast<std::size_t>(scope);
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& slot : slots) {
            if (slot.suppressed(scope)) continue;
            sum += static_cast<double>(slot.counts.of(scope));
            ++n;
        }
        window.evaluated_slots[i] = n;
        window.mean_count[i] = n > 0 ? sum / static_cast<double>(n) : 0.0;
    }
    return window;
}

}  // namespace wattsentry
