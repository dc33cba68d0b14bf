#include "wattsentry/energy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "wattsentry/baseline.hpp"
#include "wattsentry/errors.hpp"
#include "wattsentry/types.hpp"

namespace wattsentry {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double value = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

}  // namespace

EnergySample parse_sensor_line(std::string_view line,
                               std::string_view source,
                               std::size_t line_no) {
    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(std::string(source), line_no, what);
    };

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    if (fields.size() != 4) {
        throw fail("expected 4 fields (timestamp,voltage,current,power), got " +
                   std::to_string(fields.size()));
    }

    EnergySample sample;
    auto ts = parse_double(fields[0]);
    auto volts = parse_double(fields[1]);
    auto amps = parse_double(fields[2]);
    if (!ts) throw fail("bad timestamp: '" + std::string(fields[0]) + "'");
    if (!volts) throw fail("bad voltage: '" + std::string(fields[1]) + "'");
    if (!amps) throw fail("bad current: '" + std::string(fields[2]) + "'");
    sample.timestamp = *ts;
    sample.voltage = *volts;
    sample.current = *amps;
    if (sample.timestamp < 0.0) throw fail("timestamp before stream epoch");
    if (sample.voltage < 0.0) throw fail("negative voltage");
    if (sample.current < 0.0) throw fail("negative current");

    const std::string_view power_field = trim(fields[3]);
    if (power_field.empty()) {
        // Some sensors omit the power channel; reconstruct it.
        sample.power = sample.voltage * sample.current;
    } else {
        auto watts = parse_double(power_field);
        if (!watts) throw fail("bad power: '" + std::string(fields[3]) + "'");
        sample.power = *watts;
        if (sample.power < 0.0) throw fail("negative power");
        const double computed = sample.voltage * sample.current;
        if (sample.power > 0.0 &&
            std::abs(sample.power - computed) > 0.10 * sample.power) {
            sample.consistency_warning = true;
        }
    }
    return sample;
}

EnergySlot integrate_slot(std::span<const EnergySample> samples,
                          std::size_t slot_index,
                          double slot_start,
                          double slot_length,
                          double nominal_spacing) {
    if (!(slot_length > 0.0) || !(nominal_spacing > 0.0)) {
        throw ConfigError("slot length and nominal spacing must be positive");
    }
    EnergySlot slot;
    slot.slot_index = slot_index;
    slot.slot_start = slot_start;
    slot.slot_length = slot_length;
    slot.sample_count = samples.size();

    const double slot_end = slot_start + slot_length;
    const double max_gap = 5.0 * nominal_spacing;

    if (samples.empty()) {
        slot.data_gap = true;
        return slot;
    }

    double joules = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const EnergySample& s = samples[i];
        if (s.timestamp < slot_start || s.timestamp >= slot_end) {
            throw MalformedStreamError(
                "energy sample at " + format_fixed(s.timestamp) +
                " falls outside slot [" + format_fixed(slot_start) + ", " +
                format_fixed(slot_end) + ")");
        }
        if (i > 0 && s.timestamp < samples[i - 1].timestamp) {
            throw MalformedStreamError("energy samples out of order at " +
                                       format_fixed(s.timestamp));
        }
        // The sample's power holds until the next reading; the final reading
        // covers one nominal spacing.
        const double dt = (i + 1 < samples.size())
                              ? samples[i + 1].timestamp - s.timestamp
                              : nominal_spacing;
        joules += s.power * dt;
        if (i > 0 && samples[i].timestamp - samples[i - 1].timestamp > max_gap) {
            slot.data_gap = true;
        }
    }
    if (samples.front().timestamp - slot_start > max_gap) slot.data_gap = true;
    if (slot_end - samples.back().timestamp > max_gap) slot.data_gap = true;

    slot.joules = joules;
    slot.mean_sample_joules = joules / static_cast<double>(samples.size());
    return slot;
}

double normalize_energy(double joules, double min_e, double max_e) {
    if (!(max_e > min_e)) {
        throw InvalidBaselineError(
            "energy extrema are degenerate: max (" + format_number(max_e) +
            ") must exceed min (" + format_number(min_e) + ")");
    }
    const double v = (joules - min_e) / (max_e - min_e);
    return std::clamp(v, 0.0, 1.0);
}

EnergyAccumulator::EnergyAccumulator(std::string device_id,
                                     double slot_length,
                                     double nominal_spacing,
                                     const BaselineProfile* profile)
    : device_id_(std::move(device_id)),
      slot_length_(slot_length),
      nominal_spacing_(nominal_spacing),
      profile_(profile) {
    if (!(slot_length_ > 0.0) || !(nominal_spacing_ > 0.0)) {
        throw ConfigError("slot length and nominal spacing must be positive");
    }
}

EnergySlot EnergyAccumulator::close_open_slot() {
    const std::size_t index = *open_index_;
    EnergySlot slot = integrate_slot(pending_, index,
                                     static_cast<double>(index) * slot_length_,
                                     slot_length_, nominal_spacing_);
    slot.device_id = device_id_;
    if (profile_ != nullptr) {
        slot.normalized = normalize_energy(slot.mean_sample_joules,
                                           profile_->energy_min,
                                           profile_->energy_max);
    }
    pending_.clear();
    open_index_.reset();
    return slot;
}

std::vector<EnergySlot> EnergyAccumulator::advance_to(double timestamp) {
    std::vector<EnergySlot> closed;
    if (saw_input_ && timestamp <= last_timestamp_) {
        return closed;
    }
    last_timestamp_ = timestamp;
    saw_input_ = true;
    while (open_index_ &&
           (static_cast<double>(*open_index_) + 1.0) * slot_length_ <= timestamp) {
        const std::size_t next_index = *open_index_ + 1;
        closed.push_back(close_open_slot());
        open_index_ = next_index;
    }
    return closed;
}

std::vector<EnergySlot> EnergyAccumulator::accumulate(const EnergySample& sample) {
    if (saw_input_ && sample.timestamp < last_timestamp_) {
        throw MalformedStreamError(
            "sensor timestamps for " + device_id_ + " went backwards: " +
            format_fixed(sample.timestamp) + " after " +
            format_fixed(last_timestamp_));
    }
    if (sample.timestamp < 0.0) {
        throw MalformedStreamError("sensor timestamp before stream epoch");
    }
    std::vector<EnergySlot> closed = advance_to(sample.timestamp);
    last_timestamp_ = sample.timestamp;
    if (!open_index_) {
        open_index_ = static_cast<std::size_t>(sample.timestamp / slot_length_);
    }
    pending_.push_back(sample);
    return closed;
}

std::optional<EnergySlot> EnergyAccumulator::flush() {
    if (!open_index_) {
        return std::nullopt;
    }
    return close_open_slot();
}

}  // namespace wattsentry
