#pragma once

// Energy-side metering. A plug-level sensor reports voltage, current and
// power about once a second; samples are integrated over the same slot grid
// the packet meters use so each slot carries an energy footprint.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wattsentry {

struct BaselineProfile;  // baseline.hpp

struct EnergySample {
    double timestamp = 0.0;  // seconds since stream epoch
    double voltage = 0.0;    // volts
    double current = 0.0;    // amperes
    double power = 0.0;      // watts
    // Set when the reported power disagrees with voltage*current by more
    // than 10%. The sample still counts; the flag is surfaced to operators.
    bool consistency_warning = false;
};

// Parses one `timestamp,voltage,current,power` line. An empty power field is
// reconstructed as voltage*current. Negative values, missing fields or
// non-numeric input raise ParseError tagged with `source` and `line_no`.
EnergySample parse_sensor_line(std::string_view line,
                               std::string_view source = "sensor",
                               std::size_t line_no = 0);

struct EnergySlot {
    std::string device_id;
    std::size_t slot_index = 0;
    double slot_start = 0.0;
    double slot_length = 180.0;

    double joules = 0.0;             // integrated energy over the slot
    double mean_sample_joules = 0.0; // joules / sample_count, 0 when empty
    double normalized = 0.0;         // against profile extrema when available
    std::size_t sample_count = 0;

    // True when the slot has no samples or a gap wider than 5 nominal
    // spacings (leading, internal, or trailing). Gapped slots cannot confirm
    // an attack.
    bool data_gap = false;

    double slot_end() const { return slot_start + slot_length; }
};

// Left-multiplied piecewise integration: each sample's power applies until
// the next sample, and the last sample covers one nominal spacing. Samples
// must lie inside [slot_start, slot_start+slot_length) in ascending order.
EnergySlot integrate_slot(std::span<const EnergySample> samples,
                          std::size_t slot_index,
                          double slot_start,
                          double slot_length = 180.0,
                          double nominal_spacing = 1.0);

// Maps slot energy onto [0, 1] against the profile extrema, mirroring
// normalize_rate. Requires max_e > min_e, otherwise InvalidBaselineError.
double normalize_energy(double joules, double min_e, double max_e);

// Streams sensor samples into slot-aligned footprints for one device.
// Mirrors SlotAccumulator: ascending timestamps, epoch-aligned slots, empty
// slots emitted for quiet stretches (flagged as gaps).
class EnergyAccumulator {
public:
    EnergyAccumulator(std::string device_id,
                      double slot_length = 180.0,
                      double nominal_spacing = 1.0,
                      const BaselineProfile* profile = nullptr);

    std::vector<EnergySlot> accumulate(const EnergySample& sample);
    std::vector<EnergySlot> advance_to(double timestamp);
    std::optional<EnergySlot> flush();

    const std::string& device_id() const { return device_id_; }
    bool has_open_slot() const { return open_index_.has_value(); }

private:
    EnergySlot close_open_slot();

    std::string device_id_;
    double slot_length_;
    double nominal_spacing_;
    const BaselineProfile* profile_;
    std::optional<std::size_t> open_index_;
    std::vector<EnergySample> pending_;
    double last_timestamp_ = 0.0;
    bool saw_input_ = false;
};

}  // namespace wattsentry
