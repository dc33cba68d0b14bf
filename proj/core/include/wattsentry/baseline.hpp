#pragma once

// Per-device baseline profiles: reception-rate bands and the energy
// threshold abnormal slots are cross-checked against. Profiles either come
// from the built-in defaults or are learned from clean capture data.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "wattsentry/energy.hpp"
#include "wattsentry/types.hpp"
#include "wattsentry/windowing.hpp"

namespace wattsentry {

// Default band for the active state: the per-protocol reception rate
// fluctuates between 2000 and 6000 packets per slot, and a slot mean above
// 6000 is treated as abnormal. The aggregate lane starts a little lower.
inline constexpr std::uint64_t kDefaultMinPackets = 2000;
inline constexpr std::uint64_t kDefaultMaxPackets = 6000;
inline constexpr std::uint64_t kDefaultAggregateMinPackets = 1500;

// Mean energy per one-second sensor sample (joules) above which an abnormal
// reception rate is confirmed as an attack.
inline constexpr double kDefaultEnergyThreshold = 1.42;

// Idle devices receive roughly a quarter of the active traffic; the default
// idle bands scale the packet bands accordingly. The energy threshold is a
// property of the power envelope and stays unscaled.
inline constexpr double kIdleBandScale = 0.25;

enum class ProfileSource : std::uint8_t {
    Defaults,
    Learned,
};

// Valid when min_pkt < max_pkt. normal_upper is the per-slot mean above
// which the detector flags the scope (y in the slot check A <= y).
struct RateBand {
    std::uint64_t min_pkt = 0;
    std::uint64_t max_pkt = 0;
    std::uint64_t normal_upper = 0;

    bool operator==(const RateBand&) const = default;
};

struct BaselineProfile {
    std::string device_id;
    DeviceStatus status = DeviceStatus::Active;
    ProfileSource source = ProfileSource::Defaults;

    // Indexed by Scope; a scope without observed traffic has no band and
    // cannot be monitored against this profile.
    std::array<std::optional<RateBand>, 4> bands;

    double energy_threshold = kDefaultEnergyThreshold;

    // Extrema for normalizing per-slot energy onto [0, 1], mirroring the
    // packet bands. Defaults span [0, threshold].
    double energy_min = 0.0;
    double energy_max = kDefaultEnergyThreshold;

    double learned_at = 0.0;  // stream time of the last slot used, 0 for defaults

    const RateBand* band(Scope s) const {
        const auto& slot = bands[static_cast<std::size_t>(s)];
        return slot ? &*slot : nullptr;
    }
    void set_band(Scope s, RateBand b) { bands[static_cast<std::size_t>(s)] = b; }
};

// The built-in profile described above, scaled by status.
BaselineProfile default_profile(std::string device_id,
                                DeviceStatus status = DeviceStatus::Active);

struct LearnOptions {
    // Headroom added above the observed maximum when deriving normal_upper.
    double margin = 0.10;
    double energy_threshold = kDefaultEnergyThreshold;
};

// Learns bands from clean slots: per scope, min/max observed count with
// normal_upper = max * (1 + margin). Scopes with no traffic get no band.
// Fewer than 3 slots raises InsufficientDataError; a scope whose counts
// never vary cannot be widened when margin == 0 and raises
// InvalidBaselineError. Energy slots, when given, refresh the energy
// normalization extrema the same way. Order-insensitive: any permutation of
// the same slots learns the same profile.
BaselineProfile learn_baseline(std::span<const SlotMetrics> slots,
                               DeviceStatus status,
                               const LearnOptions& options = {},
                               std::span<const EnergySlot> energy_slots = {});

struct ScopeThresholds {
    std::uint64_t normal_upper = 0;
    double energy_threshold = 0.0;
};

// Raises ConfigError when the profile has no band for the scope.
ScopeThresholds threshold_for(const BaselineProfile& profile, Scope scope);

nlohmann::json profile_to_json(const BaselineProfile& profile);
BaselineProfile profile_from_json(const nlohmann::json& doc);

void save_profile(const BaselineProfile& profile, const std::filesystem::path& path);
BaselineProfile load_profile(const std::filesystem::path& path);

}  // namespace wattsentry
