#include "wattsentry/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "wattsentry/errors.hpp"

namespace wattsentry {

namespace {

std::uint64_t scaled(std::uint64_t value, double factor) {
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(value) * factor));
}

std::string_view source_token(ProfileSource s) {
    return s == ProfileSource::Learned ? "LEARNED" : "DEFAULTS";
}

ProfileSource source_from_token(std::string_view token) {
    if (token == "LEARNED") return ProfileSource::Learned;
    if (token == "DEFAULTS") return ProfileSource::Defaults;
    throw ConfigError("unknown profile source token: " + std::string(token));
}

void validate_band(Scope scope, const RateBand& band) {
    if (band.max_pkt <= band.min_pkt) {
        throw InvalidBaselineError("profile band for " + std::string(to_string(scope)) +
                                   " is degenerate: [" + std::to_string(band.min_pkt) +
                                   ", " + std::to_string(band.max_pkt) + "]");
    }
}

}  // namespace

BaselineProfile default_profile(std::string device_id, DeviceStatus status) {
    BaselineProfile profile;
    profile.device_id = std::move(device_id);
    profile.status = status;
    profile.source = ProfileSource::Defaults;

    const double scale = status == DeviceStatus::Idle ? kIdleBandScale : 1.0;
    const RateBand protocol_band{scaled(kDefaultMinPackets, scale),
                                 scaled(kDefaultMaxPackets, scale),
                                 scaled(kDefaultMaxPackets, scale)};
    profile.set_band(Scope::Tcp, protocol_band);
    profile.set_band(Scope::Udp, protocol_band);
    profile.set_band(Scope::Mqtt, protocol_band);
    profile.set_band(Scope::Aggregate,
                     RateBand{scaled(kDefaultAggregateMinPackets, scale),
                              scaled(kDefaultMaxPackets, scale),
                              scaled(kDefaultMaxPackets, scale)});
    return profile;
}

BaselineProfile learn_baseline(std::span<const SlotMetrics> slots,
                               DeviceStatus status,
                               const LearnOptions& options,
                               std::span<const EnergySlot> energy_slots) {
    if (slots.size() < 3) {
        throw InsufficientDataError("learning needs at least 3 closed slots, got " +
                                    std::to_string(slots.size()));
    }
    if (options.margin < 0.0) {
        throw ConfigError("learning margin cannot be negative");
    }

    BaselineProfile profile;
    profile.device_id = slots.front().device_id;
    profile.status = status;
    profile.source = ProfileSource::Learned;
    profile.energy_threshold = options.energy_threshold;
    profile.energy_max = options.energy_threshold;

    double learned_at = 0.0;
    for (const auto& slot : slots) {
        if (slot.device_id != profile.device_id) {
            throw ConfigError("learning input mixes devices: " + profile.device_id +
                              " and " + slot.device_id);
        }
        learned_at = std::max(learned_at, slot.slot_end());
    }
    profile.learned_at = learned_at;

    for (Scope scope : kAllScopes) {
        std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t hi = 0;
        for (const auto& slot : slots) {
            const std::uint64_t c = slot.counts.of(scope);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        if (hi == 0) {
            continue;  // scope never carried traffic; leave it unmonitored
        }
        RateBand band;
        band.min_pkt = lo;
        band.normal_upper = scaled(hi, 1.0 + options.margin);
        // A flat capture has no spread of its own; the margin supplies it.
        band.max_pkt = hi > lo ? hi : band.normal_upper;
        if (band.max_pkt <= band.min_pkt) {
            throw InvalidBaselineError(
                "counts for " + std::string(to_string(scope)) +
                " never varied and margin 0 leaves no usable band; "
                "capture more varied traffic or raise the margin");
        }
        profile.set_band(scope, band);
    }

    double e_lo = std::numeric_limits<double>::infinity();
    double e_hi = -std::numeric_limits<double>::infinity();
    for (const auto& slot : energy_slots) {
        if (slot.data_gap) continue;
        e_lo = std::min(e_lo, slot.mean_sample_joules);
        e_hi = std::max(e_hi, slot.mean_sample_joules);
    }
    if (e_hi > -std::numeric_limits<double>::infinity()) {
        if (e_hi <= e_lo) {
            e_hi = e_lo * (1.0 + options.margin);
        }
        // A flat energy capture with no margin cannot span a range; fall
        // back to the default span rather than failing the whole profile.
        if (e_hi > e_lo) {
            profile.energy_min = e_lo;
            profile.energy_max = e_hi;
        }
    }
    return profile;
}

ScopeThresholds threshold_for(const BaselineProfile& profile, Scope scope) {
    const RateBand* band = profile.band(scope);
    if (band == nullptr) {
        throw ConfigError("profile for " + profile.device_id + " has no " +
                          std::string(to_string(scope)) +
                          " band; learn a baseline covering that traffic or use defaults");
    }
    return ScopeThresholds{band->normal_upper, profile.energy_threshold};
}

nlohmann::json profile_to_json(const BaselineProfile& profile) {
    nlohmann::json doc;
    doc["format"] = "wattsentry-profile/1";
    doc["device_id"] = profile.device_id;
    doc["status"] = to_string(profile.status);
    doc["source"] = source_token(profile.source);
    nlohmann::json bands = nlohmann::json::object();
    for (Scope scope : kAllScopes) {
        if (const RateBand* band = profile.band(scope)) {
            bands[std::string(to_string(scope))] = {
                {"min_pkt", band->min_pkt},
                {"max_pkt", band->max_pkt},
                {"normal_upper", band->normal_upper},
            };
        }
    }
    doc["bands"] = std::move(bands);
    doc["energy_threshold"] = profile.energy_threshold;
    doc["energy_min"] = profile.energy_min;
    doc["energy_max"] = profile.energy_max;
    doc["learned_at"] = profile.learned_at;
    return doc;
}

BaselineProfile profile_from_json(const nlohmann::json& doc) {
    if (doc.at("format").get<std::string>() != "wattsentry-profile/1") {
        throw ConfigError("unsupported profile format");
    }
    BaselineProfile profile;
    profile.device_id = doc.at("device_id").get<std::string>();
    profile.status = device_status_from_string(doc.at("status").get<std::string>());
    profile.source = source_from_token(doc.at("source").get<std::string>());
    for (const auto& [key, value] : doc.at("bands").items()) {
        const Scope scope = scope_from_string(key);
        RateBand band{value.at("min_pkt").get<std::uint64_t>(),
                      value.at("max_pkt").get<std::uint64_t>(),
                      value.at("normal_upper").get<std::uint64_t>()};
        validate_band(scope, band);
        profile.set_band(scope, band);
    }
    profile.energy_threshold = doc.at("energy_threshold").get<double>();
    profile.energy_min = doc.at("energy_min").get<double>();
    profile.energy_max = doc.at("energy_max").get<double>();
    profile.learned_at = doc.at("learned_at").get<double>();
    if (!(profile.energy_threshold > 0.0)) {
        throw InvalidBaselineError("profile energy threshold must be positive");
    }
    if (!(profile.energy_max > profile.energy_min)) {
        throw InvalidBaselineError("profile energy extrema are degenerate");
    }
    return profile;
}

void save_profile(const BaselineProfile& profile, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write profile: " + path.string());
    }
    out << profile_to_json(profile).dump(2) << '\n';
    if (!out) {
        throw ConfigError("failed writing profile: " + path.string());
    }
}

BaselineProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read profile " + path.string() +
                          "; run the learn command first or rely on defaults");
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, std::string("invalid profile JSON: ") + e.what());
    }
    try {
        return profile_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0,
                         std::string("profile is missing required fields: ") + e.what());
    }
}

}  // namespace wattsentry
