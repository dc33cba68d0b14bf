#pragma once

// Shared vocabulary for the metering pipeline: protocol/scope enums, packet
// events, and the counters each 5-second sample accumulates.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace wattsentry {

enum class Protocol : std::uint8_t {
    Tcp,
    Udp,
    MqttSub,   // subscribed message delivered to the device
    MqttPub,   // message published by the device, diagnostics only
    Other,
};

enum class PacketKind : std::uint8_t {
    Received,
    Retransmission,
    Acknowledged,
};

// Detection runs per scope: one lane per metered protocol plus an aggregate
// lane over their sum.
enum class Scope : std::uint8_t {
    Tcp = 0,
    Udp = 1,
    Mqtt = 2,
    Aggregate = 3,
};

inline constexpr std::array<Scope, 4> kAllScopes = {
    Scope::Tcp, Scope::Udp, Scope::Mqtt, Scope::Aggregate};

enum class DeviceStatus : std::uint8_t {
    Active,
    Idle,
};

// Ground-truth marker attached to stored records when the source declared one.
enum class Label : std::uint8_t {
    Normal,
    Abnormal,
    Unlabeled,
};

enum class Verdict : std::uint8_t {
    Normal,
    Abnormal,
    Undecided,
};

std::string_view to_string(Protocol p);
std::string_view to_string(PacketKind k);
std::string_view to_string(Scope s);
std::string_view to_string(DeviceStatus s);
std::string_view to_string(Label l);
std::string_view to_string(Verdict v);

Protocol protocol_from_string(std::string_view token);
PacketKind packet_kind_from_string(std::string_view token);
Scope scope_from_string(std::string_view token);
DeviceStatus device_status_from_string(std::string_view token);
Label label_from_string(std::string_view token);

// One packet observed (or replayed) at the device's network interface.
struct PacketEvent {
    double timestamp = 0.0;  // seconds since stream epoch
    std::string device_id;
    Protocol protocol = Protocol::Other;
    PacketKind kind = PacketKind::Received;
    std::uint32_t size = 0;  // bytes, informational only

    bool operator==(const PacketEvent&) const = default;
};

// True when the event feeds the reception-rate meters: received TCP segments,
// UDP datagrams, and subscribed MQTT deliveries. Retransmissions, acks,
// publishes and unclassified traffic are tracked as diagnostics instead.
bool detection_counted(const PacketEvent& event);

// Per-scope packet tallies. Aggregate is always the sum of the three
// protocol lanes, so it is derived rather than stored.
struct ScopeCounts {
    std::uint64_t tcp = 0;
    std::uint64_t udp = 0;
    std::uint64_t mqtt = 0;

    std::uint64_t aggregate() const { return tcp + udp + mqtt; }

    std::uint64_t of(Scope s) const {
        switch (s) {
            case Scope::Tcp: return tcp;
            case Scope::Udp: return udp;
            case Scope::Mqtt: return mqtt;
            case Scope::Aggregate: return aggregate();
        }
        return 0;
    }

    // Adds one detection-counted packet to the lane for `p`.
    void add(Protocol p, std::uint64_t n = 1);

    ScopeCounts& operator+=(const ScopeCounts& rhs) {
        tcp += rhs.tcp;
        udp += rhs.udp;
        mqtt += rhs.mqtt;
        return *this;
    }

    bool operator==(const ScopeCounts&) const = default;
};

// Fixed formatting used by every CSV writer: six fractional digits, locale
// independent, so identical inputs produce identical bytes.
std::string format_fixed(double value);

// Shortest readable form for human-facing numbers (alert lines, summaries).
std::string format_number(double value);

}  // namespace wattsentry
