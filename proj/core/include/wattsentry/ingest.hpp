#pragma once

// Packet and sensor input. All sources deliver the same record shape so the
// pipeline never cares whether events came from a capture file, a live
// line feed, or the simulator. Replay and sensor line formats are described
// in docs/file-formats.md.

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "wattsentry/energy.hpp"
#include "wattsentry/types.hpp"

namespace wattsentry {

enum class SourceKind : std::uint8_t {
    Replay,     // capture file on disk
    Simulated,  // scenario description, events generated in memory
    Live,       // line feed from stdin or a FIFO
};

struct SourceConfig {
    SourceKind kind = SourceKind::Replay;
    // Replay/Live: the capture file or FIFO ("-" means stdin for Live).
    // Simulated: the scenario JSON path.
    std::string path;
    // When set, only this device's events pass through.
    std::optional<std::string> device_filter;
    // Simulated only: overrides the scenario's seed.
    std::optional<std::uint64_t> seed_override;
};

// Pull interface over a packet source. next() returns events in file order;
// std::nullopt marks a clean end of stream. Parse failures and per-device
// timestamp regressions raise ParseError with the offending line number.
class EventStream {
public:
    virtual ~EventStream() = default;
    virtual std::optional<PacketEvent> next() = 0;
};

std::unique_ptr<EventStream> open_source(const SourceConfig& config);

// Parses one replay line `timestamp,device_id,protocol,kind,size`. Returns
// std::nullopt for blank lines and `#` comments. MQTT records are routed
// through classify_mqtt below. Non-TCP records must be RECEIVED.
std::optional<PacketEvent> parse_packet_line(std::string_view line,
                                             std::string_view source,
                                             std::size_t line_no);

// Applies the MQTT direction marker: "SUB" marks a subscribed delivery
// (counted for detection), "PUB" a device publish (diagnostics), anything
// else degrades the record to Other so unmarked MQTT traffic never inflates
// the metered rate.
PacketEvent classify_mqtt(PacketEvent event, std::string_view marker);

// True only for the TCP records the meters count; retransmissions and pure
// acknowledgements are excluded.
bool filter_tcp_received(const PacketEvent& event);

// Line reader for sensor captures: same comment and blank-line rules as the
// replay format, each record parsed by parse_sensor_line. Enforces
// non-decreasing timestamps.
class SensorReader {
public:
    // Opens `path`, or stdin when path is "-".
    explicit SensorReader(const std::string& path);
    ~SensorReader();
    SensorReader(SensorReader&&) noexcept;
    SensorReader& operator=(SensorReader&&) noexcept;

    std::optional<EnergySample> next();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wattsentry
