#include "wattsentry/ingest.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <vector>

#include "wattsentry/errors.hpp"
#include "wattsentry/sim.hpp"

namespace wattsentry {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double value = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

std::optional<std::uint32_t> parse_u32(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::uint32_t value = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

}  // namespace

bool filter_tcp_received(const PacketEvent& event) {
    return event.protocol == Protocol::Tcp && event.kind == PacketKind::Received;
}

PacketEvent classify_mqtt(PacketEvent event, std::string_view marker) {
    if (marker == "SUB") {
        event.protocol = Protocol::MqttSub;
    } else if (marker == "PUB") {
        event.protocol = Protocol::MqttPub;
    } else {
        // Without a direction marker the record cannot be attributed to the
        // subscribed stream, so it only ever counts as diagnostics.
        event.protocol = Protocol::Other;
    }
    return event;
}

std::optional<PacketEvent> parse_packet_line(std::string_view line,
                                             std::string_view source,
                                             std::size_t line_no) {
    if (skippable(line)) {
        return std::nullopt;
    }
    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(std::string(source), line_no, what);
    };

    const auto fields = split_fields(line);
    if (fields.size() != 5) {
        throw fail("expected 5 fields (timestamp,device_id,protocol,kind,size), got " +
                   std::to_string(fields.size()));
    }

    PacketEvent event;
    const auto ts = parse_double(fields[0]);
    if (!ts) throw fail("bad timestamp: '" + std::string(fields[0]) + "'");
    event.timestamp = *ts;
    if (event.timestamp < 0.0) throw fail("timestamp before stream epoch");

    event.device_id = std::string(fields[1]);
    if (event.device_id.empty()) throw fail("empty device id");

    const std::string_view proto = fields[2];
    const std::string_view kind = fields[3];

    try {
        event.kind = packet_kind_from_string(kind);
    } catch (const ConfigError& e) {
        throw fail(e.what());
    }

    if (proto == "TCP") {
        event.protocol = Protocol::Tcp;
    } else if (proto == "UDP") {
        event.protocol = Protocol::Udp;
    } else if (proto == "OTHER") {
        event.protocol = Protocol::Other;
    } else if (proto == "MQTT" || proto.substr(0, 5) == "MQTT_") {
        const std::string_view marker =
            proto.size() > 5 ? proto.substr(5) : std::string_view{};
        event.protocol = Protocol::MqttSub;  // placeholder, resolved below
        event = classify_mqtt(std::move(event), marker);
    } else {
        throw fail("unknown protocol: '" + std::string(proto) + "'");
    }

    if (event.protocol != Protocol::Tcp && event.kind != PacketKind::Received) {
        throw fail(std::string(kind) + " records only exist for TCP");
    }

    const auto size = parse_u32(fields[4]);
    if (!size) throw fail("bad size: '" + std::string(fields[4]) + "'");
    event.size = *size;
    return event;
}

namespace {

// Shared line-to-event driver for file and stdin feeds. Checks per-device
// timestamp monotonicity so a scrambled capture fails loudly instead of
// producing nonsense slots.
class LineEventStream final : public EventStream {
public:
    LineEventStream(std::unique_ptr<std::ifstream> owned,
                    std::istream& in,
                    std::string source_name,
                    std::optional<std::string> device_filter)
        : owned_(std::move(owned)),
          in_(in),
          source_(std::move(source_name)),
          device_filter_(std::move(device_filter)) {}

    std::optional<PacketEvent> next() override {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            auto event = parse_packet_line(line, source_, line_no_);
            if (!event) continue;
            auto [it, inserted] =
                last_seen_.try_emplace(event->device_id, event->timestamp);
            if (!inserted) {
                if (event->timestamp < it->second) {
                    throw ParseError(source_, line_no_,
                                     "timestamps for " + event->device_id +
                                         " went backwards: " +
                                         format_fixed(event->timestamp) +
                                         " after " + format_fixed(it->second));
                }
                it->second = event->timestamp;
            }
            if (device_filter_ && event->device_id != *device_filter_) continue;
            return event;
        }
        return std::nullopt;
    }

private:
    std::unique_ptr<std::ifstream> owned_;
    std::istream& in_;
    std::string source_;
    std::optional<std::string> device_filter_;
    std::size_t line_no_ = 0;
    std::map<std::string, double> last_seen_;
};

class VectorEventStream final : public EventStream {
public:
    explicit VectorEventStream(std::vector<PacketEvent> events)
        : events_(std::move(events)) {}

    std::optional<PacketEvent> next() override {
        if (cursor_ >= events_.size()) return std::nullopt;
        return events_[cursor_++];
    }

private:
    std::vector<PacketEvent> events_;
    std::size_t cursor_ = 0;
};

}  // namespace

std::unique_ptr<EventStream> open_source(const SourceConfig& config) {
    switch (config.kind) {
        case SourceKind::Replay: {
            auto file = std::make_unique<std::ifstream>(config.path);
            if (!*file) {
                throw ConfigError("cannot open replay file: " + config.path);
            }
            std::istream& ref = *file;
            return std::make_unique<LineEventStream>(std::move(file), ref,
                                                     config.path,
                                                     config.device_filter);
        }
        case SourceKind::Live: {
            if (config.path.empty() || config.path == "-" || config.path == "stdin") {
                return std::make_unique<LineEventStream>(nullptr, std::cin, "stdin",
                                                         config.device_filter);
            }
            auto file = std::make_unique<std::ifstream>(config.path);
            if (!*file) {
                throw ConfigError("cannot open live feed: " + config.path);
            }
            std::istream& ref = *file;
            return std::make_unique<LineEventStream>(std::move(file), ref,
                                                     config.path,
                                                     config.device_filter);
        }
        case SourceKind::Simulated: {
            ScenarioConfig scenario = load_scenario(config.path);
            if (config.seed_override) {
                scenario.seed = *config.seed_override;
            }
            std::vector<PacketEvent> events = generate_traffic(scenario);
            if (config.device_filter) {
                std::erase_if(events, [&](const PacketEvent& e) {
                    return e.device_id != *config.device_filter;
                });
            }
            return std::make_unique<VectorEventStream>(std::move(events));
        }
    }
    throw ConfigError("unsupported source kind");
}

struct SensorReader::Impl {
    std::unique_ptr<std::ifstream> owned;
    std::istream* in = nullptr;
    std::string source;
    std::size_t line_no = 0;
    double last_timestamp = 0.0;
    bool saw_sample = false;
};

SensorReader::SensorReader(const std::string& path) : impl_(new Impl) {
    if (path.empty() || path == "-" || path == "stdin") {
        impl_->in = &std::cin;
        impl_->source = "stdin";
        return;
    }
    impl_->owned = std::make_unique<std::ifstream>(path);
    if (!*impl_->owned) {
        throw ConfigError("cannot open sensor file: " + path);
    }
    impl_->in = impl_->owned.get();
    impl_->source = path;
}

SensorReader::~SensorReader() = default;
SensorReader::SensorReader(SensorReader&&) noexcept = default;
SensorReader& SensorReader::operator=(SensorReader&&) noexcept = default;

std::optional<EnergySample> SensorReader::next() {
    std::string line;
    while (std::getline(*impl_->in, line)) {
        ++impl_->line_no;
        if (skippable(line)) continue;
        EnergySample sample = parse_sensor_line(line, impl_->source, impl_->line_no);
        if (impl_->saw_sample && sample.timestamp < impl_->last_timestamp) {
            throw ParseError(impl_->source, impl_->line_no,
                             "sensor timestamps went backwards: " +
                                 format_fixed(sample.timestamp) + " after " +
                                 format_fixed(impl_->last_timestamp));
        }
        impl_->saw_sample = true;
        impl_->last_timestamp = sample.timestamp;
        if (sample.consistency_warning) {
            std::cerr << "wattsentry: " << impl_->source << ":" << impl_->line_no
                      << ": power disagrees with voltage*current by more than 10%\n";
        }
        return sample;
    }
    return std::nullopt;
}

}  // namespace wattsentry
