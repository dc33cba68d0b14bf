#include "wattsentry/types.hpp"

#include <cstdio>

#include "wattsentry/errors.hpp"

namespace wattsentry {

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::Tcp: return "TCP";
        case Protocol::Udp: return "UDP";
        case Protocol::MqttSub: return "MQTT_SUB";
        case Protocol::MqttPub: return "MQTT_PUB";
        case Protocol::Other: return "OTHER";
    }
    return "OTHER";
}

std::string_view to_string(PacketKind k) {
    switch (k) {
        case PacketKind::Received: return "RECEIVED";
        case PacketKind::Retransmission: return "RETRANSMISSION";
        case PacketKind::Acknowledged: return "ACKNOWLEDGED";
    }
    return "RECEIVED";
}

std::string_view to_string(Scope s) {
    switch (s) {
        case Scope::Tcp: return "TCP";
        case Scope::Udp: return "UDP";
        case Scope::Mqtt: return "MQTT";
        case Scope::Aggregate: return "AGGREGATE";
    }
    return "AGGREGATE";
}

std::string_view to_string(DeviceStatus s) {
    return s == DeviceStatus::Idle ? "IDLE" : "ACTIVE";
}

std::string_view to_string(Label l) {
    switch (l) {
        case Label::Normal: return "NORMAL";
        case Label::Abnormal: return "ABNORMAL";
        case Label::Unlabeled: return "UNLABELED";
    }
    return "UNLABELED";
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Normal: return "NORMAL";
        case Verdict::Abnormal: return "ABNORMAL";
        case Verdict::Undecided: return "UNDECIDED";
    }
    return "UNDECIDED";
}

Protocol protocol_from_string(std::string_view token) {
    if (token == "TCP") return Protocol::Tcp;
    if (token == "UDP") return Protocol::Udp;
    if (token == "MQTT_SUB") return Protocol::MqttSub;
    if (token == "MQTT_PUB") return Protocol::MqttPub;
    if (token == "OTHER") return Protocol::Other;
    throw ConfigError("unknown protocol token: " + std::string(token));
}

PacketKind packet_kind_from_string(std::string_view token) {
    if (token == "RECEIVED") return PacketKind::Received;
    if (token == "RETRANSMISSION") return PacketKind::Retransmission;
    if (token == "ACKNOWLEDGED") return PacketKind::Acknowledged;
    throw ConfigError("unknown packet kind token: " + std::string(token));
}

Scope scope_from_string(std::string_view token) {
    if (token == "TCP" || token == "tcp") return Scope::Tcp;
    if (token == "UDP" || token == "udp") return Scope::Udp;
    if (token == "MQTT" || token == "mqtt") return Scope::Mqtt;
    if (token == "AGGREGATE" || token == "aggregate") return Scope::Aggregate;
    throw ConfigError("unknown scope token: " + std::string(token));
}

DeviceStatus device_status_from_string(std::string_view token) {
    if (token == "ACTIVE" || token == "active") return DeviceStatus::Active;
    if (token == "IDLE" || token == "idle") return DeviceStatus::Idle;
    throw ConfigError("unknown device status token: " + std::string(token));
}

Label label_from_string(std::string_view token) {
    if (token == "NORMAL") return Label::Normal;
    if (token == "ABNORMAL") return Label::Abnormal;
    if (token == "UNLABELED") return Label::Unlabeled;
    throw ConfigError("unknown label token: " + std::string(token));
}

bool detection_counted(const PacketEvent& event) {
    switch (event.protocol) {
        case Protocol::Tcp:
            return event.kind == PacketKind::Received;
        case Protocol::Udp:
        case Protocol::MqttSub:
            return true;
        case Protocol::MqttPub:
        case Protocol::Other:
            return false;
    }
    return false;
}

void ScopeCounts::add(Protocol p, std::uint64_t n) {
    switch (p) {
        case Protocol::Tcp: tcp += n; break;
        case Protocol::Udp: udp += n; break;
        case Protocol::MqttSub: mqtt += n; break;
        case Protocol::MqttPub:
        case Protocol::Other:
            break;
    }
}

std::string format_fixed(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

}  // namespace wattsentry
