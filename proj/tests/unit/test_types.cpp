#include <doctest.h>

#include "wattsentry/errors.hpp"
#include "wattsentry/types.hpp"

using namespace wattsentry;

TEST_CASE("protocol tokens round-trip") {
    for (Protocol p : {Protocol::Tcp, Protocol::Udp, Protocol::MqttSub,
                       Protocol::MqttPub, Protocol::Other}) {
        CHECK(protocol_from_string(to_string(p)) == p);
    }
    CHECK_THROWS_AS(protocol_from_string("ICMP"), ConfigError);
}

TEST_CASE("scope tokens accept lowercase") {
    CHECK(scope_from_string("tcp") == Scope::Tcp);
    CHECK(scope_from_string("AGGREGATE") == Scope::Aggregate);
    CHECK(scope_from_string("mqtt") == Scope::Mqtt);
    CHECK_THROWS_AS(scope_from_string("Tcp"), ConfigError);
}

TEST_CASE("only received tcp, udp and subscribed mqtt feed the meters") {
    PacketEvent e;
    e.device_id = "dev";

    e.protocol = Protocol::Tcp;
    e.kind = PacketKind::Received;
    CHECK(detection_counted(e));
    e.kind = PacketKind::Retransmission;
    CHECK_FALSE(detection_counted(e));
    e.kind = PacketKind::Acknowledged;
    CHECK_FALSE(detection_counted(e));

    e.kind = PacketKind::Received;
    e.protocol = Protocol::Udp;
    CHECK(detection_counted(e));
    e.protocol = Protocol::MqttSub;
    CHECK(detection_counted(e));
    e.protocol = Protocol::MqttPub;
    CHECK_FALSE(detection_counted(e));
    e.protocol = Protocol::Other;
    CHECK_FALSE(detection_counted(e));
}

TEST_CASE("scope counts aggregate is the lane sum") {
    ScopeCounts c;
    c.add(Protocol::Tcp, 3);
    c.add(Protocol::Udp, 2);
    c.add(Protocol::MqttSub, 5);
    c.add(Protocol::MqttPub, 7);  // ignored
    c.add(Protocol::Other, 9);    // ignored

    CHECK(c.tcp == 3);
    CHECK(c.udp == 2);
    CHECK(c.mqtt == 5);
    CHECK(c.aggregate() == 10);
    CHECK(c.of(Scope::Aggregate) == 10);
    CHECK(c.of(Scope::Udp) == 2);

    ScopeCounts d;
    d.add(Protocol::Tcp);
    c += d;
    CHECK(c.tcp == 4);
    CHECK(c.aggregate() == 11);
}

TEST_CASE("fixed formatting is stable") {
    CHECK(format_fixed(0.0) == "0.000000");
    CHECK(format_fixed(1234.5) == "1234.500000");
    CHECK(format_fixed(0.1234567) == "0.123457");
    CHECK(format_number(6000.0) == "6000");
    CHECK(format_number(1.42) == "1.42");
}
