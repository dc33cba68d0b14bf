#include <doctest.h>

#include <numeric>
#include <vector>

#include "wattsentry/baseline.hpp"
#include "wattsentry/errors.hpp"
#include "wattsentry/windowing.hpp"

using namespace wattsentry;

namespace {

PacketEvent tcp_at(double t, const std::string& device = "dev") {
    PacketEvent e;
    e.timestamp = t;
    e.device_id = device;
    e.protocol = Protocol::Tcp;
    e.kind = PacketKind::Received;
    e.size = 100;
    return e;
}

SlotMetrics slot_with(std::uint64_t tcp, std::uint64_t udp = 0,
                      std::uint64_t mqtt = 0, std::size_t index = 0) {
    SlotMetrics s;
    s.device_id = "dev";
    s.slot_index = index;
    s.slot_start = static_cast<double>(index) * 180.0;
    s.counts.tcp = tcp;
    s.counts.udp = udp;
    s.counts.mqtt = mqtt;
    return s;
}

}  // namespace

TEST_CASE("normalize_rate maps the band onto the unit interval") {
    CHECK(normalize_rate(2000, 2000, 6000) == doctest::Approx(0.0));
    CHECK(normalize_rate(6000, 2000, 6000) == doctest::Approx(1.0));
    CHECK(normalize_rate(4000, 2000, 6000) == doctest::Approx(0.5));
    // Out-of-band observations clamp instead of leaving [0, 1].
    CHECK(normalize_rate(1000, 2000, 6000) == doctest::Approx(0.0));
    CHECK(normalize_rate(9000, 2000, 6000) == doctest::Approx(1.0));

    CHECK_THROWS_AS(normalize_rate(3000, 5000, 5000), InvalidBaselineError);
    CHECK_THROWS_AS(normalize_rate(3000, 5000, 4000), InvalidBaselineError);
}

TEST_CASE("window_average is the arithmetic slot mean") {
    std::vector<SlotMetrics> slots = {slot_with(3000)};
    CHECK(window_average(slots, Scope::Tcp) == doctest::Approx(3000.0));

    slots.push_back(slot_with(5000, 0, 0, 1));
    CHECK(window_average(slots, Scope::Tcp) == doctest::Approx(4000.0));
    CHECK(window_average(slots, Scope::Aggregate) == doctest::Approx(4000.0));
    CHECK(window_average(slots, Scope::Udp) == doctest::Approx(0.0));

    CHECK_THROWS_AS(window_average({}, Scope::Tcp), InsufficientDataError);
}

TEST_CASE("slots are epoch aligned and close when time passes their end") {
    SlotAccumulator acc("dev", 10.0, 2.0);
    CHECK(acc.samples_per_slot() == 5);

    CHECK(acc.accumulate(tcp_at(1.0)).empty());
    CHECK(acc.accumulate(tcp_at(9.9)).empty());

    // Crossing into [10, 20) closes slot 0.
    auto closed = acc.accumulate(tcp_at(10.0));
    REQUIRE(closed.size() == 1);
    CHECK(closed[0].slot_index == 0);
    CHECK(closed[0].slot_start == doctest::Approx(0.0));
    CHECK(closed[0].counts.tcp == 2);
    REQUIRE(closed[0].sample_counts.size() == 5);
    CHECK(closed[0].sample_counts[0].tcp == 1);  // t=1.0 lands in [0,2)
    CHECK(closed[0].sample_counts[4].tcp == 1);  // t=9.9 lands in [8,10)

    auto flushed = acc.flush();
    REQUIRE(flushed.has_value());
    CHECK(flushed->slot_index == 1);
    CHECK(flushed->counts.tcp == 1);
    CHECK(flushed->slot_length == doctest::Approx(10.0));
}

TEST_CASE("quiet stretches emit empty slots in order") {
    SlotAccumulator acc("dev", 10.0, 2.0);
    acc.accumulate(tcp_at(1.0));
    auto closed = acc.accumulate(tcp_at(35.0));  // slots 0,1,2 end before t=35
    REQUIRE(closed.size() == 3);
    CHECK(closed[0].counts.tcp == 1);
    CHECK(closed[1].counts.tcp == 0);
    CHECK(closed[1].slot_index == 1);
    CHECK(closed[2].counts.tcp == 0);

    auto more = acc.advance_to(50.0);
    REQUIRE(more.size() == 2);
    CHECK(more[0].slot_index == 3);
    CHECK(more[0].counts.tcp == 0);
    CHECK(more[1].counts.tcp == 1);
    CHECK_FALSE(acc.has_open_slot());
}

TEST_CASE("accumulator rejects other devices and time regressions") {
    SlotAccumulator acc("dev", 10.0, 2.0);
    acc.accumulate(tcp_at(5.0));
    CHECK_THROWS_AS(acc.accumulate(tcp_at(6.0, "other")), MalformedStreamError);
    CHECK_THROWS_AS(acc.accumulate(tcp_at(4.0)), MalformedStreamError);
    // advance_to into the past is a clock hint, not an error.
    CHECK(acc.advance_to(1.0).empty());
}

TEST_CASE("non-counted traffic lands in diagnostics, not counts") {
    SlotAccumulator acc("dev", 10.0, 2.0);
    PacketEvent e = tcp_at(1.0);
    e.kind = PacketKind::Retransmission;
    acc.accumulate(e);
    e.kind = PacketKind::Acknowledged;
    e.timestamp = 2.0;
    acc.accumulate(e);
    e.protocol = Protocol::MqttPub;
    e.kind = PacketKind::Received;
    e.timestamp = 3.0;
    acc.accumulate(e);
    e.protocol = Protocol::Other;
    e.timestamp = 4.0;
    acc.accumulate(e);

    auto slot = acc.flush();
    REQUIRE(slot.has_value());
    CHECK(slot->counts.aggregate() == 0);
    CHECK(slot->diagnostics.tcp_retransmissions == 1);
    CHECK(slot->diagnostics.tcp_acknowledged == 1);
    CHECK(slot->diagnostics.mqtt_published == 1);
    CHECK(slot->diagnostics.other == 1);
}

TEST_CASE("event totals are conserved across slots") {
    SlotAccumulator acc("dev", 10.0, 2.0);
    std::vector<SlotMetrics> closed;
    const int total = 137;
    for (int i = 0; i < total; ++i) {
        const double t = 0.37 * static_cast<double>(i);
        for (auto& s : acc.accumulate(tcp_at(t))) closed.push_back(s);
    }
    if (auto last = acc.flush()) closed.push_back(*last);

    std::uint64_t sum = 0;
    for (const auto& s : closed) {
        sum += s.counts.tcp;
        std::uint64_t sample_sum = 0;
        for (const auto& sc : s.sample_counts) sample_sum += sc.tcp;
        CHECK(sample_sum == s.counts.tcp);
    }
    CHECK(sum == total);
}

TEST_CASE("closing against a profile fills normalized rates") {
    const BaselineProfile profile = default_profile("dev");
    SlotAccumulator acc("dev", 180.0, 5.0, &profile);
    for (int i = 0; i < 4000; ++i) {
        acc.accumulate(tcp_at(0.04 * static_cast<double>(i)));
    }
    auto slot = acc.flush();
    REQUIRE(slot.has_value());
    CHECK(slot->counts.tcp == 4000);
    CHECK(slot->normalized_of(Scope::Tcp) == doctest::Approx(0.5));
    CHECK(slot->normalized_of(Scope::Udp) == doctest::Approx(0.0));
}

TEST_CASE("window summaries skip suppressed slots per scope") {
    std::vector<SlotMetrics> slots;
    slots.push_back(slot_with(1000, 100, 0, 0));
    slots.push_back(slot_with(3000, 300, 0, 1));
    slots.push_back(slot_with(5000, 500, 0, 2));
    slots[1].suppressed_for[static_cast<std::size_t>(Scope::Tcp)] = true;

    auto window = summarize_window(slots, 0, 0.0, 10);
    CHECK(window.window_index == 0);
    CHECK(window.slots.size() == 3);
    CHECK(window.mean_of(Scope::Tcp) == doctest::Approx(3000.0));  // 1000,5000
    CHECK(window.evaluated_slots[static_cast<std::size_t>(Scope::Tcp)] == 2);
    CHECK(window.mean_of(Scope::Udp) == doctest::Approx(300.0));   // all three
    CHECK(window.evaluated_slots[static_cast<std::size_t>(Scope::Udp)] == 3);
    CHECK(window.verdict == Verdict::Undecided);

    // All slots suppressed for a scope leaves a zero, NaN-free mean.
    for (auto& s : slots) {
        s.suppressed_for[static_cast<std::size_t>(Scope::Mqtt)] = true;
    }
    window = summarize_window(slots, 1, 0.0, 10);
    CHECK(window.mean_of(Scope::Mqtt) == doctest::Approx(0.0));
    CHECK(window.evaluated_slots[static_cast<std::size_t>(Scope::Mqtt)] == 0);
}
