#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wattsentry/baseline.hpp"
#include "wattsentry/errors.hpp"
#include "wattsentry/pipeline.hpp"
#include "wattsentry/sim.hpp"

using namespace wattsentry;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

PipelineResult run_in_memory(const ScenarioConfig& scenario,
                             const PipelineConfig& config,
                             const BaselineProfile& profile,
                             Store* store,
                             bool with_energy = true) {
    const auto events = generate_traffic(scenario);
    const auto samples =
        generate_energy(events, scenario.energy, scenario.seed, scenario.duration);

    Pipeline pipeline(config, profile, store, {});
    std::size_t ei = 0, si = 0;
    while (ei < events.size() || (with_energy && si < samples.size())) {
        const bool take_sample =
            with_energy && si < samples.size() &&
            (ei >= events.size() || samples[si].timestamp <= events[ei].timestamp);
        if (take_sample) {
            pipeline.feed_energy(samples[si++]);
        } else {
            pipeline.feed_packet(events[ei++]);
        }
    }
    return pipeline.finish();
}

PacketEvent tcp_at(double t, const std::string& device = "dev") {
    PacketEvent e;
    e.timestamp = t;
    e.device_id = device;
    e.protocol = Protocol::Tcp;
    e.kind = PacketKind::Received;
    e.size = 100;
    return e;
}

EnergySample sample_at(double t, double power) {
    EnergySample s;
    s.timestamp = t;
    s.voltage = 5.0;
    s.current = power / 5.0;
    s.power = power;
    return s;
}

}  // namespace

TEST_CASE("a clean run produces no detections and a normal window") {
    const auto scenario =
        single_protocol_scenario(Protocol::Tcp, Regime::Normal, 17, 1800.0);
    const auto profile = default_profile(scenario.device_id);
    TempDir dir("ws_pipe_clean");
    Store store = Store::open(dir.path / "records.ndjson");

    PipelineConfig config;
    const auto result = run_in_memory(scenario, config, profile, &store);

    CHECK(result.slot_count == 10);
    CHECK(result.energy_slot_count == 10);
    CHECK(result.packet_count > 0);
    CHECK(result.sample_count == 1800);
    CHECK(result.count(EventKind::CooldownStarted) == 0);
    CHECK(result.count(EventKind::AbnormalRegistered) == 0);
    CHECK(result.count(EventKind::AttackConfirmed) == 0);
    CHECK(result.count(EventKind::TrafficOnlyAnomaly) == 0);
    CHECK(result.exit_code() == kExitClean);

    REQUIRE(result.windows.size() == 1);
    CHECK(result.windows[0].verdict == Verdict::Normal);
    for (Scope s : kAllScopes) {
        CHECK(result.windows[0].verdict_of(s) == Verdict::Normal);
    }

    RecordQuery slots;
    slots.kind = RecordKind::Slot;
    CHECK(store.query(slots).size() == 10);
    RecordQuery energy;
    energy.kind = RecordKind::Energy;
    CHECK(store.query(energy).size() == 10);
    RecordQuery baseline;
    baseline.kind = RecordKind::Baseline;
    CHECK(store.query(baseline).size() == 1);
    RecordQuery events;
    events.kind = RecordKind::Event;
    const auto verdicts = store.query(events);
    REQUIRE(verdicts.size() == 4);  // one WINDOW_VERDICT per scope
    for (const auto& r : verdicts) {
        CHECK(r.payload.at("kind") == "WINDOW_VERDICT");
        CHECK(r.payload.at("verdict") == "NORMAL");
    }
}

TEST_CASE("a sustained flood is confirmed through the energy footprint") {
    const auto scenario =
        single_protocol_scenario(Protocol::Udp, Regime::Attack, 17, 1800.0);
    const auto profile = default_profile(scenario.device_id);
    TempDir dir("ws_pipe_attack");
    Store store = Store::open(dir.path / "records.ndjson");

    PipelineConfig config;
    const auto result = run_in_memory(scenario, config, profile, &store);

    CHECK(result.exit_code() == kExitAttackConfirmed);
    CHECK(result.count(EventKind::AttackConfirmed) > 0);
    CHECK(result.count(EventKind::TrafficOnlyAnomaly) == 0);

    // Both the UDP lane and the aggregate lane trip; the first registration
    // lands on the 4th evaluated slot (index 6 with one-slot cooldowns).
    std::size_t first_abnormal_slot = 99;
    for (const auto& e : result.events) {
        if (e.kind == EventKind::AbnormalRegistered) {
            first_abnormal_slot = std::min(first_abnormal_slot, e.slot_index);
        }
    }
    CHECK(first_abnormal_slot == 6);

    for (const auto& e : result.events) {
        if (e.kind != EventKind::AttackConfirmed) continue;
        REQUIRE(e.energy.has_value());
        CHECK(e.energy->mean_sample_joules > e.energy->threshold);
        CHECK_FALSE(e.energy->data_gap);
    }

    REQUIRE(result.windows.size() == 1);
    CHECK(result.windows[0].verdict == Verdict::Abnormal);
    CHECK(result.windows[0].verdict_of(Scope::Udp) == Verdict::Abnormal);
    // The TCP lane saw zero traffic, which is still inside its band.
    CHECK(result.windows[0].verdict_of(Scope::Tcp) == Verdict::Normal);
}

TEST_CASE("without sensor coverage a flood stays a traffic-only anomaly") {
    const auto scenario =
        single_protocol_scenario(Protocol::MqttSub, Regime::Attack, 23, 1800.0);
    const auto profile = default_profile(scenario.device_id);

    PipelineConfig config;
    const auto result =
        run_in_memory(scenario, config, profile, nullptr, /*with_energy=*/false);

    CHECK(result.count(EventKind::AttackConfirmed) == 0);
    CHECK(result.count(EventKind::TrafficOnlyAnomaly) > 0);
    CHECK(result.exit_code() == kExitTrafficAnomaly);
    CHECK(result.energy_slot_count == 0);
}

TEST_CASE("energy exactly at the threshold does not confirm") {
    BaselineProfile profile = default_profile("dev");
    profile.set_band(Scope::Tcp, RateBand{10, 100, 100});

    PipelineConfig config;
    config.slot_length = 10.0;
    config.sample_length = 2.0;
    config.scopes = {Scope::Tcp};
    config.detector.window_slots = 10;

    auto run_with_power = [&](double watts) {
        Pipeline pipeline(config, profile, nullptr, {});
        // Merge packets and one sample per second by hand, samples first on
        // ties so slot boundaries settle deterministically.
        for (int slot = 0; slot < 8; ++slot) {
            for (int s = 0; s < 10; ++s) {
                const double t = slot * 10.0 + s;
                pipeline.feed_energy(sample_at(t, watts));
                for (int k = 0; k < 15; ++k) {
                    pipeline.feed_packet(tcp_at(t + 0.01 + 0.06 * k));
                }
            }
        }
        return pipeline.finish();
    };

    // Constant power equals mean joules per one-second sample here.
    const auto cool = run_with_power(1.42);
    CHECK(cool.count(EventKind::AbnormalRegistered) > 0);
    CHECK(cool.count(EventKind::AttackConfirmed) == 0);
    CHECK(cool.count(EventKind::TrafficOnlyAnomaly) > 0);

    const auto hot = run_with_power(1.43);
    CHECK(hot.count(EventKind::AttackConfirmed) > 0);
    CHECK(hot.count(EventKind::TrafficOnlyAnomaly) == 0);
}

TEST_CASE("scope configuration is validated up front") {
    const auto profile = default_profile("dev");

    PipelineConfig empty;
    empty.scopes = {};
    CHECK_THROWS_AS(Pipeline(empty, profile, nullptr, {}), ConfigError);

    PipelineConfig dup;
    dup.scopes = {Scope::Tcp, Scope::Tcp};
    CHECK_THROWS_AS(Pipeline(dup, profile, nullptr, {}), ConfigError);

    BaselineProfile no_mqtt = profile;
    no_mqtt.bands[static_cast<std::size_t>(Scope::Mqtt)].reset();
    PipelineConfig wants_mqtt;
    wants_mqtt.scopes = {Scope::Mqtt};
    CHECK_THROWS_AS(Pipeline(wants_mqtt, no_mqtt, nullptr, {}), ConfigError);

    PipelineConfig zero_window;
    zero_window.detector.window_slots = 0;
    CHECK_THROWS_AS(Pipeline(zero_window, profile, nullptr, {}), ConfigError);
}

TEST_CASE("suppressed slots are recorded as such") {
    const auto scenario =
        single_protocol_scenario(Protocol::Tcp, Regime::Attack, 41, 1800.0);
    const auto profile = default_profile(scenario.device_id);
    TempDir dir("ws_pipe_suppressed");
    Store store = Store::open(dir.path / "records.ndjson");

    PipelineConfig config;
    run_in_memory(scenario, config, profile, &store);

    RecordQuery q;
    q.kind = RecordKind::Slot;
    const auto slots = store.query(q);
    REQUIRE(slots.size() == 10);
    // Odd slots sit inside the cooldown that each even slot's exceedance
    // started.
    for (const auto& r : slots) {
        const auto idx = r.payload.at("slot_index").get<std::size_t>();
        const auto suppressed = r.payload.at("suppressed_scopes");
        if (idx % 2 == 1) {
            CHECK(suppressed.size() == 2);  // TCP and AGGREGATE lanes
        } else {
            CHECK(suppressed.empty());
        }
    }
}

TEST_CASE("sensor samples bind to the packet stream's device") {
    const auto profile = default_profile("dev");
    PipelineConfig config;
    config.slot_length = 10.0;
    config.sample_length = 2.0;
    config.scopes = {Scope::Tcp};

    // Sensor-before-packets buffers until the first packet names the device.
    Pipeline pipeline(config, profile, nullptr, {});
    pipeline.feed_energy(sample_at(0.0, 1.0));
    pipeline.feed_energy(sample_at(1.0, 1.0));
    pipeline.feed_packet(tcp_at(1.5));
    pipeline.feed_packet(tcp_at(12.0));
    const auto result = pipeline.finish();
    CHECK(result.sample_count == 2);
    CHECK(result.energy_slot_count >= 1);

    // Two packet devices with sensor data and no explicit binding is
    // ambiguous.
    PipelineConfig two;
    two.slot_length = 10.0;
    two.sample_length = 2.0;
    two.scopes = {Scope::Tcp};
    Pipeline ambiguous(two, profile, nullptr, {});
    ambiguous.feed_packet(tcp_at(0.5, "a"));
    ambiguous.feed_packet(tcp_at(0.6, "b"));
    CHECK_THROWS_AS(ambiguous.feed_energy(sample_at(1.0, 1.0)), ConfigError);

    // An explicit device keeps multi-device runs unambiguous.
    PipelineConfig bound;
    bound.slot_length = 10.0;
    bound.sample_length = 2.0;
    bound.scopes = {Scope::Tcp};
    bound.energy_device = "a";
    Pipeline explicit_pipeline(bound, profile, nullptr, {});
    explicit_pipeline.feed_packet(tcp_at(0.5, "a"));
    explicit_pipeline.feed_packet(tcp_at(0.6, "b"));
    explicit_pipeline.feed_energy(sample_at(1.0, 1.0));
    const auto bound_result = explicit_pipeline.finish();
    CHECK(bound_result.sample_count == 1);
}

TEST_CASE("file-driven runs match in-memory runs") {
    const auto scenario =
        single_protocol_scenario(Protocol::Udp, Regime::Attack, 29, 1800.0);
    const auto profile = default_profile(scenario.device_id);
    TempDir dir("ws_pipe_files");
    const auto artifacts = run_scenario(scenario, dir.path / "cap");

    PipelineConfig config;
    SourceConfig source;
    source.kind = SourceKind::Replay;
    source.path = artifacts.replay_path.string();

    Store store = Store::open(dir.path / "records.ndjson");
    const auto from_files = run_pipeline_from_files(
        config, profile, source, artifacts.sensor_path.string(), &store, {});

    const auto in_memory = run_in_memory(scenario, config, profile, nullptr);

    CHECK(from_files.packet_count == in_memory.packet_count);
    CHECK(from_files.slot_count == in_memory.slot_count);
    CHECK(from_files.events.size() == in_memory.events.size());
    for (std::size_t i = 0; i < from_files.events.size(); ++i) {
        CHECK(from_files.events[i].kind == in_memory.events[i].kind);
        CHECK(from_files.events[i].slot_index == in_memory.events[i].slot_index);
        CHECK(from_files.events[i].scope == in_memory.events[i].scope);
    }
    CHECK(from_files.exit_code() == in_memory.exit_code());
}

TEST_CASE("learning from files reproduces the capture's envelope") {
    const auto scenario = mixed_scenario(Regime::Normal, 53, 1800.0);
    TempDir dir("ws_pipe_learn");
    const auto artifacts = run_scenario(scenario, dir.path / "cap");

    SourceConfig source;
    source.kind = SourceKind::Replay;
    source.path = artifacts.replay_path.string();

    const auto summary = learn_from_files(
        source, artifacts.sensor_path.string(), 180.0, 5.0,
        DeviceStatus::Active, {});

    CHECK(summary.slot_count == 10);
    CHECK(summary.packet_count > 0);
    CHECK(summary.profile.source == ProfileSource::Learned);

    const RateBand* agg = summary.profile.band(Scope::Aggregate);
    REQUIRE(agg != nullptr);
    CHECK(agg->min_pkt >= 1500);
    CHECK(agg->max_pkt <= 6000);
    // Energy extrema come from the capture, inside the idle..threshold span.
    CHECK(summary.profile.energy_min >= 0.9);
    CHECK(summary.profile.energy_max < 1.42);

    // Learned profiles feed detection directly: the same capture replayed
    // against its own envelope is quiet.
    PipelineConfig config;
    const auto result =
        run_in_memory(scenario, config, summary.profile, nullptr);
    CHECK(result.exit_code() == kExitClean);
    CHECK(result.count(EventKind::CooldownStarted) == 0);
}

TEST_CASE("learning refuses multi-device captures") {
    TempDir dir("ws_pipe_learn_multi");
    const auto path = dir.path / "two.csv";
    {
        std::ofstream out(path);
        out << "0.5,a,TCP,RECEIVED,100\n";
        out << "0.6,b,TCP,RECEIVED,100\n";
    }
    SourceConfig source;
    source.kind = SourceKind::Replay;
    source.path = path.string();
    CHECK_THROWS_AS(
        learn_from_files(source, std::nullopt, 180.0, 5.0, DeviceStatus::Active, {}),
        ConfigError);
}
