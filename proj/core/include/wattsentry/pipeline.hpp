#pragma once

// End-to-end wiring: packet and sensor streams in, slot metering, per-scope
// detection, persistence and alerts out. Single-threaded and deterministic;
// identical inputs produce identical stores, alert output and results.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wattsentry/alerts.hpp"
#include "wattsentry/baseline.hpp"
#include "wattsentry/detector.hpp"
#include "wattsentry/energy.hpp"
#include "wattsentry/ingest.hpp"
#include "wattsentry/store.hpp"
#include "wattsentry/types.hpp"
#include "wattsentry/windowing.hpp"

namespace wattsentry {

inline constexpr int kExitClean = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitTrafficAnomaly = 2;
inline constexpr int kExitAttackConfirmed = 3;

struct PipelineConfig {
    double slot_length = 180.0;
    double sample_length = 5.0;
    double energy_nominal_spacing = 1.0;
    DetectorConfig detector;
    std::vector<Scope> scopes = {Scope::Tcp, Scope::Udp, Scope::Mqtt,
                                 Scope::Aggregate};
    std::string run_id = "run";
    // Device the sensor stream belongs to. May stay empty when the packet
    // stream carries a single device.
    std::string energy_device;
};

struct PipelineResult {
    std::vector<DetectionEvent> events;
    std::vector<WindowSummary> windows;
    std::size_t slot_count = 0;
    std::size_t energy_slot_count = 0;
    std::size_t packet_count = 0;
    std::size_t sample_count = 0;

    std::size_t count(EventKind kind) const;
    bool attack_confirmed() const { return count(EventKind::AttackConfirmed) > 0; }
    bool traffic_only_anomaly() const {
        return count(EventKind::TrafficOnlyAnomaly) > 0;
    }

    // 3 when an attack was confirmed, 2 when only traffic anomalies
    // surfaced, 0 otherwise.
    int exit_code() const;
};

class Pipeline {
public:
    // The profile must carry a band for every configured scope; store and
    // sinks may be null/empty. The profile and store are borrowed and must
    // outlive the pipeline.
    Pipeline(PipelineConfig config,
             const BaselineProfile& profile,
             Store* store,
             AlertSinks sinks);
    ~Pipeline();
    Pipeline(Pipeline&&) noexcept;
    Pipeline& operator=(Pipeline&&) noexcept;

    void feed_packet(const PacketEvent& event);
    void feed_energy(const EnergySample& sample);

    // Closes open slots, settles pending windows and returns the run's
    // totals. The pipeline cannot be fed afterwards.
    PipelineResult finish();

private:
    struct DeviceLane;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Drives a full run from files: packets from `source`, sensor samples from
// `sensor_path` when given, merged in timestamp order.
PipelineResult run_pipeline_from_files(const PipelineConfig& config,
                                       const BaselineProfile& profile,
                                       const SourceConfig& source,
                                       const std::optional<std::string>& sensor_path,
                                       Store* store,
                                       AlertSinks sinks);

struct LearnSummary {
    BaselineProfile profile;
    std::size_t slot_count = 0;
    std::size_t energy_slot_count = 0;
    std::size_t packet_count = 0;
};

// Meters a clean capture and learns a profile from its slots. The sensor
// stream is optional; without it the profile keeps the default energy
// extrema.
LearnSummary learn_from_files(const SourceConfig& source,
                              const std::optional<std::string>& sensor_path,
                              double slot_length,
                              double sample_length,
                              DeviceStatus status,
                              const LearnOptions& options);

}  // namespace wattsentry
