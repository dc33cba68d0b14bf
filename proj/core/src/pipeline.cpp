#include "wattsentry/pipeline.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <utility>

#include "wattsentry/errors.hpp"

namespace wattsentry {

std::size_t PipelineResult::count(EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(),
                      [kind](const DetectionEvent& e) { return e.kind == kind; }));
}

int PipelineResult::exit_code() const {
    if (attack_confirmed()) return kExitAttackConfirmed;
    if (traffic_only_anomaly()) return kExitTrafficAnomaly;
    return kExitClean;
}

namespace {

nlohmann::json slot_payload(const SlotMetrics& slot) {
    nlohmann::json suppressed = nlohmann::json::array();
    for (Scope scope : kAllScopes) {
        if (slot.suppressed(scope)) {
            suppressed.push_back(to_string(scope));
        }
    }
    return nlohmann::json{
        {"slot_index", slot.slot_index},
        {"slot_start", slot.slot_start},
        {"slot_length", slot.slot_length},
        {"counts",
         {{"tcp", slot.counts.tcp},
          {"udp", slot.counts.udp},
          {"mqtt", slot.counts.mqtt},
          {"aggregate", slot.counts.aggregate()}}},
        {"normalized",
         {{"tcp", slot.normalized_of(Scope::Tcp)},
          {"udp", slot.normalized_of(Scope::Udp)},
          {"mqtt", slot.normalized_of(Scope::Mqtt)},
          {"aggregate", slot.normalized_of(Scope::Aggregate)}}},
        {"diagnostics",
         {{"tcp_retransmissions", slot.diagnostics.tcp_retransmissions},
          {"tcp_acknowledged", slot.diagnostics.tcp_acknowledged},
          {"mqtt_published", slot.diagnostics.mqtt_published},
          {"other", slot.diagnostics.other}}},
        {"suppressed_scopes", std::move(suppressed)},
    };
}

nlohmann::json energy_payload(const EnergySlot& slot) {
    return nlohmann::json{
        {"slot_index", slot.slot_index},
        {"slot_start", slot.slot_start},
        {"slot_length", slot.slot_length},
        {"joules", slot.joules},
        {"mean_sample_joules", slot.mean_sample_joules},
        {"normalized", slot.normalized},
        {"sample_count", slot.sample_count},
        {"data_gap", slot.data_gap},
    };
}

}  // namespace

struct Pipeline::DeviceLane {
    std::string device_id;
    SlotAccumulator slots;
    std::optional<EnergyAccumulator> energy;
    std::vector<ScopeDetector> detectors;

    std::deque<SlotMetrics> pending_slots;
    std::map<std::size_t, EnergySlot> closed_energy;
    double energy_clock = 0.0;

    std::vector<SlotMetrics> window_slots;
    std::optional<std::size_t> window_index;

    DeviceLane(std::string id, const PipelineConfig& config,
               const BaselineProfile& profile)
        : device_id(std::move(id)),
          slots(device_id, config.slot_length, config.sample_length, &profile) {
        detectors.reserve(config.scopes.size());
        for (Scope scope : config.scopes) {
            detectors.emplace_back(device_id, scope, &profile, config.detector,
                                   config.slot_length);
        }
    }
};

struct Pipeline::Impl {
    PipelineConfig config;
    const BaselineProfile* profile;
    Store* store;
    AlertSinks sinks;

    std::map<std::string, DeviceLane> lanes;
    std::vector<EnergySample> unbound_energy;
    std::string bound_energy_device;
    bool energy_explicit = false;
    bool finished = false;
    PipelineResult result;

    DeviceLane& ensure_lane(const std::string& device_id) {
        auto it = lanes.find(device_id);
        if (it != lanes.end()) {
            return it->second;
        }
        if (lanes.size() == 1 && !bound_energy_device.empty() && !energy_explicit) {
            throw ConfigError(
                "sensor stream was bound to " + bound_energy_device +
                " implicitly but the packet stream carries multiple devices; "
                "name the metered device explicitly");
        }
        it = lanes.emplace(device_id, DeviceLane(device_id, config, *profile)).first;
        return it->second;
    }

    void bind_energy(DeviceLane& lane) {
        lane.energy.emplace(lane.device_id, config.slot_length,
                            config.energy_nominal_spacing, profile);
        bound_energy_device = lane.device_id;
    }

    void persist(RecordKind kind, const std::string& device, double timestamp,
                 nlohmann::json payload) {
        if (store == nullptr) return;
        Record record;
        record.kind = kind;
        record.device_id = device;
        record.timestamp = timestamp;
        record.run_id = config.run_id;
        record.payload = std::move(payload);
        store->append(record);
    }

    void dispatch(const DetectionEvent& event) {
        persist(RecordKind::Event, event.device_id, event.timestamp,
                event_to_json(event));
        sinks.emit(event);
        result.events.push_back(event);
    }

    void record_energy_slot(DeviceLane& lane, EnergySlot slot) {
        persist(RecordKind::Energy, lane.device_id, slot.slot_end(),
                energy_payload(slot));
        result.energy_slot_count += 1;
        lane.closed_energy.emplace(slot.slot_index, std::move(slot));
    }

    EnergySlot synthesize_gap_slot(const DeviceLane& lane, std::size_t index) const {
        EnergySlot slot;
        slot.device_id = lane.device_id;
        slot.slot_index = index;
        slot.slot_start = static_cast<double>(index) * config.slot_length;
        slot.slot_length = config.slot_length;
        slot.data_gap = true;
        return slot;
    }

    void finalize_window(DeviceLane& lane) {
        if (!lane.window_index.has_value()) return;
        const std::size_t index = *lane.window_index;
        const double window_start = static_cast<double>(index) *
                                    static_cast<double>(config.detector.window_slots) *
                                    config.slot_length;
        WindowSummary window =
            summarize_window(lane.window_slots, index, window_start,
                             config.detector.window_slots);
        window.device_id = lane.device_id;
        for (ScopeDetector& detector : lane.detectors) {
            for (DetectionEvent& event : detector.on_window_complete(window)) {
                dispatch(event);
            }
        }

        bool any_abnormal = false;
        bool any_normal = false;
        for (Scope scope : config.scopes) {
            const Verdict v = window.verdict_of(scope);
            any_abnormal = any_abnormal || v == Verdict::Abnormal;
            any_normal = any_normal || v == Verdict::Normal;
        }
        window.verdict = any_abnormal  ? Verdict::Abnormal
                         : any_normal  ? Verdict::Normal
                                       : Verdict::Undecided;

        result.windows.push_back(std::move(window));
        lane.window_slots.clear();
        lane.window_index.reset();
    }

    void process_slot(DeviceLane& lane, SlotMetrics slot, const EnergySlot* energy) {
        const std::size_t window = slot.slot_index / config.detector.window_slots;
        if (lane.window_index && window != *lane.window_index) {
            finalize_window(lane);
        }
        if (!lane.window_index) {
            lane.window_index = window;
        }

        for (ScopeDetector& detector : lane.detectors) {
            if (detector.should_suppress(slot)) {
                detector.note_suppressed(slot);
                continue;
            }
            for (DetectionEvent& event : detector.on_slot(slot, energy)) {
                dispatch(event);
            }
        }

        persist(RecordKind::Slot, lane.device_id, slot.slot_end(),
                slot_payload(slot));
        result.slot_count += 1;
        lane.window_slots.push_back(std::move(slot));
    }

    // Evaluates closed packet slots once their energy counterpart is
    // settled: either the matching energy slot closed, or the sensor stream
    // provably has nothing for that span (then a gap stands in), or there is
    // no sensor stream at all.
    void drain(DeviceLane& lane, bool stream_done) {
        while (!lane.pending_slots.empty()) {
            SlotMetrics& slot = lane.pending_slots.front();
            const std::size_t index = slot.slot_index;

            const EnergySlot* energy = nullptr;
            const bool sensor_bound = lane.energy.has_value();
            if (sensor_bound) {
                auto it = lane.closed_energy.find(index);
                if (it == lane.closed_energy.end()) {
                    const bool settled =
                        stream_done || lane.energy_clock >= slot.slot_end();
                    if (!settled) break;
                    it = lane.closed_energy
                             .emplace(index, synthesize_gap_slot(lane, index))
                             .first;
                    persist(RecordKind::Energy, lane.device_id,
                            it->second.slot_end(), energy_payload(it->second));
                    result.energy_slot_count += 1;
                }
                energy = &it->second;
            }

            process_slot(lane, std::move(slot), energy);
            lane.pending_slots.pop_front();
            // Paired energy slots stay in the map for reporting queries done
            // by tests; drop ones older than the processed index to bound
            // memory on long runs.
            while (!lane.closed_energy.empty() &&
                   lane.closed_energy.begin()->first + 2 < index) {
                lane.closed_energy.erase(lane.closed_energy.begin());
            }
        }
    }
};

Pipeline::Pipeline(PipelineConfig config,
                   const BaselineProfile& profile,
                   Store* store,
                   AlertSinks sinks)
    : impl_(new Impl{std::move(config), &profile, store, sinks}) {
    PipelineConfig& cfg = impl_->config;
    if (cfg.scopes.empty()) {
        throw ConfigError("pipeline needs at least one scope");
    }
    std::set<Scope> seen;
    for (Scope scope : cfg.scopes) {
        if (!seen.insert(scope).second) {
            throw ConfigError("scope " + std::string(to_string(scope)) +
                              " listed twice");
        }
        threshold_for(profile, scope);  // fail fast on missing bands
    }
    if (cfg.detector.window_slots == 0) {
        throw ConfigError("window must span at least one slot");
    }
    if (cfg.run_id.empty()) {
        cfg.run_id = "run";
    }
    if (!cfg.energy_device.empty()) {
        impl_->energy_explicit = true;
    }
    impl_->persist(RecordKind::Baseline, profile.device_id, 0.0,
                   profile_to_json(profile));
}

Pipeline::~Pipeline() = default;
Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&&) noexcept = default;

void Pipeline::feed_packet(const PacketEvent& event) {
    if (impl_->finished) {
        throw MalformedStreamError("pipeline already finished");
    }
    impl_->result.packet_count += 1;
    DeviceLane& lane = impl_->ensure_lane(event.device_id);

    // A sensor stream that started before any packets binds to the first
    // device the packet stream names.
    if (!impl_->unbound_energy.empty() && !lane.energy.has_value() &&
        impl_->bound_energy_device.empty()) {
        impl_->bind_energy(lane);
        for (const EnergySample& sample : impl_->unbound_energy) {
            for (EnergySlot& closed : lane.energy->accumulate(sample)) {
                impl_->record_energy_slot(lane, std::move(closed));
            }
            lane.energy_clock = std::max(lane.energy_clock, sample.timestamp);
        }
        impl_->unbound_energy.clear();
    }

    for (SlotMetrics& closed : lane.slots.accumulate(event)) {
        lane.pending_slots.push_back(std::move(closed));
    }
    impl_->drain(lane, false);
}

void Pipeline::feed_energy(const EnergySample& sample) {
    if (impl_->finished) {
        throw MalformedStreamError("pipeline already finished");
    }
    impl_->result.sample_count += 1;

    std::string device = impl_->config.energy_device;
    if (device.empty()) {
        if (!impl_->bound_energy_device.empty()) {
            device = impl_->bound_energy_device;
        } else if (impl_->lanes.size() == 1) {
            device = impl_->lanes.begin()->first;
        } else if (impl_->lanes.empty()) {
            // No packets yet; hold the sample until the stream names a device.
            impl_->unbound_energy.push_back(sample);
            return;
        } else {
            throw ConfigError(
                "sensor stream cannot be attributed: the packet stream carries " +
                std::to_string(impl_->lanes.size()) +
                " devices; name the metered device explicitly");
        }
    }

    DeviceLane& lane = impl_->ensure_lane(device);
    if (!lane.energy.has_value()) {
        impl_->bind_energy(lane);
    }
    for (EnergySlot& closed : lane.energy->accumulate(sample)) {
        impl_->record_energy_slot(lane, std::move(closed));
    }
    lane.energy_clock = std::max(lane.energy_clock, sample.timestamp);
    impl_->drain(lane, false);
}

PipelineResult Pipeline::finish() {
    if (impl_->finished) {
        throw MalformedStreamError("pipeline already finished");
    }
    impl_->finished = true;

    for (auto& [device, lane] : impl_->lanes) {
        if (auto slot = lane.slots.flush()) {
            lane.pending_slots.push_back(std::move(*slot));
        }
        if (lane.energy.has_value()) {
            if (auto energy = lane.energy->flush()) {
                impl_->record_energy_slot(lane, std::move(*energy));
            }
        }
        impl_->drain(lane, true);
        impl_->finalize_window(lane);
    }
    return std::move(impl_->result);
}

PipelineResult run_pipeline_from_files(const PipelineConfig& config,
                                       const BaselineProfile& profile,
                                       const SourceConfig& source,
                                       const std::optional<std::string>& sensor_path,
                                       Store* store,
                                       AlertSinks sinks) {
    Pipeline pipeline(config, profile, store, sinks);

    std::unique_ptr<EventStream> events = open_source(source);
    std::optional<SensorReader> sensor;
    std::optional<EnergySample> next_sample;
    if (sensor_path.has_value()) {
        sensor.emplace(*sensor_path);
        next_sample = sensor->next();
    }
    std::optional<PacketEvent> next_event = events->next();

    // Merge the two streams in timestamp order; on a tie the sensor sample
    // goes first so the energy slot at a shared boundary closes before the
    // packet slot that needs it.
    while (next_event || next_sample) {
        const bool take_sample =
            next_sample.has_value() &&
            (!next_event || next_sample->timestamp <= next_event->timestamp);
        if (take_sample) {
            pipeline.feed_energy(*next_sample);
            next_sample = sensor->next();
        } else {
            pipeline.feed_packet(*next_event);
            next_event = events->next();
        }
    }
    return pipeline.finish();
}

LearnSummary learn_from_files(const SourceConfig& source,
                              const std::optional<std::string>& sensor_path,
                              double slot_length,
                              double sample_length,
                              DeviceStatus status,
                              const LearnOptions& options) {
    std::unique_ptr<EventStream> events = open_source(source);

    std::optional<SlotAccumulator> accumulator;
    std::vector<SlotMetrics> slots;
    LearnSummary summary;

    while (auto event = events->next()) {
        summary.packet_count += 1;
        if (!accumulator) {
            accumulator.emplace(event->device_id, slot_length, sample_length);
        } else if (accumulator->device_id() != event->device_id) {
            throw ConfigError("learning expects a single-device capture; saw " +
                              accumulator->device_id() + " and " +
                              event->device_id +
                              "; filter the replay to one device");
        }
        for (SlotMetrics& closed : accumulator->accumulate(*event)) {
            slots.push_back(std::move(closed));
        }
    }
    if (accumulator) {
        if (auto last = accumulator->flush()) {
            slots.push_back(std::move(*last));
        }
    }

    std::vector<EnergySlot> energy_slots;
    if (sensor_path.has_value()) {
        const std::string device =
            accumulator ? accumulator->device_id() : std::string("sensor");
        EnergyAccumulator energy(device, slot_length);
        SensorReader reader(*sensor_path);
        while (auto sample = reader.next()) {
            for (EnergySlot& closed : energy.accumulate(*sample)) {
                energy_slots.push_back(std::move(closed));
            }
        }
        if (auto last = energy.flush()) {
            energy_slots.push_back(std::move(*last));
        }
    }

    summary.slot_count = slots.size();
    summary.energy_slot_count = energy_slots.size();
    summary.profile = learn_baseline(slots, status, options, energy_slots);
    return summary;
}

}  // namespace wattsentry
