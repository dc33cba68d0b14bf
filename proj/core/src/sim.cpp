#include "wattsentry/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "wattsentry/errors.hpp"

namespace wattsentry {

std::string_view to_string(Regime r) {
    return r == Regime::Attack ? "ATTACK" : "NORMAL";
}

Regime regime_from_string(std::string_view token) {
    if (token == "NORMAL") return Regime::Normal;
    if (token == "ATTACK") return Regime::Attack;
    throw ConfigError("unknown regime token: " + std::string(token));
}

CountBand normal_band(Protocol p) {
    switch (p) {
        case Protocol::Tcp: return kTcpNormalBand;
        case Protocol::Udp: return kUdpNormalBand;
        case Protocol::MqttSub: return kMqttNormalBand;
        case Protocol::Other: return kOtherNormalBand;
        case Protocol::MqttPub: break;
    }
    throw ConfigError("no traffic band for protocol " +
                      std::string(to_string(p)));
}

CountBand attack_band(Protocol p) {
    switch (p) {
        case Protocol::Tcp: return kTcpAttackBand;
        case Protocol::Udp: return kUdpAttackBand;
        case Protocol::MqttSub: return kMqttAttackBand;
        case Protocol::MqttPub:
        case Protocol::Other:
            break;
    }
    throw ConfigError("protocol " + std::string(to_string(p)) +
                      " has no attack traffic band");
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) {
        throw ConfigError("uniform_int range inverted");
    }
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) {
        return next();  // full 64-bit range
    }
    const auto m = static_cast<unsigned __int128>(next()) * span;
    return lo + static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::uint64_t z = base ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

bool attack_active(const ProtocolPlan& plan, double slot_start) {
    return plan.regime == Regime::Attack &&
           slot_start >= plan.attack_onset - 1e-9;
}

std::size_t full_slots(const ScenarioConfig& config) {
    return static_cast<std::size_t>(config.duration / config.slot_length + 1e-9);
}

}  // namespace

void ScenarioConfig::validate() const {
    if (device_id.empty()) throw ConfigError("scenario needs a device id");
    if (!(slot_length > 0.0)) throw ConfigError("slot length must be positive");
    if (!(sample_length > 0.0) || sample_length > slot_length) {
        throw ConfigError("sample length must be positive and at most one slot");
    }
    if (duration + 1e-9 < slot_length) {
        throw ConfigError("scenario duration is shorter than one slot");
    }
    if (!(time_compression > 0.0)) {
        throw ConfigError("time compression must be positive");
    }
    if (energy.idle_watts < 0.0 || energy.per_packet_joules < 0.0 ||
        energy.noise_amplitude < 0.0 || !(energy.sensor_voltage > 0.0)) {
        throw ConfigError("energy model parameters out of range");
    }
    if (plan.empty()) throw ConfigError("scenario plan is empty");

    double total = 0.0;
    for (const auto& [protocol, entry] : plan) {
        if (entry.fraction < 0.0) throw ConfigError("plan fraction is negative");
        if (entry.attack_onset < 0.0) throw ConfigError("attack onset is negative");
        normal_band(protocol);  // rejects MqttPub outright
        if (entry.regime == Regime::Attack) {
            attack_band(protocol);  // rejects protocols without an attack band
        }
        total += entry.fraction;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("plan fractions must sum to 1, got " +
                          format_number(total));
    }
}

ScenarioConfig single_protocol_scenario(Protocol protocol,
                                        Regime regime,
                                        std::uint64_t seed,
                                        double duration,
                                        double attack_onset) {
    ScenarioConfig config;
    config.seed = seed;
    config.duration = duration;
    config.plan[protocol] = ProtocolPlan{1.0, regime, attack_onset};
    config.validate();
    return config;
}

ScenarioConfig mixed_scenario(Regime regime,
                              std::uint64_t seed,
                              double duration,
                              double attack_onset) {
    ScenarioConfig config;
    config.seed = seed;
    config.duration = duration;
    if (regime == Regime::Normal) {
        // Typical cross-protocol traffic shares for a busy hub.
        config.plan[Protocol::Tcp] = ProtocolPlan{0.45, Regime::Normal, 0.0};
        config.plan[Protocol::Udp] = ProtocolPlan{0.30, Regime::Normal, 0.0};
        config.plan[Protocol::MqttSub] = ProtocolPlan{0.20, Regime::Normal, 0.0};
        config.plan[Protocol::Other] = ProtocolPlan{0.05, Regime::Normal, 0.0};
    } else {
        // Flood shares shift toward TCP and MQTT when all lanes are hit.
        config.plan[Protocol::Tcp] = ProtocolPlan{0.40, Regime::Attack, attack_onset};
        config.plan[Protocol::MqttSub] =
            ProtocolPlan{0.40, Regime::Attack, attack_onset};
        config.plan[Protocol::Udp] = ProtocolPlan{0.20, Regime::Attack, attack_onset};
    }
    config.validate();
    return config;
}

nlohmann::json scenario_to_json(const ScenarioConfig& config) {
    nlohmann::json plan = nlohmann::json::object();
    for (const auto& [protocol, entry] : config.plan) {
        plan[std::string(to_string(protocol))] = {
            {"fraction", entry.fraction},
            {"regime", to_string(entry.regime)},
            {"attack_onset", entry.attack_onset},
        };
    }
    return nlohmann::json{
        {"format", "wattsentry-scenario/1"},
        {"seed", config.seed},
        {"duration", config.duration},
        {"slot_length", config.slot_length},
        {"sample_length", config.sample_length},
        {"device_id", config.device_id},
        {"time_compression", config.time_compression},
        {"energy",
         {{"idle_watts", config.energy.idle_watts},
          {"per_packet_joules", config.energy.per_packet_joules},
          {"noise_amplitude", config.energy.noise_amplitude},
          {"sensor_voltage", config.energy.sensor_voltage}}},
        {"plan", std::move(plan)},
    };
}

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format").get<std::string>() != "wattsentry-scenario/1") {
            throw ConfigError("unsupported scenario format");
        }
        ScenarioConfig config;
        config.seed = doc.at("seed").get<std::uint64_t>();
        config.duration = doc.at("duration").get<double>();
        config.slot_length = doc.at("slot_length").get<double>();
        config.sample_length = doc.at("sample_length").get<double>();
        config.device_id = doc.at("device_id").get<std::string>();
        config.time_compression = doc.value("time_compression", 1.0);
        const auto& energy = doc.at("energy");
        config.energy.idle_watts = energy.at("idle_watts").get<double>();
        config.energy.per_packet_joules = energy.at("per_packet_joules").get<double>();
        config.energy.noise_amplitude = energy.value("noise_amplitude", 0.0);
        config.energy.sensor_voltage = energy.value("sensor_voltage", 5.0);
        for (const auto& [key, value] : doc.at("plan").items()) {
            ProtocolPlan entry;
            entry.fraction = value.at("fraction").get<double>();
            entry.regime = regime_from_string(value.at("regime").get<std::string>());
            entry.attack_onset = value.value("attack_onset", 0.0);
            config.plan[protocol_from_string(key)] = entry;
        }
        config.validate();
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario", 0,
                         std::string("scenario JSON missing fields: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0,
                         std::string("invalid scenario JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

namespace {

// Draw order inside one (protocol, slot) pair is pinned: the slot count,
// then per received packet its jitter and size, then the follow-on
// diagnostics records. Changing this order changes every artifact.
void append_slot_events(std::vector<PacketEvent>& out,
                        Rng& rng,
                        const ScenarioConfig& config,
                        Protocol protocol,
                        const ProtocolPlan& plan,
                        std::size_t slot) {
    const double slot_start = static_cast<double>(slot) * config.slot_length;
    const CountBand band = attack_active(plan, slot_start)
                               ? attack_band(protocol)
                               : normal_band(protocol);
    const std::uint64_t draw = rng.uniform_int(band.lo, band.hi);
    const auto count = static_cast<std::uint64_t>(
        std::llround(plan.fraction * static_cast<double>(draw)));
    if (count == 0) return;

    const double step = config.slot_length / static_cast<double>(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PacketEvent event;
        event.timestamp =
            slot_start + (static_cast<double>(i) + rng.uniform01()) * step;
        event.device_id = config.device_id;
        event.protocol = protocol;
        event.kind = PacketKind::Received;
        event.size = static_cast<std::uint32_t>(64 + rng.uniform_int(0, 1436));
        out.push_back(std::move(event));
    }

    auto extras = [&](std::uint64_t n, Protocol p, PacketKind kind) {
        for (std::uint64_t i = 0; i < n; ++i) {
            PacketEvent event;
            event.timestamp = slot_start + rng.uniform01() * config.slot_length;
            event.device_id = config.device_id;
            event.protocol = p;
            event.kind = kind;
            event.size = static_cast<std::uint32_t>(64 + rng.uniform_int(0, 1436));
            out.push_back(std::move(event));
        }
    };
    if (protocol == Protocol::Tcp) {
        // A realistic capture carries acks and the odd retransmission; the
        // meters must ignore both.
        extras(count / 5, Protocol::Tcp, PacketKind::Acknowledged);
        extras(count / 50, Protocol::Tcp, PacketKind::Retransmission);
    } else if (protocol == Protocol::MqttSub) {
        extras(count / 10, Protocol::MqttPub, PacketKind::Received);
    }
}

}  // namespace

std::vector<PacketEvent> generate_traffic(const ScenarioConfig& config) {
    config.validate();
    const std::size_t slots = full_slots(config);
    std::vector<PacketEvent> events;

    for (const auto& [protocol, plan] : config.plan) {
        if (plan.fraction <= 0.0) continue;
        Rng rng(derive_seed(config.seed,
                            "traffic/" + std::string(to_string(protocol))));
        for (std::size_t slot = 0; slot < slots; ++slot) {
            append_slot_events(events, rng, config, protocol, plan, slot);
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const PacketEvent& a, const PacketEvent& b) {
                         return a.timestamp < b.timestamp;
                     });
    return events;
}

std::vector<PacketEvent> gen_normal_traffic(Protocol protocol,
                                            std::uint64_t seed,
                                            double duration,
                                            const std::string& device_id) {
    ScenarioConfig config =
        single_protocol_scenario(protocol, Regime::Normal, seed, duration);
    config.device_id = device_id;
    return generate_traffic(config);
}

std::vector<PacketEvent> gen_attack_traffic(Protocol protocol,
                                            std::uint64_t seed,
                                            double duration,
                                            const std::string& device_id) {
    ScenarioConfig config =
        single_protocol_scenario(protocol, Regime::Attack, seed, duration);
    config.device_id = device_id;
    return generate_traffic(config);
}

std::vector<EnergySample> generate_energy(std::span<const PacketEvent> events,
                                          const EnergyModel& model,
                                          std::uint64_t seed,
                                          double duration) {
    if (!(model.sensor_voltage > 0.0)) {
        throw ConfigError("sensor voltage must be positive");
    }
    const auto seconds = static_cast<std::size_t>(std::ceil(duration - 1e-9));
    std::vector<std::uint64_t> per_second(seconds, 0);
    for (const PacketEvent& event : events) {
        if (!detection_counted(event)) continue;
        const auto s = static_cast<std::size_t>(event.timestamp);
        if (s < seconds) {
            ++per_second[s];
        }
    }

    Rng rng(derive_seed(seed, "energy"));
    std::vector<EnergySample> samples;
    samples.reserve(seconds);
    for (std::size_t s = 0; s < seconds; ++s) {
        double power = model.idle_watts +
                       model.per_packet_joules * static_cast<double>(per_second[s]);
        if (model.noise_amplitude > 0.0) {
            power += rng.uniform(-model.noise_amplitude, model.noise_amplitude);
        }
        power = std::max(power, 0.0);
        EnergySample sample;
        sample.timestamp = static_cast<double>(s);
        sample.voltage = model.sensor_voltage;
        sample.power = power;
        sample.current = power / model.sensor_voltage;
        samples.push_back(sample);
    }
    return samples;
}

std::vector<Label> slot_labels(const ScenarioConfig& config) {
    const std::size_t slots = full_slots(config);
    std::vector<Label> labels(slots, Label::Normal);
    for (std::size_t slot = 0; slot < slots; ++slot) {
        const double slot_start = static_cast<double>(slot) * config.slot_length;
        for (const auto& [protocol, plan] : config.plan) {
            if (plan.fraction > 0.0 && attack_active(plan, slot_start)) {
                labels[slot] = Label::Abnormal;
                break;
            }
        }
    }
    return labels;
}

ScenarioArtifacts run_scenario(const ScenarioConfig& config,
                               const std::filesystem::path& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);

    const std::vector<PacketEvent> events = generate_traffic(config);
    const std::vector<EnergySample> samples =
        generate_energy(events, config.energy, config.seed, config.duration);
    const std::vector<Label> labels = slot_labels(config);

    ScenarioArtifacts artifacts;
    artifacts.replay_path = out_dir / "packets.csv";
    artifacts.sensor_path = out_dir / "sensor.csv";
    artifacts.labels_path = out_dir / "labels.csv";
    artifacts.scenario_path = out_dir / "scenario.json";
    artifacts.labels = labels;
    artifacts.packet_count = events.size();
    artifacts.sample_count = samples.size();

    auto open_out = [](const std::filesystem::path& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw ConfigError("cannot write " + path.string());
        }
        return out;
    };

    {
        std::ofstream out = open_out(artifacts.replay_path);
        out << "# packet replay: timestamp,device_id,protocol,kind,size\n";
        for (const PacketEvent& event : events) {
            out << format_fixed(event.timestamp) << ',' << event.device_id
                << ',' << to_string(event.protocol) << ','
                << to_string(event.kind) << ',' << event.size << '\n';
        }
        if (!out) throw ConfigError("failed writing " + artifacts.replay_path.string());
    }
    {
        std::ofstream out = open_out(artifacts.sensor_path);
        out << "# sensor capture: timestamp,voltage,current,power\n";
        for (const EnergySample& sample : samples) {
            out << format_fixed(sample.timestamp) << ','
                << format_fixed(sample.voltage) << ','
                << format_fixed(sample.current) << ','
                << format_fixed(sample.power) << '\n';
        }
        if (!out) throw ConfigError("failed writing " + artifacts.sensor_path.string());
    }
    {
        std::ofstream out = open_out(artifacts.labels_path);
        out << "# slot labels: slot_index,regime\n";
        for (std::size_t slot = 0; slot < labels.size(); ++slot) {
            out << slot << ',' << to_string(labels[slot]) << '\n';
        }
        if (!out) throw ConfigError("failed writing " + artifacts.labels_path.string());
    }
    {
        std::ofstream out = open_out(artifacts.scenario_path);
        out << scenario_to_json(config).dump(2) << '\n';
        if (!out) throw ConfigError("failed writing " + artifacts.scenario_path.string());
    }
    return artifacts;
}

}  // namespace wattsentry
