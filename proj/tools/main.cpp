// wattsentry command line: simulate traffic, learn baselines, replay or
// monitor captures through the detector, and report on stored runs.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wattsentry/alerts.hpp"
#include "wattsentry/baseline.hpp"
#include "wattsentry/errors.hpp"
#include "wattsentry/ingest.hpp"
#include "wattsentry/pipeline.hpp"
#include "wattsentry/report.hpp"
#include "wattsentry/sim.hpp"
#include "wattsentry/store.hpp"

namespace ws = wattsentry;

namespace {

std::vector<ws::Scope> parse_scopes(const std::string& list) {
    std::vector<ws::Scope> scopes;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= list.size(); ++i) {
        if (i == list.size() || list[i] == ',') {
            const std::string token = list.substr(start, i - start);
            start = i + 1;
            if (token.empty()) continue;
            const ws::Scope scope = ws::scope_from_string(token);
            bool duplicate = false;
            for (ws::Scope s : scopes) duplicate = duplicate || s == scope;
            if (!duplicate) scopes.push_back(scope);
        }
    }
    if (scopes.empty()) {
        throw ws::ConfigError("scope list is empty");
    }
    return scopes;
}

ws::ScenarioConfig preset_scenario(const std::string& name,
                                   std::uint64_t seed,
                                   double duration,
                                   double onset) {
    using ws::Protocol;
    using ws::Regime;
    if (name == "tcp-normal")
        return ws::single_protocol_scenario(Protocol::Tcp, Regime::Normal, seed, duration);
    if (name == "tcp-attack")
        return ws::single_protocol_scenario(Protocol::Tcp, Regime::Attack, seed, duration, onset);
    if (name == "udp-normal")
        return ws::single_protocol_scenario(Protocol::Udp, Regime::Normal, seed, duration);
    if (name == "udp-attack")
        return ws::single_protocol_scenario(Protocol::Udp, Regime::Attack, seed, duration, onset);
    if (name == "mqtt-normal")
        return ws::single_protocol_scenario(Protocol::MqttSub, Regime::Normal, seed, duration);
    if (name == "mqtt-attack")
        return ws::single_protocol_scenario(Protocol::MqttSub, Regime::Attack, seed, duration, onset);
    if (name == "mixed-normal")
        return ws::mixed_scenario(Regime::Normal, seed, duration);
    if (name == "mixed-attack")
        return ws::mixed_scenario(Regime::Attack, seed, duration, onset);
    throw ws::ConfigError(
        "unknown preset '" + name +
        "' (expected one of tcp-normal, tcp-attack, udp-normal, udp-attack, "
        "mqtt-normal, mqtt-attack, mixed-normal, mixed-attack)");
}

void print_run_summary(const ws::PipelineResult& result) {
    std::cout << "processed " << result.packet_count << " packets, "
              << result.sample_count << " sensor samples, " << result.slot_count
              << " slots, " << result.energy_slot_count << " energy slots\n";
    std::cout << "events:";
    bool any = false;
    for (ws::EventKind kind :
         {ws::EventKind::CooldownStarted, ws::EventKind::AbnormalRegistered,
          ws::EventKind::AttackConfirmed, ws::EventKind::TrafficOnlyAnomaly,
          ws::EventKind::WindowVerdict}) {
        const std::size_t n = result.count(kind);
        if (n == 0) continue;
        std::cout << ' ' << ws::to_string(kind) << '=' << n;
        any = true;
    }
    std::cout << (any ? "\n" : " none\n");

    if (result.attack_confirmed()) {
        std::cout << "verdict: attack confirmed\n";
    } else if (result.traffic_only_anomaly()) {
        std::cout << "verdict: abnormal traffic without energy confirmation\n";
    } else {
        std::cout << "verdict: no anomalies\n";
    }
}

// Flag bundle shared by replay and monitor.
struct DetectionFlags {
    std::string store_path;
    std::string profile_path;
    std::string device;
    std::string scope_list = "tcp,udp,mqtt,aggregate";
    std::string run_id = "run";
    std::string webhook_url;
    std::string status = "active";
    double slot_secs = 180.0;
    double sample_secs = 5.0;
    std::size_t window_slots = 10;
    std::uint32_t counter_limit = 3;
    double cooldown_secs = 0.0;        // 0 means one slot
    double energy_threshold = ws::kDefaultEnergyThreshold;
    bool threshold_overridden = false;
};

void add_detection_flags(CLI::App* cmd, DetectionFlags& flags) {
    cmd->add_option("--store", flags.store_path,
                    "Append-only record store (NDJSON) for this run")
        ->required();
    cmd->add_option("--profile", flags.profile_path,
                    "Baseline profile JSON; built-in defaults when omitted");
    cmd->add_option("--device", flags.device,
                    "Only meter this device; also binds the sensor stream");
    cmd->add_option("--scope", flags.scope_list,
                    "Comma list of detection scopes")->capture_default_str();
    cmd->add_option("--run-id", flags.run_id, "Run identifier stored with records")->capture_default_str();
    cmd->add_option("--webhook", flags.webhook_url,
                    "POST alert events to this http:// endpoint");
    cmd->add_option("--status", flags.status,
                    "Device duty profile for default bands (active|idle)")->capture_default_str();
    cmd->add_option("--slot-secs", flags.slot_secs, "Metering slot length")->capture_default_str();
    cmd->add_option("--sample-secs", flags.sample_secs,
                    "Sample length inside a slot")->capture_default_str();
    cmd->add_option("--window-slots", flags.window_slots,
                    "Slots per detection window")->capture_default_str();
    cmd->add_option("--counter-limit", flags.counter_limit,
                    "Exceedances tolerated before registering abnormal")->capture_default_str();
    cmd->add_option("--cooldown-secs", flags.cooldown_secs,
                    "Listening pause after an exceedance (default: one slot)");
    cmd->add_option("--energy-threshold", flags.energy_threshold,
                    "Joules per sample above which an attack is confirmed")->capture_default_str();
}

ws::BaselineProfile resolve_profile(const DetectionFlags& flags, CLI::App* cmd) {
    ws::BaselineProfile profile;
    if (!flags.profile_path.empty()) {
        profile = ws::load_profile(flags.profile_path);
    } else {
        const std::string device =
            flags.device.empty() ? "device" : flags.device;
        profile = ws::default_profile(
            device, ws::device_status_from_string(flags.status));
        std::cerr << "wattsentry: no profile given; using built-in "
                  << flags.status << " bands\n";
    }
    if (cmd->count("--energy-threshold") > 0) {
        profile.energy_threshold = flags.energy_threshold;
    }
    return profile;
}

ws::PipelineConfig build_pipeline_config(const DetectionFlags& flags,
                                         CLI::App* cmd) {
    ws::PipelineConfig config;
    config.slot_length = flags.slot_secs;
    config.sample_length = flags.sample_secs;
    config.detector.window_slots = flags.window_slots;
    config.detector.counter_limit = flags.counter_limit;
    if (cmd->count("--cooldown-secs") > 0) {
        if (!(flags.cooldown_secs > 0.0)) {
            throw ws::ConfigError("cooldown must be positive");
        }
        config.detector.cooldown_length = flags.cooldown_secs;
    }
    config.scopes = parse_scopes(flags.scope_list);
    config.run_id = flags.run_id;
    config.energy_device = flags.device;
    return config;
}

int run_detection(const DetectionFlags& flags,
                  CLI::App* cmd,
                  const ws::SourceConfig& source,
                  const std::optional<std::string>& sensor_path) {
    const ws::BaselineProfile profile = resolve_profile(flags, cmd);
    const ws::PipelineConfig config = build_pipeline_config(flags, cmd);

    ws::Store store = ws::Store::open(flags.store_path);
    std::optional<ws::WebhookSink> webhook;
    if (!flags.webhook_url.empty()) {
        webhook.emplace(flags.webhook_url);
    }
    ws::AlertSinks sinks{&std::cout, webhook ? &*webhook : nullptr};

    const ws::PipelineResult result = ws::run_pipeline_from_files(
        config, profile, source, sensor_path, &store, sinks);
    print_run_summary(result);
    if (webhook && webhook->failed() > 0) {
        std::cerr << "wattsentry: " << webhook->failed()
                  << " webhook deliveries failed\n";
    }
    return result.exit_code();
}

struct SimulateOptions {
    std::string out_dir;
    std::string preset = "mixed-normal";
    std::string scenario_path;
    std::string device;
    std::uint64_t seed = 1;
    double duration = 1800.0;
    double onset = 0.0;
    double slot_secs = 180.0;
    double sample_secs = 5.0;
    double noise = 0.0;
    double time_compression = 1.0;
};

int cmd_simulate(const SimulateOptions& options, CLI::App* cmd) {
    ws::ScenarioConfig config;
    if (!options.scenario_path.empty()) {
        config = ws::load_scenario(options.scenario_path);
        if (cmd->count("--seed") > 0) config.seed = options.seed;
        if (cmd->count("--duration") > 0) config.duration = options.duration;
        if (cmd->count("--device") > 0) config.device_id = options.device;
        if (cmd->count("--slot-secs") > 0) config.slot_length = options.slot_secs;
        if (cmd->count("--sample-secs") > 0) config.sample_length = options.sample_secs;
        if (cmd->count("--noise") > 0) config.energy.noise_amplitude = options.noise;
        if (cmd->count("--time-compression") > 0) {
            config.time_compression = options.time_compression;
        }
        if (cmd->count("--onset") > 0) {
            for (auto& [protocol, plan] : config.plan) {
                plan.attack_onset = options.onset;
            }
        }
        config.validate();
    } else {
        config = preset_scenario(options.preset, options.seed, options.duration,
                                 options.onset);
        if (cmd->count("--device") > 0) config.device_id = options.device;
        if (cmd->count("--slot-secs") > 0) config.slot_length = options.slot_secs;
        if (cmd->count("--sample-secs") > 0) config.sample_length = options.sample_secs;
        if (cmd->count("--noise") > 0) config.energy.noise_amplitude = options.noise;
        if (cmd->count("--time-compression") > 0) {
            config.time_compression = options.time_compression;
        }
        config.validate();
    }

    const ws::ScenarioArtifacts artifacts =
        ws::run_scenario(config, options.out_dir);
    std::size_t abnormal = 0;
    for (ws::Label label : artifacts.labels) {
        if (label == ws::Label::Abnormal) ++abnormal;
    }
    std::cout << "wrote " << artifacts.replay_path.string() << " ("
              << artifacts.packet_count << " events)\n";
    std::cout << "wrote " << artifacts.sensor_path.string() << " ("
              << artifacts.sample_count << " samples)\n";
    std::cout << "wrote " << artifacts.labels_path.string() << " ("
              << artifacts.labels.size() << " slots, " << abnormal
              << " abnormal)\n";
    std::cout << "wrote " << artifacts.scenario_path.string() << "\n";
    return ws::kExitClean;
}

struct LearnOptionsCli {
    std::string replay_path;
    std::string sensor_path;
    std::string profile_path;
    std::string device;
    std::string status = "active";
    std::string store_path;
    std::string run_id = "learn";
    double slot_secs = 180.0;
    double sample_secs = 5.0;
    double margin = 0.10;
    double energy_threshold = ws::kDefaultEnergyThreshold;
};

int cmd_learn(const LearnOptionsCli& options) {
    ws::SourceConfig source;
    source.kind = ws::SourceKind::Replay;
    source.path = options.replay_path;
    if (!options.device.empty()) {
        source.device_filter = options.device;
    }
    std::optional<std::string> sensor;
    if (!options.sensor_path.empty()) {
        sensor = options.sensor_path;
    }

    ws::LearnOptions learn_options;
    learn_options.margin = options.margin;
    learn_options.energy_threshold = options.energy_threshold;

    const ws::LearnSummary summary = ws::learn_from_files(
        source, sensor, options.slot_secs, options.sample_secs,
        ws::device_status_from_string(options.status), learn_options);

    ws::save_profile(summary.profile, options.profile_path);

    std::cout << "learned profile for " << summary.profile.device_id << " ("
              << ws::to_string(summary.profile.status) << ", "
              << summary.slot_count << " slots, " << summary.packet_count
              << " packets)\n";
    for (ws::Scope scope : ws::kAllScopes) {
        if (const ws::RateBand* band = summary.profile.band(scope)) {
            std::cout << "  " << ws::to_string(scope) << ": band ["
                      << band->min_pkt << ", " << band->max_pkt
                      << "], normal upper " << band->normal_upper << "\n";
        } else {
            std::cout << "  " << ws::to_string(scope) << ": no traffic seen\n";
        }
    }
    std::cout << "  energy: threshold "
              << ws::format_number(summary.profile.energy_threshold)
              << " J/sample, extrema ["
              << ws::format_number(summary.profile.energy_min) << ", "
              << ws::format_number(summary.profile.energy_max) << "]\n";
    std::cout << "wrote " << options.profile_path << "\n";

    if (!options.store_path.empty()) {
        ws::Store store = ws::Store::open(options.store_path);
        ws::Record record;
        record.kind = ws::RecordKind::Baseline;
        record.device_id = summary.profile.device_id;
        record.timestamp = summary.profile.learned_at;
        record.run_id = options.run_id;
        record.payload = ws::profile_to_json(summary.profile);
        store.append(record);
    }
    return ws::kExitClean;
}

struct MonitorOptions {
    std::string source = "live";
    std::string scenario_path;
    std::string input_path = "-";
    std::string sensor_path;
    std::uint64_t seed = 0;
    double time_compression = 0.0;  // 0: take the scenario's value
};

int cmd_monitor(const MonitorOptions& options,
                const DetectionFlags& flags,
                CLI::App* cmd) {
    if (options.source == "live") {
        ws::SourceConfig source;
        source.kind = ws::SourceKind::Live;
        source.path = options.input_path;
        if (!flags.device.empty()) {
            source.device_filter = flags.device;
        }
        std::optional<std::string> sensor;
        if (!options.sensor_path.empty()) sensor = options.sensor_path;
        return run_detection(flags, cmd, source, sensor);
    }
    if (options.source != "sim") {
        throw ws::ConfigError("unknown source '" + options.source +
                              "' (expected sim or live)");
    }
    if (options.scenario_path.empty()) {
        throw ws::ConfigError("monitoring a simulation needs --scenario");
    }

    ws::ScenarioConfig scenario = ws::load_scenario(options.scenario_path);
    if (cmd->count("--seed") > 0) scenario.seed = options.seed;
    const double compression = options.time_compression > 0.0
                                   ? options.time_compression
                                   : scenario.time_compression;

    const ws::BaselineProfile profile = resolve_profile(flags, cmd);
    const ws::PipelineConfig config = build_pipeline_config(flags, cmd);

    ws::Store store = ws::Store::open(flags.store_path);
    std::optional<ws::WebhookSink> webhook;
    if (!flags.webhook_url.empty()) webhook.emplace(flags.webhook_url);
    ws::AlertSinks sinks{&std::cout, webhook ? &*webhook : nullptr};

    const std::vector<ws::PacketEvent> events = ws::generate_traffic(scenario);
    const std::vector<ws::EnergySample> samples = ws::generate_energy(
        events, scenario.energy, scenario.seed, scenario.duration);

    ws::Pipeline pipeline(config, profile, &store, sinks);
    std::size_t ei = 0, si = 0;
    double clock = 0.0;
    while (ei < events.size() || si < samples.size()) {
        const bool take_sample =
            si < samples.size() &&
            (ei >= events.size() || samples[si].timestamp <= events[ei].timestamp);
        const double t = take_sample ? samples[si].timestamp : events[ei].timestamp;
        const double dt = (t - clock) / compression;
        if (dt > 1e-4) {
            std::this_thread::sleep_for(std::chrono::duration<double>(dt));
        }
        clock = t;
        if (take_sample) {
            pipeline.feed_energy(samples[si++]);
        } else {
            pipeline.feed_packet(events[ei++]);
        }
    }
    const ws::PipelineResult result = pipeline.finish();
    print_run_summary(result);
    return result.exit_code();
}

struct ReportOptionsCli {
    std::string store_path;
    std::string out_dir;
    std::string run_id;
    std::string device;
};

int cmd_report(const ReportOptionsCli& options) {
    if (!std::filesystem::exists(options.store_path)) {
        throw ws::ConfigError("store not found: " + options.store_path);
    }
    ws::Store store = ws::Store::open(options.store_path);
    ws::ReportOptions report_options;
    if (!options.run_id.empty()) report_options.run_id = options.run_id;
    if (!options.device.empty()) report_options.device_id = options.device;

    const ws::ReportResult result =
        ws::write_report(store, options.out_dir, report_options);
    std::cout << "report over " << result.records_considered << " records\n";
    for (const auto& path : result.series_paths) {
        std::cout << "wrote " << path.string() << "\n";
    }
    std::cout << "wrote " << result.summary_path.string() << "\n";
    return ws::kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "wattsentry: detects energy-draining traffic floods against "
        "smart-home devices by metering per-protocol reception rates and "
        "cross-checking abnormal slots against plug-level energy footprints"};
    app.set_version_flag("--version", "wattsentry 0.1.0");
    app.require_subcommand(1);

    SimulateOptions simulate_options;
    auto* simulate = app.add_subcommand(
        "simulate", "Generate a deterministic traffic and sensor capture");
    simulate->add_option("--out", simulate_options.out_dir, "Output directory")
        ->required();
    simulate->add_option("--preset", simulate_options.preset,
                         "Scenario preset (see --help-presets in README)")->capture_default_str();
    simulate->add_option("--scenario", simulate_options.scenario_path,
                         "Scenario JSON instead of a preset");
    simulate->add_option("--seed", simulate_options.seed, "Generator seed")->capture_default_str();
    simulate->add_option("--duration", simulate_options.duration,
                         "Capture length in seconds")->capture_default_str();
    simulate->add_option("--onset", simulate_options.onset,
                         "Attack onset in seconds for attack presets")->capture_default_str();
    simulate->add_option("--device", simulate_options.device, "Device id");
    simulate->add_option("--slot-secs", simulate_options.slot_secs,
                         "Slot length")->capture_default_str();
    simulate->add_option("--sample-secs", simulate_options.sample_secs,
                         "Sample length")->capture_default_str();
    simulate->add_option("--noise", simulate_options.noise,
                         "Sensor noise amplitude in watts")->capture_default_str();
    simulate->add_option("--time-compression", simulate_options.time_compression,
                         "Playback pacing hint stored in the scenario")->capture_default_str();

    LearnOptionsCli learn_options;
    auto* learn = app.add_subcommand(
        "learn", "Learn a baseline profile from a clean capture");
    learn->add_option("--replay", learn_options.replay_path, "Packet capture file")
        ->required();
    learn->add_option("--sensor", learn_options.sensor_path, "Sensor capture file");
    learn->add_option("--profile", learn_options.profile_path,
                      "Where to write the learned profile")
        ->required();
    learn->add_option("--device", learn_options.device, "Meter only this device");
    learn->add_option("--status", learn_options.status,
                      "Device duty profile (active|idle)")->capture_default_str();
    learn->add_option("--slot-secs", learn_options.slot_secs, "Slot length")->capture_default_str();
    learn->add_option("--sample-secs", learn_options.sample_secs, "Sample length")->capture_default_str();
    learn->add_option("--margin", learn_options.margin,
                      "Headroom above the observed maximum")->capture_default_str();
    learn->add_option("--energy-threshold", learn_options.energy_threshold,
                      "Confirmation threshold stored in the profile")->capture_default_str();
    learn->add_option("--store", learn_options.store_path,
                      "Also append the profile to this record store");
    learn->add_option("--run-id", learn_options.run_id,
                      "Run identifier for the stored profile record")->capture_default_str();

    DetectionFlags replay_flags;
    std::string replay_path;
    std::string replay_sensor;
    auto* replay = app.add_subcommand(
        "replay", "Run detection over a recorded capture");
    replay->add_option("--replay", replay_path, "Packet capture file")->required();
    replay->add_option("--sensor", replay_sensor, "Sensor capture file");
    add_detection_flags(replay, replay_flags);

    MonitorOptions monitor_options;
    DetectionFlags monitor_flags;
    auto* monitor = app.add_subcommand(
        "monitor", "Run detection over a live feed or a paced simulation");
    monitor->add_option("--source", monitor_options.source,
                        "Event source: live or sim")->capture_default_str();
    monitor->add_option("--scenario", monitor_options.scenario_path,
                        "Scenario JSON for --source sim");
    monitor->add_option("--input", monitor_options.input_path,
                        "Live packet feed path or - for stdin")->capture_default_str();
    monitor->add_option("--sensor", monitor_options.sensor_path,
                        "Sensor feed path");
    monitor->add_option("--seed", monitor_options.seed,
                        "Override the scenario seed");
    monitor->add_option("--time-compression", monitor_options.time_compression,
                        "Speed factor for simulated playback");
    add_detection_flags(monitor, monitor_flags);

    ReportOptionsCli report_options;
    auto* report = app.add_subcommand(
        "report", "Summarize a record store into CSV series");
    report->add_option("--store", report_options.store_path, "Record store")
        ->required();
    report->add_option("--out", report_options.out_dir, "Report directory")
        ->required();
    report->add_option("--run-id", report_options.run_id, "Only this run");
    report->add_option("--device", report_options.device, "Only this device");

    try {
        app.parse(argc, argv);

        if (simulate->parsed()) return cmd_simulate(simulate_options, simulate);
        if (learn->parsed()) return cmd_learn(learn_options);
        if (replay->parsed()) {
            ws::SourceConfig source;
            source.kind = ws::SourceKind::Replay;
            source.path = replay_path;
            if (!replay_flags.device.empty()) {
                source.device_filter = replay_flags.device;
            }
            std::optional<std::string> sensor;
            if (!replay_sensor.empty()) sensor = replay_sensor;
            return run_detection(replay_flags, replay, source, sensor);
        }
        if (monitor->parsed()) {
            return cmd_monitor(monitor_options, monitor_flags, monitor);
        }
        if (report->parsed()) return cmd_report(report_options);
        return ws::kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ws::kExitClean : ws::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "wattsentry: error: " << e.what() << "\n";
        return ws::kExitUsage;
    }
}
