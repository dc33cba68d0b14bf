#include "wattsentry/report.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "wattsentry/detector.hpp"
#include "wattsentry/errors.hpp"

namespace wattsentry {

namespace {

struct SeriesRow {
    std::size_t slot_index = 0;
    double slot_start = 0.0;
    std::uint64_t count = 0;
    double normalized = 0.0;
    bool suppressed = false;
    bool have_energy = false;
    double joules = 0.0;
    double mean_sample_joules = 0.0;
    double energy_normalized = 0.0;
    bool data_gap = false;
};

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
            c = '_';
        }
    }
    return out;
}

}  // namespace

ReportResult write_report(const Store& store,
                          const std::filesystem::path& out_dir,
                          const ReportOptions& options) {
    std::filesystem::create_directories(out_dir);

    RecordQuery query;
    query.run_id = options.run_id;
    query.device_id = options.device_id;
    const std::vector<Record> records = store.query(query);

    ReportResult result;
    result.records_considered = records.size();

    // (run, device) -> per-scope slot rows, energy rows, event tallies.
    struct Group {
        std::map<Scope, std::map<std::size_t, SeriesRow>> rows;
        std::map<std::size_t, const Record*> energy;
        std::map<EventKind, std::size_t> event_counts;
        std::size_t slot_records = 0;
    };
    std::map<std::pair<std::string, std::string>, Group> groups;

    for (const Record& record : records) {
        Group& group = groups[{record.run_id, record.device_id}];
        try {
            switch (record.kind) {
                case RecordKind::Slot: {
                    group.slot_records += 1;
                    const auto& p = record.payload;
                    const auto slot_index = p.at("slot_index").get<std::size_t>();
                    std::set<std::string> suppressed;
                    for (const auto& s : p.at("suppressed_scopes")) {
                        suppressed.insert(s.get<std::string>());
                    }
                    for (Scope scope : kAllScopes) {
                        const std::string key(scope == Scope::Aggregate
                                                  ? "aggregate"
                                                  : scope == Scope::Tcp   ? "tcp"
                                                    : scope == Scope::Udp ? "udp"
                                                                          : "mqtt");
                        SeriesRow& row = group.rows[scope][slot_index];
                        row.slot_index = slot_index;
                        row.slot_start = p.at("slot_start").get<double>();
                        row.count = p.at("counts").at(key).get<std::uint64_t>();
                        row.normalized = p.at("normalized").at(key).get<double>();
                        row.suppressed =
                            suppressed.count(std::string(to_string(scope))) > 0;
                    }
                    break;
                }
                case RecordKind::Energy: {
                    const auto slot_index =
                        record.payload.at("slot_index").get<std::size_t>();
                    group.energy[slot_index] = &record;
                    break;
                }
                case RecordKind::Event: {
                    const DetectionEvent event = event_from_json(record.payload);
                    group.event_counts[event.kind] += 1;
                    break;
                }
                case RecordKind::Baseline:
                    break;
            }
        } catch (const nlohmann::json::exception& e) {
            throw StoreError("record payload in " + store.path().string() +
                             " does not match its kind: " + e.what());
        }
    }

    // Merge energy rows into each scope's series.
    for (auto& [key, group] : groups) {
        for (auto& [scope, rows] : group.rows) {
            for (auto& [slot_index, row] : rows) {
                auto it = group.energy.find(slot_index);
                if (it == group.energy.end()) continue;
                const auto& p = it->second->payload;
                row.have_energy = true;
                row.joules = p.at("joules").get<double>();
                row.mean_sample_joules = p.at("mean_sample_joules").get<double>();
                row.energy_normalized = p.at("normalized").get<double>();
                row.data_gap = p.at("data_gap").get<bool>();
            }
        }
    }

    std::ofstream summary(out_dir / "summary.txt");
    if (!summary) {
        throw ConfigError("cannot write report summary under " + out_dir.string());
    }
    result.summary_path = out_dir / "summary.txt";

    if (groups.empty()) {
        summary << "no records matched the report selection\n";
        std::cerr << "wattsentry: report found no matching records\n";
        return result;
    }

    for (const auto& [key, group] : groups) {
        const auto& [run_id, device_id] = key;
        summary << "run " << run_id << " device " << device_id << "\n";
        summary << "  slots: " << group.slot_records << "\n";

        for (Scope scope : kAllScopes) {
            auto rows_it = group.rows.find(scope);
            if (rows_it == group.rows.end()) continue;
            const auto& rows = rows_it->second;

            const std::filesystem::path series_path =
                out_dir / ("series_" + sanitize(run_id) + "_" + sanitize(device_id) +
                           "_" + std::string(to_string(scope)) + ".csv");
            std::ofstream series(series_path, std::ios::binary);
            if (!series) {
                throw ConfigError("cannot write " + series_path.string());
            }
            series << "slot_index,slot_start,count,normalized,suppressed,"
                      "joules,mean_sample_joules,energy_normalized,data_gap\n";

            std::uint64_t lo = 0, hi = 0;
            bool first = true;
            std::size_t with_energy = 0;
            for (const auto& [slot_index, row] : rows) {
                series << row.slot_index << ',' << format_fixed(row.slot_start)
                       << ',' << row.count << ',' << format_fixed(row.normalized)
                       << ',' << (row.suppressed ? 1 : 0) << ',';
                if (row.have_energy) {
                    series << format_fixed(row.joules) << ','
                           << format_fixed(row.mean_sample_joules) << ','
                           << format_fixed(row.energy_normalized) << ','
                           << (row.data_gap ? 1 : 0) << '\n';
                } else {
                    series << ",,,\n";
                }
                if (first) {
                    lo = hi = row.count;
                    first = false;
                } else {
                    lo = std::min(lo, row.count);
                    hi = std::max(hi, row.count);
                }
                if (row.have_energy && !row.data_gap) {
                    with_energy += 1;
                }
            }
            if (!series) {
                throw ConfigError("failed writing " + series_path.string());
            }
            result.series_paths.push_back(series_path);

            summary << "  " << to_string(scope) << ": slots " << rows.size()
                    << ", counts [" << lo << ", " << hi << "]"
                    << ", energy-covered " << with_energy << "\n";
        }

        if (!group.event_counts.empty()) {
            summary << "  events:";
            for (const auto& [kind, n] : group.event_counts) {
                summary << ' ' << to_string(kind) << '=' << n;
            }
            summary << "\n";
        } else {
            summary << "  events: none\n";
        }
    }
    if (!summary) {
        throw ConfigError("failed writing report summary");
    }
    return result;
}

}  // namespace wattsentry
