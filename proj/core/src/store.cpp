#include "wattsentry/store.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "wattsentry/errors.hpp"

namespace wattsentry {

std::string_view to_string(RecordKind k) {
    switch (k) {
        case RecordKind::Slot: return "SLOT";
        case RecordKind::Energy: return "ENERGY";
        case RecordKind::Baseline: return "BASELINE";
        case RecordKind::Event: return "EVENT";
    }
    return "SLOT";
}

RecordKind record_kind_from_string(std::string_view token) {
    if (token == "SLOT") return RecordKind::Slot;
    if (token == "ENERGY") return RecordKind::Energy;
    if (token == "BASELINE") return RecordKind::Baseline;
    if (token == "EVENT") return RecordKind::Event;
    throw ConfigError("unknown record kind token: " + std::string(token));
}

std::string record_to_line(const Record& record) {
    // nlohmann orders object keys alphabetically and prints doubles with
    // shortest round-trip formatting, which keeps the line layout stable.
    const nlohmann::json doc{
        {"device", record.device_id}, {"kind", to_string(record.kind)},
        {"label", to_string(record.label)}, {"payload", record.payload},
        {"run", record.run_id}, {"t", record.timestamp}, {"v", 1},
    };
    return doc.dump();
}

Record record_from_line(std::string_view line) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(std::string("record is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("v").get<int>() != 1) {
            throw StoreError("unsupported record version");
        }
        Record record;
        record.kind = record_kind_from_string(doc.at("kind").get<std::string>());
        record.device_id = doc.at("device").get<std::string>();
        record.timestamp = doc.at("t").get<double>();
        record.label = label_from_string(doc.at("label").get<std::string>());
        record.run_id = doc.at("run").get<std::string>();
        record.payload = doc.at("payload");
        return record;
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(std::string("record missing fields: ") + e.what());
    } catch (const ConfigError& e) {
        throw StoreError(std::string("record has a bad field: ") + e.what());
    }
}

Store Store::open(const std::filesystem::path& path) {
    Store store(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        // New store: create the file so later opens and appends share a path.
        std::ofstream create(path, std::ios::binary | std::ios::app);
        if (!create) {
            throw StoreError("cannot create store at " + path.string());
        }
        return store;
    }

    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    in.close();

    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        const std::size_t eol = content.find('\n', pos);
        ++line_no;
        if (eol == std::string::npos) {
            // Torn tail from an interrupted append: drop it and truncate the
            // file back to the last intact record.
            std::cerr << "wattsentry: store " << path.string()
                      << " ends mid-record at line " << line_no
                      << "; discarding the torn tail\n";
            std::filesystem::resize_file(path, pos);
            break;
        }
        const std::string_view line(content.data() + pos, eol - pos);
        try {
            store.records_.push_back(record_from_line(line));
        } catch (const std::exception& e) {
            throw StoreError("store " + path.string() + " is corrupt at line " +
                             std::to_string(line_no) + ": " + e.what());
        }
        pos = eol + 1;
    }
    return store;
}

std::uint64_t Store::append(const Record& record) {
    if (!out_) {
        out_.emplace(path_, std::ios::binary | std::ios::app);
        if (!*out_) {
            out_.reset();
            throw StoreError("cannot open store for append: " + path_.string());
        }
    }
    *out_ << record_to_line(record) << '\n';
    out_->flush();
    if (!*out_) {
        throw StoreError("append to store failed: " + path_.string());
    }
    records_.push_back(record);
    return records_.size() - 1;
}

std::vector<Record> Store::query(const RecordQuery& q) const {
    if (q.t0 && q.t1 && *q.t0 > *q.t1) {
        throw StoreError("inverted time range: t0 " + format_number(*q.t0) +
                         " is after t1 " + format_number(*q.t1));
    }
    std::vector<std::pair<std::uint64_t, const Record*>> hits;
    for (std::uint64_t i = 0; i < records_.size(); ++i) {
        const Record& r = records_[i];
        if (q.device_id && r.device_id != *q.device_id) continue;
        if (q.kind && r.kind != *q.kind) continue;
        if (q.run_id && r.run_id != *q.run_id) continue;
        if (q.t0 && r.timestamp < *q.t0) continue;
        if (q.t1 && r.timestamp > *q.t1) continue;
        hits.emplace_back(i, &r);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const auto& a, const auto& b) {
                         return a.second->timestamp < b.second->timestamp;
                     });
    std::vector<Record> out;
    out.reserve(hits.size());
    for (const auto& [pos, rec] : hits) {
        out.push_back(*rec);
    }
    return out;
}

}  // namespace wattsentry
