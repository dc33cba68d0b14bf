#pragma once

// Append-only NDJSON record store. One JSON object per line, flushed per
// append, recovered on open by truncating a torn trailing line. The exact
// byte layout is documented in docs/store-format.md; identical runs must
// produce identical files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wattsentry/types.hpp"

namespace wattsentry {

enum class RecordKind : std::uint8_t {
    Slot,
    Energy,
    Baseline,
    Event,
};

std::string_view to_string(RecordKind k);
RecordKind record_kind_from_string(std::string_view token);

struct Record {
    RecordKind kind = RecordKind::Slot;
    std::string device_id;
    double timestamp = 0.0;  // slot close / event time in stream seconds
    Label label = Label::Unlabeled;
    std::string run_id;
    nlohmann::json payload;  // kind-specific body

    bool operator==(const Record&) const = default;
};

std::string record_to_line(const Record& record);
Record record_from_line(std::string_view line);

struct RecordQuery {
    std::optional<std::string> device_id;
    std::optional<RecordKind> kind;
    std::optional<std::string> run_id;
    // Inclusive timestamp range; t0 > t1 is an error.
    std::optional<double> t0;
    std::optional<double> t1;
};

class Store {
public:
    // Opens or creates the store at `path`. Existing records are indexed in
    // memory. A torn final line (no trailing newline, as left by a crashed
    // writer) is discarded and the file truncated back to the last intact
    // record; a malformed line elsewhere means real corruption and raises
    // StoreError.
    static Store open(const std::filesystem::path& path);

    Store(Store&&) = default;
    Store& operator=(Store&&) = default;

    // Appends one record and flushes. Returns the record's position (its
    // zero-based ordinal in the file). The write happens before the method
    // returns, so a subsequent read sees it.
    std::uint64_t append(const Record& record);

    // Records matching the query, ordered by (timestamp, position).
    std::vector<Record> query(const RecordQuery& q) const;

    const std::vector<Record>& records() const { return records_; }
    std::uint64_t size() const { return records_.size(); }
    const std::filesystem::path& path() const { return path_; }

private:
    explicit Store(std::filesystem::path path) : path_(std::move(path)) {}

    std::filesystem::path path_;
    std::vector<Record> records_;
    // Append handle, opened on first write so a read-only store can still
    // be opened and queried.
    std::optional<std::ofstream> out_;
};

}  // namespace wattsentry
