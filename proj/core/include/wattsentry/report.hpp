#pragma once

// Turns a record store into per-scope time series and a plain-text summary
// for offline inspection.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wattsentry/store.hpp"

namespace wattsentry {

struct ReportOptions {
    std::optional<std::string> run_id;
    std::optional<std::string> device_id;
};

struct ReportResult {
    std::vector<std::filesystem::path> series_paths;
    std::filesystem::path summary_path;
    std::size_t records_considered = 0;
};

// Writes series_<run>_<device>_<scope>.csv files plus summary.txt under
// out_dir (created if missing). An empty selection still writes a summary
// noting there was nothing to report.
ReportResult write_report(const Store& store,
                          const std::filesystem::path& out_dir,
                          const ReportOptions& options = {});

}  // namespace wattsentry
