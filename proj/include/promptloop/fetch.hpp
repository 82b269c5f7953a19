#pragma once

#include "promptloop/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace promptloop {

struct FetchOptions {
    std::filesystem::path data_dir = "data";
    /// Replaces the default "https://raw.githubusercontent.com" source prefix;
    /// lets tests point fetch at a local stub server.
    std::string source_base;
};

/// Downloads the requested benchmarks into the data directory, records
/// content hashes in <data_dir>/manifest.json, and converts the SVAMP
/// train/validation resource from its CSV distribution into the SVAMP record
/// schema. A re-fetch whose files match the manifest is a no-op; a file that
/// no longer matches its recorded hash is an integrity failure.
/// Exit codes: 0 success, 1 usage error, 2 download failure, 3 integrity
/// failure.
int cmd_fetch(const std::vector<std::string>& datasets, const FetchOptions& options,
              std::ostream& out, std::ostream& err);

/// RFC-4180-style CSV reader (quoted fields, embedded commas/newlines).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Converts the MAWPS/ASDiv-A CSV rows (templated questions with numberN
/// placeholders plus a Numbers column) into SVAMP-schema JSON records.
std::string convert_mawps_csv_to_svamp_json(const std::string& csv_text);

}  // namespace promptloop
