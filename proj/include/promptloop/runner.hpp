#pragma once

#include "promptloop/config.hpp"
#include "promptloop/report.hpp"
#include "promptloop/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace promptloop {

struct RunStats {
    std::int64_t transport_calls = 0;
    std::int64_t cache_hits = 0;
    std::int64_t cache_misses = 0;
    std::int64_t cache_bypasses = 0;
};

struct RunResult {
    std::filesystem::path run_dir;
    std::map<Method, std::vector<EvalRecord>> records;
    std::vector<RefinementTrace> traces;
    Report report;
    std::string report_text;
    RunStats stats;
};

/// Executes the configured methods over the selected split with a worker pool
/// bounded by the concurrency limit, then writes config.json, traces.jsonl,
/// report.txt, and report.json into <out_dir>/<config-digest-prefix>/.
/// Aggregation and output order are deterministic regardless of concurrency.
RunResult run_experiment(const RunConfig& config);

// CLI entry points. Exit codes: 0 success, 1 config/usage error,
// 2 runtime/backend failure, 3 integrity failure.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& results_dir, bool emit_json, std::ostream& out,
               std::ostream& err);
int cmd_trace(const std::filesystem::path& trace_file, const std::string& query_id,
              std::ostream& out, std::ostream& err);

}  // namespace promptloop
