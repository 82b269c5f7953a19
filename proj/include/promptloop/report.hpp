#pragma once

#include "promptloop/config.hpp"
#include "promptloop/metrics.hpp"
#include "promptloop/types.hpp"

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace promptloop {

struct MethodComparison {
    Method a;
    Method b;
    double p_value = 1.0;
    DiscordantPairs pairs;
};

struct Report {
    std::vector<MethodSummary> summaries;  // config method order
    std::vector<MethodComparison> comparisons;
    std::int64_t judge_errors = 0;
    std::int64_t failed_queries = 0;
};

/// Builds the per-method summaries and all pairwise comparisons.
Report build_report(const std::vector<Method>& order,
                    const std::map<Method, std::vector<EvalRecord>>& records);

/// The Table-1-style plain-text report: one "accuracy [low, high]" row per
/// method, iteration means, call/token accounting, and comparison rows.
std::string render_report_text(const RunConfig& config, std::size_t n_queries,
                               const Report& report);

nlohmann::json render_report_json(const RunConfig& config, std::size_t n_queries,
                                  const Report& report);

}  // namespace promptloop
