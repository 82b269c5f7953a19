#pragma once

#include "promptloop/types.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace promptloop {

nlohmann::json to_json(const NormalizedAnswer& a);
NormalizedAnswer answer_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const RefinementTrace& trace);
RefinementTrace trace_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const EvalRecord& record);
EvalRecord record_from_json(const nlohmann::json& doc);

/// Append-only line-delimited JSON store for traces and eval records.
/// The first line is a header carrying the schema tag, the run-config digest,
/// and a timestamp; every following line is one independently parseable
/// object. Appends are serialized and flushed per item; reopening an existing
/// file does not duplicate the header.
class TraceStore {
public:
    static constexpr const char* kSchema = "promptloop/trace/v1";

    TraceStore(const std::filesystem::path& path, const std::string& config_digest);

    void write_trace(const RefinementTrace& trace);
    void write_record(const EvalRecord& record);

    const std::filesystem::path& path() const { return path_; }

private:
    void append_line(const nlohmann::json& doc);

    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mu_;
};

struct TraceFileContents {
    nlohmann::json header;
    std::vector<RefinementTrace> traces;
    std::vector<EvalRecord> records;
};

TraceFileContents read_trace_file(const std::filesystem::path& path);

}  // namespace promptloop
