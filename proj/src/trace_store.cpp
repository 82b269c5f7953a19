#include "promptloop/trace_store.hpp"

#include "promptloop/backend.hpp"
#include "promptloop/errors.hpp"

#include <chrono>

namespace promptloop {

using nlohmann::json;

json to_json(const NormalizedAnswer& a) {
    switch (a.kind) {
        case NormalizedAnswer::Kind::number:
            return {{"kind", "number"}, {"value", a.number}};
        case NormalizedAnswer::Kind::word_sequence:
            return {{"kind", "words"}, {"value", a.words}};
        case NormalizedAnswer::Kind::choice_letter:
            return {{"kind", "choice"}, {"value", std::string(1, a.choice)}};
    }
    return {};
}

NormalizedAnswer answer_from_json(const json& doc) {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "number") return NormalizedAnswer::of_number(doc.at("value").get<std::string>());
    if (kind == "words") {
        return NormalizedAnswer::of_words(doc.at("value").get<std::vector<std::string>>());
    }
    if (kind == "choice") {
        const std::string v = doc.at("value").get<std::string>();
        if (v.size() != 1) throw Error("bad choice answer in trace file");
        return NormalizedAnswer::of_choice(v[0]);
    }
    throw Error("unknown answer kind in trace file: " + kind);
}

json to_json(const RefinementTrace& trace) {
    json steps = json::array();
    for (const auto& s : trace.steps) {
        steps.push_back({{"iteration", s.iteration},
                         {"token_budget", s.token_budget},
                         {"partial_output", s.partial_output},
                         {"feedback", s.feedback},
                         {"prompt_before", s.prompt_before.text},
                         {"prompt_after", s.prompt_after.text},
                         {"saw_eos", s.saw_eos}});
    }
    return {{"kind", "trace"},
            {"query_id", trace.query_id},
            {"steps", std::move(steps)},
            {"final_prompt", trace.final_prompt.text},
            {"terminated_by", to_string(trace.terminated_by)},
            {"final_answer_source", to_string(trace.final_answer_source)}};
}

RefinementTrace trace_from_json(const json& doc) {
    RefinementTrace t;
    t.query_id = doc.at("query_id").get<std::string>();
    for (const auto& sj : doc.at("steps")) {
        TranscriptStep s;
        s.iteration = sj.at("iteration").get<int>();
        s.token_budget = sj.at("token_budget").get<int>();
        s.partial_output = sj.at("partial_output").get<std::string>();
        s.feedback = sj.at("feedback").get<std::string>();
        s.prompt_before.text = sj.at("prompt_before").get<std::string>();
        s.prompt_after.text = sj.at("prompt_after").get<std::string>();
        s.saw_eos = sj.at("saw_eos").get<bool>();
        t.steps.push_back(std::move(s));
    }
    t.final_prompt.text = doc.at("final_prompt").get<std::string>();
    const std::string term = doc.at("terminated_by").get<std::string>();
    if (term == "eos") {
        t.terminated_by = TerminationReason::eos;
    } else if (term == "max_steps") {
        t.terminated_by = TerminationReason::max_steps;
    } else if (term == "prompt_cap") {
        t.terminated_by = TerminationReason::prompt_cap;
    } else {
        throw Error("unknown termination reason in trace file: " + term);
    }
    t.final_answer_source = doc.at("final_answer_source").get<std::string>() == "last_partial"
                                ? FinalAnswerSource::last_partial
                                : FinalAnswerSource::fresh_generation;
    return t;
}

namespace {

json counts_to_json(const RoleCounts& c) {
    return {{"task", c.task},
            {"feedback", c.feedback},
            {"optimizer", c.optimizer},
            {"verifier", c.verifier},
            {"judge", c.judge}};
}

RoleCounts counts_from_json(const json& doc) {
    RoleCounts c;
    c.task = doc.value("task", 0);
    c.feedback = doc.value("feedback", 0);
    c.optimizer = doc.value("optimizer", 0);
    c.verifier = doc.value("verifier", 0);
    c.judge = doc.value("judge", 0);
    return c;
}

}  // namespace

json to_json(const EvalRecord& record) {
    json doc{{"kind", "record"},
             {"query_id", record.query_id},
             {"method", to_string(record.method)},
             {"correct", record.correct},
             {"refined", record.refined},
             {"iterations", record.iterations},
             {"fail_open", record.fail_open},
             {"calls", counts_to_json(record.calls)},
             {"tokens", counts_to_json(record.tokens)}};
    doc["predicted"] = record.predicted ? to_json(*record.predicted) : json(nullptr);
    return doc;
}

EvalRecord record_from_json(const json& doc) {
    EvalRecord r;
    r.query_id = doc.at("query_id").get<std::string>();
    auto method = method_from_string(doc.at("method").get<std::string>());
    if (!method) throw Error("unknown method in trace file");
    r.method = *method;
    if (!doc.at("predicted").is_null()) r.predicted = answer_from_json(doc.at("predicted"));
    r.correct = doc.at("correct").get<bool>();
    r.refined = doc.at("refined").get<bool>();
    r.iterations = doc.at("iterations").get<int>();
    r.fail_open = doc.value("fail_open", false);
    r.calls = counts_from_json(doc.at("calls"));
    r.tokens = counts_from_json(doc.at("tokens"));
    return r;
}

TraceStore::TraceStore(const std::filesystem::path& path, const std::string& config_digest)
    : path_(path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    out_.open(path, std::ios::app);
    if (!out_) throw Error("cannot open trace file for append: " + path.string());
    if (fresh) {
        const auto now = std::chrono::system_clock::now();
        json header{{"kind", "header"},
                    {"schema", kSchema},
                    {"config_digest", config_digest},
                    {"created_unix",
                     std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
                         .count()}};
        append_line(header);
    }
}

void TraceStore::append_line(const json& doc) {
    std::lock_guard lock(mu_);
    out_ << doc.dump() << '\n';
    out_.flush();
    if (!out_) throw Error("trace file write failed: " + path_.string());
}

void TraceStore::write_trace(const RefinementTrace& trace) {
    append_line(to_json(trace));
}

void TraceStore::write_record(const EvalRecord& record) {
    append_line(to_json(record));
}

TraceFileContents read_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file: " + path.string());
    TraceFileContents out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& ex) {
            throw Error("corrupt trace line " + std::to_string(lineno) + " in " + path.string() +
                        ": " + ex.what());
        }
        const std::string kind = doc.value("kind", "");
        if (kind == "header") {
            out.header = doc;
        } else if (kind == "trace") {
            out.traces.push_back(trace_from_json(doc));
        } else if (kind == "record") {
            out.records.push_back(record_from_json(doc));
        } else {
            throw Error("unknown line kind '" + kind + "' in " + path.string());
        }
    }
    return out;
}

}  // namespace promptloop
