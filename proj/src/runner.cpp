#include "promptloop/runner.hpp"

#include "promptloop/cache.hpp"
#include "promptloop/engine.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/http_backend.hpp"
#include "promptloop/metrics.hpp"
#include "promptloop/scripted_backend.hpp"
#include "promptloop/trace_store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace promptloop {

namespace {

// One underlying transport per distinct endpoint identity, so scripted
// streams and transport stats are shared across roles bound to the same
// endpoint.
struct BackendPool {
    std::map<std::string, std::shared_ptr<ChatBackend>> raw;
    std::map<std::string, std::shared_ptr<CacheBackend>> cached;

    static std::string identity(const RoleEndpointConfig& ep) {
        if (ep.backend_kind == "scripted") {
            return "scripted:" + std::filesystem::weakly_canonical(ep.script).string();
        }
        return "http:" + ep.base_url + ep.completions_path;
    }

    std::shared_ptr<ChatBackend> get(const RoleEndpointConfig& ep, const RunConfig& config) {
        const std::string id = identity(ep);
        auto raw_it = raw.find(id);
        if (raw_it == raw.end()) {
            std::shared_ptr<ChatBackend> backend;
            if (ep.backend_kind == "scripted") {
                backend = ScriptedBackend::from_file(ep.script);
            } else {
                HttpBackendConfig http;
                http.base_url = ep.base_url;
                http.completions_path = ep.completions_path;
                http.api_key_env = ep.api_key_env;
                http.enforce_budget = ep.enforce_budget;
                http.retry.max_attempts = ep.max_attempts;
                http.retry.initial_backoff_ms = ep.initial_backoff_ms;
                http.retry.backoff_multiplier = ep.backoff_multiplier;
                http.retry.timeout_seconds = ep.timeout_seconds;
                backend = std::make_shared<HttpBackend>(std::move(http));
            }
            raw_it = raw.emplace(id, std::move(backend)).first;
        }
        if (!config.cache_enabled) return raw_it->second;
        auto cached_it = cached.find(id);
        if (cached_it == cached.end()) {
            cached_it = cached
                            .emplace(id, std::make_shared<CacheBackend>(raw_it->second, id,
                                                                        config.cache_dir))
                            .first;
        }
        return cached_it->second;
    }

    RunStats stats() const {
        RunStats s;
        for (const auto& [id, backend] : raw) s.transport_calls += backend->transport_calls();
        for (const auto& [id, backend] : cached) {
            s.cache_hits += backend->hits();
            s.cache_misses += backend->misses();
            s.cache_bypasses += backend->bypasses();
        }
        return s;
    }
};

GatingMode mode_for_method(Method method, GatingMode fallback) {
    switch (method) {
        case Method::prorefine_no_verifier: return GatingMode::always_refine;
        case Method::prorefine_verifier: return GatingMode::verifier_gated;
        case Method::prorefine_optimal_verifier: return GatingMode::oracle_gated;
        case Method::cot_baseline: return fallback;
    }
    return fallback;
}

}  // namespace

RunResult run_experiment(const RunConfig& config) {
    const TemplateSet templates = TemplateSet::load(config.template_dir);

    std::vector<Query> queries = load_split(config.dataset, config.split, config.data_dir);
    if (config.limit > 0 && static_cast<std::size_t>(config.limit) < queries.size()) {
        queries.resize(static_cast<std::size_t>(config.limit));
    }

    BackendPool pool;
    RoleBindings roles;
    roles.task = {pool.get(config.endpoint(RoleTag::task), config),
                  config.endpoint(RoleTag::task).model};
    roles.feedback = {pool.get(config.endpoint(RoleTag::feedback), config),
                      config.endpoint(RoleTag::feedback).model};
    roles.optimizer = {pool.get(config.endpoint(RoleTag::optimizer), config),
                       config.endpoint(RoleTag::optimizer).model};
    roles.verifier = {pool.get(config.endpoint(RoleTag::verifier), config),
                      config.endpoint(RoleTag::verifier).model};
    roles.judge = {pool.get(config.endpoint(RoleTag::judge), config),
                   config.endpoint(RoleTag::judge).model};
    roles.templates = &templates;

    EngineOptions opts;
    opts.generation = config.generation;
    opts.final_answer = config.final_answer;
    opts.answer_max_tokens = config.answer_max_tokens;
    opts.prompt_cap_factor = config.prompt_cap_factor;

    struct Item {
        Method method;
        std::size_t query_index;
    };
    std::vector<Item> items;
    for (Method m : config.methods) {
        for (std::size_t i = 0; i < queries.size(); ++i) items.push_back({m, i});
    }

    std::map<Method, std::vector<std::optional<SolveOutcome>>> outcomes;
    for (Method m : config.methods) outcomes[m].resize(queries.size());

    std::atomic<std::size_t> next{0};
    std::atomic<std::int64_t> failures{0};
    std::mutex err_mu;
    std::vector<std::string> errors;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            const Item item = items[i];
            const Query& q = queries[item.query_index];
            try {
                RunParams params = config.params;
                params.mode = mode_for_method(item.method, config.params.mode);
                SolveOutcome outcome = (item.method == Method::cot_baseline)
                                           ? solve_baseline(q, params, roles, opts)
                                           : gated_solve(q, params, roles, opts);
                outcomes[item.method][item.query_index] = std::move(outcome);
            } catch (const std::exception& ex) {
                ++failures;
                std::lock_guard lock(err_mu);
                if (errors.size() < 20) {
                    errors.push_back(std::string(to_string(item.method)) + " " + q.id + ": " +
                                     ex.what());
                }
            }
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(config.concurrency),
                              std::max<std::size_t>(items.size(), 1));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    // Single-threaded aggregation in deterministic order.
    RunResult result;
    std::int64_t judge_errors = 0;
    for (Method m : config.methods) {
        auto& slot = outcomes[m];
        for (std::size_t i = 0; i < slot.size(); ++i) {
            if (!slot[i]) continue;
            SolveOutcome& outcome = *slot[i];
            if (config.scoring == ScoringMode::judge) {
                try {
                    outcome.record.correct = llm_judge_correct(
                        queries[i], outcome.final_raw, *roles.judge.backend,
                        roles.judge.model_id, templates, &outcome.record.calls,
                        &outcome.record.tokens);
                } catch (const JudgeError& ex) {
                    ++judge_errors;
                    outcome.record.correct = false;
                    std::lock_guard lock(err_mu);
                    if (errors.size() < 20) errors.push_back(ex.what());
                }
            }
            result.records[m].push_back(outcome.record);
            if (outcome.trace) result.traces.push_back(*outcome.trace);
        }
    }

    result.report = build_report(config.methods, result.records);
    result.report.judge_errors = judge_errors;
    result.report.failed_queries = failures.load();
    result.report_text = render_report_text(config, queries.size(), result.report);
    result.stats = pool.stats();

    // Outputs: <out_dir>/<digest prefix>/{config.json, traces.jsonl, report.txt, report.json}
    result.run_dir = std::filesystem::path(config.out_dir) / config.digest().substr(0, 12);
    std::filesystem::create_directories(result.run_dir);
    {
        std::ofstream out(result.run_dir / "config.json", std::ios::trunc);
        out << config.canonical_json().dump(2) << "\n";
    }
    {
        const auto trace_path = result.run_dir / "traces.jsonl";
        std::error_code ec;
        std::filesystem::remove(trace_path, ec);
        TraceStore store(trace_path, config.digest());
        for (Method m : config.methods) {
            for (const auto& r : result.records[m]) store.write_record(r);
        }
        for (const auto& t : result.traces) store.write_trace(t);
    }
    {
        std::ofstream out(result.run_dir / "report.txt", std::ios::trunc);
        out << result.report_text;
    }
    {
        std::ofstream out(result.run_dir / "report.json", std::ios::trunc);
        out << render_report_json(config, queries.size(), result.report).dump(2) << "\n";
    }

    for (const auto& e : errors) std::cerr << "[run] " << e << "\n";
    return result;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        RunResult result = run_experiment(config);
        out << result.report_text;
        out << "\nrun dir: " << result.run_dir.string() << "\n";
        out << "transport calls: " << result.stats.transport_calls
            << " (cache hits " << result.stats.cache_hits << ", misses "
            << result.stats.cache_misses << ", bypasses " << result.stats.cache_bypasses << ")\n";
        if (result.report.failed_queries > 0) {
            err << "run finished with " << result.report.failed_queries
                << " failed queries; partial results preserved in " << result.run_dir.string()
                << "\n";
            return 2;
        }
        return 0;
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << "\n";
        return 1;
    } catch (const TemplateError& ex) {
        err << "template error: " << ex.what() << "\n";
        return 1;
    } catch (const SplitIntegrityError& ex) {
        err << "integrity error: " << ex.what() << "\n";
        return 3;
    } catch (const DatasetError& ex) {
        err << "dataset error: " << ex.what() << "\n";
        return 3;
    } catch (const Error& ex) {
        err << "run failed: " << ex.what() << "\n";
        return 2;
    }
}

namespace {

int report_one(const std::filesystem::path& run_dir, bool emit_json, std::ostream& out,
               std::ostream& err) {
    const auto config_path = run_dir / "config.json";
    const auto trace_path = run_dir / "traces.jsonl";
    if (!std::filesystem::exists(trace_path)) {
        err << "no traces.jsonl under " << run_dir.string() << "\n";
        return 1;
    }
    RunConfig config = load_run_config(config_path);
    TraceFileContents contents = read_trace_file(trace_path);
    if (contents.records.empty()) {
        err << "no records in " << trace_path.string() << "\n";
        return 1;
    }
    std::map<Method, std::vector<EvalRecord>> records;
    std::size_t n_queries = 0;
    for (const auto& r : contents.records) records[r.method].push_back(r);
    for (const auto& [m, rs] : records) n_queries = std::max(n_queries, rs.size());
    std::vector<Method> order;
    for (Method m : config.methods) {
        if (records.count(m)) order.push_back(m);
    }
    for (const auto& [m, rs] : records) {
        if (std::find(order.begin(), order.end(), m) == order.end()) order.push_back(m);
    }
    Report report = build_report(order, records);
    // Consistency: the iterations column must equal the metrics-layer mean.
    for (const auto& s : report.summaries) {
        IterationStats stats = iteration_stats({}, records.at(s.method));
        if (stats.mean_all != s.mean_iterations_all) {
            err << "internal inconsistency in iteration means\n";
            return 2;
        }
    }
    out << render_report_text(config, n_queries, report);
    if (emit_json) {
        out << render_report_json(config, n_queries, report).dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int cmd_report(const std::filesystem::path& results_dir, bool emit_json, std::ostream& out,
               std::ostream& err) {
    try {
        if (std::filesystem::exists(results_dir / "traces.jsonl")) {
            return report_one(results_dir, emit_json, out, err);
        }
        if (!std::filesystem::is_directory(results_dir)) {
            err << "results directory not found: " << results_dir.string() << "\n";
            return 1;
        }
        std::vector<std::filesystem::path> runs;
        for (const auto& e : std::filesystem::directory_iterator(results_dir)) {
            if (e.is_directory() && std::filesystem::exists(e.path() / "traces.jsonl")) {
                runs.push_back(e.path());
            }
        }
        std::sort(runs.begin(), runs.end());
        if (runs.empty()) {
            err << "no runs under " << results_dir.string() << "\n";
            return 1;
        }
        for (const auto& run : runs) {
            out << "== " << run.filename().string() << " ==\n";
            if (int rc = report_one(run, emit_json, out, err); rc != 0) return rc;
            out << "\n";
        }
        return 0;
    } catch (const Error& ex) {
        err << "report failed: " << ex.what() << "\n";
        return 2;
    }
}

int cmd_trace(const std::filesystem::path& trace_file, const std::string& query_id,
              std::ostream& out, std::ostream& err) {
    try {
        TraceFileContents contents = read_trace_file(trace_file);
        bool found = false;
        for (const auto& t : contents.traces) {
            if (t.query_id != query_id) continue;
            found = true;
            out << "query: " << t.query_id << "  steps: " << t.steps.size()
                << "  terminated_by: " << to_string(t.terminated_by)
                << "  final_answer_source: " << to_string(t.final_answer_source) << "\n";
            for (const auto& s : t.steps) {
                out << "-- iteration " << s.iteration << " (budget " << s.token_budget
                    << " tokens)" << (s.saw_eos ? " [eos]" : "") << " --\n";
                out << "prompt before:\n" << s.prompt_before.text << "\n\n";
                out << "partial output:\n" << s.partial_output << "\n\n";
                out << "feedback:\n" << s.feedback << "\n\n";
                if (s.prompt_after.text == s.prompt_before.text) {
                    out << "prompt after: [unchanged]\n\n";
                } else {
                    out << "prompt after:\n" << s.prompt_after.text << "\n\n";
                }
            }
            out << "final prompt:\n" << t.final_prompt.text << "\n\n";
        }
        if (!found) {
            err << "no trace for query id '" << query_id << "' in " << trace_file.string()
                << "\n";
            return 1;
        }
        return 0;
    } catch (const Error& ex) {
        err << "trace failed: " << ex.what() << "\n";
        return 2;
    }
}

}  // namespace promptloop
