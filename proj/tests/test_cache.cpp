#include <doctest.h>

#include "promptloop/cache.hpp"
#include "promptloop/scripted_backend.hpp"
#include "promptloop/trace_store.hpp"

#include <thread>

#include "testutil.hpp"

using namespace promptloop;

namespace {

ChatRequest make_request(const std::string& content, std::optional<int> max_tokens = 16,
                         double temperature = 0.0, std::optional<std::int64_t> seed = 0) {
    ChatRequest req;
    req.role_tag = RoleTag::task;
    req.model_id = "m";
    req.messages = {{Speaker::user, content}};
    req.max_tokens = max_tokens;
    req.temperature = temperature;
    req.seed = seed;
    return req;
}

}  // namespace

TEST_CASE("cache keys separate every request dimension") {
    const ChatRequest base = make_request("hello", 10);
    CHECK(cache_key("k", base) == cache_key("k", base));

    ChatRequest other = base;
    other.max_tokens = 20;
    CHECK(cache_key("k", base) != cache_key("k", other));

    other = base;
    other.temperature = 0.7;
    CHECK(cache_key("k", base) != cache_key("k", other));

    other = base;
    other.model_id = "m2";
    CHECK(cache_key("k", base) != cache_key("k", other));

    other = base;
    other.messages[0].content = "hello!";
    CHECK(cache_key("k", base) != cache_key("k", other));

    other = base;
    other.seed = 1;
    CHECK(cache_key("k", base) != cache_key("k", other));

    CHECK(cache_key("k", base) != cache_key("other-kind", base));
}

TEST_CASE("cached_complete: hit path makes zero backend calls") {
    testutil::TempDir dir("cache");
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->push(RoleTag::task, {"result", FinishReason::stop});
    CacheBackend cache(scripted, "scripted:test", dir.path());

    const ChatRequest req = make_request("same");
    Completion first = cache.complete(req);
    CHECK(first.text == "result");
    CHECK(scripted->transport_calls() == 1);
    CHECK(cache.misses() == 1);

    Completion second = cache.complete(req);
    CHECK(second.text == "result");
    CHECK(second.finish_reason == first.finish_reason);
    CHECK(scripted->transport_calls() == 1);  // no new backend call
    CHECK(cache.hits() == 1);

    // Budgets differ per iteration: 10 vs 20 are distinct entries.
    auto scripted2 = std::make_shared<ScriptedBackend>();
    scripted2->push(RoleTag::task, {"b10", FinishReason::length});
    scripted2->push(RoleTag::task, {"b20", FinishReason::length});
    scripted2->push(RoleTag::task, {"warm", FinishReason::stop});
    CacheBackend cache2(scripted2, "scripted:test2", dir.path());
    CHECK(cache2.complete(make_request("q", 10)).text == "b10");
    CHECK(cache2.complete(make_request("q", 20)).text == "b20");
    CHECK(scripted2->transport_calls() == 2);

    // Temperature change is a miss (seed set, so still cacheable).
    CHECK(cache2.complete(make_request("q", 10, 0.5, 7)).text == "warm");
    CHECK(scripted2->transport_calls() == 3);
    CHECK(cache2.complete(make_request("q", 10, 0.5, 7)).text == "warm");
    CHECK(scripted2->transport_calls() == 3);
}

TEST_CASE("cache bypasses nondeterministic sampling (temperature > 0, no seed)") {
    testutil::TempDir dir("cache-bypass");
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->push(RoleTag::task, {"sample-1", FinishReason::stop});
    scripted->push(RoleTag::task, {"sample-2", FinishReason::stop});
    CacheBackend cache(scripted, "scripted:bypass", dir.path());

    const ChatRequest req = make_request("q", 16, 0.9, std::nullopt);
    CHECK(cache.complete(req).text == "sample-1");
    CHECK(cache.complete(req).text == "sample-2");  // not served from cache
    CHECK(cache.bypasses() == 2);
    CHECK(cache.hits() == 0);
}

TEST_CASE("corrupt cache entries degrade to misses") {
    testutil::TempDir dir("cache-corrupt");
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->push(RoleTag::task, {"good", FinishReason::stop});
    scripted->push(RoleTag::task, {"regenerated", FinishReason::stop});
    CacheBackend cache(scripted, "scripted:corrupt", dir.path());

    const ChatRequest req = make_request("q");
    cache.complete(req);
    // Clobber the stored entry.
    const auto key = cache_key("scripted:corrupt", req);
    testutil::write_file(dir.path() / (key + ".json"), "{not json");
    CHECK(cache.complete(req).text == "regenerated");
    CHECK(cache.misses() == 2);
}

TEST_CASE("concurrent same-key completes resolve to one stored value") {
    testutil::TempDir dir("cache-race");
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->push(RoleTag::task, {"value", FinishReason::stop});
    scripted->set_repeat_last(RoleTag::task);
    CacheBackend cache(scripted, "scripted:race", dir.path());

    const ChatRequest req = make_request("contended");
    std::vector<std::thread> threads;
    std::vector<std::string> results(8);
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] { results[t] = cache.complete(req).text; });
    }
    for (auto& t : threads) t.join();
    for (const auto& r : results) CHECK(r == "value");
    Completion flushed = cache.complete(req);
    CHECK(flushed.text == "value");
}

TEST_CASE("trace store: header once, append-only lines, reopen safe") {
    testutil::TempDir dir("traces");
    const auto path = dir.path() / "traces.jsonl";

    RefinementTrace trace;
    trace.query_id = "q1";
    TranscriptStep step;
    step.iteration = 1;
    step.token_budget = 10;
    step.partial_output = "partial\nwith newline";
    step.feedback = "fb";
    step.prompt_before.text = "p0";
    step.prompt_after.text = "p1";
    trace.steps.push_back(step);
    trace.final_prompt.text = "p1";
    trace.terminated_by = TerminationReason::eos;

    {
        TraceStore store(path, "digest-1");
        store.write_trace(trace);
        trace.query_id = "q2";
        store.write_trace(trace);
        EvalRecord rec;
        rec.query_id = "q1";
        rec.method = Method::prorefine_verifier;
        rec.predicted = NormalizedAnswer::of_number("13");
        store.write_record(rec);
    }
    {
        // 3 items + 1 header line.
        const std::string text = testutil::read_file(path);
        std::size_t lines = std::count(text.begin(), text.end(), '\n');
        CHECK(lines == 4);
    }
    {
        // Reopen and append: header not duplicated.
        TraceStore store(path, "digest-1");
        trace.query_id = "q3";
        store.write_trace(trace);
    }
    TraceFileContents contents = read_trace_file(path);
    CHECK(contents.header.at("config_digest") == "digest-1");
    CHECK(contents.header.at("schema") == TraceStore::kSchema);
    REQUIRE(contents.traces.size() == 3);
    CHECK(contents.traces[0].query_id == "q1");
    CHECK(contents.traces[2].query_id == "q3");
    CHECK(contents.traces[0].steps.size() == 1);
    CHECK(contents.traces[0].steps[0].partial_output == "partial\nwith newline");
    CHECK(contents.traces[0].terminated_by == TerminationReason::eos);
    REQUIRE(contents.records.size() == 1);
    CHECK(contents.records[0].method == Method::prorefine_verifier);
    REQUIRE(contents.records[0].predicted.has_value());
    CHECK(contents.records[0].predicted->number == "13");
}

TEST_CASE("trace store: concurrent writers keep every line intact") {
    testutil::TempDir dir("traces-mt");
    const auto path = dir.path() / "traces.jsonl";
    TraceStore store(path, "digest-mt");

    constexpr int kWriters = 8;
    constexpr int kPerWriter = 50;
    std::vector<std::thread> threads;
    for (int w = 0; w < kWriters; ++w) {
        threads.emplace_back([&, w] {
            for (int i = 0; i < kPerWriter; ++i) {
                RefinementTrace t;
                t.query_id = "w" + std::to_string(w) + "-" + std::to_string(i);
                TranscriptStep s;
                s.iteration = 1;
                s.token_budget = 10;
                s.partial_output = std::string(100, 'x');
                s.feedback = "f";
                s.prompt_before.text = "a";
                s.prompt_after.text = "b";
                t.steps.push_back(s);
                t.final_prompt.text = "b";
                store.write_trace(t);
            }
        });
    }
    for (auto& t : threads) t.join();

    // Oracle: line count + parse-all under stress.
    TraceFileContents contents = read_trace_file(path);
    CHECK(contents.traces.size() == kWriters * kPerWriter);
}
