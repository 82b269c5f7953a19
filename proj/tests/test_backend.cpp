#include <doctest.h>

#include "promptloop/errors.hpp"
#include "promptloop/scripted_backend.hpp"

#include <sstream>

using namespace promptloop;

namespace {

ChatRequest make_request(RoleTag tag, const std::string& content,
                         std::optional<int> max_tokens = std::nullopt) {
    ChatRequest req;
    req.role_tag = tag;
    req.model_id = "test-model";
    req.messages = {{Speaker::system, "sys"}, {Speaker::user, content}};
    req.max_tokens = max_tokens;
    return req;
}

}  // namespace

TEST_CASE("truncate_to_budget whitespace proxy") {
    CHECK(truncate_to_budget("a b c d", 2) == "a b");
    CHECK(truncate_to_budget("", 5).empty());
    CHECK(truncate_to_budget("one", 5) == "one");

    // Oracle: split/rejoin of a 60-word paragraph at budget 30.
    std::string paragraph;
    std::vector<std::string> words;
    for (int i = 0; i < 60; ++i) {
        words.push_back("w" + std::to_string(i));
        if (i) paragraph += ' ';
        paragraph += words.back();
    }
    std::string expected;
    for (int i = 0; i < 30; ++i) {
        if (i) expected += ' ';
        expected += words[i];
    }
    CHECK(truncate_to_budget(paragraph, 30) == expected);
    CHECK(approx_token_count(truncate_to_budget(paragraph, 30)) == 30);
    CHECK(approx_token_count("a\tb\n c") == 3);
}

TEST_CASE("scripted backend replays responses in order and logs requests") {
    ScriptedBackend backend;
    backend.push(RoleTag::task, {"Step 1: count", FinishReason::length});
    backend.push(RoleTag::task, {"Step 2: done", FinishReason::stop});

    Completion first = backend.complete(make_request(RoleTag::task, "q", 10));
    CHECK(first.text == "Step 1: count");
    CHECK(first.finish_reason == FinishReason::length);

    Completion second = backend.complete(make_request(RoleTag::task, "q", 20));
    CHECK(second.text == "Step 2: done");
    CHECK(second.finish_reason == FinishReason::stop);

    auto log = backend.call_log();
    REQUIRE(log.size() == 2);
    CHECK(log[0].max_tokens == 10);
    CHECK(log[1].max_tokens == 20);
    CHECK(backend.transport_calls() == 2);

    // Exhausted script is a test bug.
    CHECK_THROWS_AS(backend.complete(make_request(RoleTag::task, "q")), ScriptError);
    // Unscripted role likewise.
    CHECK_THROWS_AS(backend.complete(make_request(RoleTag::feedback, "x")), ScriptError);
}

TEST_CASE("scripted matcher entries take precedence and consume independently") {
    ScriptedBackend backend;
    backend.push(RoleTag::task, {"default", FinishReason::stop});
    backend.push_matched(RoleTag::task, "apples", {"matched-1", FinishReason::stop});
    backend.push_matched(RoleTag::task, "apples", {"matched-2", FinishReason::stop});

    CHECK(backend.complete(make_request(RoleTag::task, "count the apples")).text == "matched-1");
    CHECK(backend.complete(make_request(RoleTag::task, "plain")).text == "default");
    CHECK(backend.complete(make_request(RoleTag::task, "apples again")).text == "matched-2");
}

TEST_CASE("scripted repeat_last keeps serving the final response") {
    ScriptedBackend backend;
    backend.push(RoleTag::feedback, {"looks wrong", FinishReason::stop});
    backend.set_repeat_last(RoleTag::feedback);
    for (int i = 0; i < 5; ++i) {
        CHECK(backend.complete(make_request(RoleTag::feedback, "o")).text == "looks wrong");
    }
}

TEST_CASE("scripted backend determinism: same script, same request sequence") {
    auto build = [] {
        auto b = std::make_shared<ScriptedBackend>();
        b->push(RoleTag::task, {"one two three four", FinishReason::length});
        b->push(RoleTag::task, {"five", FinishReason::stop});
        return b;
    };
    auto a = build();
    auto b = build();
    for (int i = 0; i < 2; ++i) {
        Completion ca = a->complete(make_request(RoleTag::task, "q", (i + 1) * 10));
        Completion cb = b->complete(make_request(RoleTag::task, "q", (i + 1) * 10));
        CHECK(ca.text == cb.text);
        CHECK(ca.finish_reason == cb.finish_reason);
        CHECK(ca.prompt_tokens == cb.prompt_tokens);
        CHECK(ca.completion_tokens == cb.completion_tokens);
    }
}

TEST_CASE("scripted backend loads from a script document") {
    const auto doc = nlohmann::json::parse(R"({
      "entries": [
        {"role": "task", "responses": [
          {"text": "partial", "finish": "length"},
          {"text": "done", "finish": "stop"}]},
        {"role": "feedback", "repeat_last": true,
         "responses": [{"text": "critique"}]},
        {"role": "task", "match": "special",
         "responses": [{"text": "override"}]}
      ]})");
    auto backend = ScriptedBackend::from_json(doc);
    CHECK(backend->complete(make_request(RoleTag::task, "special case")).text == "override");
    CHECK(backend->complete(make_request(RoleTag::task, "q")).text == "partial");
    CHECK(backend->complete(make_request(RoleTag::feedback, "o")).text == "critique");
    CHECK(backend->complete(make_request(RoleTag::feedback, "o")).text == "critique");
    CHECK(backend->complete(make_request(RoleTag::task, "q")).text == "done");

    CHECK_THROWS_AS(ScriptedBackend::from_json(nlohmann::json::parse("{}")), ScriptError);
    CHECK_THROWS_AS(ScriptedBackend::from_json(nlohmann::json::parse(
                        R"({"entries":[{"role":"nope","responses":[{"text":"x"}]}]})")),
                    ScriptError);
}
