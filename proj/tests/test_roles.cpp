#include <doctest.h>

#include "promptloop/errors.hpp"
#include "promptloop/roles.hpp"

#include "testutil.hpp"

using namespace promptloop;

TEST_CASE("render substitutes placeholders and rejects gaps") {
    RoleTemplate tmpl;
    tmpl.role_tag = RoleTag::feedback;
    tmpl.user_template = "Critique: {output}";
    tmpl.placeholders = {"output"};

    CHECK(render(tmpl, {{"output", "42"}}) == "Critique: 42");
    CHECK_THROWS_AS(render(tmpl, {}), TemplateError);

    RoleTemplate two;
    two.role_tag = RoleTag::feedback;
    two.user_template = "Q: {query}\nO: {output}";
    two.placeholders = {"query", "output"};
    CHECK_THROWS_AS(render(two, {{"output", "x"}}), TemplateError);
    const std::string rendered = render(two, {{"query", "a"}, {"output", "b"}});
    CHECK(rendered.find('{') == std::string::npos);
}

TEST_CASE("shipped template set loads and renders") {
    const TemplateSet set = TemplateSet::load(testutil::templates_dir());

    // Feedback rendering embeds both the query and the partial output.
    const std::string partial = "Step 1: count the fruits.\nStep 2: count the chairs.";
    const std::string fb =
        render(set.role(RoleTag::feedback), {{"query", "How many?"}, {"output", partial}});
    CHECK(fb.find("How many?") != std::string::npos);
    CHECK(fb.find(partial) != std::string::npos);

    // Optimizer rendering carries prompt and feedback but never the query.
    const RoleTemplate& opt = set.role(RoleTag::optimizer);
    CHECK(opt.placeholders == std::set<std::string>{"prompt", "feedback"});
    const std::string op = render(opt, {{"prompt", "P0"}, {"feedback", "F0"}});
    CHECK(op.find("P0") != std::string::npos);
    CHECK(op.find("F0") != std::string::npos);
    CHECK(opt.user_template.find("{query}") == std::string::npos);

    // Verifier rendering includes query and candidate output and demands a
    // machine-parseable verdict token.
    const std::string vr =
        render(set.role(RoleTag::verifier), {{"query", "Q?"}, {"output", "A."}});
    CHECK(vr.find("Q?") != std::string::npos);
    CHECK(vr.find("A.") != std::string::npos);
    CHECK(vr.find("VERDICT: CORRECT") != std::string::npos);
    CHECK(vr.find("VERDICT: INCORRECT") != std::string::npos);
}

TEST_CASE("initial prompts are task-generic and deterministic") {
    const TemplateSet set = TemplateSet::load(testutil::templates_dir());

    const PromptText gsm = set.initial_prompt(TaskKind::gsm8k);
    CHECK(gsm.text.find("Answer: <number>") != std::string::npos);
    CHECK(gsm.text.find("step by step") != std::string::npos);

    const PromptText ws = set.initial_prompt(TaskKind::word_sorting);
    CHECK(ws.text.find("alphabetical") != std::string::npos);
    CHECK(ws.text.find("Answer:") != std::string::npos);

    const PromptText aqua = set.initial_prompt(TaskKind::aquarat);
    CHECK(aqua.text.find("letter") != std::string::npos);

    // Same task twice: identical text.
    CHECK(set.initial_prompt(TaskKind::svamp).text == set.initial_prompt(TaskKind::svamp).text);
}

TEST_CASE("template loading failure modes") {
    testutil::TempDir dir("tmpl");
    // Missing separator.
    testutil::write_file(dir.path() / "feedback.txt", "role: feedback\nno separator");
    CHECK_THROWS_AS(TemplateSet::load(dir.path()), TemplateError);
    // Declared placeholder absent from the body.
    testutil::write_file(dir.path() / "feedback.txt",
                         "role: feedback\nplaceholders: query, output\n---\nonly {query}");
    CHECK_THROWS_AS(TemplateSet::load(dir.path()), TemplateError);
    // Directory missing required templates entirely.
    testutil::TempDir empty("tmpl-empty");
    CHECK_THROWS_AS(TemplateSet::load(empty.path()), TemplateError);
    CHECK_THROWS_AS(TemplateSet::load(empty.path() / "nope"), TemplateError);
}

TEST_CASE("verdict parsing is last-match and case-insensitive") {
    CHECK(parse_verdict("VERDICT: CORRECT").value == Verdict::Value::correct);
    CHECK(parse_verdict("verdict: incorrect").value == Verdict::Value::incorrect);
    CHECK(parse_verdict("The sum checks out.\nVerdict: Correct").value ==
          Verdict::Value::correct);
    CHECK(parse_verdict("VERDICT: CORRECT\n...wait no.\nVERDICT: INCORRECT").value ==
          Verdict::Value::incorrect);
    CHECK(parse_verdict("VERDICT: INCORRECT then VERDICT: CORRECT").value ==
          Verdict::Value::correct);
    CHECK(parse_verdict("I am not sure.").value == Verdict::Value::unparseable);
    CHECK(parse_verdict("").value == Verdict::Value::unparseable);
    // The word "incorrect" alone is not a verdict token.
    CHECK(parse_verdict("the answer is incorrect").value == Verdict::Value::unparseable);
    CHECK(parse_verdict("x").raw_judgment == "x");
}

TEST_CASE("optimizer prompt extraction") {
    CHECK(extract_optimized_prompt("<prompt>Do better.</prompt>") == "Do better.");
    CHECK(extract_optimized_prompt("Here you go:\n<prompt>\nSolve carefully.\n</prompt>\nDone") ==
          "Solve carefully.");
    // Last block wins.
    CHECK(extract_optimized_prompt("<prompt>first</prompt><prompt>second</prompt>") == "second");
    // No block: the whole completion, trimmed.
    CHECK(extract_optimized_prompt("  just a prompt  ") == "just a prompt");
    CHECK(extract_optimized_prompt("<prompt>   </prompt>").empty());
    CHECK(extract_optimized_prompt("   ").empty());
}
