#pragma once

#include "promptloop/backend.hpp"
#include "promptloop/types.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace promptloop {

/// A role-defining prompt template. The user_template carries named
/// placeholders ({query}, {output}, {prompt}, {feedback}, {gold}); rendering
/// requires a binding for every declared placeholder and leaves no marker
/// behind.
struct RoleTemplate {
    RoleTag role_tag = RoleTag::task;
    std::string system_text;
    std::string user_template;
    std::set<std::string> placeholders;
};

std::string render(const RoleTemplate& tmpl, const std::map<std::string, std::string>& bindings);

/// The full set of templates this run uses: one per LLM role plus the
/// zero-shot initial task prompt per benchmark. Loaded once at startup from a
/// directory of front-matter text files; immutable afterwards.
class TemplateSet {
public:
    static TemplateSet load(const std::filesystem::path& dir);

    const RoleTemplate& role(RoleTag tag) const;
    PromptText initial_prompt(TaskKind task) const;

private:
    std::map<RoleTag, RoleTemplate> roles_;
    std::map<TaskKind, std::string> initial_;
};

/// Parses a verifier or judge completion. The verdict token is the last
/// case-insensitive "VERDICT: CORRECT" / "VERDICT: INCORRECT" occurrence;
/// anything else is unparseable.
Verdict parse_verdict(const std::string& raw);

/// Pulls the revised prompt out of an optimizer completion: the last
/// <prompt>...</prompt> block if present, otherwise the whole completion,
/// trimmed. Empty result means the optimizer produced nothing usable.
std::string extract_optimized_prompt(const std::string& raw);

}  // namespace promptloop
