#pragma once

#include <optional>
#include <string>
#include <vector>

namespace promptloop {

/// A benchmark answer in canonical form. Three variants cover the five
/// supported tasks: a canonical decimal for the numeric tasks, an ordered
/// lowercase word list for word sorting, and an option letter for
/// multiple-choice problems.
struct NormalizedAnswer {
    enum class Kind { number, word_sequence, choice_letter };

    Kind kind = Kind::number;
    std::string number;               // canonical decimal, e.g. "13", "-0.5", "13000"
    std::vector<std::string> words;   // lowercase tokens, order-sensitive
    char choice = 0;                  // 'A'..'E'

    static NormalizedAnswer of_number(const std::string& raw);
    static NormalizedAnswer of_words(std::vector<std::string> tokens);
    static NormalizedAnswer of_choice(char letter);

    /// Human-readable rendering of the canonical value ("13", "apple banana", "B").
    std::string render() const;
};

/// Canonicalize a numeric string: strips currency symbols and thousands
/// separators, normalizes sign and leading/trailing zeros, drops a bare
/// trailing decimal point. Returns nullopt when the input is not a number.
std::optional<std::string> canonicalize_number(const std::string& raw);

/// Exact comparison under each variant's canonical form.
/// Throws ComparisonError when the variants differ.
bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b);

}  // namespace promptloop
