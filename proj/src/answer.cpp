#include "promptloop/answer.hpp"

#include "promptloop/errors.hpp"

#include <algorithm>
#include <cctype>

namespace promptloop {

namespace {

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

// Strips one currency symbol if present at position i; returns chars consumed.
std::size_t currency_len(const std::string& s, std::size_t i) {
    if (s[i] == '$') return 1;
    // UTF-8 encodings of the common currency signs.
    static const char* kSigns[] = {"\xe2\x82\xac" /* euro */, "\xc2\xa3" /* pound */,
                                   "\xc2\xa5" /* yen */};
    for (const char* sign : kSigns) {
        std::size_t len = std::char_traits<char>::length(sign);
        if (s.compare(i, len, sign) == 0) return len;
    }
    return 0;
}

}  // namespace

std::optional<std::string> canonicalize_number(const std::string& raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    if (begin == end) return std::nullopt;

    bool negative = false;
    std::size_t i = begin;
    if (raw[i] == '+' || raw[i] == '-') {
        negative = raw[i] == '-';
        ++i;
    }
    if (std::size_t n = (i < end) ? currency_len(raw, i) : 0) i += n;
    if (i < end && (raw[i] == '+' || raw[i] == '-')) {
        // Sign after a currency symbol ("$-3").
        if (negative) return std::nullopt;
        negative = raw[i] == '-';
        ++i;
    }

    std::string int_part;
    std::string frac_part;
    bool seen_dot = false;
    bool seen_digit = false;
    for (; i < end; ++i) {
        char c = raw[i];
        if (is_digit(c)) {
            (seen_dot ? frac_part : int_part).push_back(c);
            seen_digit = true;
        } else if (c == ',' && !seen_dot) {
            // Thousands separator: must sit between digits.
            if (!seen_digit || i + 1 >= end || !is_digit(raw[i + 1])) return std::nullopt;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c == '%' && i + 1 == end) {
            break;  // trailing percent sign: "45%" means the number 45
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) return std::nullopt;

    // Strip leading zeros of the integer part and trailing zeros of the fraction.
    std::size_t first = int_part.find_first_not_of('0');
    int_part = (first == std::string::npos) ? "" : int_part.substr(first);
    std::size_t last = frac_part.find_last_not_of('0');
    frac_part = (last == std::string::npos) ? "" : frac_part.substr(0, last + 1);

    if (int_part.empty()) int_part = "0";
    std::string out = int_part;
    if (!frac_part.empty()) {
        out += '.';
        out += frac_part;
    }
    bool is_zero = out == "0";
    if (negative && !is_zero) out.insert(out.begin(), '-');
    return out;
}

NormalizedAnswer NormalizedAnswer::of_number(const std::string& raw) {
    auto canon = canonicalize_number(raw);
    if (!canon) throw ComparisonError("not a number: \"" + raw + "\"");
    NormalizedAnswer a;
    a.kind = Kind::number;
    a.number = *canon;
    return a;
}

NormalizedAnswer NormalizedAnswer::of_words(std::vector<std::string> tokens) {
    NormalizedAnswer a;
    a.kind = Kind::word_sequence;
    a.words = std::move(tokens);
    for (auto& w : a.words) {
        std::transform(w.begin(), w.end(), w.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    return a;
}

NormalizedAnswer NormalizedAnswer::of_choice(char letter) {
    char up = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    if (up < 'A' || up > 'E') throw ComparisonError(std::string("not a choice letter: ") + letter);
    NormalizedAnswer a;
    a.kind = Kind::choice_letter;
    a.choice = up;
    return a;
}

std::string NormalizedAnswer::render() const {
    switch (kind) {
        case Kind::number:
            return number;
        case Kind::word_sequence: {
            std::string out;
            for (std::size_t i = 0; i < words.size(); ++i) {
                if (i) out += ' ';
                out += words[i];
            }
            return out;
        }
        case Kind::choice_letter:
            return std::string(1, choice);
    }
    return {};
}

bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b) {
    if (a.kind != b.kind) throw ComparisonError("answer variant mismatch");
    switch (a.kind) {
        case NormalizedAnswer::Kind::number:
            return a.number == b.number;
        case NormalizedAnswer::Kind::word_sequence:
            return a.words == b.words;
        case NormalizedAnswer::Kind::choice_letter:
            return a.choice == b.choice;
    }
    return false;
}

}  // namespace promptloop
