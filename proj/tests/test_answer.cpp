#include <doctest.h>

#include "promptloop/answer.hpp"
#include "promptloop/errors.hpp"

#include <algorithm>
#include <random>

using namespace promptloop;

TEST_CASE("numeric canonicalization") {
    CHECK(*canonicalize_number("13") == "13");
    CHECK(*canonicalize_number("13.0") == "13");
    CHECK(*canonicalize_number("13.") == "13");
    CHECK(*canonicalize_number("13,000") == "13000");
    CHECK(*canonicalize_number("$1,234.50") == "1234.5");
    CHECK(*canonicalize_number(" 42 ") == "42");
    CHECK(*canonicalize_number("007") == "7");
    CHECK(*canonicalize_number("-5") == "-5");
    CHECK(*canonicalize_number("+5") == "5");
    CHECK(*canonicalize_number("-0") == "0");
    CHECK(*canonicalize_number("-0.0") == "0");
    CHECK(*canonicalize_number("0.50") == "0.5");
    CHECK(*canonicalize_number(".5") == "0.5");
    CHECK(*canonicalize_number("-.5") == "-0.5");
    CHECK(*canonicalize_number("45%") == "45");
    CHECK(*canonicalize_number("$-3") == "-3");
    CHECK(*canonicalize_number("€12") == "12");

    CHECK(!canonicalize_number(""));
    CHECK(!canonicalize_number("abc"));
    CHECK(!canonicalize_number("twelve"));
    CHECK(!canonicalize_number("1.2.3"));
    CHECK(!canonicalize_number("--3"));
    CHECK(!canonicalize_number("1, 2"));
    CHECK(!canonicalize_number("."));
}

TEST_CASE("answers_equal per variant") {
    CHECK(answers_equal(NormalizedAnswer::of_number("13"), NormalizedAnswer::of_number("13.0")));
    CHECK(answers_equal(NormalizedAnswer::of_choice('B'), NormalizedAnswer::of_choice('B')));
    CHECK(!answers_equal(NormalizedAnswer::of_number("72"), NormalizedAnswer::of_number("27")));
    CHECK(answers_equal(NormalizedAnswer::of_number("13,000"),
                        NormalizedAnswer::of_number("13000")));
    CHECK(answers_equal(NormalizedAnswer::of_words({"Apple", "Banana"}),
                        NormalizedAnswer::of_words({"apple", "banana"})));
    CHECK(!answers_equal(NormalizedAnswer::of_words({"a", "b"}),
                         NormalizedAnswer::of_words({"b", "a"})));
    CHECK(!answers_equal(NormalizedAnswer::of_choice('B'), NormalizedAnswer::of_choice('C')));

    CHECK_THROWS_AS(answers_equal(NormalizedAnswer::of_number("1"),
                                  NormalizedAnswer::of_choice('A')),
                    ComparisonError);
    CHECK_THROWS_AS(NormalizedAnswer::of_choice('F'), ComparisonError);
    CHECK_THROWS_AS(NormalizedAnswer::of_number("not a number"), ComparisonError);
}

TEST_CASE("render reflects the canonical value") {
    CHECK(NormalizedAnswer::of_number("13.50").render() == "13.5");
    CHECK(NormalizedAnswer::of_words({"b", "a"}).render() == "b a");
    CHECK(NormalizedAnswer::of_choice('d').render() == "D");
}

// Property: canonicalization is idempotent and insensitive to formatting
// noise (thousands commas, trailing zeros, plus signs) over generated
// decimals.
TEST_CASE("canonicalization properties") {
    std::mt19937 rng(20240811);
    std::uniform_int_distribution<int> int_part(0, 999999);
    std::uniform_int_distribution<int> frac_digits(0, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
        const std::string base = std::to_string(int_part(rng));
        const int fd = frac_digits(rng);
        std::string frac;
        for (int i = 0; i < fd; ++i) frac += static_cast<char>('0' + (rng() % 10));
        std::string value = base;
        if (!frac.empty()) value += "." + frac;

        const auto canon = canonicalize_number(value);
        REQUIRE(canon.has_value());
        CHECK(*canonicalize_number(*canon) == *canon);

        std::string grouped;
        int count = 0;
        for (auto it = base.rbegin(); it != base.rend(); ++it) {
            if (count && count % 3 == 0) grouped += ',';
            grouped += *it;
            ++count;
        }
        std::reverse(grouped.begin(), grouped.end());
        if (!frac.empty()) {
            grouped += "." + frac;
            if (coin(rng)) grouped += "0";  // trailing zero after a fraction
        }
        if (coin(rng)) grouped.insert(grouped.begin(), '+');
        CHECK(*canonicalize_number(grouped) == *canon);
    }
}
