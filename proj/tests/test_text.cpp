#include <doctest.h>

#include <string>
#include <vector>

#include "c3/text.hpp"

using c3::clean_text;
using c3::segment_raw;
using c3::tokenize;
using c3::utf8_length;

TEST_CASE("clean_text lowercases and strips punctuation, digits, symbols") {
    CHECK(clean_text("Hello, World!") == "hello world");
    CHECK(clean_text("BUY 500mg NOW!!!") == "buy mg now");
    CHECK(clean_text("price: $40 (cash only)") == "price cash only");
    // stripped characters vanish in place, they do not become separators
    CHECK(clean_text("semi-colons; and/or slashes") == "semicolons andor slashes");
}

TEST_CASE("clean_text collapses whitespace runs") {
    CHECK(clean_text("a   b\t\tc\n\nd") == "a b c d");
    CHECK(clean_text("  leading and trailing  ") == "leading and trailing");
}

TEST_CASE("clean_text strips emoji but keeps accented letters") {
    CHECK(clean_text("fire \xF0\x9F\x94\xA5 deal \xF0\x9F\x92\x8A now") == "fire deal now");
    // U+00E9 e-acute survives as a letter
    CHECK(clean_text("caf\xC3\xA9") == "caf\xC3\xA9");
}

TEST_CASE("clean_text may produce empty output") {
    CHECK(clean_text("12345 !!! ???").empty());
    CHECK(clean_text("").empty());
}

TEST_CASE("clean_text is idempotent") {
    const std::vector<std::string> raws = {
        "Hello, World!", "BUY 500mg NOW!!!", "a   b\t\tc", "caf\xC3\xA9 \xF0\x9F\x94\xA5", "",
    };
    for (const auto& r : raws) {
        const std::string once = clean_text(r);
        CHECK(clean_text(once) == once);
    }
}

TEST_CASE("segment_raw splits on sentence punctuation and line breaks") {
    const auto chunks = segment_raw("First one. Second one! Third?\nFourth line");
    REQUIRE(chunks.size() == 4);
    CHECK(chunks[0] == "First one");
    CHECK(chunks[1] == "Second one");
    CHECK(chunks[2] == "Third");
    CHECK(chunks[3] == "Fourth line");
}

TEST_CASE("segment_raw without delimiters yields one chunk") {
    const auto chunks = segment_raw("no delimiters here at all");
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0] == "no delimiters here at all");
}

TEST_CASE("segment_raw drops empty chunks") {
    for (const auto& c : segment_raw("...\n\n!!!  \n end.")) CHECK(!c.empty());
    CHECK(segment_raw("").empty());
    CHECK(segment_raw("   \n\n  ").empty());
}

TEST_CASE("tokenize splits cleaned text on whitespace") {
    const auto toks = tokenize("buy some stuff now");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0] == "buy");
    CHECK(toks[3] == "now");
    CHECK(tokenize("").empty());
    CHECK(tokenize("one").size() == 1);
}

TEST_CASE("utf8_length counts codepoints") {
    CHECK(utf8_length("") == 0);
    CHECK(utf8_length("abc") == 3);
    CHECK(utf8_length("caf\xC3\xA9") == 4);              // 2-byte e-acute
    CHECK(utf8_length("\xF0\x9F\x94\xA5") == 1);         // 4-byte emoji
    CHECK(utf8_length("a\xE2\x82\xACz") == 3);           // 3-byte euro sign
}
