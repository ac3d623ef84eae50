#include <catch2/catch.hpp>

#include "tritier/text.hpp"

using namespace tritier;

TEST_CASE("codepoint_count counts Unicode scalar values") {
    CHECK(text::codepoint_count("") == 0);
    CHECK(text::codepoint_count("abc") == 3);
    CHECK(text::codepoint_count("意境") == 2);
    CHECK(text::codepoint_count("a意b境c") == 5);
    CHECK(text::codepoint_count("🎨🖌") == 2);
}

TEST_CASE("fold lowercases, strips diacritics, folds fullwidth forms") {
    CHECK(text::fold("HELLO") == "hello");
    CHECK(text::fold("Yūgen") == "yugen");
    CHECK(text::fold("nastaʿlīq") == "nastaliq");
    CHECK(text::fold("Shāhnāmeh") == "shahnameh");
    CHECK(text::fold("négārgārī") == "negargari");
    CHECK(text::fold("ＡＢＣ！") == "abc!");
    CHECK(text::fold("中文不变") == "中文不变");
    // combining-mark spelling folds to the same bytes as precomposed
    CHECK(text::fold("yu\xCC\x84gen") == text::fold("yūgen"));
}

TEST_CASE("fold keeps keyword containment stable") {
    const std::string haystack = text::fold("The WABI-SABI mood and Nastaʿlīq script");
    CHECK(text::contains_folded(haystack, "wabi-sabi"));
    CHECK(text::contains_folded(haystack, "nastaliq"));
    CHECK_FALSE(text::contains_folded(haystack, "yugen"));
    CHECK_FALSE(text::contains_folded(haystack, ""));
}

TEST_CASE("tokenize splits Latin words and emits CJK bigrams") {
    CHECK(text::tokenize("Hello, world!") == std::vector<std::string>{"hello", "world"});
    CHECK(text::tokenize("留白之美") == std::vector<std::string>{"留白", "白之", "之美"});
    // isolated single CJK char becomes a unigram
    CHECK(text::tokenize("墨 and ink") == std::vector<std::string>{"墨", "and", "ink"});
    CHECK(text::tokenize("") == std::vector<std::string>{});
    CHECK(text::tokenize("ink-wash 山水") ==
          std::vector<std::string>{"ink", "wash", "山水"});
}

TEST_CASE("sentence_count follows the terminator rules") {
    CHECK(text::sentence_count("") == 0);
    CHECK(text::sentence_count("   ") == 0);
    CHECK(text::sentence_count("One. Two. Three.") == 3);
    CHECK(text::sentence_count("第一句。第二句。") == 2);
    // ASCII terminator not followed by whitespace does not split
    CHECK(text::sentence_count("pi is 3.14 roughly") == 1);
    // consecutive terminators collapse
    CHECK(text::sentence_count("What?! Really!!") == 2);
    // trailing unterminated segment counts
    CHECK(text::sentence_count("no terminator here") == 1);
    // CJK terminator splits without whitespace
    CHECK(text::sentence_count("妙哉！果然。And then some.") == 3);
    CHECK(text::sentence_count("。。。") == 0);
}

TEST_CASE("fold/tokenize handle invalid UTF-8 without crashing") {
    const std::string bad = "ok\xFF\xFEtext \xC3 more";
    CHECK(text::codepoint_count(bad) > 0);
    CHECK_NOTHROW(text::fold(bad));
    CHECK_NOTHROW(text::tokenize(bad));
    CHECK_NOTHROW(text::sentence_count(bad));
}
