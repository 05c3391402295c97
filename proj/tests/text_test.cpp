#include "gastmix/text.hpp"

#include "gastmix/rng.hpp"

#include <doctest.h>

using namespace gastmix;

TEST_CASE("fold lowers ascii and german letters") {
    CHECK(text::fold("HALLO") == "hallo");
    CHECK(text::fold("Österreich") == "österreich");
    CHECK(text::fold("GRÜSSE") == "grüsse");
    CHECK(text::fold("Straße") == "straße");
    CHECK(text::fold("ŁÓDŹ") == "łódź");
}

TEST_CASE("normalize collapses whitespace and folds case") {
    CHECK(text::normalize("  Das   Essen \t war GUT  ") == "das essen war gut");
    CHECK(text::normalize("a b") == text::normalize("A  b"));
    CHECK(text::content_hash("a b") == text::content_hash("A  b"));
    CHECK(text::content_hash("a b") != text::content_hash("a c"));
}

TEST_CASE("normalize composes combining marks") {
    // "ä" precomposed vs a + U+0308
    const std::string precomposed = "ärger";
    const std::string decomposed = "ärger";
    CHECK(text::normalize(precomposed) == text::normalize(decomposed));
    CHECK(text::content_hash("Café") == text::content_hash("Café"));
}

TEST_CASE("letter and case classification") {
    CHECK(text::is_letter(U'a'));
    CHECK(text::is_letter(U'ß'));
    CHECK(text::is_letter(U'Ä'));
    CHECK(!text::is_letter(U'5'));
    CHECK(!text::is_letter(U'!'));
    CHECK(!text::is_letter(U'×'));
    CHECK(text::is_upper(U'D'));
    CHECK(text::is_upper(U'Ö'));
    CHECK(!text::is_upper(U'ö'));
    CHECK(!text::is_upper(U'5'));
}

TEST_CASE("utf8 round trip through decode/append") {
    Rng rng(7);
    for (int it = 0; it < 200; ++it) {
        std::string s;
        const std::size_t n = rng.below(12);
        for (std::size_t i = 0; i < n; ++i) {
            const char32_t choices[] = {U'a', U'Z', U'ö', U'ß', U'€', U'語', U' '};
            text::append_utf8(s, choices[rng.below(std::size(choices))]);
        }
        std::string out;
        std::size_t pos = 0;
        while (pos < s.size()) text::append_utf8(out, text::decode_utf8(s, pos));
        CHECK(out == s);
    }
}

TEST_CASE("invalid utf8 bytes decode to replacement without advancing past them") {
    const std::string bad = "a\xC3();";
    std::size_t pos = 0;
    CHECK(text::decode_utf8(bad, pos) == U'a');
    const char32_t cp = text::decode_utf8(bad, pos);
    CHECK(cp == 0xFFFD);
    CHECK(pos <= bad.size());
}
