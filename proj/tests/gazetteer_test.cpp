#include "gastmix/gazetteer.hpp"

#include "gastmix/error.hpp"
#include "gastmix/rng.hpp"
#include "gastmix/text.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

using namespace gastmix;
using gazetteer::Gazetteer;
using gazetteer::NationalityTerm;
using gazetteer::TermKind;
using gazetteer::TermSource;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    return path;
}

NationalityTerm term(const std::string& surface, const std::string& country,
                     TermKind kind = TermKind::Demonym) {
    NationalityTerm t;
    t.surface = surface;
    t.folded = text::fold(surface);
    t.country = country;
    t.kind = kind;
    return t;
}

Gazetteer make_gazetteer(const std::vector<NationalityTerm>& terms) {
    Gazetteer g(terms, {});
    g.compile();
    return g;
}

// naive scan oracle: a term matches iff its folded tokens equal a contiguous
// folded token subsequence
struct OracleHit {
    std::size_t term;
    std::size_t start;
    std::size_t end;
};

std::vector<OracleHit> naive_match(const Gazetteer& g, const corpus::Sentence& s) {
    std::vector<OracleHit> hits;
    for (std::size_t ti = 0; ti < g.terms().size(); ++ti) {
        std::vector<std::string> pattern;
        for (const auto& tok : corpus::tokenize(g.terms()[ti].folded)) pattern.push_back(tok.folded);
        if (pattern.empty()) continue;
        for (std::size_t start = 0; start + pattern.size() <= s.tokens.size(); ++start) {
            bool ok = true;
            for (std::size_t j = 0; j < pattern.size(); ++j) {
                if (s.tokens[start + j].folded != pattern[j]) {
                    ok = false;
                    break;
                }
            }
            if (ok) hits.push_back({ti, start, start + pattern.size() - 1});
        }
    }
    std::sort(hits.begin(), hits.end(), [&](const OracleHit& a, const OracleHit& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.end != b.end) return a.end > b.end;
        return g.terms()[a.term].folded < g.terms()[b.term].folded;
    });
    return hits;
}

} // namespace

TEST_CASE("load_lexicon reads seed rows and rejects bad input") {
    const auto ok = write_temp("gm_lex_ok.tsv",
                               "# surface\tcountry\tkind\n"
                               "Italiener\tIT\tdemonym\n"
                               "Amis\tUS\tslang\n"
                               "italienisch\tIT\tadjective\n");
    const auto g = gazetteer::load_lexicon(ok);
    CHECK(g.terms().size() == 3);
    CHECK(g.terms()[0].source == TermSource::Seed);
    CHECK(g.terms()[0].country == "IT");

    const auto dup = write_temp("gm_lex_dup.tsv", "amis\tUS\tslang\nAmis\tUS\tslang\n");
    CHECK_THROWS_WITH_AS(gazetteer::load_lexicon(dup), doctest::Contains("line 1"), DataError);

    const auto bad_cc = write_temp("gm_lex_cc.tsv", "Italiener\tXX\tdemonym\n");
    CHECK_THROWS_WITH_AS(gazetteer::load_lexicon(bad_cc), doctest::Contains("invalid country"), DataError);
}

TEST_CASE("country code validation") {
    CHECK(gazetteer::is_valid_country_code("DE"));
    CHECK(gazetteer::is_valid_country_code("IT"));
    CHECK(gazetteer::is_valid_country_code("US"));
    CHECK(!gazetteer::is_valid_country_code("XX"));
    CHECK(!gazetteer::is_valid_country_code("D"));
    CHECK(!gazetteer::is_valid_country_code("DEU"));
}

TEST_CASE("inflect applies the -er suffix rules") {
    const auto v = gazetteer::inflect(term("Italiener", "IT"));
    std::set<std::string> got;
    for (const auto& t : v) {
        got.insert(t.surface);
        CHECK(t.source == TermSource::Inflected);
        CHECK(t.country == "IT");
    }
    CHECK(got == std::set<std::string>{"Italienern", "Italienerin", "Italienerinnen", "Italieners"});
}

TEST_CASE("inflect leaves slang and adjectives alone") {
    CHECK(gazetteer::inflect(term("Amis", "US", TermKind::Slang)).empty());
    CHECK(gazetteer::inflect(term("italienisch", "IT", TermKind::Adjective)).empty());
    CHECK(gazetteer::inflect(term("Franzosen", "FR")).empty());
}

TEST_CASE("inflect_all is idempotent after dedup") {
    auto g = make_gazetteer({term("Italiener", "IT"), term("Amerikaner", "US")});
    const std::size_t added = gazetteer::inflect_all(g);
    CHECK(added == 8);
    CHECK(gazetteer::inflect_all(g) == 0);
}

TEST_CASE("matcher finds token-level matches with boundaries") {
    auto g = make_gazetteer({term("Italiener", "IT"), term("Ami", "US", TermKind::Slang)});
    const auto s = corpus::make_sentence("r", 0, "Beim Italiener war das Essen fantastisch.");
    const auto spans = g.match(s);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].token_start == 1);
    CHECK(spans[0].token_end == 1);
    CHECK(g.terms()[spans[0].term_index].country == "IT");
    // char offsets reconstruct the folded surface
    const auto piece = s.text.substr(spans[0].char_start, spans[0].char_end - spans[0].char_start);
    CHECK(text::fold(piece) == "italiener");

    // boundary rule: "ami" must not fire inside "Familie"
    const auto fam = corpus::make_sentence("r", 1, "Die Familie war nett.");
    CHECK(g.match(fam).empty());
}

TEST_CASE("multi-token terms and overlap ordering") {
    auto g = make_gazetteer({term("New Yorker", "US"), term("Yorker", "US", TermKind::Slang)});
    const auto s = corpus::make_sentence("r", 0, "Die New Yorker waren laut.");
    const auto spans = g.match(s);
    REQUIRE(spans.size() == 2);
    // left-to-right, longest first on the same start
    CHECK(spans[0].token_start == 1);
    CHECK(spans[0].token_end == 2);
    CHECK(spans[1].token_start == 2);
    CHECK(spans[1].token_end == 2);
}

TEST_CASE("match on sentence without terms is empty") {
    auto g = make_gazetteer({term("Italiener", "IT")});
    CHECK(g.match(corpus::make_sentence("r", 0, "Das Hotel war sehr sauber.")).empty());
}

TEST_CASE("automaton equals naive oracle on randomized cases") {
    Rng rng(2024);
    const int vocab_size = 30;
    // letter-encoded ids; the tokenizer drops digits
    auto tok = [&](Rng& r) {
        std::string s = "t";
        for (auto n = r.below(static_cast<std::uint64_t>(vocab_size));; n /= 10) {
            s += static_cast<char>('a' + n % 10);
            if (n < 10) break;
        }
        return s;
    };

    for (int round = 0; round < 20; ++round) {
        std::vector<NationalityTerm> terms;
        std::set<std::string> used;
        const std::size_t n_terms = 1 + rng.below(60);
        for (std::size_t i = 0; i < n_terms; ++i) {
            std::string surface = tok(rng);
            const std::size_t extra = rng.below(3);
            for (std::size_t j = 0; j < extra; ++j) surface += " " + tok(rng);
            if (!used.insert(text::fold(surface)).second) continue;
            terms.push_back(term(surface, "DE"));
        }
        auto g = make_gazetteer(terms);

        for (int si = 0; si < 100; ++si) {
            std::string sentence_text;
            const std::size_t len = rng.below(12);
            for (std::size_t j = 0; j < len; ++j) {
                if (j) sentence_text += ' ';
                sentence_text += tok(rng);
            }
            const auto s = corpus::make_sentence("r", si, sentence_text);
            const auto got = g.match(s);
            const auto want = naive_match(g, s);
            REQUIRE(got.size() == want.size());
            for (std::size_t j = 0; j < got.size(); ++j) {
                CHECK(got[j].term_index == want[j].term);
                CHECK(got[j].token_start == want[j].start);
                CHECK(got[j].token_end == want[j].end);
            }
        }
    }
}

TEST_CASE("expansion adds nearest neighbors with the seed's country") {
    // toy table built so that "amis" is the nearest neighbor of "amerikaner"
    std::vector<std::string> words{"amerikaner", "amis", "hotel", "pool"};
    std::vector<double> matrix{
        1.0, 0.0, 0.0,   // amerikaner
        0.99, 0.1, 0.0,  // amis
        0.0, 1.0, 0.0,   // hotel
        0.0, 0.0, 1.0,   // pool
    };
    const embeddings::EmbeddingTable table(3, std::move(words), std::move(matrix));

    auto g = make_gazetteer({term("Amerikaner", "US")});
    const auto report = gazetteer::expand_with_knn(g, table, 1, 0.5);
    CHECK(report.added == 1);
    REQUIRE(g.has_surface("amis"));
    const auto* t = g.term_by_surface("amis");
    CHECK(t->country == "US");
    CHECK(t->kind == TermKind::Slang);
    CHECK(t->source == TermSource::Expanded);

    // k = 0 leaves the gazetteer unchanged; rerunning is idempotent
    auto g2 = make_gazetteer({term("Amerikaner", "US")});
    CHECK(gazetteer::expand_with_knn(g2, table, 0, 0.5).added == 0);
    CHECK(g2.terms().size() == 1);
    const std::size_t before = g.terms().size();
    const auto again = gazetteer::expand_with_knn(g, table, 1, 0.5);
    CHECK(again.added == 0);
    CHECK(g.terms().size() == before);
    // the neighbor is reported as already known
    bool found = false;
    for (const auto& e : again.entries) {
        if (e.neighbor == "amis") {
            found = true;
            CHECK(!e.accepted);
            CHECK(e.reason == "already a term");
        }
    }
    CHECK(found);
}

TEST_CASE("expansion respects the veto list and reports missing seeds") {
    std::vector<std::string> words{"amerikaner", "amis"};
    std::vector<double> matrix{1.0, 0.0, 0.99, 0.1};
    const embeddings::EmbeddingTable table(2, std::move(words), std::move(matrix));

    Gazetteer g({term("Amerikaner", "US"), term("Italiener", "IT")}, {"amis"});
    g.compile();
    const auto report = gazetteer::expand_with_knn(g, table, 1, 0.5);
    CHECK(report.added == 0);
    CHECK(!g.has_surface("amis"));
    REQUIRE(report.missing_seeds.size() == 1);
    CHECK(report.missing_seeds[0] == "Italiener");
    bool vetoed = false;
    for (const auto& e : report.entries) {
        if (e.neighbor == "amis" && e.reason == "vetoed") vetoed = true;
    }
    CHECK(vetoed);
}

TEST_CASE("filter_corpus partition is exact and stats add up") {
    auto g = make_gazetteer({term("Italiener", "IT"), term("Amis", "US", TermKind::Slang)});
    std::vector<corpus::Sentence> corpus_sentences;
    corpus_sentences.push_back(corpus::make_sentence("r1", 0, "Die Amis sind wieder negativ aufgefallen."));
    corpus_sentences.push_back(corpus::make_sentence("r1", 1, "Das Hotel war sehr sauber."));
    corpus_sentences.push_back(corpus::make_sentence("r2", 0, "Beim Italiener war das Essen fantastisch."));
    corpus_sentences.push_back(corpus::make_sentence("r2", 1, "Amis und Italiener am Pool."));

    const auto r = gazetteer::filter_corpus(g, corpus_sentences);
    CHECK(r.with_terms.size() == 3);
    CHECK(r.without_terms.size() == 1);
    CHECK(r.stats.with_terms == 3);
    CHECK(r.stats.without_terms == 3 + 1 - 3);
    std::size_t freq_total = 0;
    for (const auto& [surface, count] : r.stats.term_frequencies) freq_total += count;
    CHECK(freq_total == 4);  // two single matches plus one sentence with two
    CHECK(r.with_terms.size() + r.without_terms.size() == corpus_sentences.size());
}

TEST_CASE("empty corpus filters to empty partitions") {
    auto g = make_gazetteer({term("Italiener", "IT")});
    const auto r = gazetteer::filter_corpus(g, {});
    CHECK(r.with_terms.empty());
    CHECK(r.without_terms.empty());
}

TEST_CASE("match spans fold back to the term surface") {
    auto g = make_gazetteer({term("Österreicher", "AT")});
    const auto s = corpus::make_sentence("r", 0, "Viele ÖSTERREICHER waren da.");
    const auto spans = g.match(s);
    REQUIRE(spans.size() == 1);
    std::string folded_tokens;
    for (std::size_t i = spans[0].token_start; i <= spans[0].token_end; ++i) {
        if (i > spans[0].token_start) folded_tokens += ' ';
        folded_tokens += s.tokens[i].folded;
    }
    CHECK(folded_tokens == g.terms()[spans[0].term_index].folded);
}
