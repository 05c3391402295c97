#ifndef GASTMIX_GAZETTEER_HPP
#define GASTMIX_GAZETTEER_HPP

#include "gastmix/corpus.hpp"
#include "gastmix/embeddings.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gastmix::gazetteer {

enum class TermKind { Demonym, Adjective, Slang };
enum class TermSource { Seed, Inflected, Expanded };

std::string_view to_string(TermKind k);
std::string_view to_string(TermSource s);
TermKind parse_kind(std::string_view s);
TermSource parse_source(std::string_view s);

bool is_valid_country_code(std::string_view code);  // ISO 3166-1 alpha-2

struct NationalityTerm {
    std::string surface;
    std::string folded;
    std::string country;  // alpha-2
    TermKind kind = TermKind::Demonym;
    TermSource source = TermSource::Seed;
};

struct MatchSpan {
    std::size_t term_index;      // into Gazetteer::terms()
    std::size_t token_start;     // inclusive token index
    std::size_t token_end;       // inclusive token index
    std::size_t char_start;      // byte offsets into the sentence text
    std::size_t char_end;
};

// Token-level multi-pattern matcher (Aho-Corasick over interned token ids).
// A pattern matches iff its folded token sequence equals a contiguous folded
// token subsequence; matching never fires inside a token, so "ami" cannot
// match "familie".
class TokenAutomaton {
public:
    TokenAutomaton() = default;
    explicit TokenAutomaton(const std::vector<std::vector<std::string>>& patterns);

    struct Hit {
        std::size_t pattern;
        std::size_t token_start;
        std::size_t token_end;  // inclusive
    };

    // All hits in left-to-right order; on equal start, longer pattern first.
    std::vector<Hit> find(const std::vector<corpus::Token>& tokens) const;

    std::size_t pattern_count() const { return pattern_lengths_.size(); }

private:
    struct Node {
        std::unordered_map<std::uint32_t, std::uint32_t> next;
        std::uint32_t fail = 0;
        std::vector<std::uint32_t> outputs;  // pattern ids ending here (incl. via fail chain)
    };

    std::uint32_t symbol(std::string_view token) const;

    std::unordered_map<std::string, std::uint32_t> symbols_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> pattern_lengths_;
};

class Gazetteer {
public:
    Gazetteer() = default;
    Gazetteer(std::vector<NationalityTerm> terms, std::set<std::string> veto);

    const std::vector<NationalityTerm>& terms() const { return terms_; }
    const std::set<std::string>& veto() const { return veto_; }

    bool has_surface(std::string_view folded) const { return by_folded_.count(std::string(folded)) > 0; }
    const NationalityTerm* term_by_surface(std::string_view folded) const;

    // Adds terms that are new after case-folding; silently drops duplicates
    // and vetoed surfaces. Returns the number actually added. The matcher is
    // rebuilt on the next match() after any mutation.
    std::size_t add_terms(const std::vector<NationalityTerm>& batch);

    std::vector<MatchSpan> match(const corpus::Sentence& sentence) const;

    void compile();

private:
    std::vector<NationalityTerm> terms_;
    std::set<std::string> veto_;  // folded surfaces
    std::unordered_map<std::string, std::size_t> by_folded_;
    TokenAutomaton automaton_;
    std::vector<std::size_t> active_terms_;  // pattern id -> term index
    bool compiled_ = false;
};

// Lexicon TSV: surface<TAB>country<TAB>kind with optional 4th column source;
// '#' starts a comment line. Duplicate folded surfaces and invalid country
// codes are reported with line numbers.
Gazetteer load_lexicon(const std::string& path, std::set<std::string> veto = {});

std::set<std::string> load_veto(const std::string& path);

void save_lexicon(const Gazetteer& g, const std::string& path);

// German suffix rules for demonym and slang base forms ending in -er:
// +n (dative plural), +in / +innen (feminine), +s (colloquial plural).
// Adjectives and other endings produce no variants.
std::vector<NationalityTerm> inflect(const NationalityTerm& term);

// Applies inflect to every term and adds the new variants.
std::size_t inflect_all(Gazetteer& g);

struct ExpansionEntry {
    std::string seed;
    std::string neighbor;
    double similarity = 0;
    bool accepted = false;
    std::string reason;  // why not accepted, empty otherwise
};

struct ExpansionReport {
    std::vector<ExpansionEntry> entries;
    std::vector<std::string> missing_seeds;  // seed surfaces absent from the table
    std::size_t added = 0;
};

// For every seed term whose folded surface is in the embedding vocabulary,
// adds its k nearest neighbors with similarity >= min_sim as slang terms
// inheriting the seed's country. Vetoed and already-known surfaces are
// skipped but still appear in the report.
ExpansionReport expand_with_knn(Gazetteer& g, const embeddings::EmbeddingTable& table,
                                std::size_t k = 10, double min_sim = 0.5);

struct FilterStats {
    std::size_t with_terms = 0;
    std::size_t without_terms = 0;
    std::map<std::string, std::size_t> term_frequencies;  // folded surface -> match count
};

struct FilterResult {
    std::vector<corpus::Sentence> with_terms;
    std::vector<corpus::Sentence> without_terms;
    FilterStats stats;
};

FilterResult filter_corpus(const Gazetteer& g, std::vector<corpus::Sentence> sentences);

} // namespace gastmix::gazetteer

#endif
