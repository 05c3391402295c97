#ifndef GASTMIX_CORPUS_HPP
#define GASTMIX_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace gastmix::corpus {

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    std::string iso() const;
    static std::optional<Date> parse(std::string_view s);
};

struct Review {
    std::string review_id;
    std::string business_id;
    std::optional<Date> date;
    std::string text;
    std::optional<double> lat;
    std::optional<double> lon;
};

struct Token {
    std::string surface;
    std::string folded;
    std::size_t start = 0;  // byte offsets into the sentence text, [start, end)
    std::size_t end = 0;
};

struct Sentence {
    std::uint64_t sentence_id = 0;  // content hash of the normalized text
    std::string review_id;
    int index = 0;  // ordinal within the review
    std::string text;
    std::vector<Token> tokens;
};

Sentence make_sentence(std::string review_id, int index, std::string text);

enum class IngestFormat { Jsonl, Csv };

struct IngestStats {
    std::size_t records_in = 0;
    std::size_t records_out = 0;
    std::size_t skipped = 0;
    std::vector<std::string> messages;  // one per skipped record, with line number
};

// Reads a review file. In lenient mode malformed records are counted and
// skipped; in strict mode the first malformed record aborts with its line
// number. Duplicate review ids count as malformed.
std::vector<Review> ingest_reviews(const std::string& path, IngestFormat format, bool strict,
                                   IngestStats& stats);

IngestFormat parse_format(std::string_view name);

// Default abbreviation list for the sentence splitter; a user-supplied file
// replaces it (one entry per line, '#' comments).
const std::set<std::string>& default_abbreviations();

std::set<std::string> load_abbreviations(const std::string& path);

// Splits at . ! ? followed by whitespace and an uppercase letter. A period
// does not split when the text ending at it is a listed abbreviation.
std::vector<std::string> split_sentences(std::string_view text,
                                         const std::set<std::string>& abbreviations = default_abbreviations());

// Tokens are maximal runs of letters plus word-internal hyphens; digits and
// punctuation never enter a token.
std::vector<Token> tokenize(std::string_view sentence_text);

struct DedupeResult {
    std::vector<Sentence> unique;
    std::size_t duplicates = 0;
};

DedupeResult dedupe(std::vector<Sentence> sentences);

// Incremental variant used by streaming ingestion.
class Deduper {
public:
    // Returns true when the sentence was unseen (and should be kept).
    bool insert(const Sentence& s) { return seen_.insert(s.sentence_id).second; }
    std::size_t size() const { return seen_.size(); }

private:
    std::unordered_set<std::uint64_t> seen_;
};

} // namespace gastmix::corpus

#endif
