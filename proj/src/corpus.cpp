#include "gastmix/corpus.hpp"

#include "gastmix/error.hpp"
#include "gastmix/text.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

namespace gastmix::corpus {

using nlohmann::json;

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<Date> Date::parse(std::string_view s) {
    // ISO-8601 calendar date; a longer timestamp is accepted and truncated.
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](std::size_t off, std::size_t len, int& out) {
        auto [p, ec] = std::from_chars(s.data() + off, s.data() + off + len, out);
        return ec == std::errc() && p == s.data() + off + len;
    };
    Date d;
    if (!num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day)) return std::nullopt;
    if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
    return d;
}

Sentence make_sentence(std::string review_id, int index, std::string text) {
    Sentence s;
    s.sentence_id = text::content_hash(text);
    s.review_id = std::move(review_id);
    s.index = index;
    s.text = std::move(text);
    s.tokens = tokenize(s.text);
    return s;
}

IngestFormat parse_format(std::string_view name) {
    if (name == "jsonl") return IngestFormat::Jsonl;
    if (name == "csv") return IngestFormat::Csv;
    throw DataError("unknown review format: '" + std::string(name) + "' (expected jsonl or csv)");
}

namespace {

std::string trimmed(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (static_cast<unsigned char>(s[b]) <= ' ')) ++b;
    while (e > b && (static_cast<unsigned char>(s[e - 1]) <= ' ')) --e;
    return std::string(s.substr(b, e - b));
}

Review review_from_json(const json& j) {
    Review r;
    if (!j.is_object()) throw DataError("record is not an object");
    if (!j.contains("review_id") || !j["review_id"].is_string())
        throw DataError("missing string field 'review_id'");
    if (!j.contains("business_id") || !j["business_id"].is_string())
        throw DataError("missing string field 'business_id'");
    if (!j.contains("text") || !j["text"].is_string()) throw DataError("missing string field 'text'");
    r.review_id = j["review_id"].get<std::string>();
    r.business_id = j["business_id"].get<std::string>();
    r.text = j["text"].get<std::string>();
    if (j.contains("date") && !j["date"].is_null()) {
        if (!j["date"].is_string()) throw DataError("field 'date' must be a string");
        auto d = Date::parse(j["date"].get<std::string>());
        if (!d) throw DataError("unparseable date '" + j["date"].get<std::string>() + "'");
        r.date = d;
    }
    if (j.contains("lat") && j["lat"].is_number()) r.lat = j["lat"].get<double>();
    if (j.contains("lon") && j["lon"].is_number()) r.lon = j["lon"].get<double>();
    if (r.review_id.empty()) throw DataError("empty review_id");
    if (trimmed(r.text).empty()) throw DataError("empty review text");
    return r;
}

// RFC-4180 style: comma separated, double-quote escaping, quoted fields may
// contain separators and doubled quotes. Embedded newlines are not supported
// (the reader is line based).
std::vector<std::string> parse_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            if (!cur.empty())
                throw DataError("line " + std::to_string(line_no) + ": stray quote inside unquoted field");
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
        ++i;
    }
    if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace

std::vector<Review> ingest_reviews(const std::string& path, IngestFormat format, bool strict,
                                   IngestStats& stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open review file: " + path);

    std::vector<Review> out;
    std::unordered_map<std::string, std::size_t> seen_ids;
    std::string line;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& msg) {
        const std::string full = path + ":" + std::to_string(line_no) + ": " + msg;
        if (strict) throw DataError(full);
        ++stats.skipped;
        stats.messages.push_back(full);
    };

    auto accept = [&](Review r) {
        if (auto [it, fresh] = seen_ids.emplace(r.review_id, line_no); !fresh) {
            throw DataError("duplicate review_id '" + r.review_id + "' (first seen at line " +
                            std::to_string(it->second) + ")");
        }
        out.push_back(std::move(r));
        ++stats.records_out;
    };

    if (format == IngestFormat::Jsonl) {
        while (std::getline(in, line)) {
            ++line_no;
            if (trimmed(line).empty()) continue;
            ++stats.records_in;
            try {
                accept(review_from_json(json::parse(line)));
            } catch (const json::exception& e) {
                fail(std::string("bad JSON: ") + e.what());
            } catch (const DataError& e) {
                fail(e.what());
            }
        }
        return out;
    }

    // CSV: header row is required and maps column names to fields.
    if (!std::getline(in, line)) throw DataError(path + ": missing CSV header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::unordered_map<std::string, std::size_t> cols;
    {
        auto header = parse_csv_line(line, line_no);
        for (std::size_t i = 0; i < header.size(); ++i) cols[trimmed(header[i])] = i;
    }
    for (const char* required : {"review_id", "business_id", "text"}) {
        if (!cols.count(required)) throw DataError(path + ": CSV header lacks column '" + std::string(required) + "'");
    }
    auto field = [&](const std::vector<std::string>& f, const char* name) -> std::optional<std::string> {
        auto it = cols.find(name);
        if (it == cols.end() || it->second >= f.size()) return std::nullopt;
        return f[it->second];
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        ++stats.records_in;
        try {
            auto f = parse_csv_line(line, line_no);
            Review r;
            r.review_id = field(f, "review_id").value_or("");
            r.business_id = field(f, "business_id").value_or("");
            r.text = field(f, "text").value_or("");
            if (r.review_id.empty()) throw DataError("empty review_id");
            if (r.business_id.empty()) throw DataError("empty business_id");
            if (trimmed(r.text).empty()) throw DataError("empty review text");
            if (auto ds = field(f, "date"); ds && !ds->empty()) {
                auto d = Date::parse(*ds);
                if (!d) throw DataError("unparseable date '" + *ds + "'");
                r.date = d;
            }
            for (auto [name, dst] : {std::pair{"lat", &r.lat}, std::pair{"lon", &r.lon}}) {
                if (auto v = field(f, name); v && !v->empty()) {
                    double x = 0;
                    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
                    if (ec != std::errc() || p != v->data() + v->size())
                        throw DataError("bad numeric field '" + std::string(name) + "'");
                    *dst = x;
                }
            }
            accept(std::move(r));
        } catch (const DataError& e) {
            fail(e.what());
        }
    }
    return out;
}

const std::set<std::string>& default_abbreviations() {
    static const std::set<std::string> abbrevs = {
        "z.b.", "bzw.", "ca.", "usw.", "dr.", "evtl.", "inkl.", "nr.", "u.a.",
    };
    return abbrevs;
}

std::set<std::string> load_abbreviations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open abbreviation list: " + path);
    std::set<std::string> abbrevs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trimmed(line);
        if (t.empty() || t[0] == '#') continue;
        abbrevs.insert(text::fold(t));
    }
    return abbrevs;
}

namespace {

// Longest run of letters and dots ending at byte `end` (inclusive of the
// final period), folded. Empty when the period follows whitespace.
std::string abbrev_candidate(std::string_view s, std::size_t dot_pos, std::size_t dot_len) {
    std::size_t begin = dot_pos;
    // walk back over codepoints that are letters or '.'
    while (begin > 0) {
        std::size_t prev = begin - 1;
        while (prev > 0 && (static_cast<unsigned char>(s[prev]) & 0xC0) == 0x80) --prev;
        std::size_t tmp = prev;
        const char32_t cp = text::decode_utf8(s, tmp);
        if (cp != '.' && !text::is_letter(cp)) break;
        begin = prev;
        if (dot_pos - begin > 24) break;  // abbreviations are short
    }
    if (begin == dot_pos) return {};
    return text::fold(s.substr(begin, dot_pos + dot_len - begin));
}

} // namespace

std::vector<std::string> split_sentences(std::string_view text_in,
                                         const std::set<std::string>& abbreviations) {
    std::vector<std::string> out;
    if (text_in.empty()) return out;

    std::size_t start = 0;
    std::size_t pos = 0;
    while (pos < text_in.size()) {
        const std::size_t cp_pos = pos;
        const char32_t cp = text::decode_utf8(text_in, pos);
        if (cp != '.' && cp != '!' && cp != '?') continue;

        // require whitespace then an uppercase letter
        std::size_t look = pos;
        bool saw_space = false;
        bool boundary = false;
        while (look < text_in.size()) {
            std::size_t next = look;
            const char32_t la = text::decode_utf8(text_in, next);
            if (text::is_space(la)) {
                saw_space = true;
                look = next;
                continue;
            }
            boundary = saw_space && text::is_upper(la);
            break;
        }
        if (look >= text_in.size()) boundary = false;  // trailing punctuation, no next sentence
        if (!boundary) continue;

        if (cp == '.') {
            const std::string cand = abbrev_candidate(text_in, cp_pos, pos - cp_pos);
            if (!cand.empty() && abbreviations.count(cand)) continue;
        }

        const std::string sentence = trimmed(text_in.substr(start, pos - start));
        if (!sentence.empty()) out.push_back(sentence);
        start = look;
    }
    const std::string tail = trimmed(text_in.substr(start));
    if (!tail.empty()) out.push_back(tail);
    return out;
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    std::size_t tok_start = 0;
    bool in_token = false;

    auto flush = [&](std::size_t end) {
        if (!in_token) return;
        Token t;
        t.start = tok_start;
        t.end = end;
        t.surface = std::string(s.substr(t.start, t.end - t.start));
        t.folded = text::fold(t.surface);
        tokens.push_back(std::move(t));
        in_token = false;
    };

    while (pos < s.size()) {
        const std::size_t cp_pos = pos;
        const char32_t cp = text::decode_utf8(s, pos);
        if (text::is_letter(cp)) {
            if (!in_token) {
                tok_start = cp_pos;
                in_token = true;
            }
            continue;
        }
        if (text::is_hyphen(cp) && in_token && pos < s.size()) {
            std::size_t next = pos;
            if (text::is_letter(text::decode_utf8(s, next))) continue;  // word-internal hyphen
        }
        flush(cp_pos);
    }
    flush(s.size());
    return tokens;
}

DedupeResult dedupe(std::vector<Sentence> sentences) {
    DedupeResult r;
    Deduper seen;
    for (auto& s : sentences) {
        if (seen.insert(s)) {
            r.unique.push_back(std::move(s));
        } else {
            ++r.duplicates;
        }
    }
    return r;
}

} // namespace gastmix::corpus
