#include "gastmix/gazetteer.hpp"

#include "gastmix/error.hpp"
#include "gastmix/text.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

namespace gastmix::gazetteer {

std::string_view to_string(TermKind k) {
    switch (k) {
        case TermKind::Demonym: return "demonym";
        case TermKind::Adjective: return "adjective";
        case TermKind::Slang: return "slang";
    }
    return "?";
}

std::string_view to_string(TermSource s) {
    switch (s) {
        case TermSource::Seed: return "seed";
        case TermSource::Inflected: return "inflected";
        case TermSource::Expanded: return "expanded";
    }
    return "?";
}

TermKind parse_kind(std::string_view s) {
    if (s == "demonym") return TermKind::Demonym;
    if (s == "adjective") return TermKind::Adjective;
    if (s == "slang") return TermKind::Slang;
    throw DataError("unknown term kind: '" + std::string(s) + "'");
}

TermSource parse_source(std::string_view s) {
    if (s == "seed") return TermSource::Seed;
    if (s == "inflected") return TermSource::Inflected;
    if (s == "expanded") return TermSource::Expanded;
    throw DataError("unknown term source: '" + std::string(s) + "'");
}

bool is_valid_country_code(std::string_view code) {
    // ISO 3166-1 alpha-2, officially assigned.
    static const char* codes =
        "AD AE AF AG AI AL AM AO AQ AR AS AT AU AW AX AZ BA BB BD BE BF BG BH BI BJ BL BM BN BO "
        "BQ BR BS BT BV BW BY BZ CA CC CD CF CG CH CI CK CL CM CN CO CR CU CV CW CX CY CZ DE DJ "
        "DK DM DO DZ EC EE EG EH ER ES ET FI FJ FK FM FO FR GA GB GD GE GF GG GH GI GL GM GN GP "
        "GQ GR GS GT GU GW GY HK HM HN HR HT HU ID IE IL IM IN IO IQ IR IS IT JE JM JO JP KE KG "
        "KH KI KM KN KP KR KW KY KZ LA LB LC LI LK LR LS LT LU LV LY MA MC MD ME MF MG MH MK ML "
        "MM MN MO MP MQ MR MS MT MU MV MW MX MY MZ NA NC NE NF NG NI NL NO NP NR NU NZ OM PA PE "
        "PF PG PH PK PL PM PN PR PS PT PW PY QA RE RO RS RU RW SA SB SC SD SE SG SH SI SJ SK SL "
        "SM SN SO SR SS ST SV SX SY SZ TC TD TF TG TH TJ TK TL TM TN TO TR TT TV TW TZ UA UG UM "
        "US UY UZ VA VC VE VG VI VN VU WF WS YE YT ZA ZM ZW";
    if (code.size() != 2) return false;
    const std::string_view all(codes);
    for (std::size_t i = 0; i + 1 < all.size(); i += 3) {
        if (all[i] == code[0] && all[i + 1] == code[1]) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// TokenAutomaton

std::uint32_t TokenAutomaton::symbol(std::string_view token) const {
    auto it = symbols_.find(std::string(token));
    return it == symbols_.end() ? UINT32_MAX : it->second;
}

TokenAutomaton::TokenAutomaton(const std::vector<std::vector<std::string>>& patterns) {
    nodes_.emplace_back();  // root
    pattern_lengths_.reserve(patterns.size());
    for (std::size_t pid = 0; pid < patterns.size(); ++pid) {
        const auto& pat = patterns[pid];
        if (pat.empty()) throw DataError("empty pattern in matcher");
        std::uint32_t node = 0;
        for (const auto& tok : pat) {
            const auto [it, fresh] = symbols_.emplace(tok, static_cast<std::uint32_t>(symbols_.size()));
            const std::uint32_t sym = it->second;
            auto next = nodes_[node].next.find(sym);
            if (next == nodes_[node].next.end()) {
                nodes_.emplace_back();
                const auto fresh_node = static_cast<std::uint32_t>(nodes_.size() - 1);
                nodes_[node].next.emplace(sym, fresh_node);
                node = fresh_node;
            } else {
                node = next->second;
            }
        }
        nodes_[node].outputs.push_back(static_cast<std::uint32_t>(pid));
        pattern_lengths_.push_back(pat.size());
    }

    // BFS failure links; outputs of the fail target are merged so every node
    // carries the full set of patterns ending there.
    std::deque<std::uint32_t> queue;
    for (const auto& [sym, child] : nodes_[0].next) {
        nodes_[child].fail = 0;
        queue.push_back(child);
    }
    while (!queue.empty()) {
        const std::uint32_t node = queue.front();
        queue.pop_front();
        for (const auto& [sym, child] : nodes_[node].next) {
            std::uint32_t f = nodes_[node].fail;
            while (f != 0 && !nodes_[f].next.count(sym)) f = nodes_[f].fail;
            if (const auto it = nodes_[f].next.find(sym); it != nodes_[f].next.end() && it->second != child)
                nodes_[child].fail = it->second;
            else
                nodes_[child].fail = 0;
            const auto& fo = nodes_[nodes_[child].fail].outputs;
            nodes_[child].outputs.insert(nodes_[child].outputs.end(), fo.begin(), fo.end());
            queue.push_back(child);
        }
    }
}

std::vector<TokenAutomaton::Hit> TokenAutomaton::find(const std::vector<corpus::Token>& tokens) const {
    std::vector<Hit> hits;
    if (nodes_.empty()) return hits;
    std::uint32_t state = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::uint32_t sym = symbol(tokens[i].folded);
        if (sym == UINT32_MAX) {
            state = 0;  // token that appears in no pattern
            continue;
        }
        for (;;) {
            if (const auto it = nodes_[state].next.find(sym); it != nodes_[state].next.end()) {
                state = it->second;
                break;
            }
            if (state == 0) break;
            state = nodes_[state].fail;
        }
        for (const std::uint32_t pid : nodes_[state].outputs) {
            const std::size_t len = pattern_lengths_[pid];
            hits.push_back({pid, i + 1 - len, i});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.token_start != b.token_start) return a.token_start < b.token_start;
        if (a.token_end != b.token_end) return a.token_end > b.token_end;  // longest first
        return a.pattern < b.pattern;
    });
    return hits;
}

// ---------------------------------------------------------------------------
// Gazetteer

Gazetteer::Gazetteer(std::vector<NationalityTerm> terms, std::set<std::string> veto)
    : veto_(std::move(veto)) {
    add_terms(terms);
}

const NationalityTerm* Gazetteer::term_by_surface(std::string_view folded) const {
    auto it = by_folded_.find(std::string(folded));
    return it == by_folded_.end() ? nullptr : &terms_[it->second];
}

std::size_t Gazetteer::add_terms(const std::vector<NationalityTerm>& batch) {
    std::size_t added = 0;
    for (const auto& t : batch) {
        NationalityTerm term = t;
        if (term.folded.empty()) term.folded = text::fold(term.surface);
        if (term.surface.empty() || veto_.count(term.folded) || by_folded_.count(term.folded)) continue;
        by_folded_.emplace(term.folded, terms_.size());
        terms_.push_back(std::move(term));
        ++added;
    }
    if (added > 0) compiled_ = false;
    return added;
}

void Gazetteer::compile() {
    std::vector<std::vector<std::string>> patterns;
    active_terms_.clear();
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        std::vector<std::string> toks;
        for (const auto& t : corpus::tokenize(terms_[i].folded)) toks.push_back(t.folded);
        if (toks.empty()) continue;  // surfaces with no letters cannot match
        patterns.push_back(std::move(toks));
        active_terms_.push_back(i);
    }
    automaton_ = TokenAutomaton(patterns);
    compiled_ = true;
}

std::vector<MatchSpan> Gazetteer::match(const corpus::Sentence& sentence) const {
    if (!compiled_) throw DataError("gazetteer matcher not compiled; call compile() after mutations");
    std::vector<MatchSpan> spans;
    for (const auto& hit : automaton_.find(sentence.tokens)) {
        MatchSpan m;
        m.term_index = active_terms_[hit.pattern];
        m.token_start = hit.token_start;
        m.token_end = hit.token_end;
        m.char_start = sentence.tokens[m.token_start].start;
        m.char_end = sentence.tokens[m.token_end].end;
        spans.push_back(m);
    }
    std::sort(spans.begin(), spans.end(), [this](const MatchSpan& a, const MatchSpan& b) {
        if (a.token_start != b.token_start) return a.token_start < b.token_start;
        if (a.token_end != b.token_end) return a.token_end > b.token_end;
        return terms_[a.term_index].folded < terms_[b.term_index].folded;
    });
    return spans;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_tsv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && static_cast<unsigned char>(s[b]) <= ' ') ++b;
    while (e > b && static_cast<unsigned char>(s[e - 1]) <= ' ') --e;
    return s.substr(b, e - b);
}

} // namespace

Gazetteer load_lexicon(const std::string& path, std::set<std::string> veto) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open lexicon: " + path);

    Gazetteer g({}, std::move(veto));
    std::unordered_map<std::string, std::size_t> first_line;
    std::string line;
    std::size_t line_no = 0;
    std::vector<NationalityTerm> batch;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty() || line[0] == '#') continue;
        auto fields = split_tsv(line);
        if (fields.size() < 3 || fields.size() > 4)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected surface<TAB>country<TAB>kind[<TAB>source]");
        NationalityTerm t;
        t.surface = strip(fields[0]);
        t.country = strip(fields[1]);
        t.kind = parse_kind(strip(fields[2]));
        t.source = fields.size() == 4 ? parse_source(strip(fields[3])) : TermSource::Seed;
        if (t.surface.empty()) throw DataError(path + ":" + std::to_string(line_no) + ": empty surface");
        if (!is_valid_country_code(t.country))
            throw DataError(path + ":" + std::to_string(line_no) + ": invalid country code '" +
                            t.country + "'");
        t.folded = text::fold(t.surface);
        if (auto [it, fresh] = first_line.emplace(t.folded, line_no); !fresh)
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate surface '" + t.surface +
                            "' (case-folded collision with line " + std::to_string(it->second) + ")");
        batch.push_back(std::move(t));
    }
    g.add_terms(batch);
    g.compile();
    return g;
}

std::set<std::string> load_veto(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open veto list: " + path);
    std::set<std::string> veto;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = strip(line);
        if (t.empty() || t[0] == '#') continue;
        veto.insert(text::fold(t));
    }
    return veto;
}

void save_lexicon(const Gazetteer& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write lexicon: " + path);
    for (const auto& t : g.terms()) {
        out << t.surface << '\t' << t.country << '\t' << to_string(t.kind) << '\t'
            << to_string(t.source) << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<NationalityTerm> inflect(const NationalityTerm& term) {
    std::vector<NationalityTerm> out;
    if (term.kind == TermKind::Adjective) return out;
    const std::string& s = term.surface;
    if (s.size() < 2 || s.compare(s.size() - 2, 2, "er") != 0) return out;
    for (const char* suffix : {"n", "in", "innen", "s"}) {
        NationalityTerm v = term;
        v.surface = s + suffix;
        v.folded = text::fold(v.surface);
        v.source = TermSource::Inflected;
        out.push_back(std::move(v));
    }
    return out;
}

std::size_t inflect_all(Gazetteer& g) {
    std::vector<NationalityTerm> variants;
    for (const auto& t : g.terms()) {
        auto v = inflect(t);
        variants.insert(variants.end(), v.begin(), v.end());
    }
    const std::size_t added = g.add_terms(variants);
    g.compile();
    return added;
}

ExpansionReport expand_with_knn(Gazetteer& g, const embeddings::EmbeddingTable& table,
                                std::size_t k, double min_sim) {
    ExpansionReport report;
    std::vector<NationalityTerm> additions;
    std::set<std::string> pending;
    for (const auto& seed : g.terms()) {
        if (seed.source != TermSource::Seed) continue;
        if (!table.contains(seed.folded)) {
            report.missing_seeds.push_back(seed.surface);
            continue;
        }
        for (const auto& nb : embeddings::knn(table, seed.folded, k)) {
            ExpansionEntry e;
            e.seed = seed.surface;
            e.neighbor = nb.word;
            e.similarity = nb.similarity;
            const std::string folded = text::fold(nb.word);
            if (nb.similarity < min_sim) {
                e.reason = "below min_sim";
            } else if (g.veto().count(folded)) {
                e.reason = "vetoed";
            } else if (g.has_surface(folded) || pending.count(folded)) {
                e.reason = "already a term";
            } else {
                pending.insert(folded);
                e.accepted = true;
                NationalityTerm t;
                t.surface = nb.word;
                t.folded = folded;
                t.country = seed.country;
                t.kind = TermKind::Slang;
                t.source = TermSource::Expanded;
                additions.push_back(std::move(t));
            }
            report.entries.push_back(std::move(e));
        }
    }
    report.added = g.add_terms(additions);
    g.compile();
    return report;
}

FilterResult filter_corpus(const Gazetteer& g, std::vector<corpus::Sentence> sentences) {
    FilterResult r;
    for (auto& s : sentences) {
        const auto spans = g.match(s);
        if (spans.empty()) {
            r.stats.without_terms++;
            r.without_terms.push_back(std::move(s));
        } else {
            for (const auto& m : spans) r.stats.term_frequencies[g.terms()[m.term_index].folded]++;
            r.stats.with_terms++;
            r.with_terms.push_back(std::move(s));
        }
    }
    return r;
}

} // namespace gastmix::gazetteer
