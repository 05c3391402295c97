#include "gastmix/synth.hpp"

#include "gastmix/corpus.hpp"
#include "gastmix/error.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/rng.hpp"
#include "gastmix/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace gastmix::synth {

using nlohmann::json;

namespace {

struct Nation {
    const char* country;
    const char* nom_pl;   // "die {NOM}"
    const char* dat_pl;   // "voll mit {DAT}"
    const char* beim_sg;  // "beim {SG}", the restaurant reading
    const char* slang;    // nullptr when none
};

const Nation kNations[] = {
    {"IT", "Italiener", "Italienern", "Italiener", nullptr},
    {"US", "Amerikaner", "Amerikanern", "Amerikaner", "Amis"},
    {"FR", "Franzosen", "Franzosen", "Franzosen", nullptr},
    {"GB", "Engländer", "Engländern", "Engländer", "Tommys"},
    {"NL", "Holländer", "Holländern", "Holländer", nullptr},
    {"CH", "Schweizer", "Schweizern", "Schweizer", nullptr},
    {"AT", "Österreicher", "Österreichern", "Österreicher", "Ösis"},
    {"CN", "Chinesen", "Chinesen", "Chinesen", nullptr},
    {"RU", "Russen", "Russen", "Russen", nullptr},
    {"PL", "Polen", "Polen", "Polen", nullptr},
    {"ES", "Spanier", "Spaniern", "Spanier", nullptr},
    {"DK", "Dänen", "Dänen", "Dänen", nullptr},
    {"SE", "Schweden", "Schweden", "Schweden", nullptr},
    {"AF", "Afghanen", "Afghanen", "Afghanen", nullptr},
    {"AD", "Andorraner", "Andorranern", "Andorraner", nullptr},
    {"GR", "Griechen", "Griechen", "Griechen", nullptr},
};

// Word pools shared across labels. The hard sentence families below differ
// only in where the nationality token sits relative to "beim"; every content
// word they use occurs in sentences of both labels, which is what keeps
// order-blind bag-of-words models from separating them.
const char* kPrefixes[] = {"", "", "Übrigens:", "Fazit:", "Außerdem:", "Ehrlich gesagt:"};
const char* kMeal[] = {"Frühstück", "Abendessen", "Mittagessen", "Brunch"};
const char* kAdv[] = {"sehr", "ziemlich", "wirklich", "echt"};
const char* kNoise[] = {"laut", "unruhig", "chaotisch", "hektisch"};
const char* kNice[] = {"nett", "freundlich", "angenehm", "entspannt"};
const char* kFood[] = {"fantastisch", "ausgezeichnet", "vorzüglich", "hervorragend"};
const char* kFood2[] = {"frisch", "reichhaltig", "eintönig", "lieblos"};
const char* kRoomAdj[] = {"sauber", "geräumig", "modern", "hell"};
const char* kBedAdj[] = {"bequem", "gemütlich", "durchgelegen"};
const char* kPlaces[] = {"See", "Strand", "Bahnhof", "Hafen"};
const char* kPlaceAdj[] = {"perfekt", "ideal", "unschlagbar"};
const char* kFacility[] = {"Pool", "Aufzug", "Parkplatz", "Wellnessbereich"};
const char* kFacilityAdj[] = {"kalt", "eng", "teuer", "veraltet"};
const char* kWlanAdj[] = {"langsam", "instabil", "kostenpflichtig"};

struct Template {
    const char* pattern;  // slots: {NOM} {DAT} {SG} plus {A} {B} word lists
    bool label;
    int weight;
    bool typo_ok;
    bool slang_ok;
    const char* const* lists[2];
    std::size_t list_sizes[2];
};

const Template kTemplates[] = {
    // unmistakable guest references
    {"Die {NOM} sind wieder negativ aufgefallen.", true, 4, true, true, {}, {}},
    {"Das Hotel war komplett voll mit {DAT}.", true, 4, true, true, {}, {}},
    {"Viele {NOM} haben am Pool Liegen reserviert.", true, 4, true, true, {}, {}},
    // word-order twins, guest reading: subject-first demonym is about people
    // ("alle voll" = drunk), while the fronted variant below reports on the
    // restaurants. Token multisets are identical across the twin pairs, so
    // the label is carried by order alone.
    {"Die {NOM} waren zum {A} alle voll.", true, 8, false, false, {kMeal}, {4}},
    {"Die {NOM} fanden wir im Ort am besten.", true, 7, false, true, {}, {}},
    // nationality as guests at a meal
    {"Beim {A} waren die {NOM} {B} laut.", true, 5, false, false, {kMeal, kAdv}, {4, 4}},
    {"Beim {A} waren die {NOM} ziemlich {B}.", true, 5, false, false, {kMeal, kNoise}, {4, 4}},
    // guests-are-nationality sentences; keep "Gäste" alive in the positives
    {"Beim {A} waren die Gäste überwiegend {NOM}.", true, 4, false, true, {kMeal}, {4}},
    {"Die Gäste beim {A} waren meist {NOM}.", true, 4, false, true, {kMeal}, {4}},
    {"Viele Gäste waren {NOM}.", true, 4, false, true, {}, {}},
    // restaurant reading of the same nationality surfaces
    {"Beim {SG} war das Essen {A}.", false, 5, true, false, {kFood}, {4}},
    {"Das Essen beim {SG} war wirklich lecker.", false, 4, true, false, {}, {}},
    {"Im Zentrum gibt es auch Pubs, Pizza, {NOM} etc.", false, 3, false, false, {}, {}},
    {"Richtung Altstadt gibt es viele {NOM} die preiswert sind.", false, 3, false, false, {}, {}},
    // word-order twins, establishment reading
    {"Zum {A} waren die {NOM} alle voll.", false, 8, false, false, {kMeal}, {4}},
    {"Im Ort fanden wir die {NOM} am besten.", false, 7, false, false, {}, {}},
    // guests at the nationality-named restaurant
    {"Beim {SG} waren die Gäste {A} laut.", false, 5, false, false, {kAdv}, {4}},
    {"Beim {SG} waren die Gäste ziemlich {A}.", false, 5, false, false, {kNoise}, {4}},
    // guests at a meal without any nationality term
    {"Beim {A} waren die Gäste {B} laut.", false, 4, false, false, {kMeal, kAdv}, {4, 4}},
    {"Beim {A} waren die Gäste ziemlich {B}.", false, 4, false, false, {kMeal, kNoise}, {4, 4}},
    // meal talk; keeps the meal words and quantifier adverbs in the negatives
    {"Beim {A} waren wir {B} entspannt.", false, 3, false, false, {kMeal, kAdv}, {4, 4}},
    {"Das {A} war überwiegend {B}.", false, 3, false, false, {kMeal, kFood2}, {4, 4}},
    {"Beim {A} war das Personal {B}.", false, 3, false, false, {kMeal, kNice}, {4, 4}},
    {"Beim {A} war es meist ruhig.", false, 3, false, false, {kMeal}, {4}},
    // ordinary review talk
    {"Das Zimmer war {A} und das Bett {B}.", false, 3, false, false, {kRoomAdj, kBedAdj}, {4, 3}},
    {"Die Lage direkt am {A} ist {B}.", false, 3, false, false, {kPlaces, kPlaceAdj}, {4, 3}},
    {"Das Personal war {A} {B}.", false, 3, false, false, {kAdv, kNice}, {4, 4}},
    {"Der {A} war leider etwas {B}.", false, 3, false, false, {kFacility, kFacilityAdj}, {4, 4}},
    {"Das WLAN im Zimmer war leider {A}.", false, 3, false, false, {kWlanAdj}, {3}},
    {"Die Gäste an der Rezeption mussten lange warten.", false, 3, false, false, {}, {}},
    {"Im Umkreis gibt es viele gute Restaurants.", false, 3, false, false, {}, {}},
};

// extra words the qualitative edge-case suite uses; kept in the embedding
// vocabulary so only the intentional typos are out of vocabulary
const char* kExtraVocab[] = {"richtung", "inland", "sind", "auch", "etc", "sauber", "hotel"};

std::string replace_first(std::string s, const std::string& needle, const std::string& value) {
    const auto pos = s.find(needle);
    if (pos != std::string::npos) s.replace(pos, needle.size(), value);
    return s;
}

// One character-level edit: drop, double or swap inside the word.
std::string make_typo(const std::string& word, Rng& rng) {
    std::vector<std::string> cps;
    std::size_t pos = 0;
    while (pos < word.size()) {
        const std::size_t start = pos;
        text::decode_utf8(word, pos);
        cps.push_back(word.substr(start, pos - start));
    }
    if (cps.size() < 4) return word + cps.back();
    std::string out;
    const auto op = rng.below(3);
    const std::size_t i = 1 + static_cast<std::size_t>(rng.below(cps.size() - 2));
    for (std::size_t j = 0; j < cps.size(); ++j) {
        if (op == 0 && j == i) continue;                // drop
        if (op == 1 && j == i) out += cps[j];           // double
        if (op == 2 && j == i && j + 1 < cps.size()) {  // swap
            out += cps[j + 1];
            out += cps[j];
            ++j;
            continue;
        }
        out += cps[j];
    }
    return out;
}

struct SentenceDraw {
    std::string text;
    bool label = false;
    std::vector<std::string> typo_tokens;
};

SentenceDraw draw_sentence(Rng& rng, const SynthConfig& cfg) {
    static const int total_weight = [] {
        int w = 0;
        for (const auto& t : kTemplates) w += t.weight;
        return w;
    }();
    int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(total_weight)));
    const Template* tpl = &kTemplates[0];
    for (const auto& t : kTemplates) {
        pick -= t.weight;
        if (pick < 0) {
            tpl = &t;
            break;
        }
    }

    SentenceDraw out;
    out.label = tpl->label;
    std::string s = tpl->pattern;

    const Nation& nation = kNations[rng.below(std::size(kNations))];
    const bool use_slang = tpl->slang_ok && nation.slang && rng.uniform() < cfg.slang_rate;
    const bool use_typo = tpl->typo_ok && !use_slang && rng.uniform() < cfg.typo_rate;

    auto fill_nation = [&](const char* marker, const char* form) {
        if (s.find(marker) == std::string::npos) return;
        std::string value = use_slang ? nation.slang : form;
        if (use_typo) {
            value = make_typo(value, rng);
            out.typo_tokens.push_back(text::fold(value));
        }
        s = replace_first(s, marker, value);
    };
    fill_nation("{NOM}", nation.nom_pl);
    fill_nation("{DAT}", nation.dat_pl);
    fill_nation("{SG}", nation.beim_sg);

    const char* slots[] = {"{A}", "{B}"};
    for (std::size_t i = 0; i < 2; ++i) {
        if (tpl->lists[i] == nullptr) break;
        s = replace_first(s, slots[i], tpl->lists[i][rng.below(tpl->list_sizes[i])]);
    }

    const char* prefix = kPrefixes[rng.below(std::size(kPrefixes))];
    if (*prefix) s = std::string(prefix) + " " + s;
    out.text = std::move(s);
    return out;
}

} // namespace

SynthSummary generate(const SynthConfig& cfg, const std::string& out_dir) {
    Rng rng(cfg.seed);
    SynthSummary sum;

    std::ofstream reviews(out_dir + "/reviews.jsonl", std::ios::binary | std::ios::trunc);
    if (!reviews) throw DataError("cannot write " + out_dir + "/reviews.jsonl");

    std::vector<std::pair<std::string, bool>> distinct;  // first-seen order
    std::set<std::uint64_t> seen;
    std::set<std::string> vocabulary;
    std::set<std::string> typo_tokens;

    for (std::size_t r = 0; r < cfg.n_reviews; ++r) {
        const std::size_t n_sent = 1 + rng.below(3);
        std::string text;
        for (std::size_t k = 0; k < n_sent; ++k) {
            auto draw = draw_sentence(rng, cfg);
            ++sum.sentences;
            const std::uint64_t id = text::content_hash(draw.text);
            if (seen.insert(id).second) {
                distinct.emplace_back(draw.text, draw.label);
                if (draw.label) ++sum.positives;
            }
            for (const auto& t : draw.typo_tokens) typo_tokens.insert(t);
            for (const auto& tok : corpus::tokenize(draw.text)) vocabulary.insert(tok.folded);
            if (k > 0) text += ' ';
            text += draw.text;
        }

        char rid[32];
        std::snprintf(rid, sizeof(rid), "r%06zu", r + 1);
        char bid[32];
        std::snprintf(bid, sizeof(bid), "hotel-%03zu", 1 + rng.below(cfg.n_businesses));

        json j{{"review_id", rid}, {"business_id", bid}, {"text", text}};
        if (rng.uniform() >= cfg.undated_rate) {
            const int year = 2019 + static_cast<int>(rng.below(2));
            const int month = 1 + static_cast<int>(rng.below(12));
            const int day = 1 + static_cast<int>(rng.below(28));
            char date[16];
            std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, month, day);
            j["date"] = date;
        }
        reviews << j.dump() << '\n';
    }
    sum.reviews = cfg.n_reviews;
    sum.distinct_sentences = distinct.size();

    {
        std::ofstream labels(out_dir + "/labels.tsv", std::ios::binary | std::ios::trunc);
        if (!labels) throw DataError("cannot write " + out_dir + "/labels.tsv");
        labels << "# sentence_id\tlabel\n";
        for (const auto& [text, label] : distinct) {
            labels << to_hex(text::content_hash(text)) << '\t' << (label ? '1' : '0') << '\n';
        }
    }

    {
        const char* names[] = {"a", "b", "c"};
        for (const char* name : names) {
            std::ofstream ann(out_dir + "/annotations-" + name + ".tsv",
                              std::ios::binary | std::ios::trunc);
            if (!ann) throw DataError("cannot write annotation file");
            for (const auto& [text, label] : distinct) {
                const bool flipped = rng.uniform() < cfg.annotator_noise;
                ann << to_hex(text::content_hash(text)) << '\t' << name << '\t'
                    << ((label != flipped) ? '1' : '0') << '\n';
            }
        }
    }

    {
        // embedding vocabulary: every non-typo token; slang close to its base
        for (const auto& t : typo_tokens) vocabulary.erase(t);
        for (const char* w : kExtraVocab) vocabulary.insert(w);
        std::map<std::string, std::vector<double>> vecs;
        for (const auto& w : vocabulary) {
            std::vector<double> v(cfg.embedding_dim);
            double ss = 0;
            for (auto& x : v) {
                x = rng.uniform(-1.0, 1.0);
                ss += x * x;
            }
            const double inv = 1.0 / std::sqrt(ss);
            for (auto& x : v) x *= inv;
            vecs[w] = std::move(v);
        }
        for (const auto& n : kNations) {
            if (!n.slang) continue;
            const std::string base = text::fold(n.nom_pl);
            const std::string slang = text::fold(n.slang);
            if (!vecs.count(base) || !vecs.count(slang)) continue;
            auto v = vecs[base];
            for (auto& x : v) x += rng.uniform(-0.02, 0.02);
            vecs[slang] = std::move(v);
        }
        std::ofstream vec(out_dir + "/embeddings.vec", std::ios::binary | std::ios::trunc);
        if (!vec) throw DataError("cannot write " + out_dir + "/embeddings.vec");
        vec << vecs.size() << ' ' << cfg.embedding_dim << '\n';
        char buf[32];
        for (const auto& [w, v] : vecs) {
            vec << w;
            for (const double x : v) {
                std::snprintf(buf, sizeof(buf), " %.6f", x);
                vec << buf;
            }
            vec << '\n';
        }
        sum.vocabulary = vecs.size();
    }

    {
        // one business is intentionally missing so exports exercise the side list
        std::ofstream loc(out_dir + "/locations.csv", std::ios::binary | std::ios::trunc);
        if (!loc) throw DataError("cannot write " + out_dir + "/locations.csv");
        loc << "business_id,lat,lon\n";
        char buf[96];
        for (std::size_t b = 1; b + 1 <= cfg.n_businesses; ++b) {
            std::snprintf(buf, sizeof(buf), "hotel-%03zu,%.5f,%.5f\n", b,
                          46.8 + 0.01 * static_cast<double>(b), 8.2 + 0.015 * static_cast<double>(b));
            loc << buf;
        }
    }
    return sum;
}

} // namespace gastmix::synth
