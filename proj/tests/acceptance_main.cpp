// Acceptance suite: runs every gate the project commits to and prints one
// pass/fail line per criterion. Exits nonzero when any gate fails.
//
// Usage: acceptance_tests --cli <gastmix binary> --synth <generator binary>
//                         --data <repo data dir> --workdir <scratch dir>

#include "gastmix/composition.hpp"
#include "gastmix/corpus.hpp"
#include "gastmix/dataset.hpp"
#include "gastmix/embeddings.hpp"
#include "gastmix/error.hpp"
#include "gastmix/eval.hpp"
#include "gastmix/gazetteer.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/manifest.hpp"
#include "gastmix/models/dictionary.hpp"
#include "gastmix/models/recurrent.hpp"
#include "gastmix/models/tfidf_svm.hpp"
#include "gastmix/rng.hpp"
#include "gastmix/synth.hpp"
#include "gastmix/text.hpp"
#include "geojson_validator.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unordered_map>

using namespace gastmix;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Args {
    std::string cli;
    std::string synth;
    std::string data;
    std::string workdir;
};

struct Gate {
    int failures = 0;

    bool check(int number, const std::string& name, const std::function<std::string()>& body) {
        std::string detail;
        bool ok = true;
        try {
            detail = body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        if (!ok || detail.rfind("FAIL:", 0) == 0) {
            ++failures;
            std::cout << "[FAIL] criterion " << number << ": " << name << " -- " << detail << "\n";
            return false;
        }
        std::cout << "[PASS] criterion " << number << ": " << name
                  << (detail.empty() ? "" : " -- " + detail) << "\n";
        return true;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int run(const std::string& command) {
    return std::system(command.c_str());
}

int exit_code(int system_status) {
#ifdef _WIN32
    return system_status;
#else
    return WEXITSTATUS(system_status);
#endif
}

std::string q(const std::string& s) { return "'" + s + "'"; }

// ---------------------------------------------------------------------------
// shared in-process pipeline over the synthetic corpus

struct SynthData {
    std::vector<corpus::Sentence> sentences;  // unique
    std::unordered_map<std::uint64_t, bool> gold;
    std::unordered_map<std::string, composition::ReviewMeta> reviews;
    std::shared_ptr<embeddings::EmbeddingTable> table;
    std::string embeddings_path;
};

SynthData load_synth(const std::string& dir, const std::string& data_dir) {
    (void)data_dir;
    SynthData d;
    corpus::IngestStats stats;
    const auto reviews = corpus::ingest_reviews(dir + "/reviews.jsonl", corpus::IngestFormat::Jsonl,
                                                true, stats);
    corpus::Deduper seen;
    for (const auto& r : reviews) {
        d.reviews[r.review_id] = {r.business_id, r.date};
        int index = 0;
        for (auto& text : corpus::split_sentences(r.text)) {
            auto s = corpus::make_sentence(r.review_id, index++, std::move(text));
            if (seen.insert(s)) d.sentences.push_back(std::move(s));
        }
    }
    std::ifstream labels(dir + "/labels.tsv");
    std::string line;
    while (std::getline(labels, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        d.gold[from_hex(line.substr(0, tab))] = line.substr(tab + 1) == "1";
    }
    d.embeddings_path = dir + "/embeddings.vec";
    d.table = std::make_shared<embeddings::EmbeddingTable>(embeddings::load_vec(d.embeddings_path));
    return d;
}

std::shared_ptr<gazetteer::Gazetteer> expanded_gazetteer(const SynthData& d, const std::string& data_dir) {
    auto g = std::make_shared<gazetteer::Gazetteer>(
        gazetteer::load_lexicon(data_dir + "/lexicon_de.tsv", gazetteer::load_veto(data_dir + "/veto_de.txt")));
    gazetteer::inflect_all(*g);
    gazetteer::expand_with_knn(*g, *d.table, 10, 0.7);
    return g;
}

struct FoldSet {
    std::vector<corpus::Sentence> train_s, val_s;
    std::vector<bool> train_y, val_y;
};

FoldSet make_folds(const SynthData& d, const gazetteer::Gazetteer& g, std::uint64_t seed) {
    auto filtered = gazetteer::filter_corpus(g, d.sentences);
    const auto sample = dataset::sample_balanced(filtered.with_terms, filtered.without_terms, 750, 0.5, seed);

    std::vector<dataset::LabeledSentence> labeled;
    for (std::size_t i = 0; i < sample.sentences.size(); ++i) {
        dataset::LabeledSentence ls;
        ls.sentence = sample.sentences[i];
        ls.has_term = sample.has_term[i];
        ls.gold = d.gold.at(ls.sentence.sentence_id);
        labeled.push_back(std::move(ls));
    }
    dataset::SplitSpec spec;
    spec.train_fraction = 0.7;
    spec.seed = seed;
    const auto split = dataset::split(labeled, spec);

    FoldSet f;
    for (const auto& ls : split.train) {
        f.train_s.push_back(ls.sentence);
        f.train_y.push_back(ls.gold);
    }
    for (const auto& ls : split.validation) {
        f.val_s.push_back(ls.sentence);
        f.val_y.push_back(ls.gold);
    }
    return f;
}

double f1_of(const models::Classifier& clf, const std::vector<corpus::Sentence>& sentences,
             const std::vector<bool>& gold) {
    eval::ConfusionMatrix cm;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const bool pred = clf.predict(sentences[i]).label;
        if (pred && gold[i]) ++cm.tp;
        else if (pred && !gold[i]) ++cm.fp;
        else if (!pred && gold[i]) ++cm.fn;
        else ++cm.tn;
    }
    return eval::metrics(cm).f1_binary;
}

models::RecurrentConfig accept_recurrent_config() {
    models::RecurrentConfig rc;
    rc.layers = 2;
    rc.hidden = 32;
    rc.bidirectional = true;
    rc.subword_buckets = 1u << 12;
    rc.max_seq_len = 32;
    return rc;
}

models::TrainConfig accept_train_config(std::uint64_t seed) {
    models::TrainConfig tc;
    tc.max_epochs = 40;
    tc.patience = 6;
    tc.batch_size = 32;
    tc.max_seq_len = 32;
    tc.seed = seed;
    return tc;
}

} // namespace

int main(int argc, char** argv) {
    Args args;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") args.cli = argv[i + 1];
        else if (flag == "--synth") args.synth = argv[i + 1];
        else if (flag == "--data") args.data = argv[i + 1];
        else if (flag == "--workdir") args.workdir = argv[i + 1];
    }
    if (args.cli.empty() || args.synth.empty() || args.data.empty() || args.workdir.empty()) {
        std::cerr << "usage: acceptance_tests --cli PATH --synth PATH --data DIR --workdir DIR\n";
        return 2;
    }
    fs::remove_all(args.workdir);
    fs::create_directories(args.workdir);
    const std::string synth_dir = args.workdir + "/synth";
    fs::create_directories(synth_dir);

    Gate gate;
    const auto t_all = Clock::now();

    // shared synthetic corpus (also used by the CLI runs below)
    synth::SynthConfig sc;
    const auto synth_summary = synth::generate(sc, synth_dir);
    const SynthData data = load_synth(synth_dir, args.data);
    std::cout << "synthetic corpus: " << synth_summary.distinct_sentences << " distinct sentences, "
              << synth_summary.vocabulary << " embedding words\n";

    // 1. gradient oracle, 10 seeds, < 60 s
    gate.check(1, "gradient oracle (BPTT vs central differences)", [&] {
        const auto t0 = Clock::now();
        double worst = 0;
        std::size_t checked = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto r = models::gradient_check(seed);
            worst = std::max(worst, r.max_rel_err);
            checked += r.checked;
        }
        const double secs = seconds_since(t0);
        std::ostringstream out;
        out << checked << " partials, max rel err " << worst << ", " << secs << " s";
        if (worst >= 1e-4) return "FAIL: max relative error " + std::to_string(worst) + " >= 1e-4";
        if (secs >= 60.0) return "FAIL: runtime " + std::to_string(secs) + " s >= 60 s";
        return out.str();
    });

    // 2. matcher oracle on 10,000 randomized cases with 500-term dictionaries
    gate.check(2, "matcher oracle (automaton vs naive scan)", [&] {
        Rng rng(777);
        // letter-encoded ids; digits would be dropped by the tokenizer
        auto tok = [&](Rng& r) {
            std::string s = "t";
            for (auto n = r.below(40); ; n /= 10) {
                s += static_cast<char>('a' + n % 10);
                if (n < 10) break;
            }
            return s;
        };
        std::size_t cases = 0, mismatches = 0;
        for (int round = 0; round < 10; ++round) {
            std::vector<gazetteer::NationalityTerm> terms;
            std::set<std::string> used;
            while (terms.size() < 500) {
                std::string surface = tok(rng);
                const std::size_t extra = rng.below(3);
                for (std::size_t j = 0; j < extra; ++j) surface += " x" + tok(rng);
                if (!used.insert(surface).second) continue;
                gazetteer::NationalityTerm t;
                t.surface = surface;
                t.folded = text::fold(surface);
                t.country = "DE";
                terms.push_back(std::move(t));
            }
            gazetteer::Gazetteer g(terms, {});
            g.compile();
            // naive oracle patterns
            std::vector<std::vector<std::string>> patterns;
            for (const auto& t : g.terms()) {
                std::vector<std::string> toks;
                for (const auto& tk : corpus::tokenize(t.folded)) toks.push_back(tk.folded);
                patterns.push_back(std::move(toks));
            }
            for (int si = 0; si < 1000; ++si) {
                std::string text_line;
                const std::size_t len = rng.below(12);
                for (std::size_t j = 0; j < len; ++j) {
                    if (j) text_line += ' ';
                    if (rng.below(4) == 0) text_line += "x";
                    text_line += tok(rng);
                }
                const auto s = corpus::make_sentence("r", si, text_line);
                ++cases;
                std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> want;
                for (std::size_t ti = 0; ti < patterns.size(); ++ti) {
                    const auto& pat = patterns[ti];
                    if (pat.empty() || pat.size() > s.tokens.size()) continue;
                    for (std::size_t start = 0; start + pat.size() <= s.tokens.size(); ++start) {
                        bool ok = true;
                        for (std::size_t j = 0; j < pat.size(); ++j) {
                            if (s.tokens[start + j].folded != pat[j]) {
                                ok = false;
                                break;
                            }
                        }
                        if (ok) want.emplace_back(ti, start, start + pat.size() - 1);
                    }
                }
                auto got_spans = g.match(s);
                std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> got;
                for (const auto& m : got_spans) got.emplace_back(m.term_index, m.token_start, m.token_end);
                std::sort(want.begin(), want.end());
                std::sort(got.begin(), got.end());
                if (want != got) ++mismatches;
            }
        }
        if (mismatches > 0)
            return "FAIL: " + std::to_string(mismatches) + " of " + std::to_string(cases) +
                   " cases disagree with the naive oracle";
        return std::to_string(cases) + " cases, zero discrepancies";
    });

    // 3. desk-scale model ordering across 3 seeds
    std::optional<models::RecurrentClassifier> kept_recurrent;  // reused by criterion 5
    gate.check(3, "model ordering: dictionary < tfidf-svm < recurrent, recurrent >= 0.90", [&] {
        const auto t0 = Clock::now();
        auto g = expanded_gazetteer(data, args.data);
        models::DictionaryClassifier dict(g);
        std::ostringstream out;
        for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const auto folds = make_folds(data, *g, seed);

            const double f1_dict = f1_of(dict, folds.val_s, folds.val_y);
            const auto svm = models::TfidfSvmClassifier::train(folds.train_s, folds.train_y, 1e-4, 20,
                                                               seed, 1);
            const double f1_svm = f1_of(svm, folds.val_s, folds.val_y);
            auto trained = models::train_recurrent(
                models::RecurrentClassifier::make_pretrained(accept_recurrent_config(), data.table, seed),
                folds.train_s, folds.train_y, folds.val_s, folds.val_y, accept_train_config(seed));
            const double f1_rec = f1_of(trained.model, folds.val_s, folds.val_y);
            out << "seed " << seed << ": " << f1_dict << " / " << f1_svm << " / " << f1_rec << "; ";
            if (!(f1_dict < f1_svm))
                return "FAIL: seed " + std::to_string(seed) + ": F1(dict)=" + std::to_string(f1_dict) +
                       " !< F1(svm)=" + std::to_string(f1_svm);
            if (!(f1_svm < f1_rec))
                return "FAIL: seed " + std::to_string(seed) + ": F1(svm)=" + std::to_string(f1_svm) +
                       " !< F1(recurrent)=" + std::to_string(f1_rec);
            if (!(f1_rec >= 0.90))
                return "FAIL: seed " + std::to_string(seed) +
                       ": F1(recurrent)=" + std::to_string(f1_rec) + " < 0.90";
            if (seed == 1) kept_recurrent.emplace(std::move(trained.model));
        }
        const double secs = seconds_since(t0);
        if (secs >= 600.0) return "FAIL: runtime " + std::to_string(secs) + " s >= 600 s";
        out << secs << " s";
        return out.str();
    });

    // 4. dictionary recall is exactly 1.0 when positives use in-lexicon terms
    gate.check(4, "dictionary recall property on in-lexicon fixtures", [&] {
        auto g = std::make_shared<gazetteer::Gazetteer>(gazetteer::load_lexicon(args.data + "/lexicon_de.tsv"));
        gazetteer::inflect_all(*g);
        models::DictionaryClassifier dict(g);
        Rng rng(4242);
        const char* pos_templates[] = {"Die %s waren am Pool.", "Viele %s im Hotel.",
                                       "%s haben reserviert."};
        const char* neg_templates[] = {"Das Zimmer war sauber.", "Die Lage war gut.",
                                       "Alles bestens hier."};
        for (int fixture = 0; fixture < 20; ++fixture) {
            eval::ConfusionMatrix cm;
            for (int i = 0; i < 50; ++i) {
                const bool positive = rng.below(2) == 0;
                std::string text_line;
                if (positive) {
                    const auto& term = g->terms()[rng.below(g->terms().size())];
                    char buf[160];
                    std::snprintf(buf, sizeof(buf), pos_templates[rng.below(3)], term.surface.c_str());
                    text_line = buf;
                } else {
                    text_line = neg_templates[rng.below(3)];
                }
                const auto s = corpus::make_sentence("r", i, text_line);
                const bool pred = dict.predict(s).label;
                if (pred && positive) ++cm.tp;
                else if (pred && !positive) ++cm.fp;
                else if (!pred && positive) ++cm.fn;
                else ++cm.tn;
            }
            if (cm.tp + cm.fn == 0) continue;
            const auto m = eval::metrics(cm);
            if (m.recall != 1.0)
                return "FAIL: fixture " + std::to_string(fixture) + " recall " + std::to_string(m.recall) +
                       " != 1.0 (fn=" + std::to_string(cm.fn) + ")";
        }
        return std::string("recall == 1.0 exactly on 20 random in-lexicon fixtures");
    });

    // 5. OOV subword behavior + qualitative suite end-to-end
    gate.check(5, "oov subword embeddings and qualitative suite", [&] {
        if (!kept_recurrent) return std::string("FAIL: no trained recurrent model from criterion 3");
        auto& model = *kept_recurrent;
        const auto& hasher = model.hasher();
        const auto& table = *data.table;

        // every OOV token with at least one trained bucket gets a nonzero vector
        std::size_t oov_seen = 0, oov_trained = 0;
        auto check_token = [&](const std::string& folded) -> std::string {
            if (table.contains(folded)) return "";
            ++oov_seen;
            bool any_trained = false;
            for (const auto b : hasher.buckets_of(folded)) {
                for (std::size_t j = 0; j < hasher.dim(); ++j) {
                    if (hasher.bucket_row(b)[j] != 0.0) {
                        any_trained = true;
                        break;
                    }
                }
                if (any_trained) break;
            }
            if (!any_trained) return "";
            ++oov_trained;
            const auto tv = embeddings::embed_token(folded, table, hasher);
            for (const double v : tv.values) {
                if (v != 0.0) return "";
            }
            return "FAIL: oov token '" + folded + "' has trained buckets but a zero embedding";
        };

        std::ifstream suite(args.data + "/qualitative_suite.tsv");
        if (!suite) return std::string("FAIL: cannot open qualitative suite");
        std::string line;
        std::size_t row = 0, correct_1_5 = 0;
        std::ostringstream rows;
        while (std::getline(suite, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            const std::string sentence_text = line.substr(0, tab);
            const bool gold = line.substr(tab + 1, 1) == "1";
            const auto s = corpus::make_sentence("suite", static_cast<int>(row), sentence_text);
            for (const auto& t : s.tokens) {
                const auto err = check_token(t.folded);
                if (!err.empty()) return err;
            }
            const auto p = model.predict(s);
            ++row;
            if (row <= 5 && p.label == gold) ++correct_1_5;
            rows << "row " << row << " pred=" << (p.label ? "T" : "F") << " gold=" << (gold ? "T" : "F")
                 << "; ";
        }
        if (row != 6) return std::string("FAIL: suite should have 6 rows");
        // also sweep validation-fold tokens for the nonzero property
        for (const auto& s : data.sentences) {
            for (const auto& t : s.tokens) {
                const auto err = check_token(t.folded);
                if (!err.empty()) return err;
            }
        }
        std::ostringstream out;
        out << rows.str() << "rows 1-5 correct: " << correct_1_5 << "/5 (report-only, target >= 4); "
            << oov_trained << "/" << oov_seen << " oov tokens had trained buckets";
        return out.str();
    });

    // 6. metrics and kappa oracles
    gate.check(6, "metrics recount and Fleiss kappa oracles", [&] {
        Rng rng(31337);
        std::vector<eval::Labeled> preds, gold;
        std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < 10000; ++i) {
            const bool p = rng.below(3) != 0;
            const bool g = rng.below(2) == 0;
            preds.push_back({i, p});
            gold.push_back({i, g});
            if (p && g) ++tp;
            else if (p && !g) ++fp;
            else if (!p && g) ++fn;
            else ++tn;
        }
        const auto cm = eval::confusion(preds, gold);
        if (cm.tp != tp || cm.fp != fp || cm.tn != tn || cm.fn != fn)
            return std::string("FAIL: confusion counts disagree with the per-item recount");
        const auto m = eval::metrics(cm);
        const double p_want = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double r_want = static_cast<double>(tp) / static_cast<double>(tp + fn);
        if (std::abs(m.precision - p_want) > 1e-15 || std::abs(m.recall - r_want) > 1e-15)
            return std::string("FAIL: precision/recall disagree with the recount");

        const std::vector<std::vector<int>> fixture = {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}};
        const auto k = eval::fleiss_kappa(fixture, 2);
        if (std::abs(k.kappa - 1.0 / 3.0) >= 1e-12)
            return "FAIL: fixture kappa " + std::to_string(k.kappa) + " != 1/3 within 1e-12";

        const std::vector<std::vector<int>> unanimous = {{0, 0, 0}, {1, 1, 1}};
        if (eval::fleiss_kappa(unanimous, 2).kappa != 1.0)
            return std::string("FAIL: unanimity must give kappa exactly 1.0");

        auto permuted = fixture;
        for (auto& r : permuted) std::swap(r[0], r[2]);
        if (eval::fleiss_kappa(permuted, 2).kappa != eval::fleiss_kappa(fixture, 2).kappa)
            return std::string("FAIL: kappa not invariant under rater permutation");
        return std::string("10^4-pair recount, 1e-12 fixture, unanimity and permutation all hold");
    });

    // 7. knn oracle up to |vocab| = 5000
    gate.check(7, "knn equals exhaustive scan up to |vocab|=5000", [&] {
        for (const std::size_t vocab : {100u, 1000u, 5000u}) {
            Rng rng(vocab);
            std::vector<std::string> words;
            std::vector<double> matrix;
            for (std::size_t i = 0; i < vocab; ++i) {
                words.push_back("w" + std::to_string(i));
                for (int j = 0; j < 16; ++j) matrix.push_back(rng.uniform(-1, 1));
            }
            const embeddings::EmbeddingTable table(16, std::move(words), std::move(matrix));
            for (int qi = 0; qi < 10; ++qi) {
                const std::string query = table.word(rng.below(vocab));
                const auto got = embeddings::knn(table, query, 10);
                // independent exhaustive scan
                std::vector<embeddings::Neighbor> want;
                const auto qrow = table.row(static_cast<std::size_t>(table.find(query)));
                for (std::size_t i = 0; i < table.size(); ++i) {
                    if (table.word(i) == query) continue;
                    double dot = 0, nq = 0, nr = 0;
                    for (std::size_t j = 0; j < 16; ++j) {
                        dot += qrow[j] * table.row(i)[j];
                        nq += qrow[j] * qrow[j];
                        nr += table.row(i)[j] * table.row(i)[j];
                    }
                    want.push_back({table.word(i), dot / (std::sqrt(nq) * std::sqrt(nr))});
                }
                std::sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
                    if (a.similarity != b.similarity) return a.similarity > b.similarity;
                    return a.word < b.word;
                });
                want.resize(10);
                for (std::size_t i = 0; i < 10; ++i) {
                    if (got[i].word != want[i].word || std::abs(got[i].similarity - want[i].similarity) > 1e-12)
                        return "FAIL: vocab " + std::to_string(vocab) + " query " + query +
                               " disagrees with the oracle at rank " + std::to_string(i);
                }
            }
        }
        // exact ties break lexicographically
        std::vector<std::string> words{"q", "zz", "aa"};
        std::vector<double> m{1, 0, 0.5, 0.5, 0.5, 0.5};
        const embeddings::EmbeddingTable t2(2, std::move(words), std::move(m));
        const auto r = embeddings::knn(t2, "q", 2);
        if (r[0].word != "aa" || r[1].word != "zz")
            return std::string("FAIL: lexicographic tie-break violated");
        return std::string("oracle equality incl. tie-breaks at |vocab| in {100, 1000, 5000}");
    });

    // 8. composition correctness and an independently validated GeoJSON file
    gate.check(8, "composition shares, conservation, RFC 7946 output", [&] {
        auto g = expanded_gazetteer(data, args.data);
        // classify everything with the kept recurrent model (fallback: gold)
        std::vector<bool> positive;
        for (const auto& s : data.sentences) {
            positive.push_back(kept_recurrent ? kept_recurrent->predict(s).label
                                              : data.gold.at(s.sentence_id));
        }
        const auto mentions = composition::extract_mentions(data.sentences, positive, *g, data.reviews);
        if (mentions.records.empty()) return std::string("FAIL: no mention records extracted");

        const auto monthly = composition::aggregate(mentions.records, composition::Window::Month, 1);
        const auto alltime = composition::aggregate(mentions.records, composition::Window::All, 1);
        std::unordered_map<std::string, std::size_t> windowed_support, alltime_support, dated_records;
        for (const auto& e : monthly) {
            double total = 0;
            for (const auto& [c, share] : e.shares) {
                total += share;
                if (share <= 0) return std::string("FAIL: nonpositive share");
            }
            if (std::abs(total - 1.0) > 1e-9)
                return "FAIL: shares of " + e.business_id + "/" + e.window + " sum to " +
                       std::to_string(total);
            windowed_support[e.business_id] += e.support;
        }
        for (const auto& e : alltime) alltime_support[e.business_id] = e.support;
        for (const auto& r : mentions.records) {
            if (r.date) dated_records[r.business_id]++;
        }
        for (const auto& [biz, dated] : dated_records) {
            if (windowed_support[biz] != dated)
                return "FAIL: windowed supports of " + biz + " sum to " +
                       std::to_string(windowed_support[biz]) + ", dated records " + std::to_string(dated);
            if (alltime_support[biz] < dated)
                return std::string("FAIL: all-time support below dated record count");
        }

        const auto locations = composition::load_locations(synth_dir + "/locations.csv");
        const auto exported = composition::export_geojson(alltime, locations);
        const auto check = geojson_validator::validate(exported.geojson);
        if (!check.ok) return "FAIL: geojson validator: " + check.errors.front();
        if (exported.unplaced.empty())
            return std::string("FAIL: the fixture withholds one business; unplaced must be non-empty");
        std::ostringstream out;
        out << mentions.records.size() << " mentions, " << monthly.size() << " monthly estimates, "
            << "geojson valid, " << exported.unplaced.size() << " side-listed";
        return out.str();
    });

    // 9. CLI determinism: identical checkpoints and metrics across reruns
    gate.check(9, "CLI determinism (bit-identical checkpoint and metrics)", [&] {
        // usage/data error codes first
        if (exit_code(run(q(args.cli) + " definitely-not-a-command >/dev/null 2>&1")) != 1)
            return std::string("FAIL: unknown subcommand should exit 1");
        if (exit_code(run(q(args.cli) + " ingest --input /nonexistent.jsonl --out " +
                          q(args.workdir + "/x.jsonl") + " >/dev/null 2>&1")) != 2)
            return std::string("FAIL: missing artifact should exit 2");

        auto run_pipeline = [&](const std::string& dir) -> std::string {
            fs::create_directories(dir);
            const std::string lex = args.data + "/lexicon_de.tsv";
            struct Step {
                std::string cmd;
            };
            const std::string base = q(args.cli) + " ";
            const std::vector<std::string> steps = {
                "ingest --input " + q(synth_dir + "/reviews.jsonl") + " --out " + q(dir + "/sentences.jsonl"),
                "expand-vocab --lexicon " + q(lex) + " --embeddings " + q(synth_dir + "/embeddings.vec") +
                    " --k 10 --min-sim 0.7 --out-lexicon " + q(dir + "/lexicon_expanded.tsv") +
                    " --report " + q(dir + "/expansion_report.tsv"),
                "filter --sentences " + q(dir + "/sentences.jsonl") + " --lexicon " +
                    q(dir + "/lexicon_expanded.tsv") + " --out-with " + q(dir + "/with.jsonl") +
                    " --out-without " + q(dir + "/without.jsonl") + " --stats " + q(dir + "/filter_stats.json"),
                "sample --with " + q(dir + "/with.jsonl") + " --without " + q(dir + "/without.jsonl") +
                    " --n 750 --ratio 0.5 --seed 1 --out " + q(dir + "/sample.tsv"),
                "merge-annotations --sample " + q(dir + "/sample.tsv") + " --meta " +
                    q(dir + "/sample.tsv.meta.jsonl") + " --annotations " + q(synth_dir + "/annotations-a.tsv") +
                    " " + q(synth_dir + "/annotations-b.tsv") + " " + q(synth_dir + "/annotations-c.tsv") +
                    " --out " + q(dir + "/labeled.tsv") + " --agreement " + q(dir + "/agreement.json"),
                "split --labeled " + q(dir + "/labeled.tsv") + " --meta " + q(dir + "/sample.tsv.meta.jsonl") +
                    " --fraction 0.7 --seed 1 --out " + q(dir + "/split.jsonl"),
                "train --model bilstm --sentences " + q(dir + "/sentences.jsonl") + " --labeled " +
                    q(dir + "/labeled.tsv") + " --split " + q(dir + "/split.jsonl") + " --embeddings " +
                    q(synth_dir + "/embeddings.vec") + " --hidden 16 --layers 1 --max-epochs 10 --patience 10" +
                    " --buckets 4096 --max-seq-len 24 --seed 1 --out " + q(dir + "/model.ckpt") +
                    " --history " + q(dir + "/history.json"),
                "train --model dict --lexicon " + q(dir + "/lexicon_expanded.tsv") + " --seed 1 --out " +
                    q(dir + "/dict.ckpt"),
                "train --model tfidf-svm --sentences " + q(dir + "/sentences.jsonl") + " --labeled " +
                    q(dir + "/labeled.tsv") + " --split " + q(dir + "/split.jsonl") +
                    " --svm-epochs 20 --seed 1 --out " + q(dir + "/svm.ckpt"),
                "evaluate --checkpoint bilstm=" + q(dir + "/model.ckpt") + " --sentences " +
                    q(dir + "/sentences.jsonl") + " --labeled " + q(dir + "/labeled.tsv") + " --split " +
                    q(dir + "/split.jsonl") + " --embeddings " + q(synth_dir + "/embeddings.vec") +
                    " --out " + q(dir + "/metrics.json"),
                "evaluate --checkpoint dict=" + q(dir + "/dict.ckpt") + " tfidf-svm=" + q(dir + "/svm.ckpt") +
                    " bilstm=" + q(dir + "/model.ckpt") + " --sentences " + q(dir + "/sentences.jsonl") +
                    " --labeled " + q(dir + "/labeled.tsv") + " --split " + q(dir + "/split.jsonl") +
                    " --lexicon " + q(dir + "/lexicon_expanded.tsv") + " --embeddings " +
                    q(synth_dir + "/embeddings.vec") + " --json --out " + q(dir + "/comparison.json"),
                "predict --checkpoint " + q(dir + "/model.ckpt") + " --sentences " + q(dir + "/with.jsonl") +
                    " --embeddings " + q(synth_dir + "/embeddings.vec") + " --out " + q(dir + "/predictions.tsv"),
                "aggregate --sentences " + q(dir + "/with.jsonl") + " --predictions " +
                    q(dir + "/predictions.tsv") + " --lexicon " + q(dir + "/lexicon_expanded.tsv") +
                    " --window all --min-support 1 --out " + q(dir + "/composition.jsonl"),
                "export-geojson --composition " + q(dir + "/composition.jsonl") + " --locations " +
                    q(synth_dir + "/locations.csv") + " --out " + q(dir + "/map.geojson") + " --unplaced " +
                    q(dir + "/unplaced.jsonl"),
                "qualitative --checkpoint " + q(dir + "/model.ckpt") + " --suite " +
                    q(args.data + "/qualitative_suite.tsv") + " --embeddings " +
                    q(synth_dir + "/embeddings.vec") + " --out " + q(dir + "/qualitative.json"),
                "gradcheck --seeds 2",
            };
            for (const auto& step : steps) {
                const auto status = exit_code(run(base + step + " > " + q(dir + "/last_stdout.txt") + " 2>&1"));
                if (status != 0) return "FAIL: step `" + step.substr(0, 40) + "...` exited " + std::to_string(status);
            }
            return "";
        };

        const std::string d1 = args.workdir + "/cli_run1";
        const std::string d2 = args.workdir + "/cli_run2";
        if (auto e = run_pipeline(d1); !e.empty()) return e;
        if (auto e = run_pipeline(d2); !e.empty()) return e;

        for (const char* name : {"model.ckpt", "dict.ckpt", "svm.ckpt", "metrics.json",
                                 "comparison.json", "history.json", "predictions.tsv",
                                 "composition.jsonl", "map.geojson", "labeled.tsv", "sample.tsv"}) {
            const auto f1 = manifest::file_fingerprint(d1 + "/" + name);
            const auto f2 = manifest::file_fingerprint(d2 + "/" + name);
            if (f1 != f2) return std::string("FAIL: ") + name + " differs across identical reruns";
        }
        // the exported map from the CLI must also satisfy the independent validator
        std::ifstream geo(d1 + "/map.geojson");
        std::stringstream buf;
        buf << geo.rdbuf();
        if (!geojson_validator::validate(buf.str()).ok)
            return std::string("FAIL: CLI geojson rejected by the validator");
        return std::string("full pipeline rerun is byte-identical (checkpoint, metrics, exports)");
    });

    // 10. automaton throughput
    gate.check(10, "matcher throughput >= 50,000 sentences/s", [&] {
        Rng rng(99);
        auto word = [](std::uint64_t n) {
            std::string s = "w";
            for (;; n /= 10) {
                s += static_cast<char>('a' + n % 10);
                if (n < 10) break;
            }
            return s;
        };
        std::vector<gazetteer::NationalityTerm> terms;
        std::set<std::string> used;
        while (terms.size() < 500) {
            std::string surface = word(rng.below(2000));
            if (rng.below(4) == 0) surface += " " + word(rng.below(2000));
            if (!used.insert(surface).second) continue;
            gazetteer::NationalityTerm t;
            t.surface = surface;
            t.folded = surface;
            t.country = "DE";
            terms.push_back(std::move(t));
        }
        gazetteer::Gazetteer g(terms, {});
        g.compile();

        std::vector<corpus::Sentence> sentences;
        for (int i = 0; i < 20000; ++i) {
            std::string text_line;
            const std::size_t len = 4 + rng.below(10);
            for (std::size_t j = 0; j < len; ++j) {
                if (j) text_line += ' ';
                text_line += word(rng.below(3000));
            }
            sentences.push_back(corpus::make_sentence("r", i, text_line));
        }
        std::size_t matched = 0, hits = 0;
        const auto t0 = Clock::now();
        double elapsed = 0;
        while ((elapsed = seconds_since(t0)) < 1.0) {
            for (const auto& s : sentences) hits += g.match(s).size();
            matched += sentences.size();
        }
        const double rate = static_cast<double>(matched) / elapsed;
        std::ostringstream out;
        out << static_cast<std::uint64_t>(rate) << " sentences/s (" << hits << " spans)";
        if (rate < 50000.0) return "FAIL: " + out.str();
        return out.str();
    });

    std::cout << (gate.failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << " ("
              << seconds_since(t_all) << " s total)\n";
    return gate.failures == 0 ? 0 : 1;
}
