#include "cli_common.hpp"
#include "commands.hpp"

#include "gastmix/embeddings.hpp"
#include "gastmix/error.hpp"
#include "gastmix/manifest.hpp"

#include <fstream>
#include <iostream>

namespace gastmix::cli {

using nlohmann::json;

namespace {

struct IngestOpts {
    std::uint64_t seed = 0;  // recorded in the manifest
    std::string input;
    std::string format = "jsonl";
    std::string out;
    std::string abbrev;
    bool strict = false;
};

void run_ingest(const IngestOpts& o) {
    fail_if_missing(o.input, "review file");
    const auto abbrevs = o.abbrev.empty() ? corpus::default_abbreviations()
                                          : corpus::load_abbreviations(o.abbrev);

    corpus::IngestStats stats;
    const auto reviews = corpus::ingest_reviews(o.input, corpus::parse_format(o.format), o.strict, stats);

    std::vector<SentenceRecord> records;
    corpus::Deduper seen;
    std::size_t duplicates = 0;
    for (const auto& r : reviews) {
        int index = 0;
        for (auto& text : corpus::split_sentences(r.text, abbrevs)) {
            auto s = corpus::make_sentence(r.review_id, index++, std::move(text));
            if (!seen.insert(s)) {
                ++duplicates;
                continue;
            }
            records.push_back({std::move(s), r.business_id, r.date});
        }
    }
    write_sentences_jsonl(o.out, records);

    for (const auto& msg : stats.messages) std::cerr << "skipped: " << msg << '\n';
    std::cout << "reviews: " << stats.records_out << " (skipped " << stats.skipped << ")\n"
              << "unique sentences: " << records.size() << " (duplicates " << duplicates << ")\n";

    manifest::ManifestWriter mw("ingest", json{{"seed", o.seed},
                                               {"input", o.input},
                                               {"format", o.format},
                                               {"strict", o.strict},
                                               {"abbrev", o.abbrev},
                                               {"records_in", stats.records_in},
                                               {"records_out", stats.records_out},
                                               {"skipped", stats.skipped},
                                               {"unique_sentences", records.size()},
                                               {"duplicate_sentences", duplicates}}
                                    .dump());
    mw.add_input(o.input);
    if (!o.abbrev.empty()) mw.add_input(o.abbrev);
    mw.add_output(o.out);
    mw.write(o.out + ".manifest.json");
}

struct FilterOpts {
    std::uint64_t seed = 0;
    std::string sentences;
    std::string lexicon;
    std::string veto;
    bool no_inflect = false;
    std::string out_with;
    std::string out_without;
    std::string stats;
};

void run_filter(const FilterOpts& o) {
    fail_if_missing(o.sentences, "sentence file");
    auto g = build_gazetteer(o.lexicon, o.veto, !o.no_inflect);

    auto records = load_sentences_jsonl(o.sentences);
    std::vector<SentenceRecord> with, without;
    gazetteer::FilterStats stats;
    for (auto& r : records) {
        const auto spans = g->match(r.sentence);
        if (spans.empty()) {
            ++stats.without_terms;
            without.push_back(std::move(r));
        } else {
            for (const auto& m : spans) stats.term_frequencies[g->terms()[m.term_index].folded]++;
            ++stats.with_terms;
            with.push_back(std::move(r));
        }
    }
    write_sentences_jsonl(o.out_with, with);
    write_sentences_jsonl(o.out_without, without);

    const json settings{{"seed", o.seed},        {"sentences", o.sentences},
                        {"lexicon", o.lexicon},  {"veto", o.veto},
                        {"inflect", !o.no_inflect}, {"with", stats.with_terms},
                        {"without", stats.without_terms}};
    if (!o.stats.empty()) {
        std::ofstream sf(o.stats, std::ios::binary | std::ios::trunc);
        if (!sf) throw DataError("cannot write: " + o.stats);
        sf << json{{"schema", "gastmix.filter_stats.v1"},
                   {"with_terms", stats.with_terms},
                   {"without_terms", stats.without_terms},
                   {"term_frequencies", stats.term_frequencies}}
                  .dump(2)
           << '\n';
    }
    std::cout << "with terms: " << stats.with_terms << "\nwithout terms: " << stats.without_terms << '\n';

    manifest::ManifestWriter mw("filter", settings.dump());
    mw.add_input(o.sentences);
    mw.add_input(o.lexicon);
    if (!o.veto.empty()) mw.add_input(o.veto);
    mw.add_output(o.out_with);
    mw.add_output(o.out_without);
    if (!o.stats.empty()) mw.add_output(o.stats);
    mw.write(o.out_with + ".manifest.json");
}

struct ExpandOpts {
    std::uint64_t seed = 0;
    std::string lexicon;
    std::string embeddings;
    std::string veto;
    std::size_t k = 10;
    double min_sim = 0.5;
    std::string out_lexicon;
    std::string report;
};

void run_expand(const ExpandOpts& o) {
    fail_if_missing(o.lexicon, "lexicon");
    fail_if_missing(o.embeddings, "embedding file");
    std::set<std::string> veto;
    if (!o.veto.empty()) {
        fail_if_missing(o.veto, "veto list");
        veto = gazetteer::load_veto(o.veto);
    }
    auto g = gazetteer::load_lexicon(o.lexicon, std::move(veto));
    const auto table = embeddings::load_vec(o.embeddings);
    const auto report = gazetteer::expand_with_knn(g, table, o.k, o.min_sim);
    gazetteer::save_lexicon(g, o.out_lexicon);

    if (!o.report.empty()) {
        std::ofstream rf(o.report, std::ios::binary | std::ios::trunc);
        if (!rf) throw DataError("cannot write: " + o.report);
        rf << "# seed\tneighbor\tsimilarity\taccepted\treason\n";
        char buf[32];
        for (const auto& e : report.entries) {
            std::snprintf(buf, sizeof(buf), "%.6f", e.similarity);
            rf << e.seed << '\t' << e.neighbor << '\t' << buf << '\t' << (e.accepted ? 1 : 0) << '\t'
               << e.reason << '\n';
        }
        for (const auto& s : report.missing_seeds) rf << s << "\t-\t-\t0\tnot in embedding vocabulary\n";
    }
    std::cout << "added " << report.added << " expanded terms; " << report.missing_seeds.size()
              << " seeds not in the embedding vocabulary\n";

    manifest::ManifestWriter mw("expand-vocab", json{{"seed", o.seed},
                                                     {"lexicon", o.lexicon},
                                                     {"embeddings", o.embeddings},
                                                     {"veto", o.veto},
                                                     {"k", o.k},
                                                     {"min_sim", o.min_sim},
                                                     {"added", report.added}}
                                                    .dump());
    mw.add_input(o.lexicon);
    mw.add_input(o.embeddings);
    if (!o.veto.empty()) mw.add_input(o.veto);
    mw.add_output(o.out_lexicon);
    if (!o.report.empty()) mw.add_output(o.report);
    mw.write(o.out_lexicon + ".manifest.json");
}

} // namespace

void register_corpus_commands(CLI::App& app, const Settings& cfg) {
    {
        auto o = std::make_shared<IngestOpts>();
        o->seed = cfg.get("seed", o->seed);
        o->format = cfg.get("format", o->format);
        o->abbrev = cfg.get("abbrev", o->abbrev);
        o->strict = cfg.get("strict", false);
        auto* cmd = app.add_subcommand("ingest",
                                       "Read reviews, split into unique sentences, write sentences.jsonl");
        cmd->add_option("--input", o->input, "review file (jsonl or csv)")->required();
        cmd->add_option("--format", o->format, "jsonl or csv");
        cmd->add_option("--out", o->out, "output sentences.jsonl")->required();
        cmd->add_option("--abbrev", o->abbrev, "abbreviation list for the sentence splitter");
        cmd->add_flag("--strict", o->strict, "abort on the first malformed record");
        cmd->callback([o] { run_ingest(*o); });
    }
    {
        auto o = std::make_shared<FilterOpts>();
        o->seed = cfg.get("seed", o->seed);
        o->veto = cfg.get("veto", o->veto);
        auto* cmd = app.add_subcommand("filter", "Partition sentences by gazetteer matches");
        cmd->add_option("--sentences", o->sentences)->required();
        cmd->add_option("--lexicon", o->lexicon)->required();
        cmd->add_option("--veto", o->veto, "suppressed surfaces, one per line");
        cmd->add_flag("--no-inflect", o->no_inflect, "match seed surfaces only");
        cmd->add_option("--out-with", o->out_with)->required();
        cmd->add_option("--out-without", o->out_without)->required();
        cmd->add_option("--stats", o->stats, "filter statistics JSON");
        cmd->callback([o] { run_filter(*o); });
    }
    {
        auto o = std::make_shared<ExpandOpts>();
        o->seed = cfg.get("seed", o->seed);
        o->k = cfg.get("k", static_cast<std::uint64_t>(o->k));
        o->min_sim = cfg.get("min_sim", o->min_sim);
        o->veto = cfg.get("veto", o->veto);
        auto* cmd = app.add_subcommand("expand-vocab",
                                       "Add nearest-neighbor slang terms to the lexicon");
        cmd->add_option("--lexicon", o->lexicon)->required();
        cmd->add_option("--embeddings", o->embeddings, "pretrained .vec file")->required();
        cmd->add_option("--veto", o->veto);
        cmd->add_option("--k", o->k, "neighbors per seed term");
        cmd->add_option("--min-sim", o->min_sim, "minimum cosine similarity");
        cmd->add_option("--out-lexicon", o->out_lexicon)->required();
        cmd->add_option("--report", o->report, "expansion report TSV");
        cmd->callback([o] { run_expand(*o); });
    }
}

} // namespace gastmix::cli
