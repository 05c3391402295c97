#include "cli_common.hpp"
#include "commands.hpp"

#include "gastmix/error.hpp"
#include "gastmix/eval.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/manifest.hpp"

#include <fstream>
#include <iostream>

namespace gastmix::cli {

using nlohmann::json;

namespace {

struct SampleOpts {
    std::string with_path;
    std::string without_path;
    std::size_t n = 750;
    double ratio = 0.5;
    std::uint64_t seed = 0;
    std::string out;
    std::string meta;
};

void run_sample(const SampleOpts& o) {
    fail_if_missing(o.with_path, "with-terms sentence file");
    fail_if_missing(o.without_path, "without-terms sentence file");
    auto with_records = load_sentences_jsonl(o.with_path);
    auto without_records = load_sentences_jsonl(o.without_path);
    std::vector<corpus::Sentence> with, without;
    for (auto& r : with_records) with.push_back(std::move(r.sentence));
    for (auto& r : without_records) without.push_back(std::move(r.sentence));

    const auto sample = dataset::sample_balanced(with, without, o.n, o.ratio, o.seed);

    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write: " + o.out);
    out << "# sentence_id\ttext\n";
    for (const auto& s : sample.sentences) out << to_hex(s.sentence_id) << '\t' << s.text << '\n';
    out.close();

    const std::string meta_path = o.meta.empty() ? o.out + ".meta.jsonl" : o.meta;
    std::ofstream meta(meta_path, std::ios::binary | std::ios::trunc);
    if (!meta) throw DataError("cannot write: " + meta_path);
    for (std::size_t i = 0; i < sample.sentences.size(); ++i) {
        meta << json{{"sentence_id", to_hex(sample.sentences[i].sentence_id)},
                     {"has_term", static_cast<bool>(sample.has_term[i])}}
                    .dump()
             << '\n';
    }
    meta.close();
    std::cout << "sampled " << sample.sentences.size() << " sentences\n";

    manifest::ManifestWriter mw("sample", json{{"with", o.with_path},
                                               {"without", o.without_path},
                                               {"n", o.n},
                                               {"ratio", o.ratio},
                                               {"seed", o.seed}}
                                    .dump());
    mw.add_input(o.with_path);
    mw.add_input(o.without_path);
    mw.add_output(o.out);
    mw.add_output(meta_path);
    mw.write(o.out + ".manifest.json");
}

struct MergeOpts {
    std::uint64_t seed = 0;
    std::string sample;
    std::string meta;
    std::vector<std::string> annotations;
    std::string out;
    std::string adjudication;
    std::string agreement;
};

void run_merge(const MergeOpts& o) {
    fail_if_missing(o.sample, "sample file");
    const auto rows = load_sample_tsv(o.sample);
    std::map<std::uint64_t, bool> meta;
    if (!o.meta.empty()) {
        fail_if_missing(o.meta, "sample meta file");
        meta = load_sample_meta(o.meta);
    }

    std::vector<corpus::Sentence> sentences;
    std::vector<bool> has_term;
    for (const auto& r : rows) {
        corpus::Sentence s;
        s.sentence_id = r.sentence_id;
        s.text = r.text;
        s.tokens = corpus::tokenize(r.text);
        sentences.push_back(std::move(s));
        const auto it = meta.find(r.sentence_id);
        has_term.push_back(it != meta.end() && it->second);
    }

    std::vector<dataset::AnnotationRecord> annotations;
    for (const auto& path : o.annotations) {
        fail_if_missing(path, "annotation file");
        auto part = dataset::load_annotations(path);
        // restrict to the sampled sentences; annotators may have covered more
        std::set<std::uint64_t> sampled;
        for (const auto& r : rows) sampled.insert(r.sentence_id);
        for (auto& a : part) {
            if (sampled.count(a.sentence_id)) annotations.push_back(std::move(a));
        }
    }
    if (annotations.empty()) throw DataError("no annotations cover the sampled sentences");

    const auto merged = dataset::merge_annotations(annotations, sentences, has_term);

    std::vector<LabelRecord> labels;
    for (const auto& ls : merged.labeled) labels.push_back({ls.sentence.sentence_id, ls.gold});
    write_labels_tsv(o.out, labels);

    if (!o.adjudication.empty()) {
        std::ofstream adj(o.adjudication, std::ios::binary | std::ios::trunc);
        if (!adj) throw DataError("cannot write: " + o.adjudication);
        for (const auto id : merged.needs_adjudication) adj << to_hex(id) << '\n';
    }

    bool kappa_written = false;
    if (!o.agreement.empty()) {
        // Fleiss kappa needs a constant rater count per item.
        std::size_t raters = 0;
        bool uniform = true;
        std::vector<std::vector<int>> matrix;
        for (const auto& ls : merged.labeled) {
            if (raters == 0) raters = ls.annotator_labels.size();
            if (ls.annotator_labels.size() != raters) {
                uniform = false;
                break;
            }
            std::vector<int> row;
            for (const auto& [annotator, label] : ls.annotator_labels) row.push_back(label ? 1 : 0);
            matrix.push_back(std::move(row));
        }
        if (uniform && raters >= 2 && !matrix.empty()) {
            const auto report = eval::fleiss_kappa(matrix, 2);
            std::ofstream ag(o.agreement, std::ios::binary | std::ios::trunc);
            if (!ag) throw DataError("cannot write: " + o.agreement);
            ag << eval::agreement_to_json(report);
            kappa_written = true;
            std::cout << "fleiss kappa: " << report.kappa << '\n';
        } else {
            std::cerr << "agreement skipped: rater count is not uniform across sentences\n";
        }
    }
    std::cout << "labeled: " << merged.labeled.size()
              << ", needs adjudication: " << merged.needs_adjudication.size() << '\n';

    manifest::ManifestWriter mw("merge-annotations",
                                json{{"seed", o.seed},
                                     {"sample", o.sample},
                                     {"annotations", o.annotations},
                                     {"labeled", merged.labeled.size()},
                                     {"needs_adjudication", merged.needs_adjudication.size()}}
                                    .dump());
    mw.add_input(o.sample);
    if (!o.meta.empty()) mw.add_input(o.meta);
    for (const auto& a : o.annotations) mw.add_input(a);
    mw.add_output(o.out);
    if (!o.adjudication.empty()) mw.add_output(o.adjudication);
    if (kappa_written) mw.add_output(o.agreement);
    mw.write(o.out + ".manifest.json");
}

struct SplitOpts {
    std::string labeled;
    std::string meta;
    double fraction = 0.7;
    std::uint64_t seed = 0;
    std::string out;
};

void run_split(const SplitOpts& o) {
    fail_if_missing(o.labeled, "labeled file");
    const auto labels = load_labels_tsv(o.labeled);
    std::map<std::uint64_t, bool> meta;
    if (!o.meta.empty()) {
        fail_if_missing(o.meta, "sample meta file");
        meta = load_sample_meta(o.meta);
    }

    std::vector<dataset::LabeledSentence> data;
    for (const auto& l : labels) {
        dataset::LabeledSentence ls;
        ls.sentence.sentence_id = l.sentence_id;
        ls.gold = l.gold;
        const auto it = meta.find(l.sentence_id);
        ls.has_term = it != meta.end() && it->second;
        data.push_back(std::move(ls));
    }

    dataset::SplitSpec spec;
    spec.train_fraction = o.fraction;
    spec.seed = o.seed;
    const auto result = dataset::split(data, spec);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write: " + o.out);
    for (const auto& ls : result.train)
        out << json{{"sentence_id", to_hex(ls.sentence.sentence_id)}, {"fold", "train"}}.dump() << '\n';
    for (const auto& ls : result.validation)
        out << json{{"sentence_id", to_hex(ls.sentence.sentence_id)}, {"fold", "validation"}}.dump() << '\n';
    out.close();
    std::cout << "train: " << result.train.size() << ", validation: " << result.validation.size() << '\n';

    manifest::ManifestWriter mw("split", json{{"labeled", o.labeled},
                                              {"fraction", o.fraction},
                                              {"seed", o.seed},
                                              {"train", result.train.size()},
                                              {"validation", result.validation.size()}}
                                    .dump());
    mw.add_input(o.labeled);
    if (!o.meta.empty()) mw.add_input(o.meta);
    mw.add_output(o.out);
    mw.write(o.out + ".manifest.json");
}

} // namespace

void register_dataset_commands(CLI::App& app, const Settings& cfg) {
    {
        auto o = std::make_shared<SampleOpts>();
        o->n = cfg.get("n", static_cast<std::uint64_t>(o->n));
        o->ratio = cfg.get("ratio", o->ratio);
        o->seed = cfg.get("seed", o->seed);
        auto* cmd = app.add_subcommand("sample", "Draw a balanced annotation sample from both pools");
        cmd->add_option("--with", o->with_path, "with-terms sentences.jsonl")->required();
        cmd->add_option("--without", o->without_path, "without-terms sentences.jsonl")->required();
        cmd->add_option("--n", o->n, "total sample size");
        cmd->add_option("--ratio", o->ratio, "share drawn from the with-terms pool");
        cmd->add_option("--seed", o->seed);
        cmd->add_option("--out", o->out, "sample TSV for annotators")->required();
        cmd->add_option("--meta", o->meta, "sidecar with has_term flags (default <out>.meta.jsonl)");
        cmd->callback([o] { run_sample(*o); });
    }
    {
        auto o = std::make_shared<MergeOpts>();
        o->seed = cfg.get("seed", o->seed);
        auto* cmd = app.add_subcommand("merge-annotations", "Majority-vote gold labels from annotators");
        cmd->add_option("--sample", o->sample, "sample TSV the annotators worked from")->required();
        cmd->add_option("--meta", o->meta, "has_term sidecar from the sample step");
        cmd->add_option("--annotations", o->annotations, "annotation TSV files")->required()->expected(-1);
        cmd->add_option("--out", o->out, "merged labels TSV")->required();
        cmd->add_option("--adjudication", o->adjudication, "tie sentences, one id per line");
        cmd->add_option("--agreement", o->agreement, "Fleiss kappa JSON");
        cmd->callback([o] { run_merge(*o); });
    }
    {
        auto o = std::make_shared<SplitOpts>();
        o->fraction = cfg.get("fraction", o->fraction);
        o->seed = cfg.get("seed", o->seed);
        auto* cmd = app.add_subcommand("split", "Deterministic stratified train/validation split");
        cmd->add_option("--labeled", o->labeled, "merged labels TSV")->required();
        cmd->add_option("--meta", o->meta, "has_term sidecar for stratification");
        cmd->add_option("--fraction", o->fraction, "train fraction");
        cmd->add_option("--seed", o->seed);
        cmd->add_option("--out", o->out, "split manifest JSONL")->required();
        cmd->callback([o] { run_split(*o); });
    }
}

} // namespace gastmix::cli
