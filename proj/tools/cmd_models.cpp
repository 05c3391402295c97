#include "cli_common.hpp"
#include "commands.hpp"

#include "gastmix/error.hpp"
#include "gastmix/eval.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/manifest.hpp"
#include "gastmix/models/checkpoint.hpp"
#include "gastmix/models/dictionary.hpp"
#include "gastmix/models/recurrent.hpp"
#include "gastmix/models/tfidf_svm.hpp"

#include <fstream>
#include <iostream>
#include <unordered_map>

namespace gastmix::cli {

using nlohmann::json;

namespace {

struct FoldData {
    std::vector<corpus::Sentence> train_sentences, val_sentences;
    std::vector<bool> train_labels, val_labels;
};

FoldData assemble_folds(const std::string& sentences_path, const std::string& labeled_path,
                        const std::string& split_path) {
    fail_if_missing(sentences_path, "sentence file");
    fail_if_missing(labeled_path, "labeled file");
    fail_if_missing(split_path, "split manifest");
    auto records = load_sentences_jsonl(sentences_path);
    std::unordered_map<std::uint64_t, const SentenceRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.sentence.sentence_id, &r);
    const auto labels = load_labels_tsv(labeled_path);
    const auto folds = load_split_jsonl(split_path);

    FoldData fd;
    for (const auto& l : labels) {
        const auto fit = folds.find(l.sentence_id);
        if (fit == folds.end()) continue;  // unlabeled or not in this split
        const auto sit = by_id.find(l.sentence_id);
        if (sit == by_id.end())
            throw DataError("labeled sentence " + to_hex(l.sentence_id) + " not found in " + sentences_path);
        if (fit->second == "train") {
            fd.train_sentences.push_back(sit->second->sentence);
            fd.train_labels.push_back(l.gold);
        } else {
            fd.val_sentences.push_back(sit->second->sentence);
            fd.val_labels.push_back(l.gold);
        }
    }
    return fd;
}

struct TrainOpts {
    std::string model;  // dict | tfidf-svm | lstm | bilstm
    std::string sentences, labeled, split;
    std::string lexicon, veto;
    bool no_inflect = false;
    std::string embeddings;
    std::string out;
    std::string history;
    std::uint64_t seed = 0;
    // recurrent hyperparameters
    std::string pooling = "last_state";
    int hidden = 64;
    int layers = 2;
    int dim = 32;
    int max_epochs = 100;
    int batch = 32;
    int patience = 5;
    double lr = 1e-3;
    int max_seq_len = 64;
    std::uint64_t buckets = 1u << 20;
    // svm hyperparameters
    double lambda = 1e-4;
    int svm_epochs = 20;
    std::uint64_t min_df = 1;
};

void run_train(const TrainOpts& o) {
    manifest::ManifestWriter mw("train", json{{"model", o.model},
                                              {"sentences", o.sentences},
                                              {"labeled", o.labeled},
                                              {"split", o.split},
                                              {"seed", o.seed},
                                              {"pooling", o.pooling},
                                              {"hidden", o.hidden},
                                              {"layers", o.layers},
                                              {"dim", o.dim},
                                              {"max_epochs", o.max_epochs},
                                              {"batch", o.batch},
                                              {"patience", o.patience},
                                              {"lr", o.lr},
                                              {"max_seq_len", o.max_seq_len},
                                              {"buckets", o.buckets},
                                              {"lambda", o.lambda},
                                              {"svm_epochs", o.svm_epochs},
                                              {"min_df", o.min_df},
                                              {"embeddings", o.embeddings},
                                              {"lexicon", o.lexicon}}
                                    .dump());

    if (o.model == "dict") {
        fail_if_missing(o.lexicon, "lexicon");
        // nothing to fit; the checkpoint pins the lexicon the gazetteer came from
        models::save_dictionary_checkpoint(o.out, manifest::file_fingerprint(o.lexicon), o.seed);
        mw.add_input(o.lexicon);
        mw.add_output(o.out);
        mw.write(o.out + ".manifest.json");
        std::cout << "dictionary checkpoint written\n";
        return;
    }

    FoldData fd = assemble_folds(o.sentences, o.labeled, o.split);
    if (fd.train_sentences.empty()) throw DataError("empty training fold");
    mw.add_input(o.sentences);
    mw.add_input(o.labeled);
    mw.add_input(o.split);

    if (o.model == "tfidf-svm") {
        const auto clf = models::TfidfSvmClassifier::train(fd.train_sentences, fd.train_labels, o.lambda,
                                                           o.svm_epochs, o.seed, o.min_df);
        models::save_tfidf_svm_checkpoint(o.out, clf, o.seed);
        mw.add_output(o.out);
        mw.write(o.out + ".manifest.json");
        std::cout << "tfidf-svm checkpoint written (vocabulary " << clf.vectorizer().vocab_size() << ")\n";
        return;
    }

    if (o.model != "lstm" && o.model != "bilstm")
        throw CLI::ValidationError("--model", "expected dict, tfidf-svm, lstm or bilstm");

    models::RecurrentConfig rc;
    rc.pooling = models::parse_pooling(o.pooling);
    rc.layers = o.layers;
    rc.hidden = o.hidden;
    rc.bidirectional = o.model == "bilstm";
    rc.dim = o.dim;
    rc.subword_buckets = o.buckets;
    rc.max_seq_len = o.max_seq_len;

    std::string embeddings_fingerprint;
    models::RecurrentClassifier model = [&] {
        if (o.embeddings.empty()) {
            return models::RecurrentClassifier::make_learned(rc, fd.train_sentences, o.seed);
        }
        fail_if_missing(o.embeddings, "embedding file");
        embeddings_fingerprint = manifest::file_fingerprint(o.embeddings);
        auto table = std::make_shared<embeddings::EmbeddingTable>(embeddings::load_vec(o.embeddings));
        return models::RecurrentClassifier::make_pretrained(rc, std::move(table), o.seed);
    }();

    models::TrainConfig tc;
    tc.learning_rate = o.lr;
    tc.batch_size = o.batch;
    tc.max_epochs = o.max_epochs;
    tc.patience = o.patience;
    tc.max_seq_len = o.max_seq_len;
    tc.seed = o.seed;

    auto trained = models::train_recurrent(std::move(model), fd.train_sentences, fd.train_labels,
                                           fd.val_sentences, fd.val_labels, tc);

    models::save_recurrent_checkpoint(o.out, trained.model, o.seed, embeddings_fingerprint);
    mw.add_output(o.out);
    if (!o.embeddings.empty()) mw.add_input(o.embeddings);

    if (!o.history.empty()) {
        json hist = json::array();
        for (const auto& e : trained.history) {
            hist.push_back(json{{"epoch", e.epoch},
                                {"train_loss", e.train_loss},
                                {"val_f1", e.val_f1},
                                {"val_accuracy", e.val_accuracy},
                                {"improved", e.improved}});
        }
        std::ofstream hf(o.history, std::ios::binary | std::ios::trunc);
        if (!hf) throw DataError("cannot write: " + o.history);
        hf << json{{"schema", "gastmix.history.v1"},
                   {"best_epoch", trained.best_epoch},
                   {"best_val_f1", trained.best_val_f1},
                   {"epochs", hist}}
                  .dump(2)
           << '\n';
        mw.add_output(o.history);
    }
    mw.write(o.out + ".manifest.json");
    std::cout << "recurrent checkpoint written; best val F1 " << trained.best_val_f1 << " at epoch "
              << trained.best_epoch << " (" << trained.history.size() << " epochs run, "
              << models::count_parameters(trained.model) << " trainable parameters)\n";
}

struct EvalOpts {
    std::uint64_t seed = 0;
    std::vector<std::string> checkpoints;  // name=path or path
    std::string sentences, labeled, split;
    std::string fold = "validation";
    std::string lexicon, veto;
    bool no_inflect = false;
    std::string embeddings;
    std::string out;
    bool json_stdout = false;
};

std::pair<std::string, std::string> parse_named_path(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) {
        auto slash = arg.find_last_of('/');
        std::string stem = slash == std::string::npos ? arg : arg.substr(slash + 1);
        if (const auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
        return {stem, arg};
    }
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

void run_evaluate(const EvalOpts& o) {
    FoldData fd = assemble_folds(o.sentences, o.labeled, o.split);
    const auto& sentences = o.fold == "train" ? fd.train_sentences : fd.val_sentences;
    const auto& labels = o.fold == "train" ? fd.train_labels : fd.val_labels;
    if (sentences.empty()) throw DataError("fold '" + o.fold + "' is empty");

    ClassifierDeps deps{o.lexicon, o.veto, !o.no_inflect, o.embeddings};
    eval::Comparison comparison;
    for (const auto& arg : o.checkpoints) {
        const auto [name, path] = parse_named_path(arg);
        const auto loaded = load_classifier(path, deps);
        std::vector<eval::Labeled> preds, gold;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            preds.push_back({sentences[i].sentence_id, loaded.classifier->predict(sentences[i]).label});
            gold.push_back({sentences[i].sentence_id, labels[i]});
        }
        comparison.rows.push_back({name, eval::metrics(eval::confusion(preds, gold))});
    }

    std::string payload;
    if (comparison.rows.size() == 1) {
        payload = eval::metrics_to_json(comparison.rows[0].report);
    } else {
        payload = eval::comparison_to_json(comparison);
    }
    if (o.json_stdout) {
        std::cout << payload;
    } else {
        std::cout << eval::render_table(comparison);
    }
    if (!o.out.empty()) {
        std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write: " + o.out);
        f << payload;
        f.close();
        manifest::ManifestWriter mw("evaluate", json{{"seed", o.seed},
                                                     {"checkpoints", o.checkpoints},
                                                     {"sentences", o.sentences},
                                                     {"labeled", o.labeled},
                                                     {"split", o.split},
                                                     {"fold", o.fold}}
                                        .dump());
        for (const auto& arg : o.checkpoints) mw.add_input(parse_named_path(arg).second);
        mw.add_input(o.sentences);
        mw.add_input(o.labeled);
        mw.add_input(o.split);
        mw.add_output(o.out);
        mw.write(o.out + ".manifest.json");
    }
}

struct PredictOpts {
    std::uint64_t seed = 0;
    std::string checkpoint;
    std::string sentences;  // sentences.jsonl
    std::string text_file;  // or plain text, one sentence per line
    std::string lexicon, veto;
    bool no_inflect = false;
    std::string embeddings;
    std::string out;
};

void run_predict(const PredictOpts& o) {
    if (o.sentences.empty() == o.text_file.empty())
        throw CLI::ValidationError("--sentences/--text", "pass exactly one input form");
    ClassifierDeps deps{o.lexicon, o.veto, !o.no_inflect, o.embeddings};
    const auto loaded = load_classifier(o.checkpoint, deps);

    std::vector<corpus::Sentence> sentences;
    if (!o.sentences.empty()) {
        for (auto& r : load_sentences_jsonl(o.sentences)) sentences.push_back(std::move(r.sentence));
    } else {
        fail_if_missing(o.text_file, "text file");
        std::ifstream in(o.text_file, std::ios::binary);
        std::string line;
        int index = 0;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            sentences.push_back(corpus::make_sentence("stdin", index++, line));
        }
    }

    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write: " + o.out);
    out << "# sentence_id\tprobability\tlabel\n";
    char buf[32];
    for (const auto& s : sentences) {
        const auto p = loaded.classifier->predict(s);
        std::snprintf(buf, sizeof(buf), "%.6f", p.probability);
        out << to_hex(s.sentence_id) << '\t' << buf << '\t' << (p.label ? 1 : 0) << '\n';
    }
    out.close();
    std::cout << "predicted " << sentences.size() << " sentences with " << loaded.family << " model\n";

    manifest::ManifestWriter mw("predict", json{{"seed", o.seed},
                                                {"checkpoint", o.checkpoint},
                                                {"sentences", o.sentences},
                                                {"text", o.text_file}}
                                    .dump());
    mw.add_input(o.checkpoint);
    mw.add_input(o.sentences.empty() ? o.text_file : o.sentences);
    mw.add_output(o.out);
    mw.write(o.out + ".manifest.json");
}

struct QualitativeOpts {
    std::uint64_t seed = 0;
    std::string checkpoint;
    std::string suite;
    std::string lexicon, veto;
    bool no_inflect = false;
    std::string embeddings;
    std::string out;
};

void run_qualitative(const QualitativeOpts& o) {
    fail_if_missing(o.suite, "edge-case suite");
    ClassifierDeps deps{o.lexicon, o.veto, !o.no_inflect, o.embeddings};
    const auto loaded = load_classifier(o.checkpoint, deps);

    std::ifstream in(o.suite, std::ios::binary);
    std::string line;
    json rows = json::array();
    std::size_t correct = 0, total = 0, line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(o.suite + ":" + std::to_string(line_no) + ": expected sentence<TAB>gold");
        const std::string text = line.substr(0, tab);
        const std::string rest = line.substr(tab + 1);
        const auto tab2 = rest.find('\t');
        const std::string gold_str = tab2 == std::string::npos ? rest : rest.substr(0, tab2);
        const std::string note = tab2 == std::string::npos ? "" : rest.substr(tab2 + 1);
        if (gold_str != "0" && gold_str != "1")
            throw DataError(o.suite + ":" + std::to_string(line_no) + ": gold must be 0 or 1");
        const bool gold = gold_str == "1";
        const auto s = corpus::make_sentence("suite", static_cast<int>(rows.size()), text);
        const auto p = loaded.classifier->predict(s);
        const bool ok = p.label == gold;
        ++total;
        if (ok) ++correct;
        rows.push_back(json{{"sentence", text},
                            {"gold", gold},
                            {"probability", p.probability},
                            {"predicted", p.label},
                            {"correct", ok},
                            {"note", note}});
        std::cout << (ok ? "[ok]   " : "[miss] ") << (p.label ? "True " : "False") << "  gold "
                  << (gold ? "True " : "False") << "  " << text << '\n';
    }
    std::cout << correct << "/" << total << " correct\n";

    if (!o.out.empty()) {
        std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write: " + o.out);
        f << json{{"schema", "gastmix.qualitative.v1"},
                  {"correct", correct},
                  {"total", total},
                  {"rows", rows}}
                 .dump(2)
          << '\n';
        manifest::ManifestWriter mw("qualitative",
                                    json{{"seed", o.seed}, {"checkpoint", o.checkpoint}, {"suite", o.suite}}
                                        .dump());
        mw.add_input(o.checkpoint);
        mw.add_input(o.suite);
        mw.add_output(o.out);
        mw.write(o.out + ".manifest.json");
    }
}

struct GradcheckOpts {
    int seeds = 10;
    double tolerance = 1e-4;
};

void run_gradcheck(const GradcheckOpts& o) {
    double worst = 0;
    std::string worst_param;
    std::size_t checked = 0;
    for (int s = 0; s < o.seeds; ++s) {
        const auto r = models::gradient_check(static_cast<std::uint64_t>(s) + 1);
        checked += r.checked;
        if (r.max_rel_err > worst) {
            worst = r.max_rel_err;
            worst_param = r.worst_param;
        }
    }
    std::cout << "gradcheck: " << o.seeds << " seeds, " << checked
              << " partial derivatives, max relative error " << worst;
    if (!worst_param.empty()) std::cout << " (" << worst_param << ")";
    std::cout << '\n';
    if (worst >= o.tolerance) throw DataError("gradient check failed: max relative error above tolerance");
}

} // namespace

void register_model_commands(CLI::App& app, const Settings& cfg) {
    auto add_deps = [&cfg](CLI::App* cmd, std::string& lexicon, std::string& veto, bool& no_inflect,
                           std::string& embeddings) {
        lexicon = cfg.get("lexicon", lexicon);
        veto = cfg.get("veto", veto);
        embeddings = cfg.get("embeddings", embeddings);
        cmd->add_option("--lexicon", lexicon, "lexicon TSV (dictionary models)");
        cmd->add_option("--veto", veto);
        cmd->add_flag("--no-inflect", no_inflect);
        cmd->add_option("--embeddings", embeddings, ".vec file (pretrained recurrent models)");
    };

    {
        auto o = std::make_shared<TrainOpts>();
        o->seed = cfg.get("seed", o->seed);
        o->hidden = static_cast<int>(cfg.get("hidden", static_cast<std::int64_t>(o->hidden)));
        o->layers = static_cast<int>(cfg.get("layers", static_cast<std::int64_t>(o->layers)));
        o->dim = static_cast<int>(cfg.get("dim", static_cast<std::int64_t>(o->dim)));
        o->max_epochs = static_cast<int>(cfg.get("max_epochs", static_cast<std::int64_t>(o->max_epochs)));
        o->batch = static_cast<int>(cfg.get("batch", static_cast<std::int64_t>(o->batch)));
        o->patience = static_cast<int>(cfg.get("patience", static_cast<std::int64_t>(o->patience)));
        o->lr = cfg.get("lr", o->lr);
        o->max_seq_len = static_cast<int>(cfg.get("max_seq_len", static_cast<std::int64_t>(o->max_seq_len)));
        o->buckets = cfg.get("buckets", o->buckets);
        o->lambda = cfg.get("lambda", o->lambda);
        o->svm_epochs = static_cast<int>(cfg.get("svm_epochs", static_cast<std::int64_t>(o->svm_epochs)));
        auto* cmd = app.add_subcommand("train", "Train a classifier and write a checkpoint");
        cmd->add_option("--model", o->model, "dict | tfidf-svm | lstm | bilstm")->required();
        cmd->add_option("--sentences", o->sentences, "sentences.jsonl");
        cmd->add_option("--labeled", o->labeled, "gold labels TSV");
        cmd->add_option("--split", o->split, "split manifest JSONL");
        cmd->add_option("--out", o->out, "checkpoint path")->required();
        cmd->add_option("--history", o->history, "per-epoch history JSON (recurrent)");
        cmd->add_option("--seed", o->seed);
        cmd->add_option("--pooling", o->pooling, "last_state or mean (sequence representation)");
        cmd->add_option("--hidden", o->hidden);
        cmd->add_option("--layers", o->layers);
        cmd->add_option("--dim", o->dim, "embedding dim in learned mode");
        cmd->add_option("--max-epochs", o->max_epochs);
        cmd->add_option("--batch", o->batch);
        cmd->add_option("--patience", o->patience);
        cmd->add_option("--lr", o->lr);
        cmd->add_option("--max-seq-len", o->max_seq_len);
        cmd->add_option("--buckets", o->buckets, "subword bucket count (power of two)");
        cmd->add_option("--lambda", o->lambda, "svm regularization");
        cmd->add_option("--svm-epochs", o->svm_epochs);
        cmd->add_option("--min-df", o->min_df, "tfidf minimum document frequency");
        add_deps(cmd, o->lexicon, o->veto, o->no_inflect, o->embeddings);
        cmd->callback([o] { run_train(*o); });
    }
    {
        auto o = std::make_shared<EvalOpts>();
        o->seed = cfg.get("seed", o->seed);
        auto* cmd = app.add_subcommand("evaluate", "Score checkpoints on a fold; compare when several");
        cmd->add_option("--checkpoint", o->checkpoints, "name=path (repeatable)")->required()->expected(-1);
        cmd->add_option("--sentences", o->sentences)->required();
        cmd->add_option("--labeled", o->labeled)->required();
        cmd->add_option("--split", o->split)->required();
        cmd->add_option("--fold", o->fold, "train or validation");
        cmd->add_option("--out", o->out, "metrics/comparison JSON");
        cmd->add_flag("--json", o->json_stdout, "print JSON instead of the table");
        add_deps(cmd, o->lexicon, o->veto, o->no_inflect, o->embeddings);
        cmd->callback([o] { run_evaluate(*o); });
    }
    {
        auto o = std::make_shared<PredictOpts>();
        o->seed = cfg.get("seed", o->seed);
        auto* cmd = app.add_subcommand("predict", "Per-sentence probabilities from a checkpoint");
        cmd->add_option("--checkpoint", o->checkpoint)->required();
        cmd->add_option("--sentences", o->sentences, "sentences.jsonl");
        cmd->add_option("--text", o->text_file, "plain text, one sentence per line");
        cmd->add_option("--out", o->out, "predictions TSV")->required();
        add_deps(cmd, o->lexicon, o->veto, o->no_inflect, o->embeddings);
        cmd->callback([o] { run_predict(*o); });
    }
    {
        auto o = std::make_shared<QualitativeOpts>();
        o->seed = cfg.get("seed", o->seed);
        o->suite = cfg.get("suite", std::string("data/qualitative_suite.tsv"));
        auto* cmd = app.add_subcommand("qualitative", "Run the edge-case suite and report per-row results");
        cmd->add_option("--checkpoint", o->checkpoint)->required();
        cmd->add_option("--suite", o->suite, "suite TSV: sentence<TAB>gold[<TAB>note]");
        cmd->add_option("--out", o->out, "report JSON");
        add_deps(cmd, o->lexicon, o->veto, o->no_inflect, o->embeddings);
        cmd->callback([o] { run_qualitative(*o); });
    }
    {
        auto o = std::make_shared<GradcheckOpts>();
        auto* cmd = app.add_subcommand("gradcheck",
                                       "Check analytic BPTT gradients against finite differences");
        cmd->add_option("--seeds", o->seeds, "number of random seeds");
        cmd->add_option("--tolerance", o->tolerance, "max allowed relative error");
        cmd->callback([o] { run_gradcheck(*o); });
    }
}

} // namespace gastmix::cli
