#include "cli_common.hpp"

#include "gastmix/error.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/manifest.hpp"
#include "gastmix/models/checkpoint.hpp"
#include "gastmix/models/dictionary.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace gastmix::cli {

using nlohmann::json;

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && static_cast<unsigned char>(s[b]) <= ' ') ++b;
    while (e > b && static_cast<unsigned char>(s[e - 1]) <= ' ') --e;
    return s.substr(b, e - b);
}

} // namespace

Settings Settings::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Settings s;
    const std::string trimmed = strip(content);
    if (!trimmed.empty() && trimmed[0] == '{') {
        json j;
        try {
            j = json::parse(trimmed);
        } catch (const json::exception& e) {
            throw DataError(path + ": bad JSON config: " + e.what());
        }
        for (const auto& [k, v] : j.items()) {
            s.values_[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        return s;
    }
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const std::size_t nl = content.find('\n', pos);
        std::string line = content.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? content.size() + 1 : nl + 1;
        ++line_no;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
        s.values_[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    return s;
}

Settings Settings::from_argv(int argc, char** argv) {
    Settings s;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" || arg == "-c") {
            if (i + 1 >= argc) throw DataError("--config needs a file path");
            s = from_file(argv[i + 1]);
            break;
        }
        if (arg.rfind("--config=", 0) == 0) {
            s = from_file(arg.substr(9));
            break;
        }
    }
    // global flags override config-file values and become per-command defaults
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--seed" && i + 1 < argc) s.values_["seed"] = argv[i + 1];
        else if (arg.rfind("--seed=", 0) == 0) s.values_["seed"] = arg.substr(7);
        else if (arg == "--strict") s.values_["strict"] = "1";
    }
    return s;
}

std::string Settings::get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::int64_t Settings::get(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stoll(it->second);
}

std::uint64_t Settings::get(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stoull(it->second);
}

double Settings::get(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stod(it->second);
}

bool Settings::get(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return it->second == "1" || it->second == "true" || it->second == "yes";
}

void fail_if_missing(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path)) throw DataError("missing " + what + ": " + path);
}

std::vector<SentenceRecord> load_sentences_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open sentence file: " + path);
    std::vector<SentenceRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
        }
        SentenceRecord r;
        r.sentence.sentence_id = from_hex(j.at("sentence_id").get<std::string>());
        r.sentence.review_id = j.at("review_id").get<std::string>();
        r.sentence.index = j.value("index", 0);
        r.sentence.text = j.at("text").get<std::string>();
        r.sentence.tokens = corpus::tokenize(r.sentence.text);
        r.business_id = j.value("business_id", std::string{});
        if (j.contains("date") && j["date"].is_string()) r.date = corpus::Date::parse(j["date"].get<std::string>());
        out.push_back(std::move(r));
    }
    return out;
}

void write_sentences_jsonl(const std::string& path, const std::vector<SentenceRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write: " + path);
    for (const auto& r : records) {
        json j{{"sentence_id", to_hex(r.sentence.sentence_id)},
               {"review_id", r.sentence.review_id},
               {"index", r.sentence.index},
               {"text", r.sentence.text}};
        if (!r.business_id.empty()) j["business_id"] = r.business_id;
        if (r.date) j["date"] = r.date->iso();
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<LabelRecord> load_labels_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open label file: " + path);
    std::vector<LabelRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected sentence_id<TAB>label");
        LabelRecord r;
        r.sentence_id = from_hex(line.substr(0, tab));
        const std::string label = strip(line.substr(tab + 1));
        if (label == "1") r.gold = true;
        else if (label == "0") r.gold = false;
        else throw DataError(path + ":" + std::to_string(line_no) + ": label must be 0 or 1");
        out.push_back(r);
    }
    return out;
}

void write_labels_tsv(const std::string& path, const std::vector<LabelRecord>& labels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write: " + path);
    out << "# sentence_id\tlabel\n";
    for (const auto& l : labels) out << to_hex(l.sentence_id) << '\t' << (l.gold ? '1' : '0') << '\n';
    if (!out) throw DataError("write failed: " + path);
}

std::map<std::uint64_t, std::string> load_split_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open split manifest: " + path);
    std::map<std::uint64_t, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        const json j = json::parse(line);
        out[from_hex(j.at("sentence_id").get<std::string>())] = j.at("fold").get<std::string>();
    }
    return out;
}

std::vector<SampleRow> load_sample_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open sample file: " + path);
    std::vector<SampleRow> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected sentence_id<TAB>text");
        out.push_back({from_hex(line.substr(0, tab)), line.substr(tab + 1)});
    }
    return out;
}

std::map<std::uint64_t, bool> load_sample_meta(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open sample meta file: " + path);
    std::map<std::uint64_t, bool> out;
    std::string line;
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        const json j = json::parse(line);
        out[from_hex(j.at("sentence_id").get<std::string>())] = j.at("has_term").get<bool>();
    }
    return out;
}

std::shared_ptr<gazetteer::Gazetteer> build_gazetteer(const std::string& lexicon_path,
                                                      const std::string& veto_path, bool inflect) {
    fail_if_missing(lexicon_path, "lexicon");
    std::set<std::string> veto;
    if (!veto_path.empty()) {
        fail_if_missing(veto_path, "veto list");
        veto = gazetteer::load_veto(veto_path);
    }
    auto g = std::make_shared<gazetteer::Gazetteer>(gazetteer::load_lexicon(lexicon_path, std::move(veto)));
    if (inflect) gazetteer::inflect_all(*g);
    return g;
}

LoadedClassifier load_classifier(const std::string& checkpoint_path, const ClassifierDeps& deps) {
    fail_if_missing(checkpoint_path, "checkpoint");
    const auto info = models::peek_checkpoint(checkpoint_path);
    LoadedClassifier out;
    out.family = info.model;
    if (info.model == "dictionary") {
        if (deps.lexicon_path.empty())
            throw DataError("dictionary checkpoint needs --lexicon to rebuild its gazetteer");
        const std::string fp = models::load_dictionary_checkpoint(checkpoint_path);
        if (!fp.empty() && fp != manifest::file_fingerprint(deps.lexicon_path)) {
            std::cerr << "warning: lexicon fingerprint differs from the one recorded at train time\n";
        }
        out.classifier = std::make_unique<models::DictionaryClassifier>(
            build_gazetteer(deps.lexicon_path, deps.veto_path, deps.inflect));
        return out;
    }
    if (info.model == "tfidf_svm") {
        out.classifier =
            std::make_unique<models::TfidfSvmClassifier>(models::load_tfidf_svm_checkpoint(checkpoint_path));
        return out;
    }
    if (info.model == "recurrent") {
        std::shared_ptr<const embeddings::EmbeddingTable> table;
        if (info.embedding_mode == "pretrained_subword") {
            if (deps.embeddings_path.empty())
                throw DataError("pretrained recurrent checkpoint needs --embeddings");
            fail_if_missing(deps.embeddings_path, "embedding file");
            const json header = json::parse(info.header_json);
            const std::string want = header.value("embeddings_fingerprint", "");
            if (!want.empty() && want != manifest::file_fingerprint(deps.embeddings_path))
                throw DataError("embedding file does not match the one recorded in the checkpoint");
            table = std::make_shared<embeddings::EmbeddingTable>(embeddings::load_vec(deps.embeddings_path));
        }
        out.classifier = std::make_unique<models::RecurrentClassifier>(
            models::load_recurrent_checkpoint(checkpoint_path, std::move(table)));
        return out;
    }
    throw DataError(checkpoint_path + ": unknown model family '" + info.model + "'");
}

} // namespace gastmix::cli
