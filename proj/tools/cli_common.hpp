#ifndef GASTMIX_CLI_COMMON_HPP
#define GASTMIX_CLI_COMMON_HPP

#include "gastmix/corpus.hpp"
#include "gastmix/dataset.hpp"
#include "gastmix/gazetteer.hpp"
#include "gastmix/models/common.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gastmix::cli {

// Key-value defaults loaded before option parsing; command-line flags win.
// Accepts `key = value` lines with '#' comments, or a JSON object.
class Settings {
public:
    static Settings from_argv(int argc, char** argv);  // pre-scans for --config
    static Settings from_file(const std::string& path);

    std::string get(const std::string& key, const std::string& fallback) const;
    std::int64_t get(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get(const std::string& key, std::uint64_t fallback) const;
    double get(const std::string& key, double fallback) const;
    bool get(const std::string& key, bool fallback) const;

private:
    std::map<std::string, std::string> values_;
};

// One sentence as stored in sentences.jsonl, with review provenance.
struct SentenceRecord {
    corpus::Sentence sentence;
    std::string business_id;
    std::optional<corpus::Date> date;
};

std::vector<SentenceRecord> load_sentences_jsonl(const std::string& path);
void write_sentences_jsonl(const std::string& path, const std::vector<SentenceRecord>& records);

struct LabelRecord {
    std::uint64_t sentence_id = 0;
    bool gold = false;
};

std::vector<LabelRecord> load_labels_tsv(const std::string& path);
void write_labels_tsv(const std::string& path, const std::vector<LabelRecord>& labels);

std::map<std::uint64_t, std::string> load_split_jsonl(const std::string& path);  // id -> fold

// Sample export (sentence_id<TAB>text) and its has_term sidecar.
struct SampleRow {
    std::uint64_t sentence_id = 0;
    std::string text;
};
std::vector<SampleRow> load_sample_tsv(const std::string& path);
std::map<std::uint64_t, bool> load_sample_meta(const std::string& path);

// Builds the gazetteer a command should match with: lexicon + optional veto
// file, inflected unless disabled.
std::shared_ptr<gazetteer::Gazetteer> build_gazetteer(const std::string& lexicon_path,
                                                      const std::string& veto_path, bool inflect);

struct ClassifierDeps {
    std::string lexicon_path;
    std::string veto_path;
    bool inflect = true;
    std::string embeddings_path;
};

struct LoadedClassifier {
    std::unique_ptr<models::Classifier> classifier;
    std::string family;
};

LoadedClassifier load_classifier(const std::string& checkpoint_path, const ClassifierDeps& deps);

void fail_if_missing(const std::string& path, const std::string& what);

} // namespace gastmix::cli

#endif
