#ifndef GASTMIX_DATASET_HPP
#define GASTMIX_DATASET_HPP

#include "gastmix/corpus.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gastmix::dataset {

struct LabeledSentence {
    corpus::Sentence sentence;
    bool gold = false;
    bool has_term = false;  // gazetteer filter flag recorded at sampling time
    std::vector<std::pair<std::string, bool>> annotator_labels;
};

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    // stratified by has_term
};

// ceil(ratio*n) sentences from the with-terms pool, the rest from the
// without-terms pool, uniformly without replacement, deterministic per seed.
struct Sample {
    std::vector<corpus::Sentence> sentences;
    std::vector<bool> has_term;  // aligned with sentences
};

Sample sample_balanced(const std::vector<corpus::Sentence>& with_terms,
                       const std::vector<corpus::Sentence>& without_terms, std::size_t n,
                       double ratio, std::uint64_t seed);

struct AnnotationRecord {
    std::uint64_t sentence_id = 0;
    std::string annotator_id;
    bool label = false;
};

// Annotation TSV: sentence_id<TAB>annotator_id<TAB>label(0/1).
std::vector<AnnotationRecord> load_annotations(const std::string& path);

struct MergeResult {
    std::vector<LabeledSentence> labeled;          // majority-vote gold
    std::vector<std::uint64_t> needs_adjudication; // even splits, excluded
};

// Majority vote over annotators. Ties are flagged and excluded. A sentence_id
// absent from `sentences` or two conflicting labels from one annotator are
// errors.
MergeResult merge_annotations(const std::vector<AnnotationRecord>& annotations,
                              const std::vector<corpus::Sentence>& sentences,
                              const std::vector<bool>& has_term);

struct SplitResult {
    std::vector<LabeledSentence> train;
    std::vector<LabeledSentence> validation;
    std::vector<std::string> warnings;
};

// Deterministic stratified split; per stratum floor(fraction*size) items go
// to train and the remainder to validation. Items are ordered by sentence_id
// before shuffling so the assignment is independent of input order.
SplitResult split(const std::vector<LabeledSentence>& data, const SplitSpec& spec);

} // namespace gastmix::dataset

#endif
