#ifndef GASTMIX_MODELS_CHECKPOINT_HPP
#define GASTMIX_MODELS_CHECKPOINT_HPP

#include "gastmix/models/recurrent.hpp"
#include "gastmix/models/tfidf_svm.hpp"

#include <memory>
#include <string>

namespace gastmix::models {

// Checkpoint container: 8-byte magic, little-endian u64 header length, a JSON
// header (architecture, shapes, config, seed, format version), then raw
// little-endian float64 parameter blocks in header-declared order. Loaders
// reject shape mismatches.

struct CheckpointInfo {
    std::string model;        // "dictionary" | "tfidf_svm" | "recurrent"
    std::string header_json;  // full header for inspection
    std::uint64_t seed = 0;
    std::string embedding_mode;  // recurrent only
};

CheckpointInfo peek_checkpoint(const std::string& path);

void save_dictionary_checkpoint(const std::string& path, const std::string& lexicon_fingerprint,
                                std::uint64_t seed);
std::string load_dictionary_checkpoint(const std::string& path);  // returns lexicon fingerprint

void save_tfidf_svm_checkpoint(const std::string& path, const TfidfSvmClassifier& model,
                               std::uint64_t seed);
TfidfSvmClassifier load_tfidf_svm_checkpoint(const std::string& path);

void save_recurrent_checkpoint(const std::string& path, RecurrentClassifier& model, std::uint64_t seed,
                               const std::string& embeddings_fingerprint);
// `table` is required for pretrained-mode checkpoints and ignored otherwise.
RecurrentClassifier load_recurrent_checkpoint(const std::string& path,
                                              std::shared_ptr<const embeddings::EmbeddingTable> table);

} // namespace gastmix::models

#endif
