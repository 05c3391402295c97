#ifndef GASTMIX_SYNTH_HPP
#define GASTMIX_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gastmix::synth {

// Deterministic generator for a synthetic German review corpus with the
// failure modes the pipeline is built around: guest-nationality references,
// restaurant-style false-positive patterns, slang forms only reachable via
// embedding expansion, and out-of-vocabulary typo variants.
struct SynthConfig {
    std::size_t n_reviews = 4000;
    std::uint64_t seed = 1234;
    double typo_rate = 0.10;      // nationality-slot typos in eligible templates
    double slang_rate = 0.25;     // slang instead of the plain form where available
    double undated_rate = 0.05;
    std::size_t n_businesses = 12;
    std::size_t embedding_dim = 32;
    double annotator_noise = 0.03;  // per-annotator label flip probability
};

struct SynthSummary {
    std::size_t reviews = 0;
    std::size_t sentences = 0;          // instances, before dedup
    std::size_t distinct_sentences = 0;
    std::size_t positives = 0;          // among distinct sentences
    std::size_t vocabulary = 0;         // embedding vocabulary size
};

// Writes reviews.jsonl, labels.tsv, embeddings.vec, locations.csv and three
// annotator files (annotations-a.tsv, -b.tsv, -c.tsv) into out_dir.
SynthSummary generate(const SynthConfig& config, const std::string& out_dir);

} // namespace gastmix::synth

#endif
