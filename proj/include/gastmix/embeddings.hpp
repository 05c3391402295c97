#ifndef GASTMIX_EMBEDDINGS_HPP
#define GASTMIX_EMBEDDINGS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gastmix::embeddings {

// Dense word-vector table loaded from the text ".vec" format:
// a "count dim" header line, then one "word v1 .. vdim" row per word.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t dim, std::vector<std::string> words, std::vector<double> matrix);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return words_.size(); }

    // Row index of `word`, or -1.
    std::ptrdiff_t find(std::string_view word) const;
    bool contains(std::string_view word) const { return find(word) >= 0; }

    std::span<const double> row(std::size_t i) const { return {matrix_.data() + i * dim_, dim_}; }
    const std::string& word(std::size_t i) const { return words_[i]; }
    double norm(std::size_t i) const { return norms_[i]; }

    const std::vector<std::string>& words() const { return words_; }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> words_;
    std::vector<double> matrix_;  // row major, size() * dim()
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct LoadStats {
    std::size_t rows_read = 0;
    std::size_t duplicates = 0;  // later duplicates are dropped, first row wins
};

EmbeddingTable load_vec(const std::string& path, LoadStats* stats = nullptr);
void save_vec(const EmbeddingTable& table, const std::string& path);

// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Zero vectors are an error.
double cosine(std::span<const double> u, std::span<const double> v);

struct Neighbor {
    std::string word;
    double similarity;
};

// Exact k nearest neighbors by cosine, descending similarity; exact ties
// break toward the lexicographically smaller word. A query word present in
// the vocabulary is excluded from its own neighbor list.
std::vector<Neighbor> knn(const EmbeddingTable& table, std::string_view query_word, std::size_t k);
std::vector<Neighbor> knn(const EmbeddingTable& table, std::span<const double> query,
                          std::size_t k, std::ptrdiff_t exclude_row = -1);

// Hashed character-n-gram fallback for out-of-vocabulary tokens. N-grams are
// taken over "<" + word + ">" by codepoint; each n-gram selects a bucket row
// via FNV-1a reduced modulo a power-of-two bucket count. Bucket rows start at
// zero and are trained alongside the model that owns the hasher.
class SubwordHasher {
public:
    SubwordHasher() = default;
    SubwordHasher(std::size_t dim, std::size_t buckets, int n_min = 3, int n_max = 6);

    std::size_t dim() const { return dim_; }
    std::size_t buckets() const { return buckets_; }
    int n_min() const { return n_min_; }
    int n_max() const { return n_max_; }

    static std::vector<std::string> ngrams(std::string_view word, int n_min = 3, int n_max = 6);

    std::size_t bucket_of(std::string_view ngram) const;
    std::vector<std::size_t> buckets_of(std::string_view word) const;

    std::span<double> bucket_row(std::size_t b) { return {table_.data() + b * dim_, dim_}; }
    std::span<const double> bucket_row(std::size_t b) const { return {table_.data() + b * dim_, dim_}; }
    std::vector<double>& table() { return table_; }
    const std::vector<double>& table() const { return table_; }

private:
    std::size_t dim_ = 0;
    std::size_t buckets_ = 0;
    int n_min_ = 3;
    int n_max_ = 6;
    std::vector<double> table_;  // buckets_ * dim_
};

struct TokenVector {
    std::vector<double> values;
    bool from_vocab = false;
    bool empty_ngrams = false;  // no n-grams resolved, vector is all zero
    std::vector<std::size_t> used_buckets;
};

// Vocabulary row for in-vocabulary tokens (lookup by folded surface),
// otherwise the mean of the token's n-gram bucket rows.
TokenVector embed_token(std::string_view folded_token, const EmbeddingTable& table,
                        const SubwordHasher& hasher);

} // namespace gastmix::embeddings

#endif
