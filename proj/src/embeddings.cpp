#include "gastmix/embeddings.hpp"

#include "gastmix/error.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace gastmix::embeddings {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::vector<std::string> words,
                               std::vector<double> matrix)
    : dim_(dim), words_(std::move(words)), matrix_(std::move(matrix)) {
    if (matrix_.size() != words_.size() * dim_) throw DataError("embedding matrix shape mismatch");
    norms_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        double ss = 0;
        for (std::size_t j = 0; j < dim_; ++j) ss += matrix_[i * dim_ + j] * matrix_[i * dim_ + j];
        norms_.push_back(std::sqrt(ss));
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], i).second)
            throw DataError("duplicate word in embedding table: '" + words_[i] + "'");
    }
}

std::ptrdiff_t EmbeddingTable::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

EmbeddingTable load_vec(const std::string& path, LoadStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": missing header line");
    std::size_t count = 0, dim = 0;
    {
        const char* p = line.data();
        const char* end = line.data() + line.size();
        auto r1 = std::from_chars(p, end, count);
        if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != ' ')
            throw DataError(path + ": bad header, expected 'count dim'");
        auto r2 = std::from_chars(r1.ptr + 1, end, dim);
        if (r2.ec != std::errc()) throw DataError(path + ": bad header, expected 'count dim'");
    }
    if (dim == 0) throw DataError(path + ": zero dimension");

    std::vector<std::string> words;
    std::vector<double> matrix;
    std::unordered_map<std::string, std::size_t> seen;
    words.reserve(count);
    matrix.reserve(count * dim);

    std::size_t line_no = 1;
    std::vector<double> row(dim);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0)
            throw DataError(path + ":" + std::to_string(line_no) + ": missing word or values");
        std::string word = line.substr(0, sp);

        const char* p = line.data() + sp;
        const char* end = line.data() + line.size();
        for (std::size_t j = 0; j < dim; ++j) {
            while (p != end && *p == ' ') ++p;
            double v = 0;
            auto r = std::from_chars(p, end, v);
            if (r.ec != std::errc())
                throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                                std::to_string(dim) + " values, row has fewer");
            if (!std::isfinite(v))
                throw DataError(path + ":" + std::to_string(line_no) + ": non-finite value");
            row[j] = v;
            p = r.ptr;
        }
        while (p != end && *p == ' ') ++p;
        if (p != end)
            throw DataError(path + ":" + std::to_string(line_no) + ": row has more than " +
                            std::to_string(dim) + " values");

        if (stats) ++stats->rows_read;
        if (seen.count(word)) {
            if (stats) ++stats->duplicates;
            continue;  // keep first occurrence
        }
        seen.emplace(word, words.size());
        words.push_back(std::move(word));
        matrix.insert(matrix.end(), row.begin(), row.end());
    }
    return EmbeddingTable(dim, std::move(words), std::move(matrix));
}

void save_vec(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out << table.size() << ' ' << table.dim() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.word(i);
        for (const double v : table.row(i)) {
            std::snprintf(buf, sizeof(buf), " %.6f", v);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw DataError("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<Neighbor> knn(const EmbeddingTable& table, std::span<const double> query,
                          std::size_t k, std::ptrdiff_t exclude_row) {
    double qn = 0;
    for (const double x : query) qn += x * x;
    if (qn == 0.0) throw DataError("knn: zero query vector");
    qn = std::sqrt(qn);

    std::vector<Neighbor> all;
    all.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) == exclude_row) continue;
        if (table.norm(i) == 0.0) continue;  // a zero row can never rank
        const auto r = table.row(i);
        double dot = 0;
        for (std::size_t j = 0; j < query.size(); ++j) dot += query[j] * r[j];
        const double sim = std::clamp(dot / (qn * table.norm(i)), -1.0, 1.0);
        all.push_back({table.word(i), sim});
    }
    const std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                          if (a.similarity != b.similarity) return a.similarity > b.similarity;
                          return a.word < b.word;
                      });
    all.resize(take);
    return all;
}

std::vector<Neighbor> knn(const EmbeddingTable& table, std::string_view query_word, std::size_t k) {
    const std::ptrdiff_t row = table.find(query_word);
    if (row < 0) throw DataError("knn: query word not in vocabulary: '" + std::string(query_word) + "'");
    return knn(table, table.row(static_cast<std::size_t>(row)), k, row);
}

SubwordHasher::SubwordHasher(std::size_t dim, std::size_t buckets, int n_min, int n_max)
    : dim_(dim), buckets_(buckets), n_min_(n_min), n_max_(n_max) {
    if (buckets_ == 0 || (buckets_ & (buckets_ - 1)) != 0)
        throw DataError("subword bucket count must be a power of two");
    if (n_min_ < 1 || n_max_ < n_min_) throw DataError("bad n-gram range");
    table_.assign(buckets_ * dim_, 0.0);
}

std::vector<std::string> SubwordHasher::ngrams(std::string_view word, int n_min, int n_max) {
    std::string bracketed = "<";
    bracketed += word;
    bracketed += ">";
    // codepoint boundaries
    std::vector<std::size_t> bounds;
    std::size_t pos = 0;
    while (pos < bracketed.size()) {
        bounds.push_back(pos);
        text::decode_utf8(bracketed, pos);
    }
    bounds.push_back(bracketed.size());
    const std::size_t n_cp = bounds.size() - 1;

    std::vector<std::string> out;
    for (int n = n_min; n <= n_max; ++n) {
        if (static_cast<std::size_t>(n) > n_cp) break;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= n_cp; ++i) {
            out.push_back(bracketed.substr(bounds[i], bounds[i + static_cast<std::size_t>(n)] - bounds[i]));
        }
    }
    return out;
}

std::size_t SubwordHasher::bucket_of(std::string_view ngram) const {
    return fnv1a64(ngram) & (buckets_ - 1);
}

std::vector<std::size_t> SubwordHasher::buckets_of(std::string_view word) const {
    std::vector<std::size_t> out;
    for (const auto& g : ngrams(word, n_min_, n_max_)) out.push_back(bucket_of(g));
    return out;
}

TokenVector embed_token(std::string_view folded_token, const EmbeddingTable& table,
                        const SubwordHasher& hasher) {
    TokenVector tv;
    if (const std::ptrdiff_t row = table.find(folded_token); row >= 0) {
        const auto r = table.row(static_cast<std::size_t>(row));
        tv.values.assign(r.begin(), r.end());
        tv.from_vocab = true;
        return tv;
    }
    tv.values.assign(hasher.dim(), 0.0);
    tv.used_buckets = hasher.buckets_of(folded_token);
    if (tv.used_buckets.empty()) {
        tv.empty_ngrams = true;
        return tv;
    }
    for (const std::size_t b : tv.used_buckets) {
        const auto r = hasher.bucket_row(b);
        for (std::size_t j = 0; j < hasher.dim(); ++j) tv.values[j] += r[j];
    }
    const double inv = 1.0 / static_cast<double>(tv.used_buckets.size());
    for (double& v : tv.values) v *= inv;
    return tv;
}

} // namespace gastmix::embeddings
