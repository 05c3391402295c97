#include "gastmix/models/tfidf_svm.hpp"

#include "gastmix/error.hpp"
#include "gastmix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gastmix::models {

void TfidfVectorizer::fit(const std::vector<std::vector<std::string>>& documents, std::size_t min_df) {
    std::map<std::string, std::size_t> df;  // ordered -> lexicographic columns
    for (const auto& doc : documents) {
        std::vector<std::string> uniq(doc.begin(), doc.end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (auto& t : uniq) df[t]++;
    }
    columns_.clear();
    idf_.clear();
    index_.clear();
    const auto n = static_cast<double>(documents.size());
    for (const auto& [token, count] : df) {
        if (count < min_df) continue;
        index_.emplace(token, static_cast<std::uint32_t>(columns_.size()));
        columns_.push_back(token);
        idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    fitted_ = true;
}

SparseVec TfidfVectorizer::transform(const std::vector<std::string>& tokens) const {
    if (!fitted_) throw DataError("tfidf: transform called before fit");
    SparseVec out;
    if (tokens.empty()) return out;
    std::map<std::uint32_t, double> counts;
    for (const auto& t : tokens) {
        if (const auto it = index_.find(t); it != index_.end()) counts[it->second] += 1.0;
    }
    const double inv_len = 1.0 / static_cast<double>(tokens.size());
    double ss = 0;
    for (auto& [col, count] : counts) {
        const double v = count * inv_len * idf_[col];
        out.emplace_back(col, v);
        ss += v * v;
    }
    if (ss > 0) {
        const double inv_norm = 1.0 / std::sqrt(ss);
        for (auto& [col, v] : out) v *= inv_norm;
    }
    return out;
}

TfidfVectorizer TfidfVectorizer::restore(std::vector<std::string> columns, std::vector<double> idf) {
    if (columns.size() != idf.size()) throw DataError("tfidf restore: column/idf size mismatch");
    TfidfVectorizer v;
    v.columns_ = std::move(columns);
    v.idf_ = std::move(idf);
    for (std::size_t i = 0; i < v.columns_.size(); ++i)
        v.index_.emplace(v.columns_[i], static_cast<std::uint32_t>(i));
    v.fitted_ = true;
    return v;
}

double svm_score(const SvmModel& m, const SparseVec& x) {
    double s = m.bias;
    for (const auto& [col, v] : x) {
        if (col < m.w.size()) s += m.w[col] * v;
    }
    return s;
}

SvmModel svm_train(const std::vector<SparseVec>& xs, const std::vector<bool>& ys,
                   std::size_t dimensions, double lambda, int epochs, std::uint64_t seed) {
    if (xs.size() != ys.size()) throw DataError("svm_train: feature/label size mismatch");
    if (xs.empty()) throw DataError("svm_train: empty training set");
    if (lambda <= 0) throw DataError("svm_train: lambda must be positive");
    const bool has_pos = std::find(ys.begin(), ys.end(), true) != ys.end();
    const bool has_neg = std::find(ys.begin(), ys.end(), false) != ys.end();
    if (!has_pos || !has_neg) throw DataError("svm_train: need at least one example of each class");

    SvmModel m;
    m.w.assign(dimensions, 0.0);
    m.lambda = lambda;
    m.epochs = epochs;

    Rng rng(seed);
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::uint64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (const std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double y = ys[i] ? 1.0 : -1.0;
            const double margin = y * svm_score(m, xs[i]);
            const double decay = 1.0 - eta * lambda;  // == 1 - 1/t
            for (double& w : m.w) w *= decay;
            if (margin < 1.0) {
                for (const auto& [col, v] : xs[i]) m.w[col] += eta * y * v;
                m.bias += eta * y;
            }
        }
    }
    return m;
}

TfidfSvmClassifier TfidfSvmClassifier::train(const std::vector<corpus::Sentence>& sentences,
                                             const std::vector<bool>& labels, double lambda,
                                             int epochs, std::uint64_t seed, std::size_t min_df) {
    if (sentences.size() != labels.size()) throw DataError("tfidf_svm: sentence/label size mismatch");
    std::vector<std::vector<std::string>> docs;
    docs.reserve(sentences.size());
    for (const auto& s : sentences) {
        std::vector<std::string> toks;
        for (const auto& t : s.tokens) toks.push_back(t.folded);
        docs.push_back(std::move(toks));
    }
    TfidfVectorizer vec;
    vec.fit(docs, min_df);
    std::vector<SparseVec> xs;
    xs.reserve(docs.size());
    for (const auto& d : docs) xs.push_back(vec.transform(d));
    SvmModel model = svm_train(xs, labels, vec.vocab_size(), lambda, epochs, seed);
    return TfidfSvmClassifier(std::move(vec), std::move(model));
}

Prediction TfidfSvmClassifier::predict(const corpus::Sentence& sentence) const {
    std::vector<std::string> toks;
    toks.reserve(sentence.tokens.size());
    for (const auto& t : sentence.tokens) toks.push_back(t.folded);
    const double score = svm_score(model_, vectorizer_.transform(toks));
    const double prob = 1.0 / (1.0 + std::exp(-score));  // uncalibrated squash of the margin
    return {prob, score >= 0.0};
}

std::vector<ParamCount> TfidfSvmClassifier::parameter_breakdown() const {
    return {{"svm.w", model_.w.size()}, {"svm.bias", 1}};
}

} // namespace gastmix::models
