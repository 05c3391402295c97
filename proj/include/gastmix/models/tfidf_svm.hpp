#ifndef GASTMIX_MODELS_TFIDF_SVM_HPP
#define GASTMIX_MODELS_TFIDF_SVM_HPP

#include "gastmix/models/common.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace gastmix::models {

// column index -> weight, sorted by column
using SparseVec = std::vector<std::pair<std::uint32_t, double>>;

// Smoothed tf-idf: idf = ln((1+N)/(1+df)) + 1, tf = count / token count,
// rows L2-normalized. Tokens below min_df are dropped from the vocabulary.
class TfidfVectorizer {
public:
    void fit(const std::vector<std::vector<std::string>>& documents, std::size_t min_df = 1);
    SparseVec transform(const std::vector<std::string>& tokens) const;

    bool fitted() const { return fitted_; }
    std::size_t vocab_size() const { return columns_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<double>& idf() const { return idf_; }

    // Rebuilds a fitted vectorizer from checkpoint data.
    static TfidfVectorizer restore(std::vector<std::string> columns, std::vector<double> idf);

private:
    bool fitted_ = false;
    std::vector<std::string> columns_;       // lexicographically sorted
    std::vector<double> idf_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

struct SvmModel {
    std::vector<double> w;
    double bias = 0;
    double lambda = 1e-4;
    int epochs = 20;
};

// Pegasos-style primal SGD on the hinge loss with L2 regularization,
// step size 1/(lambda*t); the bias is updated without regularization.
SvmModel svm_train(const std::vector<SparseVec>& xs, const std::vector<bool>& ys,
                   std::size_t dimensions, double lambda, int epochs, std::uint64_t seed);

double svm_score(const SvmModel& m, const SparseVec& x);

class TfidfSvmClassifier : public Classifier {
public:
    TfidfSvmClassifier(TfidfVectorizer vec, SvmModel model)
        : vectorizer_(std::move(vec)), model_(std::move(model)) {}

    static TfidfSvmClassifier train(const std::vector<corpus::Sentence>& sentences,
                                    const std::vector<bool>& labels, double lambda, int epochs,
                                    std::uint64_t seed, std::size_t min_df = 1);

    Prediction predict(const corpus::Sentence& sentence) const override;

    std::string family() const override { return "tfidf_svm"; }
    std::vector<ParamCount> parameter_breakdown() const override;

    const TfidfVectorizer& vectorizer() const { return vectorizer_; }
    const SvmModel& model() const { return model_; }

private:
    TfidfVectorizer vectorizer_;
    SvmModel model_;
};

} // namespace gastmix::models

#endif
