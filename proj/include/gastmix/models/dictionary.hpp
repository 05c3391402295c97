#ifndef GASTMIX_MODELS_DICTIONARY_HPP
#define GASTMIX_MODELS_DICTIONARY_HPP

#include "gastmix/gazetteer.hpp"
#include "gastmix/models/common.hpp"

#include <memory>

namespace gastmix::models {

// Positive iff the gazetteer matches anywhere in the sentence. Stateless
// beyond the gazetteer; the pure keyword baseline.
class DictionaryClassifier : public Classifier {
public:
    explicit DictionaryClassifier(std::shared_ptr<const gazetteer::Gazetteer> g) : gazetteer_(std::move(g)) {}

    Prediction predict(const corpus::Sentence& sentence) const override {
        const bool hit = !gazetteer_->match(sentence).empty();
        return {hit ? 1.0 : 0.0, hit};
    }

    std::string family() const override { return "dictionary"; }

    std::vector<ParamCount> parameter_breakdown() const override { return {}; }

    const gazetteer::Gazetteer& gazetteer() const { return *gazetteer_; }

private:
    std::shared_ptr<const gazetteer::Gazetteer> gazetteer_;
};

} // namespace gastmix::models

#endif
