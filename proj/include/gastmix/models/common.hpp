#ifndef GASTMIX_MODELS_COMMON_HPP
#define GASTMIX_MODELS_COMMON_HPP

#include "gastmix/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gastmix::models {

struct Prediction {
    double probability = 0;
    bool label = false;  // probability >= 0.5
};

struct ParamCount {
    std::string name;
    std::uint64_t count = 0;
};

class Classifier {
public:
    virtual ~Classifier() = default;

    virtual Prediction predict(const corpus::Sentence& sentence) const = 0;
    virtual std::string family() const = 0;
    virtual std::vector<ParamCount> parameter_breakdown() const = 0;
};

inline std::uint64_t count_parameters(const Classifier& c) {
    std::uint64_t total = 0;
    for (const auto& p : c.parameter_breakdown()) total += p.count;
    return total;
}

struct TrainConfig {
    double learning_rate = 1e-3;  // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 32;
    int max_epochs = 100;
    int patience = 5;          // early stop on validation F1
    double clip_norm = 5.0;    // global gradient norm
    int max_seq_len = 64;      // longer sequences are truncated
    std::uint64_t seed = 0;    // fixes initialization and batch order
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0;
    double val_f1 = 0;
    double val_accuracy = 0;
    bool improved = false;
};

} // namespace gastmix::models

#endif
