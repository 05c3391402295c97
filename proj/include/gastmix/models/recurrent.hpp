#ifndef GASTMIX_MODELS_RECURRENT_HPP
#define GASTMIX_MODELS_RECURRENT_HPP

#include "gastmix/embeddings.hpp"
#include "gastmix/models/common.hpp"

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gastmix::models {

enum class EmbeddingMode {
    LearnedTable,       // embedding rows trained from scratch, row 0 is <unk>
    PretrainedSubword,  // frozen word vectors; OOV tokens use trainable n-gram buckets
};

std::string_view to_string(EmbeddingMode m);
EmbeddingMode parse_embedding_mode(std::string_view s);

// Sequence representation fed to the output layer: the last forward state
// concatenated with the first-token backward state, or a mean over the
// per-timestep outputs (ablation option).
enum class Pooling { LastState, Mean };

std::string_view to_string(Pooling p);
Pooling parse_pooling(std::string_view s);

struct RecurrentConfig {
    EmbeddingMode mode = EmbeddingMode::LearnedTable;
    Pooling pooling = Pooling::LastState;
    int layers = 2;
    int hidden = 64;
    bool bidirectional = true;
    int dim = 32;                        // learned-table dim; pretrained mode uses the table's dim
    std::size_t subword_buckets = 1u << 20;
    int subword_n_min = 3;
    int subword_n_max = 6;
    int max_seq_len = 64;                // applied at prediction time too
};

// Trainable tensor reference used for optimization, clipping, gradient
// checking and checkpointing. Enumeration order is fixed.
struct ParamRef {
    std::string name;
    double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t size() const { return rows * cols; }
};

struct LstmCellParams {
    // gate order within the 4H block: input, forget, candidate, output
    std::vector<double> wx;  // 4H x in_dim
    std::vector<double> wh;  // 4H x H
    std::vector<double> b;   // 4H
    int in_dim = 0;
    int hidden = 0;
};

// One LSTM step. Exposed for the unit-level oracle tests.
void lstm_cell(const LstmCellParams& p, const std::vector<double>& x, const std::vector<double>& h_prev,
               const std::vector<double>& c_prev, std::vector<double>& h_out, std::vector<double>& c_out);

// Stacked (bi)LSTM sentence classifier with a linear+sigmoid head reading
// the concatenation of the last forward state and the first-token backward
// state. All math is 64-bit and single-threaded; identical seed, config and
// data give bit-identical parameters.
class RecurrentClassifier : public Classifier {
public:
    // Learned-table mode; vocabulary drawn from the training sentences.
    static RecurrentClassifier make_learned(const RecurrentConfig& cfg,
                                            const std::vector<corpus::Sentence>& train_sentences,
                                            std::uint64_t seed);

    // Pretrained mode; the frozen table is shared, buckets start at zero.
    static RecurrentClassifier make_pretrained(const RecurrentConfig& cfg,
                                               std::shared_ptr<const embeddings::EmbeddingTable> table,
                                               std::uint64_t seed);

    Prediction predict(const corpus::Sentence& sentence) const override;
    std::string family() const override { return "recurrent"; }
    std::vector<ParamCount> parameter_breakdown() const override;

    double probability(const std::vector<std::string>& folded_tokens) const;

    // Trainable parameters in fixed order. Frozen pretrained vectors are not
    // enumerated.
    std::vector<ParamRef> params();

    // Loss and gradient of the mean binary cross-entropy over a batch;
    // gradients are aligned with params(). Exposed for gradient checking.
    double batch_loss(const std::vector<std::vector<std::string>>& token_seqs,
                      const std::vector<bool>& labels) const;
    double batch_gradients(const std::vector<std::vector<std::string>>& token_seqs,
                           const std::vector<bool>& labels, std::vector<std::vector<double>>& grads) const;

    const RecurrentConfig& config() const { return cfg_; }
    const std::vector<std::string>& learned_vocab() const { return vocab_words_; }
    const embeddings::SubwordHasher& hasher() const { return hasher_; }
    embeddings::SubwordHasher& hasher() { return hasher_; }
    const embeddings::EmbeddingTable* pretrained() const { return pretrained_.get(); }

    // checkpoint support
    static RecurrentClassifier restore_learned(const RecurrentConfig& cfg, std::vector<std::string> vocab);
    static RecurrentClassifier restore_pretrained(const RecurrentConfig& cfg,
                                                  std::shared_ptr<const embeddings::EmbeddingTable> table);

    int directions() const { return cfg_.bidirectional ? 2 : 1; }
    int rep_size() const { return cfg_.hidden * directions(); }

private:
    RecurrentClassifier() = default;

    void allocate(std::uint64_t seed, bool zero_init);
    std::vector<double> embed(const std::string& folded, std::vector<std::size_t>* used_buckets) const;

    struct Forward;
    double run_forward(const std::vector<std::string>& tokens, Forward* cache) const;

    RecurrentConfig cfg_;
    int emb_dim_ = 0;

    // learned-table mode
    std::vector<std::string> vocab_words_;  // row order; row 0 is <unk>
    std::unordered_map<std::string, std::size_t> vocab_;
    std::vector<double> embedding_;  // |vocab| x dim

    // pretrained mode
    std::shared_ptr<const embeddings::EmbeddingTable> pretrained_;
    embeddings::SubwordHasher hasher_;

    std::vector<LstmCellParams> cells_;  // layer-major, forward then backward
    std::vector<double> w_out_;          // rep_size
    double b_out_ = 0;
};

struct TrainedRecurrent {
    RecurrentClassifier model;
    std::vector<EpochStats> history;
    double best_val_f1 = 0;
    int best_epoch = -1;
};

// Scales all gradients in place so the global L2 norm does not exceed
// max_norm; returns the pre-clip norm.
double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm);

// Full-BPTT Adam training with global-norm clipping and early stopping on
// validation F1. Keeps the best-validation parameters. Aborts with a
// diagnostic if the loss diverges to NaN.
TrainedRecurrent train_recurrent(RecurrentClassifier model,
                                 const std::vector<corpus::Sentence>& train_sentences,
                                 const std::vector<bool>& train_labels,
                                 const std::vector<corpus::Sentence>& val_sentences,
                                 const std::vector<bool>& val_labels, const TrainConfig& config);

struct GradCheckReport {
    double max_rel_err = 0;
    std::size_t checked = 0;
    std::string worst_param;
};

// Central finite differences (step 1e-5) against analytic BPTT gradients on
// a small bidirectional 2-layer model (dim 4, hidden 3, sequences of 5
// tokens), covering both embedding modes. Relative error uses
// |a-f| / max(|a|, |f|); pairs whose magnitude sits below the finite-
// difference noise floor (1e-6 at this step size) pass outright.
GradCheckReport gradient_check(std::uint64_t seed);

} // namespace gastmix::models

#endif
