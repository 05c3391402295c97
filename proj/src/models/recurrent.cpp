#include "gastmix/models/recurrent.hpp"

#include "gastmix/error.hpp"
#include "gastmix/eval.hpp"
#include "gastmix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gastmix::models {

std::string_view to_string(EmbeddingMode m) {
    return m == EmbeddingMode::LearnedTable ? "learned" : "pretrained_subword";
}

EmbeddingMode parse_embedding_mode(std::string_view s) {
    if (s == "learned") return EmbeddingMode::LearnedTable;
    if (s == "pretrained_subword") return EmbeddingMode::PretrainedSubword;
    throw DataError("unknown embedding mode: '" + std::string(s) + "'");
}

std::string_view to_string(Pooling p) {
    return p == Pooling::LastState ? "last_state" : "mean";
}

Pooling parse_pooling(std::string_view s) {
    if (s == "last_state") return Pooling::LastState;
    if (s == "mean") return Pooling::Mean;
    throw DataError("unknown pooling: '" + std::string(s) + "' (expected last_state or mean)");
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void matvec_into(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                 const std::vector<double>& x, std::vector<double>& out, bool accumulate) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = accumulate ? out[r] : 0.0;
        const double* row = m.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

// out[c] += m^T dz, m is rows x cols
void matvec_transpose_add(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                          const std::vector<double>& dz, std::vector<double>& out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m.data() + r * cols;
        const double d = dz[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * d;
    }
}

// g += dz x^T (outer product), g is rows x cols
void outer_add(std::vector<double>& g, const std::vector<double>& dz, const std::vector<double>& x,
               std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = g.data() + r * cols;
        const double d = dz[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += d * x[c];
    }
}

} // namespace

void lstm_cell(const LstmCellParams& p, const std::vector<double>& x, const std::vector<double>& h_prev,
               const std::vector<double>& c_prev, std::vector<double>& h_out, std::vector<double>& c_out) {
    const auto h = static_cast<std::size_t>(p.hidden);
    std::vector<double> z(4 * h);
    for (std::size_t r = 0; r < 4 * h; ++r) z[r] = p.b[r];
    matvec_into(p.wx, 4 * h, static_cast<std::size_t>(p.in_dim), x, z, true);
    matvec_into(p.wh, 4 * h, h, h_prev, z, true);
    h_out.assign(h, 0.0);
    c_out.assign(h, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
        const double i = sigmoid(z[j]);
        const double f = sigmoid(z[h + j]);
        const double g = std::tanh(z[2 * h + j]);
        const double o = sigmoid(z[3 * h + j]);
        c_out[j] = f * c_prev[j] + i * g;
        h_out[j] = o * std::tanh(c_out[j]);
    }
}

// ---------------------------------------------------------------------------

struct StepCache {
    std::vector<double> x, h_prev, c_prev;
    std::vector<double> i, f, g, o;  // post-activation gates
    std::vector<double> c, tanh_c, h;
};

struct RecurrentClassifier::Forward {
    std::size_t T = 0;
    std::vector<std::vector<double>> emb;               // T x dim
    std::vector<std::ptrdiff_t> vocab_rows;             // learned mode; -1 = frozen (pretrained in-vocab)
    std::vector<std::vector<std::size_t>> used_buckets; // pretrained OOV path
    std::vector<std::vector<std::vector<double>>> layer_inputs;  // L+1 layers: T x in_dim
    std::vector<std::vector<StepCache>> cell_steps;     // per cell, in processing order
    std::vector<double> rep;
    double logit = 0;
    double prob = 0;
};

RecurrentClassifier RecurrentClassifier::make_learned(const RecurrentConfig& cfg,
                                                      const std::vector<corpus::Sentence>& train_sentences,
                                                      std::uint64_t seed) {
    RecurrentClassifier m;
    m.cfg_ = cfg;
    m.cfg_.mode = EmbeddingMode::LearnedTable;
    m.emb_dim_ = cfg.dim;
    std::set<std::string> words;
    for (const auto& s : train_sentences) {
        for (const auto& t : s.tokens) words.insert(t.folded);
    }
    m.vocab_words_.push_back("<unk>");
    for (const auto& w : words) m.vocab_words_.push_back(w);
    for (std::size_t i = 0; i < m.vocab_words_.size(); ++i) m.vocab_.emplace(m.vocab_words_[i], i);
    m.allocate(seed, false);
    return m;
}

RecurrentClassifier RecurrentClassifier::make_pretrained(
    const RecurrentConfig& cfg, std::shared_ptr<const embeddings::EmbeddingTable> table,
    std::uint64_t seed) {
    if (!table) throw DataError("pretrained mode requires an embedding table");
    RecurrentClassifier m;
    m.cfg_ = cfg;
    m.cfg_.mode = EmbeddingMode::PretrainedSubword;
    m.emb_dim_ = static_cast<int>(table->dim());
    m.cfg_.dim = m.emb_dim_;
    m.pretrained_ = std::move(table);
    m.hasher_ = embeddings::SubwordHasher(static_cast<std::size_t>(m.emb_dim_), cfg.subword_buckets,
                                          cfg.subword_n_min, cfg.subword_n_max);
    m.allocate(seed, false);
    return m;
}

RecurrentClassifier RecurrentClassifier::restore_learned(const RecurrentConfig& cfg,
                                                         std::vector<std::string> vocab) {
    RecurrentClassifier m;
    m.cfg_ = cfg;
    m.cfg_.mode = EmbeddingMode::LearnedTable;
    m.emb_dim_ = cfg.dim;
    m.vocab_words_ = std::move(vocab);
    for (std::size_t i = 0; i < m.vocab_words_.size(); ++i) m.vocab_.emplace(m.vocab_words_[i], i);
    m.allocate(0, true);
    return m;
}

RecurrentClassifier RecurrentClassifier::restore_pretrained(
    const RecurrentConfig& cfg, std::shared_ptr<const embeddings::EmbeddingTable> table) {
    if (!table) throw DataError("pretrained mode requires an embedding table");
    RecurrentClassifier m;
    m.cfg_ = cfg;
    m.cfg_.mode = EmbeddingMode::PretrainedSubword;
    m.emb_dim_ = static_cast<int>(table->dim());
    m.cfg_.dim = m.emb_dim_;
    m.pretrained_ = std::move(table);
    m.hasher_ = embeddings::SubwordHasher(static_cast<std::size_t>(m.emb_dim_), cfg.subword_buckets,
                                          cfg.subword_n_min, cfg.subword_n_max);
    m.allocate(0, true);
    return m;
}

void RecurrentClassifier::allocate(std::uint64_t seed, bool zero_init) {
    Rng rng(seed);
    auto fill = [&](std::vector<double>& v, std::size_t n, double scale) {
        v.assign(n, 0.0);
        if (zero_init) return;
        for (auto& x : v) x = rng.uniform(-scale, scale);
    };

    const auto h = static_cast<std::size_t>(cfg_.hidden);
    const auto d = static_cast<std::size_t>(emb_dim_);

    if (cfg_.mode == EmbeddingMode::LearnedTable) {
        fill(embedding_, vocab_words_.size() * d, 0.1);
    }
    // pretrained subword buckets always start at zero; they are trained on demand

    cells_.clear();
    const double rec_scale = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden));
    for (int l = 0; l < cfg_.layers; ++l) {
        const std::size_t in_dim = l == 0 ? d : h * static_cast<std::size_t>(directions());
        for (int dir = 0; dir < directions(); ++dir) {
            LstmCellParams p;
            p.in_dim = static_cast<int>(in_dim);
            p.hidden = cfg_.hidden;
            fill(p.wx, 4 * h * in_dim, rec_scale);
            fill(p.wh, 4 * h * h, rec_scale);
            p.b.assign(4 * h, 0.0);
            if (!zero_init) {
                for (std::size_t j = 0; j < h; ++j) p.b[h + j] = 1.0;  // forget gate bias
            }
            cells_.push_back(std::move(p));
        }
    }
    fill(w_out_, static_cast<std::size_t>(rep_size()), 1.0 / std::sqrt(static_cast<double>(rep_size())));
    b_out_ = 0.0;
}

std::vector<double> RecurrentClassifier::embed(const std::string& folded,
                                               std::vector<std::size_t>* used_buckets) const {
    if (cfg_.mode == EmbeddingMode::LearnedTable) {
        const auto it = vocab_.find(folded);
        const std::size_t row = it == vocab_.end() ? 0 : it->second;
        const auto d = static_cast<std::size_t>(emb_dim_);
        return {embedding_.begin() + static_cast<std::ptrdiff_t>(row * d),
                embedding_.begin() + static_cast<std::ptrdiff_t>((row + 1) * d)};
    }
    auto tv = embeddings::embed_token(folded, *pretrained_, hasher_);
    if (used_buckets) *used_buckets = std::move(tv.used_buckets);
    return std::move(tv.values);
}

double RecurrentClassifier::run_forward(const std::vector<std::string>& tokens, Forward* cache) const {
    const auto h = static_cast<std::size_t>(cfg_.hidden);
    const std::size_t T = std::min(tokens.size(), static_cast<std::size_t>(cfg_.max_seq_len));
    const int dirs = directions();

    Forward local;
    Forward& fc = cache ? *cache : local;
    fc.T = T;
    fc.emb.resize(T);
    fc.vocab_rows.assign(T, -1);
    fc.used_buckets.assign(T, {});
    for (std::size_t t = 0; t < T; ++t) {
        if (cfg_.mode == EmbeddingMode::LearnedTable) {
            const auto it = vocab_.find(tokens[t]);
            fc.vocab_rows[t] = static_cast<std::ptrdiff_t>(it == vocab_.end() ? 0 : it->second);
        }
        fc.emb[t] = embed(tokens[t], &fc.used_buckets[t]);
    }

    fc.layer_inputs.resize(static_cast<std::size_t>(cfg_.layers) + 1);
    fc.layer_inputs[0] = fc.emb;
    fc.cell_steps.assign(cells_.size(), {});

    for (int l = 0; l < cfg_.layers; ++l) {
        const auto& input = fc.layer_inputs[static_cast<std::size_t>(l)];
        auto& output = fc.layer_inputs[static_cast<std::size_t>(l) + 1];
        output.assign(T, std::vector<double>(h * static_cast<std::size_t>(dirs), 0.0));
        for (int dir = 0; dir < dirs; ++dir) {
            const std::size_t cell_idx = static_cast<std::size_t>(l * dirs + dir);
            const LstmCellParams& p = cells_[cell_idx];
            auto& steps = fc.cell_steps[cell_idx];
            steps.resize(T);
            std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0);
            std::vector<double> z(4 * h);
            for (std::size_t s = 0; s < T; ++s) {
                const std::size_t t = dir == 0 ? s : T - 1 - s;
                StepCache& sc = steps[s];
                sc.x = input[t];
                sc.h_prev = h_prev;
                sc.c_prev = c_prev;
                for (std::size_t r = 0; r < 4 * h; ++r) z[r] = p.b[r];
                matvec_into(p.wx, 4 * h, static_cast<std::size_t>(p.in_dim), sc.x, z, true);
                matvec_into(p.wh, 4 * h, h, h_prev, z, true);
                sc.i.resize(h);
                sc.f.resize(h);
                sc.g.resize(h);
                sc.o.resize(h);
                sc.c.resize(h);
                sc.tanh_c.resize(h);
                sc.h.resize(h);
                for (std::size_t j = 0; j < h; ++j) {
                    sc.i[j] = sigmoid(z[j]);
                    sc.f[j] = sigmoid(z[h + j]);
                    sc.g[j] = std::tanh(z[2 * h + j]);
                    sc.o[j] = sigmoid(z[3 * h + j]);
                    sc.c[j] = sc.f[j] * c_prev[j] + sc.i[j] * sc.g[j];
                    sc.tanh_c[j] = std::tanh(sc.c[j]);
                    sc.h[j] = sc.o[j] * sc.tanh_c[j];
                }
                h_prev = sc.h;
                c_prev = sc.c;
                double* out_slot = output[t].data() + static_cast<std::size_t>(dir) * h;
                for (std::size_t j = 0; j < h; ++j) out_slot[j] = sc.h[j];
            }
        }
    }

    // final representation: last forward state then first-token backward
    // state, or the timestep mean of the top layer when pooling
    fc.rep.assign(static_cast<std::size_t>(rep_size()), 0.0);
    if (T > 0) {
        if (cfg_.pooling == Pooling::Mean) {
            const auto& top = fc.layer_inputs[static_cast<std::size_t>(cfg_.layers)];
            const double inv = 1.0 / static_cast<double>(T);
            for (std::size_t t = 0; t < T; ++t) {
                for (std::size_t k = 0; k < fc.rep.size(); ++k) fc.rep[k] += inv * top[t][k];
            }
        } else {
            for (int dir = 0; dir < dirs; ++dir) {
                const std::size_t cell_idx = static_cast<std::size_t>((cfg_.layers - 1) * dirs + dir);
                const auto& last = fc.cell_steps[cell_idx].back();
                for (std::size_t j = 0; j < h; ++j)
                    fc.rep[static_cast<std::size_t>(dir) * h + j] = last.h[j];
            }
        }
    }
    double logit = b_out_;
    for (std::size_t j = 0; j < fc.rep.size(); ++j) logit += w_out_[j] * fc.rep[j];
    fc.logit = logit;
    fc.prob = sigmoid(logit);
    return fc.prob;
}

double RecurrentClassifier::probability(const std::vector<std::string>& folded_tokens) const {
    return run_forward(folded_tokens, nullptr);
}

Prediction RecurrentClassifier::predict(const corpus::Sentence& sentence) const {
    std::vector<std::string> toks;
    toks.reserve(sentence.tokens.size());
    for (const auto& t : sentence.tokens) toks.push_back(t.folded);
    const double p = probability(toks);
    return {p, p >= 0.5};
}

std::vector<ParamRef> RecurrentClassifier::params() {
    std::vector<ParamRef> out;
    const auto d = static_cast<std::size_t>(emb_dim_);
    if (cfg_.mode == EmbeddingMode::LearnedTable) {
        out.push_back({"embedding", embedding_.data(), vocab_words_.size(), d});
    } else {
        out.push_back({"subword_buckets", hasher_.table().data(), hasher_.buckets(), d});
    }
    const auto h = static_cast<std::size_t>(cfg_.hidden);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const std::string base = "lstm" + std::to_string(c / static_cast<std::size_t>(directions())) +
                                 (c % static_cast<std::size_t>(directions()) == 0 ? ".fwd" : ".bwd");
        out.push_back({base + ".wx", cells_[c].wx.data(), 4 * h, static_cast<std::size_t>(cells_[c].in_dim)});
        out.push_back({base + ".wh", cells_[c].wh.data(), 4 * h, h});
        out.push_back({base + ".b", cells_[c].b.data(), 4 * h, 1});
    }
    out.push_back({"out.w", w_out_.data(), 1, static_cast<std::size_t>(rep_size())});
    out.push_back({"out.b", &b_out_, 1, 1});
    return out;
}

std::vector<ParamCount> RecurrentClassifier::parameter_breakdown() const {
    std::vector<ParamCount> out;
    const auto d = static_cast<std::uint64_t>(emb_dim_);
    if (cfg_.mode == EmbeddingMode::LearnedTable) {
        out.push_back({"embedding", vocab_words_.size() * d});
    } else {
        out.push_back({"subword_buckets", hasher_.buckets() * d});
    }
    const auto h = static_cast<std::uint64_t>(cfg_.hidden);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const std::string base = "lstm" + std::to_string(c / static_cast<std::size_t>(directions())) +
                                 (c % static_cast<std::size_t>(directions()) == 0 ? ".fwd" : ".bwd");
        const auto in = static_cast<std::uint64_t>(cells_[c].in_dim);
        out.push_back({base, 4 * h * in + 4 * h * h + 4 * h});
    }
    out.push_back({"out", static_cast<std::uint64_t>(rep_size()) + 1});
    return out;
}

double RecurrentClassifier::batch_loss(const std::vector<std::vector<std::string>>& token_seqs,
                                       const std::vector<bool>& labels) const {
    if (token_seqs.size() != labels.size() || token_seqs.empty())
        throw DataError("batch_loss: bad batch");
    double loss = 0;
    for (std::size_t i = 0; i < token_seqs.size(); ++i) {
        Forward fc;
        run_forward(token_seqs[i], &fc);
        loss += labels[i] ? softplus(-fc.logit) : softplus(fc.logit);
    }
    return loss / static_cast<double>(token_seqs.size());
}

double RecurrentClassifier::batch_gradients(const std::vector<std::vector<std::string>>& token_seqs,
                                            const std::vector<bool>& labels,
                                            std::vector<std::vector<double>>& grads) const {
    if (token_seqs.size() != labels.size() || token_seqs.empty())
        throw DataError("batch_gradients: bad batch");
    const auto h = static_cast<std::size_t>(cfg_.hidden);
    const auto d = static_cast<std::size_t>(emb_dim_);
    const int dirs = directions();

    // gradient layout must mirror params()
    grads.clear();
    if (cfg_.mode == EmbeddingMode::LearnedTable) {
        grads.emplace_back(vocab_words_.size() * d, 0.0);
    } else {
        grads.emplace_back(hasher_.buckets() * d, 0.0);
    }
    for (const auto& c : cells_) {
        grads.emplace_back(c.wx.size(), 0.0);
        grads.emplace_back(c.wh.size(), 0.0);
        grads.emplace_back(c.b.size(), 0.0);
    }
    grads.emplace_back(w_out_.size(), 0.0);
    grads.emplace_back(1, 0.0);
    auto& g_emb = grads[0];
    auto& g_wout = grads[grads.size() - 2];
    auto& g_bout = grads[grads.size() - 1];

    const double inv_batch = 1.0 / static_cast<double>(token_seqs.size());
    double loss = 0;

    for (std::size_t n = 0; n < token_seqs.size(); ++n) {
        Forward fc;
        run_forward(token_seqs[n], &fc);
        const double y = labels[n] ? 1.0 : 0.0;
        loss += labels[n] ? softplus(-fc.logit) : softplus(fc.logit);
        const double dlogit = (fc.prob - y) * inv_batch;

        // output layer
        for (std::size_t j = 0; j < fc.rep.size(); ++j) g_wout[j] += dlogit * fc.rep[j];
        g_bout[0] += dlogit;

        const std::size_t T = fc.T;
        // gradient w.r.t. each layer's per-position output, top-down
        std::vector<std::vector<double>> d_out(T, std::vector<double>(h * static_cast<std::size_t>(dirs), 0.0));
        if (T > 0) {
            if (cfg_.pooling == Pooling::Mean) {
                const double inv = 1.0 / static_cast<double>(T);
                for (std::size_t t = 0; t < T; ++t) {
                    for (std::size_t k = 0; k < fc.rep.size(); ++k)
                        d_out[t][k] += dlogit * inv * w_out_[k];
                }
            } else {
                // rep = [h_fwd at position T-1 ; h_bwd at position 0]
                for (int dir = 0; dir < dirs; ++dir) {
                    const std::size_t t = dir == 0 ? T - 1 : 0;
                    for (std::size_t j = 0; j < h; ++j)
                        d_out[t][static_cast<std::size_t>(dir) * h + j] +=
                            dlogit * w_out_[static_cast<std::size_t>(dir) * h + j];
                }
            }
        }

        for (int l = cfg_.layers - 1; l >= 0; --l) {
            const std::size_t in_dim = l == 0 ? d : h * static_cast<std::size_t>(dirs);
            std::vector<std::vector<double>> d_in(T, std::vector<double>(in_dim, 0.0));
            for (int dir = 0; dir < dirs; ++dir) {
                const std::size_t cell_idx = static_cast<std::size_t>(l * dirs + dir);
                const LstmCellParams& p = cells_[cell_idx];
                const auto& steps = fc.cell_steps[cell_idx];
                auto& gwx = grads[1 + 3 * cell_idx];
                auto& gwh = grads[2 + 3 * cell_idx];
                auto& gb = grads[3 + 3 * cell_idx];

                std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
                std::vector<double> dz(4 * h);
                for (std::size_t s = T; s-- > 0;) {
                    const std::size_t t = dir == 0 ? s : T - 1 - s;
                    const StepCache& sc = steps[s];
                    for (std::size_t j = 0; j < h; ++j) {
                        const double dh = d_out[t][static_cast<std::size_t>(dir) * h + j] + dh_next[j];
                        const double dov = dh * sc.tanh_c[j];
                        const double dc = dc_next[j] + dh * sc.o[j] * (1.0 - sc.tanh_c[j] * sc.tanh_c[j]);
                        const double di = dc * sc.g[j];
                        const double dg = dc * sc.i[j];
                        const double df = dc * sc.c_prev[j];
                        dz[j] = di * sc.i[j] * (1.0 - sc.i[j]);
                        dz[h + j] = df * sc.f[j] * (1.0 - sc.f[j]);
                        dz[2 * h + j] = dg * (1.0 - sc.g[j] * sc.g[j]);
                        dz[3 * h + j] = dov * sc.o[j] * (1.0 - sc.o[j]);
                        dc_next[j] = dc * sc.f[j];
                    }
                    outer_add(gwx, dz, sc.x, 4 * h, in_dim);
                    outer_add(gwh, dz, sc.h_prev, 4 * h, h);
                    for (std::size_t r = 0; r < 4 * h; ++r) gb[r] += dz[r];
                    matvec_transpose_add(p.wx, 4 * h, in_dim, dz, d_in[t]);
                    std::fill(dh_next.begin(), dh_next.end(), 0.0);
                    matvec_transpose_add(p.wh, 4 * h, h, dz, dh_next);
                }
            }
            if (l > 0) {
                d_out = std::move(d_in);
            } else {
                // embedding gradients
                for (std::size_t t = 0; t < T; ++t) {
                    if (cfg_.mode == EmbeddingMode::LearnedTable) {
                        const auto row = static_cast<std::size_t>(fc.vocab_rows[t]);
                        for (std::size_t j = 0; j < d; ++j) g_emb[row * d + j] += d_in[t][j];
                    } else if (!fc.used_buckets[t].empty()) {
                        const double inv = 1.0 / static_cast<double>(fc.used_buckets[t].size());
                        for (const std::size_t b : fc.used_buckets[t]) {
                            for (std::size_t j = 0; j < d; ++j) g_emb[b * d + j] += inv * d_in[t][j];
                        }
                    }
                }
            }
        }
    }
    return loss * inv_batch;
}

// ---------------------------------------------------------------------------
// training

namespace {

struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::uint64_t t = 0;
};

} // namespace

double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm) {
    double ss = 0;
    for (const auto& g : grads) {
        for (const double x : g) ss += x * x;
    }
    const double norm = std::sqrt(ss);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto& g : grads) {
            for (double& x : g) x *= scale;
        }
    }
    return norm;
}

TrainedRecurrent train_recurrent(RecurrentClassifier model,
                                 const std::vector<corpus::Sentence>& train_sentences,
                                 const std::vector<bool>& train_labels,
                                 const std::vector<corpus::Sentence>& val_sentences,
                                 const std::vector<bool>& val_labels, const TrainConfig& config) {
    if (train_sentences.empty() || val_sentences.empty())
        throw DataError("train_recurrent: train and validation sets must be non-empty");
    if (train_sentences.size() != train_labels.size() || val_sentences.size() != val_labels.size())
        throw DataError("train_recurrent: sentence/label size mismatch");

    auto fold_tokens = [max = config.max_seq_len](const corpus::Sentence& s) {
        std::vector<std::string> toks;
        const std::size_t limit = std::min(s.tokens.size(), static_cast<std::size_t>(max));
        toks.reserve(limit);
        for (std::size_t i = 0; i < limit; ++i) toks.push_back(s.tokens[i].folded);
        return toks;
    };
    std::vector<std::vector<std::string>> train_toks, val_toks;
    for (const auto& s : train_sentences) train_toks.push_back(fold_tokens(s));
    for (const auto& s : val_sentences) val_toks.push_back(fold_tokens(s));

    TrainedRecurrent result{std::move(model), {}, 0.0, -1};
    RecurrentClassifier& m = result.model;

    auto param_refs = m.params();
    AdamState adam;
    adam.m.resize(param_refs.size());
    adam.v.resize(param_refs.size());
    for (std::size_t i = 0; i < param_refs.size(); ++i) {
        adam.m[i].assign(param_refs[i].size(), 0.0);
        adam.v[i].assign(param_refs[i].size(), 0.0);
    }

    auto snapshot = [&]() {
        std::vector<std::vector<double>> s;
        for (const auto& p : param_refs) s.emplace_back(p.data, p.data + p.size());
        return s;
    };
    auto restore = [&](const std::vector<std::vector<double>>& s) {
        for (std::size_t i = 0; i < param_refs.size(); ++i)
            std::copy(s[i].begin(), s[i].end(), param_refs[i].data);
    };

    std::vector<std::vector<double>> best_params = snapshot();
    double best_f1 = -1.0;
    int best_epoch = -1;
    int stale = 0;

    Rng order_rng(config.seed);
    std::vector<std::size_t> order(train_toks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<std::vector<double>> grads;
    const auto batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        order_rng.shuffle(order);
        double epoch_loss = 0;
        std::size_t seen = 0;
        for (std::size_t off = 0; off < order.size(); off += batch) {
            const std::size_t n = std::min(batch, order.size() - off);
            std::vector<std::vector<std::string>> bx(n);
            std::vector<bool> by(n);
            for (std::size_t i = 0; i < n; ++i) {
                bx[i] = train_toks[order[off + i]];
                by[i] = train_labels[order[off + i]];
            }
            const double loss = m.batch_gradients(bx, by, grads);
            if (!std::isfinite(loss))
                throw DataError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
            epoch_loss += loss * static_cast<double>(n);
            seen += n;

            clip_global_norm(grads, config.clip_norm);

            adam.t++;
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam.t));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam.t));
            for (std::size_t p = 0; p < param_refs.size(); ++p) {
                double* w = param_refs[p].data;
                for (std::size_t j = 0; j < param_refs[p].size(); ++j) {
                    const double g = grads[p][j];
                    adam.m[p][j] = config.beta1 * adam.m[p][j] + (1.0 - config.beta1) * g;
                    adam.v[p][j] = config.beta2 * adam.v[p][j] + (1.0 - config.beta2) * g * g;
                    const double mhat = adam.m[p][j] / bc1;
                    const double vhat = adam.v[p][j] / bc2;
                    w[j] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
                }
            }
        }

        // validation F1 at threshold 0.5
        eval::ConfusionMatrix cm;
        for (std::size_t i = 0; i < val_toks.size(); ++i) {
            const bool pred = m.probability(val_toks[i]) >= 0.5;
            if (pred && val_labels[i]) ++cm.tp;
            else if (pred && !val_labels[i]) ++cm.fp;
            else if (!pred && val_labels[i]) ++cm.fn;
            else ++cm.tn;
        }
        const auto mr = eval::metrics(cm);

        EpochStats es;
        es.epoch = epoch;
        es.train_loss = epoch_loss / static_cast<double>(seen);
        es.val_f1 = mr.f1_binary;
        es.val_accuracy = mr.accuracy;
        if (mr.f1_binary > best_f1) {
            best_f1 = mr.f1_binary;
            best_epoch = epoch;
            best_params = snapshot();
            stale = 0;
            es.improved = true;
        } else {
            ++stale;
        }
        result.history.push_back(es);
        if (stale >= config.patience) break;
    }

    restore(best_params);
    result.best_val_f1 = best_f1;
    result.best_epoch = best_epoch;
    return result;
}

// ---------------------------------------------------------------------------
// gradient check

namespace {

double check_model(RecurrentClassifier& model, const std::vector<std::vector<std::string>>& seqs,
                   const std::vector<bool>& labels, GradCheckReport& report) {
    std::vector<std::vector<double>> analytic;
    model.batch_gradients(seqs, labels, analytic);

    const double step = 1e-5;
    auto refs = model.params();
    double max_rel = 0;
    for (std::size_t p = 0; p < refs.size(); ++p) {
        for (std::size_t j = 0; j < refs[p].size(); ++j) {
            double& w = refs[p].data[j];
            const double saved = w;
            w = saved + step;
            const double up = model.batch_loss(seqs, labels);
            w = saved - step;
            const double down = model.batch_loss(seqs, labels);
            w = saved;
            const double fd = (up - down) / (2.0 * step);
            const double a = analytic[p][j];
            const double denom = std::max(std::abs(a), std::abs(fd));
            ++report.checked;
            // below ~1e-6 the central difference itself is truncation noise
            // (absolute error around 1e-11 at this step size)
            if (denom < 1e-6) continue;
            const double rel = std::abs(a - fd) / denom;
            if (rel > max_rel) {
                max_rel = rel;
                report.worst_param = refs[p].name + "[" + std::to_string(j) + "]";
            }
        }
    }
    return max_rel;
}

} // namespace

GradCheckReport gradient_check(std::uint64_t seed) {
    RecurrentConfig cfg;
    cfg.layers = 2;
    cfg.hidden = 3;
    cfg.dim = 4;
    cfg.bidirectional = true;
    cfg.subword_buckets = 256;
    cfg.max_seq_len = 16;

    // two sequences of five tokens; some are missing from the pretrained
    // vocabulary so the subword path is exercised as well
    const std::vector<std::vector<std::string>> seqs = {
        {"die", "amis", "waren", "am", "pool"},
        {"beim", "wirt", "war", "essen", "gut"},
    };
    const std::vector<bool> labels = {true, false};

    GradCheckReport report;

    {  // learned-table mode
        std::vector<corpus::Sentence> pseudo;
        pseudo.push_back(corpus::make_sentence("r1", 0, "die amis waren am pool"));
        pseudo.push_back(corpus::make_sentence("r1", 1, "beim wirt war essen gut"));
        auto model = RecurrentClassifier::make_learned(cfg, pseudo, seed);
        report.max_rel_err = std::max(report.max_rel_err, check_model(model, seqs, labels, report));
    }
    {  // pretrained mode with OOV tokens hitting the bucket table
        Rng rng(seed ^ 0x5eedbeefULL);
        std::vector<std::string> words = {"die", "waren", "am", "war", "gut"};
        std::vector<double> matrix;
        for (std::size_t i = 0; i < words.size() * 4; ++i) matrix.push_back(rng.uniform(-0.5, 0.5));
        auto table = std::make_shared<embeddings::EmbeddingTable>(4, words, std::move(matrix));
        auto model = RecurrentClassifier::make_pretrained(cfg, table, seed + 1);
        // give the buckets nonzero values so their gradients are generic
        auto refs = model.params();
        Rng brng(seed ^ 0xb0c4e7ULL);
        for (double* x = refs[0].data; x != refs[0].data + refs[0].size(); ++x)
            *x = brng.uniform(-0.3, 0.3);
        report.max_rel_err = std::max(report.max_rel_err, check_model(model, seqs, labels, report));
    }
    {  // mean pooling variant
        cfg.pooling = Pooling::Mean;
        std::vector<corpus::Sentence> pseudo;
        pseudo.push_back(corpus::make_sentence("r1", 0, "die amis waren am pool"));
        pseudo.push_back(corpus::make_sentence("r1", 1, "beim wirt war essen gut"));
        auto model = RecurrentClassifier::make_learned(cfg, pseudo, seed + 2);
        report.max_rel_err = std::max(report.max_rel_err, check_model(model, seqs, labels, report));
    }
    return report;
}

} // namespace gastmix::models
