#include "gastmix/models/checkpoint.hpp"

#include "gastmix/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace gastmix::models {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are unsupported");

namespace {

constexpr char kMagic[8] = {'G', 'M', 'X', 'C', 'K', 'P', 'T', '1'};

struct BlockSpec {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

void write_file(const std::string& path, const json& header,
                const std::vector<std::pair<BlockSpec, const double*>>& blocks) {
    json h = header;
    h["format_version"] = 1;
    json jblocks = json::array();
    for (const auto& [spec, data] : blocks) {
        jblocks.push_back(json{{"name", spec.name}, {"rows", spec.rows}, {"cols", spec.cols}});
    }
    h["blocks"] = jblocks;
    const std::string hs = h.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = hs.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [spec, data] : blocks) {
        out.write(reinterpret_cast<const char*>(data),
                  static_cast<std::streamsize>(spec.rows * spec.cols * sizeof(double)));
    }
    if (!out) throw DataError("checkpoint write failed: " + path);
}

struct LoadedCheckpoint {
    json header;
    std::vector<BlockSpec> specs;
    std::vector<std::vector<double>> blocks;
};

LoadedCheckpoint read_file(const std::string& path, bool with_blocks) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError(path + ": not a checkpoint file (bad magic)");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || len == 0 || len > (1ull << 32)) throw DataError(path + ": corrupt header length");
    std::string hs(len, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError(path + ": truncated header");

    LoadedCheckpoint lc;
    try {
        lc.header = json::parse(hs);
    } catch (const json::exception& e) {
        throw DataError(path + ": bad header JSON: " + e.what());
    }
    if (lc.header.value("format_version", 0) != 1)
        throw DataError(path + ": unsupported checkpoint format version");
    for (const auto& b : lc.header.at("blocks")) {
        lc.specs.push_back({b.at("name").get<std::string>(), b.at("rows").get<std::size_t>(),
                            b.at("cols").get<std::size_t>()});
    }
    if (!with_blocks) return lc;
    for (const auto& spec : lc.specs) {
        std::vector<double> v(spec.rows * spec.cols);
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw DataError(path + ": truncated parameter block '" + spec.name + "'");
        lc.blocks.push_back(std::move(v));
    }
    return lc;
}

json recurrent_arch(const RecurrentClassifier& m) {
    const auto& c = m.config();
    return json{{"mode", std::string(to_string(c.mode))},
                {"pooling", std::string(to_string(c.pooling))},
                {"layers", c.layers},
                {"hidden", c.hidden},
                {"bidirectional", c.bidirectional},
                {"dim", c.dim},
                {"subword_buckets", c.subword_buckets},
                {"subword_n_min", c.subword_n_min},
                {"subword_n_max", c.subword_n_max},
                {"max_seq_len", c.max_seq_len}};
}

RecurrentConfig arch_from_json(const json& a) {
    RecurrentConfig c;
    c.mode = parse_embedding_mode(a.at("mode").get<std::string>());
    c.pooling = parse_pooling(a.value("pooling", "last_state"));
    c.layers = a.at("layers").get<int>();
    c.hidden = a.at("hidden").get<int>();
    c.bidirectional = a.at("bidirectional").get<bool>();
    c.dim = a.at("dim").get<int>();
    c.subword_buckets = a.at("subword_buckets").get<std::size_t>();
    c.subword_n_min = a.at("subword_n_min").get<int>();
    c.subword_n_max = a.at("subword_n_max").get<int>();
    c.max_seq_len = a.at("max_seq_len").get<int>();
    return c;
}

} // namespace

CheckpointInfo peek_checkpoint(const std::string& path) {
    const auto lc = read_file(path, false);
    CheckpointInfo info;
    info.model = lc.header.at("model").get<std::string>();
    info.header_json = lc.header.dump(2);
    info.seed = lc.header.value("seed", 0ull);
    if (info.model == "recurrent") info.embedding_mode = lc.header.at("arch").at("mode").get<std::string>();
    return info;
}

void save_dictionary_checkpoint(const std::string& path, const std::string& lexicon_fingerprint,
                                std::uint64_t seed) {
    json h{{"model", "dictionary"}, {"seed", seed}, {"lexicon_fingerprint", lexicon_fingerprint}};
    write_file(path, h, {});
}

std::string load_dictionary_checkpoint(const std::string& path) {
    const auto lc = read_file(path, false);
    if (lc.header.at("model").get<std::string>() != "dictionary")
        throw DataError(path + ": not a dictionary checkpoint");
    return lc.header.value("lexicon_fingerprint", "");
}

void save_tfidf_svm_checkpoint(const std::string& path, const TfidfSvmClassifier& model,
                               std::uint64_t seed) {
    const auto& vec = model.vectorizer();
    const auto& svm = model.model();
    if (svm.w.size() != vec.vocab_size()) throw DataError("tfidf_svm: weight/vocabulary size mismatch");
    json h{{"model", "tfidf_svm"},
           {"seed", seed},
           {"columns", vec.columns()},
           {"lambda", svm.lambda},
           {"epochs", svm.epochs}};
    const double bias = svm.bias;
    write_file(path, h,
               {{{"idf", 1, vec.idf().size()}, vec.idf().data()},
                {{"w", 1, svm.w.size()}, svm.w.data()},
                {{"bias", 1, 1}, &bias}});
}

TfidfSvmClassifier load_tfidf_svm_checkpoint(const std::string& path) {
    auto lc = read_file(path, true);
    if (lc.header.at("model").get<std::string>() != "tfidf_svm")
        throw DataError(path + ": not a tfidf_svm checkpoint");
    auto columns = lc.header.at("columns").get<std::vector<std::string>>();
    if (lc.specs.size() != 3 || lc.specs[0].name != "idf" || lc.specs[1].name != "w" ||
        lc.specs[2].name != "bias")
        throw DataError(path + ": unexpected block layout");
    if (lc.blocks[0].size() != columns.size() || lc.blocks[1].size() != columns.size() ||
        lc.blocks[2].size() != 1)
        throw DataError(path + ": block shape does not match vocabulary size");
    auto vec = TfidfVectorizer::restore(std::move(columns), std::move(lc.blocks[0]));
    SvmModel svm;
    svm.w = std::move(lc.blocks[1]);
    svm.bias = lc.blocks[2][0];
    svm.lambda = lc.header.value("lambda", 1e-4);
    svm.epochs = lc.header.value("epochs", 0);
    return TfidfSvmClassifier(std::move(vec), std::move(svm));
}

void save_recurrent_checkpoint(const std::string& path, RecurrentClassifier& model, std::uint64_t seed,
                               const std::string& embeddings_fingerprint) {
    json h{{"model", "recurrent"}, {"seed", seed}, {"arch", recurrent_arch(model)}};
    if (model.config().mode == EmbeddingMode::LearnedTable) {
        h["vocab"] = model.learned_vocab();
    } else {
        h["embeddings_fingerprint"] = embeddings_fingerprint;
    }
    std::vector<std::pair<BlockSpec, const double*>> blocks;
    for (const auto& p : model.params()) blocks.push_back({{p.name, p.rows, p.cols}, p.data});
    write_file(path, h, blocks);
}

RecurrentClassifier load_recurrent_checkpoint(const std::string& path,
                                              std::shared_ptr<const embeddings::EmbeddingTable> table) {
    auto lc = read_file(path, true);
    if (lc.header.at("model").get<std::string>() != "recurrent")
        throw DataError(path + ": not a recurrent checkpoint");
    const RecurrentConfig cfg = arch_from_json(lc.header.at("arch"));

    RecurrentClassifier model = [&] {
        if (cfg.mode == EmbeddingMode::LearnedTable) {
            return RecurrentClassifier::restore_learned(cfg,
                                                        lc.header.at("vocab").get<std::vector<std::string>>());
        }
        if (!table)
            throw DataError(path + ": pretrained checkpoint needs the embedding table it was trained with");
        return RecurrentClassifier::restore_pretrained(cfg, std::move(table));
    }();

    auto refs = model.params();
    if (refs.size() != lc.specs.size()) throw DataError(path + ": parameter block count mismatch");
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (refs[i].name != lc.specs[i].name || refs[i].rows != lc.specs[i].rows ||
            refs[i].cols != lc.specs[i].cols)
            throw DataError(path + ": block '" + lc.specs[i].name + "' shape mismatch (expected " +
                            refs[i].name + " " + std::to_string(refs[i].rows) + "x" +
                            std::to_string(refs[i].cols) + ")");
        std::copy(lc.blocks[i].begin(), lc.blocks[i].end(), refs[i].data);
    }
    return model;
}

} // namespace gastmix::models
