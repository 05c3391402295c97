#include "gastmix/dataset.hpp"

#include "gastmix/error.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

namespace gastmix::dataset {

namespace {

// k distinct indices from [0, pool), uniform without replacement: partial
// Fisher-Yates over an index vector.
std::vector<std::size_t> draw_indices(std::size_t pool, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(pool);
    for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace

Sample sample_balanced(const std::vector<corpus::Sentence>& with_terms,
                       const std::vector<corpus::Sentence>& without_terms, std::size_t n,
                       double ratio, std::uint64_t seed) {
    if (ratio < 0.0 || ratio > 1.0) throw DataError("sample ratio must be in [0, 1]");
    const auto n_with = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
    const std::size_t n_without = n - std::min(n, n_with);
    if (n_with > with_terms.size())
        throw DataError("with-terms pool exhausted: need " + std::to_string(n_with) + ", have " +
                        std::to_string(with_terms.size()));
    if (n_without > without_terms.size())
        throw DataError("without-terms pool exhausted: need " + std::to_string(n_without) +
                        ", have " + std::to_string(without_terms.size()));

    Rng rng(seed);
    Sample s;
    for (const std::size_t i : draw_indices(with_terms.size(), n_with, rng)) {
        s.sentences.push_back(with_terms[i]);
        s.has_term.push_back(true);
    }
    for (const std::size_t i : draw_indices(without_terms.size(), n_without, rng)) {
        s.sentences.push_back(without_terms[i]);
        s.has_term.push_back(false);
    }
    return s;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open annotation file: " + path);
    std::vector<AnnotationRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected sentence_id<TAB>annotator_id<TAB>label");
        AnnotationRecord r;
        r.sentence_id = from_hex(line.substr(0, t1));
        r.annotator_id = line.substr(t1 + 1, t2 - t1 - 1);
        const std::string label = line.substr(t2 + 1);
        if (label == "1") r.label = true;
        else if (label == "0") r.label = false;
        else throw DataError(path + ":" + std::to_string(line_no) + ": label must be 0 or 1");
        if (r.annotator_id.empty())
            throw DataError(path + ":" + std::to_string(line_no) + ": empty annotator id");
        out.push_back(std::move(r));
    }
    return out;
}

MergeResult merge_annotations(const std::vector<AnnotationRecord>& annotations,
                              const std::vector<corpus::Sentence>& sentences,
                              const std::vector<bool>& has_term) {
    std::unordered_map<std::uint64_t, std::size_t> by_id;
    for (std::size_t i = 0; i < sentences.size(); ++i) by_id.emplace(sentences[i].sentence_id, i);

    // sentence -> annotator -> label, order preserved via map over first index
    std::map<std::uint64_t, std::map<std::string, bool>> votes;
    for (const auto& a : annotations) {
        if (!by_id.count(a.sentence_id))
            throw DataError("annotation references unknown sentence_id " + to_hex(a.sentence_id));
        auto& per = votes[a.sentence_id];
        if (auto [it, fresh] = per.emplace(a.annotator_id, a.label); !fresh && it->second != a.label)
            throw DataError("annotator '" + a.annotator_id + "' gave conflicting labels for sentence " +
                            to_hex(a.sentence_id));
    }

    MergeResult r;
    // output follows the sentence order of `sentences`
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const auto vit = votes.find(sentences[i].sentence_id);
        if (vit == votes.end()) continue;  // unannotated, not part of the labeled set
        std::size_t pos = 0, neg = 0;
        LabeledSentence ls;
        ls.sentence = sentences[i];
        ls.has_term = i < has_term.size() ? has_term[i] : false;
        for (const auto& [annotator, label] : vit->second) {
            ls.annotator_labels.emplace_back(annotator, label);
            (label ? pos : neg)++;
        }
        if (pos == neg) {
            r.needs_adjudication.push_back(sentences[i].sentence_id);
            continue;
        }
        ls.gold = pos > neg;
        r.labeled.push_back(std::move(ls));
    }
    return r;
}

SplitResult split(const std::vector<LabeledSentence>& data, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw DataError("train fraction must be in (0, 1)");
    if (data.size() < 2) throw DataError("need at least 2 items to split");

    SplitResult r;
    std::vector<std::size_t> strata[2];
    for (std::size_t i = 0; i < data.size(); ++i) strata[data[i].has_term ? 1 : 0].push_back(i);

    Rng rng(spec.seed);
    for (const bool with : {true, false}) {
        auto& stratum = strata[with ? 1 : 0];
        if (stratum.empty()) {
            r.warnings.push_back(std::string("empty stratum: has_term=") + (with ? "true" : "false"));
            continue;
        }
        // order by sentence_id so re-annotation does not reshuffle folds
        std::sort(stratum.begin(), stratum.end(), [&](std::size_t a, std::size_t b) {
            return data[a].sentence.sentence_id < data[b].sentence.sentence_id;
        });
        rng.shuffle(stratum);
        // epsilon compensates binary representation of fractions like 0.7,
        // where 0.7 * 400 evaluates to 279.9999... instead of 280
        const auto n_train = static_cast<std::size_t>(
            std::floor(spec.train_fraction * static_cast<double>(stratum.size()) + 1e-9));
        for (std::size_t i = 0; i < stratum.size(); ++i) {
            (i < n_train ? r.train : r.validation).push_back(data[stratum[i]]);
        }
    }
    return r;
}

} // namespace gastmix::dataset
