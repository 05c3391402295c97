#include "gastmix/eval.hpp"

#include "gastmix/error.hpp"
#include "gastmix/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <unordered_map>

namespace gastmix::eval {

using nlohmann::json;

ConfusionMatrix confusion(const std::vector<Labeled>& predictions, const std::vector<Labeled>& gold) {
    if (predictions.size() != gold.size())
        throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(gold.size()) + " gold labels");
    std::unordered_map<std::uint64_t, bool> gold_by_id;
    gold_by_id.reserve(gold.size());
    for (const auto& g : gold) {
        if (!gold_by_id.emplace(g.sentence_id, g.value).second)
            throw DataError("confusion: duplicate gold sentence_id " + to_hex(g.sentence_id));
    }
    ConfusionMatrix m;
    for (const auto& p : predictions) {
        const auto it = gold_by_id.find(p.sentence_id);
        if (it == gold_by_id.end())
            throw DataError("confusion: prediction for unknown sentence_id " + to_hex(p.sentence_id));
        if (p.value && it->second) ++m.tp;
        else if (p.value && !it->second) ++m.fp;
        else if (!p.value && it->second) ++m.fn;
        else ++m.tn;
    }
    return m;
}

namespace {

// F1 with `pos` treated as the positive class; 0/0 denominators yield 0.
double class_f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, bool* defined = nullptr) {
    if (defined) *defined = true;
    const double denom_p = static_cast<double>(tp + fp);
    const double denom_r = static_cast<double>(tp + fn);
    if (denom_p == 0 || denom_r == 0) {
        if (defined) *defined = false;
        return 0.0;
    }
    const double p = static_cast<double>(tp) / denom_p;
    const double r = static_cast<double>(tp) / denom_r;
    if (p + r == 0.0) {
        if (defined) *defined = false;
        return 0.0;
    }
    return 2.0 * p * r / (p + r);
}

} // namespace

MetricsReport metrics(const ConfusionMatrix& m) {
    if (m.total() == 0) throw DataError("metrics: empty confusion matrix");
    MetricsReport r;
    if (m.tp + m.fp == 0) {
        r.precision_defined = false;
    } else {
        r.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    }
    if (m.tp + m.fn == 0) {
        r.recall_defined = false;
    } else {
        r.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    }
    r.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
    bool f1_pos_defined = true, f1_neg_defined = true;
    const double f1_pos = class_f1(m.tp, m.fp, m.fn, &f1_pos_defined);
    const double f1_neg = class_f1(m.tn, m.fn, m.fp, &f1_neg_defined);
    r.f1_binary = f1_pos;
    r.f1_defined = f1_pos_defined;
    r.f1_macro = 0.5 * (f1_pos + f1_neg);
    (void)f1_neg_defined;
    return r;
}

AgreementReport fleiss_kappa(const std::vector<std::vector<int>>& labels, int categories) {
    if (labels.empty()) throw DataError("fleiss_kappa: no items");
    if (categories < 2) throw DataError("fleiss_kappa: need at least 2 categories");
    const std::size_t raters = labels[0].size();
    if (raters < 2) throw DataError("fleiss_kappa: need at least 2 raters");

    const auto n = static_cast<double>(raters);
    const auto n_items = static_cast<double>(labels.size());
    std::vector<double> category_totals(static_cast<std::size_t>(categories), 0.0);
    double p_bar = 0.0;

    std::vector<double> counts(static_cast<std::size_t>(categories));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].size() != raters)
            throw DataError("fleiss_kappa: item " + std::to_string(i) + " has " +
                            std::to_string(labels[i].size()) + " ratings, expected " +
                            std::to_string(raters));
        std::fill(counts.begin(), counts.end(), 0.0);
        for (const int c : labels[i]) {
            if (c < 0 || c >= categories)
                throw DataError("fleiss_kappa: label out of range in item " + std::to_string(i));
            counts[static_cast<std::size_t>(c)] += 1.0;
        }
        double agree = 0.0;
        for (int j = 0; j < categories; ++j) {
            const double nij = counts[static_cast<std::size_t>(j)];
            agree += nij * (nij - 1.0);
            category_totals[static_cast<std::size_t>(j)] += nij;
        }
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= n_items;

    AgreementReport r;
    r.observed = p_bar;
    double p_e = 0.0;
    for (int j = 0; j < categories; ++j) {
        const double pj = category_totals[static_cast<std::size_t>(j)] / (n * n_items);
        r.category_shares.push_back(pj);
        p_e += pj * pj;
    }
    r.expected = p_e;

    if (p_bar == 1.0) {
        r.kappa = 1.0;  // unanimity on every item, regardless of the margin
    } else if (p_e == 1.0) {
        r.defined = false;
        r.kappa = 0.0;
    } else {
        r.kappa = (p_bar - p_e) / (1.0 - p_e);
    }
    return r;
}

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
    return buf;
}

json report_to_json(const MetricsReport& r) {
    return json{{"precision", r.precision},
                {"recall", r.recall},
                {"accuracy", r.accuracy},
                {"f1_binary", r.f1_binary},
                {"f1_macro", r.f1_macro},
                {"precision_defined", r.precision_defined},
                {"recall_defined", r.recall_defined},
                {"f1_defined", r.f1_defined}};
}

MetricsReport report_from_json(const json& j) {
    MetricsReport r;
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.f1_binary = j.at("f1_binary").get<double>();
    r.f1_macro = j.at("f1_macro").get<double>();
    r.precision_defined = j.value("precision_defined", true);
    r.recall_defined = j.value("recall_defined", true);
    r.f1_defined = j.value("f1_defined", true);
    return r;
}

} // namespace

std::string render_table(const Comparison& c) {
    if (c.rows.empty()) throw DataError("comparison table needs at least one row");
    const char* headers[] = {"Pr", "Re", "Acc", "F1", "F1(macro)"};
    auto value = [](const MetricsReport& r, std::size_t col) {
        switch (col) {
            case 0: return r.precision;
            case 1: return r.recall;
            case 2: return r.accuracy;
            case 3: return r.f1_binary;
            default: return r.f1_macro;
        }
    };
    double best[5];
    for (std::size_t col = 0; col < 5; ++col) {
        best[col] = value(c.rows[0].report, col);
        for (const auto& row : c.rows) best[col] = std::max(best[col], value(row.report, col));
    }
    std::size_t name_width = 5;
    for (const auto& row : c.rows) name_width = std::max(name_width, row.name.size());

    std::string out = "Model";
    out.append(name_width - 5 + 2, ' ');
    for (const auto* h : headers) {
        out += h;
        out.append(10 - std::string(h).size(), ' ');
    }
    out += '\n';
    for (const auto& row : c.rows) {
        out += row.name;
        out.append(name_width - row.name.size() + 2, ' ');
        for (std::size_t col = 0; col < 5; ++col) {
            const double v = value(row.report, col);
            std::string cell = pct(v);
            if (v == best[col]) cell += '*';
            out += cell;
            out.append(cell.size() < 10 ? 10 - cell.size() : 1, ' ');
        }
        out += '\n';
    }
    return out;
}

std::string comparison_to_json(const Comparison& c) {
    json rows = json::array();
    for (const auto& row : c.rows) {
        json r = report_to_json(row.report);
        r["name"] = row.name;
        rows.push_back(std::move(r));
    }
    return json{{"schema", "gastmix.comparison.v1"}, {"models", rows}}.dump(2) + "\n";
}

Comparison comparison_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    Comparison c;
    for (const auto& row : j.at("models")) {
        c.rows.push_back({row.at("name").get<std::string>(), report_from_json(row)});
    }
    return c;
}

std::string metrics_to_json(const MetricsReport& r) {
    json j = report_to_json(r);
    j["schema"] = "gastmix.metrics.v1";
    return j.dump(2) + "\n";
}

std::string agreement_to_json(const AgreementReport& r) {
    return json{{"schema", "gastmix.agreement.v1"},
                {"fleiss_kappa", r.kappa},
                {"observed_agreement", r.observed},
                {"expected_agreement", r.expected},
                {"category_shares", r.category_shares},
                {"defined", r.defined}}
               .dump(2) +
           "\n";
}

} // namespace gastmix::eval
