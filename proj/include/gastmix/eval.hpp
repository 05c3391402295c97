#ifndef GASTMIX_EVAL_HPP
#define GASTMIX_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gastmix::eval {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct Labeled {
    std::uint64_t sentence_id = 0;
    bool value = false;
};

// Joins predictions and gold by sentence_id; the id sets must be identical.
ConfusionMatrix confusion(const std::vector<Labeled>& predictions, const std::vector<Labeled>& gold);

struct MetricsReport {
    double precision = 0;
    double recall = 0;
    double accuracy = 0;
    double f1_binary = 0;  // positive class
    double f1_macro = 0;   // unweighted mean of per-class F1
    // 0/0 cases are reported as 0 with the flag cleared, never NaN
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

MetricsReport metrics(const ConfusionMatrix& m);

struct AgreementReport {
    double kappa = 0;
    double observed = 0;            // mean per-item agreement
    double expected = 0;            // chance agreement
    std::vector<double> category_shares;
    bool defined = true;            // false when expected == 1 with imperfect agreement
};

// Fleiss kappa over an items x raters label matrix; every item must carry the
// same number (>= 2) of ratings. Labels are category indices < categories.
AgreementReport fleiss_kappa(const std::vector<std::vector<int>>& labels, int categories = 2);

struct NamedReport {
    std::string name;
    MetricsReport report;
};

struct Comparison {
    std::vector<NamedReport> rows;
};

// Plain-text table, percentages with one decimal, column-best marked with '*'.
std::string render_table(const Comparison& c);

std::string comparison_to_json(const Comparison& c);
Comparison comparison_from_json(const std::string& json_text);

std::string metrics_to_json(const MetricsReport& r);
std::string agreement_to_json(const AgreementReport& r);

} // namespace gastmix::eval

#endif
