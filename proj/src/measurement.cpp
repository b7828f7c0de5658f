#include "feedsim/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "feedsim/csv.hpp"

namespace feedsim {

bool binarize(double score, double threshold) {
    if (!(score >= 0.0 && score <= 1.0) || !(threshold >= 0.0 && threshold <= 1.0))
        throw std::domain_error("binarize: score and threshold must lie in [0, 1]");
    return score > threshold;
}

ClassifierReport evaluate(const std::vector<ScoredItem>& items, double threshold) {
    ClassifierReport report;
    for (const auto& item : items) {
        if (!item.true_label) continue;
        const bool predicted = binarize(item.score, threshold);
        const bool actual = *item.true_label;
        if (predicted && actual) ++report.confusion.tp;
        else if (predicted && !actual) ++report.confusion.fp;
        else if (!predicted && actual) ++report.confusion.fn;
        else ++report.confusion.tn;
    }
    if (report.confusion.total() == 0) throw std::invalid_argument("evaluate: no labeled items");
    const auto& c = report.confusion;
    report.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    report.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    report.f1 = report.precision + report.recall > 0.0
                    ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                    : 0.0;
    return report;
}

ThresholdSelection select_threshold(const std::vector<ScoredItem>& items,
                                    const std::vector<double>& candidates,
                                    double tpr_tolerance) {
    if (candidates.empty()) throw std::invalid_argument("select_threshold: no candidates");
    ThresholdSelection out;
    std::vector<double> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    double best_tpr = 0.0;
    for (const double t : sorted) {
        out.sweep.emplace_back(t, evaluate(items, t));
        best_tpr = std::max(best_tpr, out.sweep.back().second.recall);
    }
    // keep thresholds capturing (nearly) the most true positives, then rank by F1
    double best_f1 = -1.0;
    for (const auto& [t, report] : out.sweep) {
        if (report.recall + tpr_tolerance < best_tpr) continue;
        if (report.f1 > best_f1) {  // strict: ties stay at the lower threshold
            best_f1 = report.f1;
            out.threshold = t;
        }
    }
    return out;
}

std::vector<ScoredItem> read_scores_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2 || table.header[0] != "item_id" || table.header[1] != "score")
        throw std::runtime_error("read_scores_csv: expected header item_id,score[,label]");
    const bool has_label = table.header.size() >= 3 && table.header[2] == "label";
    std::vector<ScoredItem> items;
    items.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ScoredItem item;
        item.score = parse_number(row.at(1));
        if (has_label && row.size() >= 3 && !row[2].empty())
            item.true_label = row[2] == "1" || row[2] == "true";
        items.push_back(item);
    }
    return items;
}

void write_threshold_report_csv(const std::string& path, const ThresholdSelection& selection) {
    CsvTable table;
    table.header = {"threshold", "tp", "fp", "tn", "fn", "precision", "recall", "f1", "selected"};
    for (const auto& [t, report] : selection.sweep) {
        table.rows.push_back({format_number(t), std::to_string(report.confusion.tp),
                              std::to_string(report.confusion.fp),
                              std::to_string(report.confusion.tn),
                              std::to_string(report.confusion.fn), format_number(report.precision),
                              format_number(report.recall), format_number(report.f1),
                              t == selection.threshold ? "1" : "0"});
    }
    write_csv(path, table);
}

}  // namespace feedsim
