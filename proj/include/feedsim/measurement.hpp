#pragma once

#include <optional>
#include <string>
#include <vector>

#include "feedsim/common.hpp"

namespace feedsim {

// Externally scored item; the score is an input, never computed here.
struct ScoredItem {
    double score = 0.0;  // in [0, 1]
    std::optional<bool> true_label;
};

struct ConfusionMatrix {
    long tp = 0, fp = 0, tn = 0, fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

struct ClassifierReport {
    ConfusionMatrix confusion;
    double precision = 0.0;
    double recall = 0.0;  // true-positive rate
    double f1 = 0.0;
};

// Strictly-greater comparison at the threshold.
bool binarize(double score, double threshold);

// Standard confusion counts over the labeled items; F1 = 0 when
// precision + recall = 0.
ClassifierReport evaluate(const std::vector<ScoredItem>& items, double threshold);

// Among candidates within tpr_tolerance of the best true-positive rate, pick
// the max-F1 threshold; ties resolve toward the lower threshold.
struct ThresholdSelection {
    double threshold = 0.0;
    std::vector<std::pair<double, ClassifierReport>> sweep;
};

ThresholdSelection select_threshold(const std::vector<ScoredItem>& items,
                                    const std::vector<double>& candidates,
                                    double tpr_tolerance = 0.0);

// Scores CSV: item_id, score, label (label optional).
std::vector<ScoredItem> read_scores_csv(const std::string& path);
// Report CSV per threshold: threshold, tp, fp, tn, fn, precision, recall, f1.
void write_threshold_report_csv(const std::string& path, const ThresholdSelection& selection);

}  // namespace feedsim
