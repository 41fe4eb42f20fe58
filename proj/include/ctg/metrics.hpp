#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ctg/dataio.hpp"

namespace ctg {

/// Probability scores paired with ground-truth labels; positive class = case.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<Label> labels;

    std::size_t size() const { return scores.size(); }
    std::size_t count(Label l) const;
};

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

/// Threshold-descending ROC polyline from (0,0) to (1,1); its trapezoidal
/// area equals the rank AUC.
struct RocCurve {
    std::vector<RocPoint> points;

    double trapezoid_area() const;
};

struct CiValue {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct EvalReport {
    CiValue sensitivity;
    CiValue specificity;
    CiValue auc;
    double logloss = 0.0;
    Counts counts;
    std::size_t n_case = 0;
    std::size_t n_control = 0;
    double threshold = 0.5;
    double youden_threshold = 0.5;
    double youden_sensitivity = 0.0;
    double youden_specificity = 0.0;
};

/// Predict case iff score >= threshold, then tally against labels.
Counts confusion(const ScoredSet& scored, double threshold);

/// Rank AUC with mid-rank tie handling:
/// A = (S0 - n1(n1+1)/2) / (n1 n2), S0 = sum of case-score ranks.
double auc_rank(const ScoredSet& scored);

/// Wald interval p +- k sqrt(p(1-p)/n), clamped to [0,1].
std::pair<double, double> wald_ci(double p_hat, std::size_t n, double level = 0.95);

/// Mean binary cross-entropy; scores clipped to [1e-15, 1-1e-15].
double logloss(const ScoredSet& scored);

RocCurve roc_curve(const ScoredSet& scored);

/// Standard normal quantile (Acklam's rational approximation, |e| < 1.2e-8).
double normal_quantile(double p);

/// Full report at the given decision threshold. CI denominators: case count
/// for sensitivity, control count for specificity, total for AUC.
EvalReport evaluate(const ScoredSet& scored, double threshold = 0.5, double level = 0.95);

/// Flip the positive class: scores become 1-p and labels swap.
ScoredSet flip_positive(const ScoredSet& scored);

/// Minimal self-contained SVG plot of one or more named ROC curves.
std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves);

}  // namespace ctg
