#include "ctg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "ctg/errors.hpp"

namespace ctg {

namespace {

constexpr double kProbClip = 1e-15;

void check_consistent(const ScoredSet& s, const char* who) {
    if (s.scores.size() != s.labels.size()) {
        throw data_error(std::string(who) + ": scores and labels differ in length");
    }
}

}  // namespace

std::size_t ScoredSet::count(Label l) const {
    std::size_t n = 0;
    for (Label x : labels) {
        if (x == l) ++n;
    }
    return n;
}

Counts confusion(const ScoredSet& scored, double threshold) {
    check_consistent(scored, "confusion");
    if (scored.size() == 0) {
        throw data_error("confusion: empty scored set");
    }
    Counts c;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const bool predicted_case = scored.scores[i] >= threshold;
        const bool is_case = scored.labels[i] == Label::case_;
        if (predicted_case && is_case) ++c.tp;
        else if (predicted_case && !is_case) ++c.fp;
        else if (!predicted_case && is_case) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double auc_rank(const ScoredSet& scored) {
    check_consistent(scored, "auc_rank");
    const std::size_t n1 = scored.count(Label::case_);
    const std::size_t n2 = scored.size() - n1;
    if (n1 == 0 || n2 == 0) {
        throw data_error("auc_rank: both classes required, got " + std::to_string(n1) +
                         " cases / " + std::to_string(n2) + " controls");
    }

    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored.scores[a] < scored.scores[b];
    });

    // mid-ranks over tie groups
    double s0 = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scored.scores[order[j]] == scored.scores[order[i]]) ++j;
        const double mid_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t) {
            if (scored.labels[order[t]] == Label::case_) s0 += mid_rank;
        }
        i = j;
    }
    const double n1d = static_cast<double>(n1);
    return (s0 - n1d * (n1d + 1.0) / 2.0) / (n1d * static_cast<double>(n2));
}

std::pair<double, double> wald_ci(double p_hat, std::size_t n, double level) {
    if (n == 0) {
        throw config_error("wald_ci: n must be at least 1");
    }
    if (level <= 0.0 || level >= 1.0) {
        throw config_error("wald_ci: level must be in (0,1)");
    }
    const double k = normal_quantile(0.5 + level / 2.0);
    const double sd = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
    const double lo = std::max(0.0, p_hat - k * sd);
    const double hi = std::min(1.0, p_hat + k * sd);
    return {lo, hi};
}

double logloss(const ScoredSet& scored) {
    check_consistent(scored, "logloss");
    if (scored.size() == 0) {
        throw data_error("logloss: empty scored set");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const double p = std::clamp(scored.scores[i], kProbClip, 1.0 - kProbClip);
        const double y = scored.labels[i] == Label::case_ ? 1.0 : 0.0;
        sum += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(scored.size());
}

RocCurve roc_curve(const ScoredSet& scored) {
    check_consistent(scored, "roc_curve");
    const std::size_t n1 = scored.count(Label::case_);
    const std::size_t n2 = scored.size() - n1;
    if (n1 == 0 || n2 == 0) {
        throw data_error("roc_curve: both classes required");
    }

    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored.scores[a] > scored.scores[b];
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scored.scores[order[i]];
        std::size_t j = i;
        while (j < order.size() && scored.scores[order[j]] == s) {
            if (scored.labels[order[j]] == Label::case_) ++tp;
            else ++fp;
            ++j;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n2),
                                static_cast<double>(tp) / static_cast<double>(n1), s});
        i = j;
    }
    return curve;
}

double RocCurve::trapezoid_area() const {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
    }
    return area;
}

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) {
        throw config_error("normal_quantile: p must be in (0,1)");
    }
    // Acklam's inverse normal CDF approximation
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double q;
    double r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

EvalReport evaluate(const ScoredSet& scored, double threshold, double level) {
    EvalReport rep;
    rep.threshold = threshold;
    rep.counts = confusion(scored, threshold);
    rep.n_case = rep.counts.tp + rep.counts.fn;
    rep.n_control = rep.counts.tn + rep.counts.fp;

    const double sens = rep.n_case == 0
                            ? 0.0
                            : static_cast<double>(rep.counts.tp) / static_cast<double>(rep.n_case);
    const double spec = rep.n_control == 0 ? 0.0
                                           : static_cast<double>(rep.counts.tn) /
                                                 static_cast<double>(rep.n_control);
    rep.sensitivity.value = sens;
    rep.specificity.value = spec;
    if (rep.n_case > 0) {
        std::tie(rep.sensitivity.lo, rep.sensitivity.hi) = wald_ci(sens, rep.n_case, level);
    }
    if (rep.n_control > 0) {
        std::tie(rep.specificity.lo, rep.specificity.hi) = wald_ci(spec, rep.n_control, level);
    }

    rep.auc.value = auc_rank(scored);
    std::tie(rep.auc.lo, rep.auc.hi) = wald_ci(rep.auc.value, scored.size(), level);
    rep.logloss = ctg::logloss(scored);

    // Youden-optimal operating point over the ROC thresholds
    const RocCurve curve = roc_curve(scored);
    double best_j = -1.0;
    for (const auto& pt : curve.points) {
        const double j = pt.tpr - pt.fpr;
        if (j > best_j) {
            best_j = j;
            rep.youden_threshold = std::isinf(pt.threshold) ? 1.0 : pt.threshold;
            rep.youden_sensitivity = pt.tpr;
            rep.youden_specificity = 1.0 - pt.fpr;
        }
    }
    return rep;
}

ScoredSet flip_positive(const ScoredSet& scored) {
    ScoredSet flipped;
    flipped.scores.reserve(scored.size());
    flipped.labels.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        flipped.scores.push_back(1.0 - scored.scores[i]);
        flipped.labels.push_back(scored.labels[i] == Label::case_ ? Label::control
                                                                  : Label::case_);
    }
    return flipped;
}

std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves) {
    const int w = 480;
    const int h = 480;
    const int margin = 50;
    const int plot = w - 2 * margin;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf"};

    auto px = [&](double fpr) { return margin + fpr * plot; };
    auto py = [&](double tpr) { return h - margin - tpr * plot; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
        << py(1) << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";
    // axes
    svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
        << py(0) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0) << "\" y2=\""
        << py(1) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = t / 4.0;
        char lab[16];
        std::snprintf(lab, sizeof(lab), "%.2f", v);
        svg << "<text x=\"" << px(v) << "\" y=\"" << (h - margin + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << lab << "</text>\n";
        svg << "<text x=\"" << (margin - 8) << "\" y=\"" << (py(v) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << lab << "</text>\n";
    }
    svg << "<text x=\"" << (w / 2) << "\" y=\"" << (h - 12)
        << "\" font-size=\"13\" text-anchor=\"middle\">False positive rate</text>\n";
    svg << "<text x=\"14\" y=\"" << (h / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << (h / 2)
        << ")\">True positive rate</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* colour = palette[c % (sizeof(palette) / sizeof(palette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& pt : curves[c].second.points) {
            svg << px(pt.fpr) << ',' << py(pt.tpr) << ' ';
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << (margin + 10) << "\" y=\"" << (margin + 16 + 16 * c)
            << "\" font-size=\"12\" fill=\"" << colour << "\">" << curves[c].first << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ctg
