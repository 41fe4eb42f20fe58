#include "ctg/preprocess.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "ctg/dataio.hpp"
#include "ctg/errors.hpp"

namespace ctg {

bool is_valid_sample(double v, Band band) {
    return v != 0.0 && v >= band.low && v <= band.high && std::isfinite(v);
}

std::vector<GapSpan> detect_gaps(std::span<const double> fhr, Band band) {
    if (band.low >= band.high) {
        throw config_error("detect_gaps: band.low must be below band.high");
    }
    std::vector<GapSpan> spans;
    std::size_t i = 0;
    while (i < fhr.size()) {
        if (is_valid_sample(fhr[i], band)) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < fhr.size() && !is_valid_sample(fhr[j], band)) ++j;
        spans.push_back({i, j});
        i = j;
    }
    return spans;
}

namespace {

// Monotone cubic Hermite tangents after Fritsch & Carlson: average secant
// slopes, zero them at local extrema, then rescale any (alpha, beta) pair
// outside the radius-3 circle back onto it.
std::vector<double> fritsch_carlson_tangents(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        d[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    }
    std::vector<double> m(n);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
        m[k] = (d[k - 1] <= 0.0) != (d[k] <= 0.0) ? 0.0 : 0.5 * (d[k - 1] + d[k]);
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (d[k] == 0.0) {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        const double alpha = m[k] / d[k];
        const double beta = m[k + 1] / d[k];
        if (alpha < 0.0) m[k] = 0.0;
        if (beta < 0.0) m[k + 1] = 0.0;
        const double s = alpha * alpha + beta * beta;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m[k] = tau * alpha * d[k];
            m[k + 1] = tau * beta * d[k];
        }
    }
    return m;
}

double hermite_eval(double x0, double x1, double y0, double y1, double m0, double m1,
                    double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
}

}  // namespace

CleanSignal interpolate_gaps(std::span<const double> fhr, const std::vector<GapSpan>& gaps) {
    CleanSignal out;
    out.samples.assign(fhr.begin(), fhr.end());
    out.repaired_spans = gaps;

    std::size_t gap_total = 0;
    for (const auto& g : gaps) gap_total += g.length();
    out.quality = fhr.empty() ? 1.0
                              : 1.0 - static_cast<double>(gap_total) /
                                          static_cast<double>(fhr.size());
    if (gaps.empty()) return out;

    std::vector<bool> in_gap(fhr.size(), false);
    for (const auto& g : gaps) {
        for (std::size_t i = g.start; i < g.end; ++i) in_gap[i] = true;
    }

    std::vector<double> knot_x;
    std::vector<double> knot_y;
    for (std::size_t i = 0; i < fhr.size(); ++i) {
        if (!in_gap[i]) {
            knot_x.push_back(static_cast<double>(i));
            knot_y.push_back(fhr[i]);
        }
    }
    if (knot_x.size() < 2) {
        throw data_error("interpolate_gaps: fewer than two valid samples, record unrecoverable");
    }

    const auto tangents = fritsch_carlson_tangents(knot_x, knot_y);

    std::size_t seg = 0;  // knot interval cursor, advances with i
    for (std::size_t i = 0; i < fhr.size(); ++i) {
        if (!in_gap[i]) continue;
        const double xi = static_cast<double>(i);
        if (xi < knot_x.front()) {
            out.samples[i] = knot_y.front();
        } else if (xi > knot_x.back()) {
            out.samples[i] = knot_y.back();
        } else {
            while (seg + 2 < knot_x.size() && knot_x[seg + 1] < xi) ++seg;
            out.samples[i] = hermite_eval(knot_x[seg], knot_x[seg + 1], knot_y[seg],
                                          knot_y[seg + 1], tangents[seg], tangents[seg + 1], xi);
        }
    }
    return out;
}

std::vector<double> quality_fraction(std::span<const double> fhr, double window_minutes,
                                     Band band) {
    if (window_minutes <= 0.0) {
        throw config_error("quality_fraction: window_minutes must be positive");
    }
    const std::size_t block =
        static_cast<std::size_t>(std::llround(window_minutes * 60.0 * kSampleHz));
    std::vector<double> fractions;
    for (std::size_t start = 0; start < fhr.size(); start += block) {
        const std::size_t end = std::min(start + block, fhr.size());
        std::size_t valid = 0;
        for (std::size_t i = start; i < end; ++i) {
            if (is_valid_sample(fhr[i], band)) ++valid;
        }
        fractions.push_back(static_cast<double>(valid) / static_cast<double>(end - start));
    }
    return fractions;
}

}  // namespace ctg
