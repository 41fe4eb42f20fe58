#pragma once

#include <span>
#include <vector>

namespace ctg {

/// Physiological validity band in bpm. Samples equal to the 0.0 missing
/// marker or outside the band count as signal loss.
struct Band {
    double low = 50.0;
    double high = 210.0;
};

/// Half-open run [start, end) of invalid samples.
struct GapSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
    bool operator==(const GapSpan&) const = default;
};

struct CleanSignal {
    std::vector<double> samples;
    std::vector<GapSpan> repaired_spans;
    double quality = 1.0;  // valid fraction before repair
};

/// Maximal runs of invalid samples (0.0 or outside the band), sorted,
/// non-overlapping. Empty input gives an empty list.
std::vector<GapSpan> detect_gaps(std::span<const double> fhr, Band band = {});

/// Replace gap samples with a monotone cubic Hermite interpolant
/// (Fritsch-Carlson tangents) through the valid samples. Leading/trailing
/// gaps take the nearest valid value. Valid samples pass through unchanged.
CleanSignal interpolate_gaps(std::span<const double> fhr, const std::vector<GapSpan>& gaps);

/// Valid-sample fraction per consecutive window_minutes block (7200 samples
/// at 4 Hz for 30 min); the final partial block uses its own denominator.
std::vector<double> quality_fraction(std::span<const double> fhr, double window_minutes,
                                     Band band = {});

bool is_valid_sample(double v, Band band);

}  // namespace ctg
