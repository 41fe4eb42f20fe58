#pragma once

#include <span>
#include <vector>

namespace ctg {

enum class FigoEventKind { acceleration, deceleration };

/// Maximal run [start, end) deviating >= deviation_bpm from the real
/// baseline for at least min_duration_s.
struct FigoEvent {
    FigoEventKind kind = FigoEventKind::acceleration;
    std::size_t start = 0;
    std::size_t end = 0;
    double peak_deviation = 0.0;  // signed, bpm
};

struct FigoConfig {
    double deviation_bpm = 10.0;
    double min_duration_s = 10.0;
    double sample_hz = 4.0;
};

struct FigoSummary {
    double vbl = 0.0;  // mean of the complete signal
    double rbl = 0.0;  // mean after excluding >10 bpm excursions from the VBL
    bool rbl_fallback = false;
    std::size_t accelerations = 0;
    std::size_t decelerations = 0;
    std::vector<FigoEvent> events;
};

/// Mean of all samples of a repaired signal.
double virtual_baseline(std::span<const double> fhr);

/// Mean of the samples within [vbl - band, vbl + band]; falls back to the
/// VBL (flagged) when nothing survives the exclusion.
double real_baseline(std::span<const double> fhr, double vbl, double band_bpm = 10.0,
                     bool* fallback = nullptr);

std::vector<FigoEvent> count_events(std::span<const double> fhr, double rbl,
                                    const FigoConfig& cfg = {});

FigoSummary figo_summary(std::span<const double> fhr, const FigoConfig& cfg = {});

}  // namespace ctg
