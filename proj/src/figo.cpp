#include "ctg/figo.hpp"

#include <cmath>
#include <cstddef>

#include "ctg/errors.hpp"

namespace ctg {

double virtual_baseline(std::span<const double> fhr) {
    if (fhr.empty()) {
        throw data_error("virtual_baseline: empty signal");
    }
    double sum = 0.0;
    for (double v : fhr) sum += v;
    return sum / static_cast<double>(fhr.size());
}

double real_baseline(std::span<const double> fhr, double vbl, double band_bpm,
                     bool* fallback) {
    if (fhr.empty()) {
        throw data_error("real_baseline: empty signal");
    }
    double sum = 0.0;
    std::size_t kept = 0;
    for (double v : fhr) {
        if (std::abs(v - vbl) <= band_bpm) {
            sum += v;
            ++kept;
        }
    }
    if (kept == 0) {
        if (fallback != nullptr) *fallback = true;
        return vbl;
    }
    if (fallback != nullptr) *fallback = false;
    return sum / static_cast<double>(kept);
}

std::vector<FigoEvent> count_events(std::span<const double> fhr, double rbl,
                                    const FigoConfig& cfg) {
    const auto min_len = static_cast<std::size_t>(
        std::llround(cfg.min_duration_s * cfg.sample_hz));
    std::vector<FigoEvent> events;

    // -1 deceleration, 0 in band, +1 acceleration
    auto zone = [&](double v) -> int {
        const double dev = v - rbl;
        if (dev >= cfg.deviation_bpm) return 1;
        if (dev <= -cfg.deviation_bpm) return -1;
        return 0;
    };

    std::size_t i = 0;
    while (i < fhr.size()) {
        const int z = zone(fhr[i]);
        if (z == 0) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        double peak = fhr[i] - rbl;
        while (j < fhr.size() && zone(fhr[j]) == z) {
            const double dev = fhr[j] - rbl;
            if (std::abs(dev) > std::abs(peak)) peak = dev;
            ++j;
        }
        if (j - i >= min_len) {
            FigoEvent ev;
            ev.kind = z > 0 ? FigoEventKind::acceleration : FigoEventKind::deceleration;
            ev.start = i;
            ev.end = j;
            ev.peak_deviation = peak;
            events.push_back(ev);
        }
        i = j;
    }
    return events;
}

FigoSummary figo_summary(std::span<const double> fhr, const FigoConfig& cfg) {
    FigoSummary s;
    s.vbl = virtual_baseline(fhr);
    s.rbl = real_baseline(fhr, s.vbl, cfg.deviation_bpm, &s.rbl_fallback);
    s.events = count_events(fhr, s.rbl, cfg);
    for (const auto& ev : s.events) {
        if (ev.kind == FigoEventKind::acceleration) ++s.accelerations;
        else ++s.decelerations;
    }
    return s;
}

}  // namespace ctg
