#include <doctest.h>

#include <vector>

#include "ctg/errors.hpp"
#include "ctg/figo.hpp"
#include "ctg/rng.hpp"

using namespace ctg;

namespace {

std::vector<double> flat(std::size_t n, double v) { return std::vector<double>(n, v); }

}  // namespace

TEST_CASE("virtual baseline is the signal mean") {
    CHECK(virtual_baseline(flat(100, 140.0)) == 140.0);
    CHECK(virtual_baseline(std::vector<double>{130.0, 150.0}) == 140.0);
    CHECK_THROWS_AS(virtual_baseline(std::vector<double>{}), data_error);

    Rng rng(12);
    std::vector<double> noisy(1000);
    for (auto& v : noisy) v = 140.0 + 5.0 * rng.normal();
    CHECK(virtual_baseline(noisy) == doctest::Approx(140.0).epsilon(1.0 / 140.0));
}

TEST_CASE("real baseline excludes excursions beyond 10 bpm of the vbl") {
    // 900 samples at 140 plus 100 at 180: VBL 144, the 180s fall outside
    // 144 +- 10, so RBL is the flat-segment mean
    std::vector<double> sig = flat(900, 140.0);
    sig.insert(sig.end(), 100, 180.0);
    const double vbl = virtual_baseline(sig);
    CHECK(vbl == doctest::Approx(144.0));
    CHECK(real_baseline(sig, vbl) == doctest::Approx(140.0));

    CHECK(real_baseline(flat(50, 140.0), 140.0) == 140.0);

    // symmetric +-15 excursions cancel out of the band entirely
    std::vector<double> sym = flat(400, 140.0);
    sym.insert(sym.end(), 100, 155.0);
    sym.insert(sym.end(), 100, 125.0);
    const double sym_vbl = virtual_baseline(sym);
    CHECK(real_baseline(sym, sym_vbl) == doctest::Approx(140.0));
}

TEST_CASE("real baseline falls back to vbl when nothing survives") {
    std::vector<double> sig;
    for (int i = 0; i < 100; ++i) sig.push_back(i % 2 == 0 ? 100.0 : 200.0);
    bool fallback = false;
    const double vbl = virtual_baseline(sig);  // 150, nothing within +-10
    const double rbl = real_baseline(sig, vbl, 10.0, &fallback);
    CHECK(fallback);
    CHECK(rbl == vbl);
}

TEST_CASE("count_events run-length rules") {
    const FigoConfig cfg;

    CHECK(count_events(flat(2000, 140.0), 140.0, cfg).empty());

    // one +20 bpm plateau lasting 60 s (240 samples at 4 Hz)
    std::vector<double> sig = flat(400, 140.0);
    for (int i = 0; i < 240; ++i) sig.push_back(160.0);
    sig.insert(sig.end(), 400, 140.0);
    const auto events = count_events(sig, 140.0, cfg);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == FigoEventKind::acceleration);
    CHECK(events[0].start == 400);
    CHECK(events[0].end == 640);
    CHECK(events[0].peak_deviation == doctest::Approx(20.0));

    // a 5 s spike stays below the 10 s rule
    std::vector<double> spike = flat(400, 140.0);
    for (int i = 0; i < 20; ++i) spike.push_back(160.0);
    spike.insert(spike.end(), 400, 140.0);
    CHECK(count_events(spike, 140.0, cfg).empty());

    // exactly 40 samples (10 s) counts
    std::vector<double> edge = flat(100, 140.0);
    for (int i = 0; i < 40; ++i) edge.push_back(125.0);
    edge.insert(edge.end(), 100, 140.0);
    const auto decel = count_events(edge, 140.0, cfg);
    REQUIRE(decel.size() == 1);
    CHECK(decel[0].kind == FigoEventKind::deceleration);
    CHECK(decel[0].peak_deviation == doctest::Approx(-15.0));
}

TEST_CASE("events split on in-band separators and never overlap") {
    std::vector<double> sig = flat(50, 140.0);
    for (int i = 0; i < 60; ++i) sig.push_back(155.0);
    sig.push_back(140.0);  // single in-band sample separates the runs
    for (int i = 0; i < 60; ++i) sig.push_back(156.0);
    sig.insert(sig.end(), 50, 140.0);

    const auto events = count_events(sig, 140.0, {});
    REQUIRE(events.size() == 2);
    CHECK(events[0].end <= events[1].start);
    for (const auto& ev : events) {
        CHECK(ev.end - ev.start >= 40);
        for (std::size_t i = ev.start; i < ev.end; ++i) {
            CHECK(std::abs(sig[i] - 140.0) >= 10.0);
        }
    }
}

TEST_CASE("constant shift moves baselines and keeps event counts") {
    Rng rng(9);
    std::vector<double> sig = flat(300, 140.0);
    for (int i = 0; i < 80; ++i) sig.push_back(158.0);
    sig.insert(sig.end(), 300, 140.0);
    for (int i = 0; i < 50; ++i) sig.push_back(124.0);
    sig.insert(sig.end(), 300, 140.0);
    for (auto& v : sig) v += 0.5 * rng.normal();

    const FigoSummary base = figo_summary(sig);

    std::vector<double> shifted = sig;
    for (auto& v : shifted) v += 7.0;
    const FigoSummary moved = figo_summary(shifted);

    CHECK(moved.vbl == doctest::Approx(base.vbl + 7.0).epsilon(1e-9));
    CHECK(moved.rbl == doctest::Approx(base.rbl + 7.0).epsilon(1e-9));
    CHECK(moved.accelerations == base.accelerations);
    CHECK(moved.decelerations == base.decelerations);
    CHECK(base.accelerations == 1);
    CHECK(base.decelerations == 1);
}

TEST_CASE("figo thresholds are configurable") {
    // 12 bpm plateau: found at the default 10 bpm rule, gone at 15/15
    std::vector<double> sig = flat(200, 140.0);
    for (int i = 0; i < 80; ++i) sig.push_back(152.0);
    sig.insert(sig.end(), 200, 140.0);

    CHECK(count_events(sig, 140.0, {}).size() == 1);

    FigoConfig clinical;
    clinical.deviation_bpm = 15.0;
    clinical.min_duration_s = 15.0;
    CHECK(count_events(sig, 140.0, clinical).empty());
}
