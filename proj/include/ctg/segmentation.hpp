#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "ctg/dataio.hpp"

namespace ctg {

/// Fixed-length non-overlapping slice of one record; the classification unit.
struct Window {
    std::string record_id;
    std::size_t index = 0;  // ordinal within the record
    std::size_t start = 0;  // == index * n
    std::vector<double> samples;
    Label label = Label::control;
    bool synthetic = false;
};

struct SplitRatios {
    double train = 0.8;
    double test = 0.2;
};

/// Record-level train/test partition, stratified by class.
struct SplitPlan {
    std::set<std::string> train_records;
    std::set<std::string> test_records;
    std::uint64_t seed = 0;
    SplitRatios ratios;
};

struct BalancedSet {
    std::vector<Window> case_windows;
    std::vector<Window> control_windows;
    std::uint64_t seed = 0;

    std::size_t total() const { return case_windows.size() + control_windows.size(); }
};

/// floor(length/n) windows at starts 0, n, 2n, ...; the trailing remainder is
/// dropped. The record must already be repaired.
std::vector<Window> segment(const Record& record, std::size_t n);

/// Deterministic seeded shuffle per class, then nearest-integer assignment of
/// the train fraction (clamped so both sides keep at least one record).
SplitPlan split_records(const std::vector<Record>& records, SplitRatios ratios,
                        std::uint64_t seed);

/// Keep every case window; draw an equal-size uniform sample of control
/// windows without replacement.
BalancedSet balance_undersample(std::vector<Window> case_windows,
                                std::vector<Window> control_windows, std::uint64_t seed);

/// Synthetic minority windows on the segments joining each minority window to
/// its k nearest minority neighbours (Euclidean on raw samples);
/// amount_percent/100 synthetics per source window.
std::vector<Window> smote(const std::vector<Window>& minority, std::size_t k,
                          std::size_t amount_percent, std::uint64_t seed);

/// Uniform sample without replacement down to target_size.
std::vector<Window> undersample_majority(const std::vector<Window>& majority,
                                         std::size_t target_size, std::uint64_t seed);

/// One window per row: record_id, index, label, then the n samples.
void write_windows_csv(std::ostream& out, const std::vector<Window>& windows);
std::vector<Window> read_windows_csv(std::istream& in);

}  // namespace ctg
