#include "ctg/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ctg/errors.hpp"
#include "ctg/rng.hpp"

namespace ctg {

std::vector<Window> segment(const Record& record, std::size_t n) {
    if (n < 2) {
        throw config_error("segment: window size must be at least 2");
    }
    const std::size_t count = record.fhr.size() / n;
    std::vector<Window> windows;
    windows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Window w;
        w.record_id = record.id;
        w.index = i;
        w.start = i * n;
        w.samples.assign(record.fhr.begin() + static_cast<std::ptrdiff_t>(w.start),
                         record.fhr.begin() + static_cast<std::ptrdiff_t>(w.start + n));
        w.label = record.label;
        windows.push_back(std::move(w));
    }
    return windows;
}

SplitPlan split_records(const std::vector<Record>& records, SplitRatios ratios,
                        std::uint64_t seed) {
    if (std::abs(ratios.train + ratios.test - 1.0) > 1e-9) {
        throw config_error("split_records: ratios must sum to 1");
    }
    if (ratios.train <= 0.0 || ratios.test <= 0.0) {
        throw config_error("split_records: both ratios must be positive");
    }

    std::vector<std::string> case_ids;
    std::vector<std::string> control_ids;
    for (const auto& r : records) {
        (r.label == Label::case_ ? case_ids : control_ids).push_back(r.id);
    }
    if (case_ids.size() < 2 || control_ids.size() < 2) {
        throw data_error("split_records: each class needs at least 2 records (got " +
                         std::to_string(case_ids.size()) + " cases, " +
                         std::to_string(control_ids.size()) + " controls)");
    }

    SplitPlan plan;
    plan.seed = seed;
    plan.ratios = ratios;

    Rng rng(seed);
    auto assign = [&](std::vector<std::string>& ids, std::uint64_t stream) {
        // id-sorted before the shuffle, so the plan does not depend on
        // manifest order
        std::sort(ids.begin(), ids.end());
        Rng class_rng = rng.spawn(stream);
        class_rng.shuffle(ids);
        const auto n = ids.size();
        auto train_n = static_cast<std::size_t>(
            std::llround(ratios.train * static_cast<double>(n)));
        train_n = std::clamp<std::size_t>(train_n, 1, n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            (i < train_n ? plan.train_records : plan.test_records).insert(ids[i]);
        }
    };
    assign(case_ids, 0);
    assign(control_ids, 1);
    return plan;
}

namespace {

// Sample m distinct indices from [0, n) and return them ascending, so the
// selection keeps the input's relative order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + rng.index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

BalancedSet balance_undersample(std::vector<Window> case_windows,
                                std::vector<Window> control_windows, std::uint64_t seed) {
    if (control_windows.size() < case_windows.size()) {
        throw data_error("balance_undersample: " + std::to_string(control_windows.size()) +
                         " control windows < " + std::to_string(case_windows.size()) +
                         " case windows; swap roles or use smote");
    }
    BalancedSet out;
    out.seed = seed;
    out.case_windows = std::move(case_windows);

    Rng rng(seed);
    const auto picks =
        sample_without_replacement(control_windows.size(), out.case_windows.size(), rng);
    out.control_windows.reserve(picks.size());
    for (std::size_t i : picks) out.control_windows.push_back(std::move(control_windows[i]));
    return out;
}

std::vector<Window> smote(const std::vector<Window>& minority, std::size_t k,
                          std::size_t amount_percent, std::uint64_t seed) {
    if (k < 1 || k >= minority.size()) {
        throw config_error("smote: need |minority| > k >= 1 (got k=" + std::to_string(k) +
                           ", |minority|=" + std::to_string(minority.size()) + ")");
    }
    if (amount_percent == 0 || amount_percent % 100 != 0) {
        throw config_error("smote: amount_percent must be a positive multiple of 100");
    }
    const std::size_t dim = minority.front().samples.size();
    for (const auto& w : minority) {
        if (w.samples.size() != dim) {
            throw data_error("smote: minority windows have mixed lengths");
        }
    }

    // k nearest neighbours per window, brute force; ties break on index so
    // the neighbour lists are deterministic
    std::vector<std::vector<std::size_t>> neighbours(minority.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < minority.size(); ++i) {
        dist.clear();
        for (std::size_t j = 0; j < minority.size(); ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (std::size_t t = 0; t < dim; ++t) {
                const double diff = minority[i].samples[t] - minority[j].samples[t];
                d2 += diff * diff;
            }
            dist.emplace_back(d2, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        neighbours[i].reserve(k);
        for (std::size_t t = 0; t < k; ++t) neighbours[i].push_back(dist[t].second);
    }

    Rng rng(seed);
    const std::size_t per_window = amount_percent / 100;
    std::vector<Window> synthetic;
    synthetic.reserve(minority.size() * per_window);
    for (std::size_t i = 0; i < minority.size(); ++i) {
        for (std::size_t s = 0; s < per_window; ++s) {
            const std::size_t nn = neighbours[i][rng.index(k)];
            const double lambda = rng.uniform();
            Window w;
            w.record_id = minority[i].record_id;
            w.index = minority[i].index;
            w.start = minority[i].start;
            w.label = Label::case_;
            w.synthetic = true;
            w.samples.resize(dim);
            for (std::size_t t = 0; t < dim; ++t) {
                const double x = minority[i].samples[t];
                w.samples[t] = x + lambda * (minority[nn].samples[t] - x);
            }
            synthetic.push_back(std::move(w));
        }
    }
    return synthetic;
}

std::vector<Window> undersample_majority(const std::vector<Window>& majority,
                                         std::size_t target_size, std::uint64_t seed) {
    if (target_size > majority.size()) {
        throw config_error("undersample_majority: target " + std::to_string(target_size) +
                           " exceeds majority size " + std::to_string(majority.size()));
    }
    Rng rng(seed);
    const auto picks = sample_without_replacement(majority.size(), target_size, rng);
    std::vector<Window> out;
    out.reserve(picks.size());
    for (std::size_t i : picks) out.push_back(majority[i]);
    return out;
}

namespace {

std::string format_sample(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        if (std::strtod(probe, nullptr) == v) return probe;
    }
    return "0";
}

}  // namespace

void write_windows_csv(std::ostream& out, const std::vector<Window>& windows) {
    out << "record_id,index,label";
    if (!windows.empty()) {
        for (std::size_t i = 0; i < windows.front().samples.size(); ++i) {
            out << ",s" << i;
        }
    }
    out << '\n';
    for (const auto& w : windows) {
        out << w.record_id << ',' << w.index << ',' << to_string(w.label);
        for (double v : w.samples) out << ',' << format_sample(v);
        out << '\n';
    }
}

std::vector<Window> read_windows_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw data_error("read_windows_csv: empty input");
    }
    if (line.rfind("record_id,index,label", 0) != 0) {
        throw data_error("read_windows_csv: malformed header");
    }
    std::vector<Window> windows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        std::stringstream ss(line);
        std::string cell;
        Window w;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col == 0) {
                w.record_id = cell;
            } else if (col == 1) {
                w.index = static_cast<std::size_t>(std::strtoull(cell.c_str(), nullptr, 10));
            } else if (col == 2) {
                w.label = label_from_string(cell);
            } else {
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (end == cell.c_str()) {
                    throw data_error("read_windows_csv: bad sample at row " +
                                     std::to_string(row));
                }
                w.samples.push_back(v);
            }
            ++col;
        }
        if (w.samples.empty()) {
            throw data_error("read_windows_csv: row " + std::to_string(row) + " has no samples");
        }
        w.start = w.index * w.samples.size();
        windows.push_back(std::move(w));
    }
    return windows;
}

}  // namespace ctg
