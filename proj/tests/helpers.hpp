#pragma once

// Shared builders and independent oracles for the test suites. Everything
// here is test-only and must stay independent of the code paths it checks.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ctg/dataio.hpp"
#include "ctg/nn.hpp"
#include "ctg/rng.hpp"
#include "ctg/segmentation.hpp"
#include "ctg/tensor.hpp"

namespace ctg::testing {

inline Record make_record(std::string id, std::vector<double> fhr, Label label) {
    Record r;
    r.id = std::move(id);
    r.fhr = std::move(fhr);
    r.label = label;
    r.meta.delivery = label == Label::case_ ? Delivery::caesarean : Delivery::vaginal;
    r.meta.ph = label == Label::case_ ? 7.1 : 7.3;
    return r;
}

inline Window make_window(std::string record_id, std::vector<double> samples, Label label,
                          std::size_t index = 0) {
    Window w;
    w.record_id = std::move(record_id);
    w.index = index;
    w.start = index * samples.size();
    w.samples = std::move(samples);
    w.label = label;
    return w;
}

/// Separable synthetic corpus: cases ride a +10 bpm offset with a sinusoid,
/// controls are flat noise around 140 bpm. FLDA separates it easily, which
/// is the capacity oracle for the network training checks.
inline std::vector<Window> separable_corpus(std::size_t per_class, std::size_t len,
                                            std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Window> windows;
    windows.reserve(2 * per_class);
    for (std::size_t i = 0; i < per_class; ++i) {
        const double freq = 1.0 + 2.0 * rng.uniform();
        const double phase = 2.0 * 3.14159265358979323846 * rng.uniform();
        std::vector<double> samples(len);
        for (std::size_t t = 0; t < len; ++t) {
            samples[t] = 150.0 +
                         10.0 * std::sin(2.0 * 3.14159265358979323846 * freq *
                                             static_cast<double>(t) /
                                             static_cast<double>(len) +
                                         phase) +
                         3.0 * rng.normal();
        }
        windows.push_back(make_window("case_" + std::to_string(i), std::move(samples),
                                      Label::case_));
    }
    for (std::size_t i = 0; i < per_class; ++i) {
        std::vector<double> samples(len);
        for (std::size_t t = 0; t < len; ++t) {
            samples[t] = 140.0 + 3.0 * rng.normal();
        }
        windows.push_back(make_window("control_" + std::to_string(i), std::move(samples),
                                      Label::control));
    }
    return windows;
}

/// Naive sliding-sum convolution oracle with the canonical accumulation
/// order (bias first, channels outer, taps inner).
inline Tensor conv_oracle(const Tensor& input, const Tensor& kernels,
                          const std::vector<double>& biases) {
    const std::size_t channels = input.extent(0);
    const std::size_t len = input.extent(1);
    const std::size_t filters = kernels.extent(0);
    const std::size_t kernel = kernels.extent(2);
    Tensor out({filters, len - kernel + 1});
    for (std::size_t j = 0; j < filters; ++j) {
        for (std::size_t t = 0; t + kernel <= len; ++t) {
            double acc = biases[j];
            for (std::size_t i = 0; i < channels; ++i) {
                for (std::size_t tau = 0; tau < kernel; ++tau) {
                    acc += input.at(i, t + tau) * kernels.at(j, i, tau);
                }
            }
            out.at(j, t) = acc;
        }
    }
    return out;
}

/// Brute-force pairwise AUC: P(case > control) + 0.5 P(tie).
inline double brute_force_auc(const std::vector<double>& scores,
                              const std::vector<Label>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != Label::case_) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != Label::control) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// Central finite differences over every parameter of the network.
/// Returns the largest relative error against the backprop gradients,
/// treating |a-b| < abs_floor as matching (pure roundoff on true zeros).
inline double max_gradient_error(Network& net, const Tensor& input, double target,
                                 double h = 1e-6, double abs_floor = 1e-9) {
    net.zero_grad();
    net.forward(input, false, nullptr);
    net.backward(target);

    auto params = net.parameters();
    auto grads = net.gradients();
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (std::size_t i = 0; i < params[k]->size(); ++i) {
            const double saved = (*params[k])[i];
            (*params[k])[i] = saved + h;
            const double up = bce_loss(net.forward(input, false, nullptr), target);
            (*params[k])[i] = saved - h;
            const double down = bce_loss(net.forward(input, false, nullptr), target);
            (*params[k])[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double bp = (*grads[k])[i];
            const double diff = std::abs(fd - bp);
            if (diff < abs_floor) continue;
            worst = std::max(worst, diff / std::max({std::abs(fd), std::abs(bp), 1e-12}));
        }
    }
    return worst;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("ctg_test_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    static std::size_t& counter() {
        static std::size_t c = 0;
        return c;
    }
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

/// Synthetic on-disk dataset with a deterministic separable signal per
/// record; cases and controls counts can differ.
inline std::filesystem::path write_synthetic_dataset(const TempDir& dir, std::size_t n_cases,
                                                     std::size_t n_controls,
                                                     std::size_t record_len,
                                                     std::uint64_t seed) {
    Rng rng(seed);
    std::string manifest = "id,path,delivery,ph\n";
    auto emit = [&](const std::string& id, bool is_case) {
        std::string csv = "fhr\n";
        const double base = is_case ? 150.0 : 140.0;
        for (std::size_t t = 0; t < record_len; ++t) {
            const double wobble = is_case
                                      ? 8.0 * std::sin(static_cast<double>(t) / 17.0)
                                      : 0.0;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", base + wobble + 2.0 * rng.normal());
            csv += buf;
            csv += '\n';
        }
        write_file(dir.path() / (id + ".csv"), csv);
        manifest += id + "," + id + ".csv," + (is_case ? "caesarean,7.1" : "vaginal,7.3") +
                    "\n";
    };
    for (std::size_t i = 0; i < n_cases; ++i) emit("case" + std::to_string(i), true);
    for (std::size_t i = 0; i < n_controls; ++i) emit("ctrl" + std::to_string(i), false);
    const auto manifest_path = dir.path() / "manifest.csv";
    write_file(manifest_path, manifest);
    return manifest_path;
}

inline std::filesystem::path write_synthetic_dataset(const TempDir& dir,
                                                     std::size_t per_class,
                                                     std::size_t record_len,
                                                     std::uint64_t seed) {
    return write_synthetic_dataset(dir, per_class, per_class, record_len, seed);
}

}  // namespace ctg::testing
