#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctg/dataio.hpp"
#include "ctg/metrics.hpp"
#include "ctg/models.hpp"
#include "ctg/preprocess.hpp"
#include "ctg/segmentation.hpp"

namespace ctg {

enum class Balancing { window_undersample, smote_plus_undersample };

std::string to_string(Balancing b);
Balancing balancing_from_string(const std::string& s);

/// One flat key=value file ('#' comments) fully determines a run; all seeds
/// are explicit.
struct ExperimentConfig {
    std::filesystem::path manifest;
    std::filesystem::path out_dir;
    std::vector<std::size_t> windows = {100, 200, 300, 400, 500};
    std::vector<Family> families = {Family::cnn1d, Family::mlp_baseline, Family::svm_rbf,
                                    Family::random_forest, Family::flda};
    SplitRatios ratios{0.8, 0.2};
    double val_fraction = 0.1;
    Balancing balancing = Balancing::window_undersample;
    Band band{50.0, 210.0};
    std::uint64_t seed_split = 0;
    std::uint64_t seed_balance = 0;
    std::uint64_t seed_init = 0;
    std::uint64_t seed_train = 0;
    bool seeds_set = false;
    std::size_t smote_k = 5;
    std::size_t smote_percent = 600;
    std::size_t workers = 1;
    std::string positive_class = "case";
    std::optional<std::size_t> epochs_override;
    std::optional<std::size_t> batch_override;

    static ExperimentConfig parse(std::istream& in, const std::filesystem::path& base_dir);
    static ExperimentConfig load(const std::filesystem::path& path);
    void validate() const;
};

/// Repaired dataset plus the per-record preprocessing report rows.
struct PreparedDataset {
    std::vector<Record> records;
    DatasetSummary summary;
    std::vector<std::string> report_rows;  // CSV body of preprocess_report.csv
};

PreparedDataset prepare_dataset(const ExperimentConfig& cfg);

/// Everything one window size needs: balanced train set, balanced test set
/// and the full (unbalanced) test windows.
struct WindowData {
    std::size_t window = 0;
    BalancedSet train;
    BalancedSet test;
    std::vector<Window> test_all;
};

WindowData prepare_window_data(const ExperimentConfig& cfg, const PreparedDataset& data,
                               const SplitPlan& plan, std::size_t window);

ModelSpec preset_for(Family family, std::size_t window);

/// Apply config-level overrides (epochs, batch, val fraction) to a preset.
ModelSpec apply_overrides(const ExperimentConfig& cfg, ModelSpec spec);

std::uint64_t cell_seed(std::uint64_t base, Family family, std::size_t window);

/// Run every (window, family) cell: ingest, preprocess, split, segment,
/// balance, train, evaluate; writes metrics.csv, metrics_unbalanced.csv,
/// train_summary.csv, per-model train logs and models, per-family ROC
/// csv/svg, a seeds manifest, and a failures report. A failing cell is
/// recorded and the rest proceed.
void run_experiment(const ExperimentConfig& cfg);

/// Merge metrics.csv files into one ranking by test AUC (ties break on
/// sensitivity, then family and window for a total order); the best cell of
/// each family is marked.
void compare_report(const std::vector<std::filesystem::path>& metric_csvs, std::ostream& out);

/// Score a trained model over windows.
ScoredSet score_windows(const TrainedModel& model, const std::vector<Window>& windows);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const std::string& family, std::size_t window,
                       const EvalReport& rep);
void write_train_log(std::ostream& out, const TrainReport& report);
void write_roc_rows(std::ostream& out, std::size_t window, const RocCurve& curve);

}  // namespace ctg
