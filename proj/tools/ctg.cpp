// ctg — windowed CTG classification toolkit.
//
// Subcommands: ingest, preprocess, segment, train, evaluate, run, compare,
// figo. Exit codes: 0 ok, 1 config error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctg/dataio.hpp"
#include "ctg/errors.hpp"
#include "ctg/experiment.hpp"
#include "ctg/figo.hpp"
#include "ctg/metrics.hpp"
#include "ctg/models.hpp"
#include "ctg/preprocess.hpp"
#include "ctg/segmentation.hpp"

namespace fs = std::filesystem;
using namespace ctg;

namespace {

struct SeedOverrides {
    std::optional<std::uint64_t> split, balance, init, train;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--seed-split", split, "Override seed_split");
        cmd->add_option("--seed-balance", balance, "Override seed_balance");
        cmd->add_option("--seed-init", init, "Override seed_init");
        cmd->add_option("--seed-train", train, "Override seed_train");
    }

    void apply(ExperimentConfig& cfg) const {
        if (split) cfg.seed_split = *split;
        if (balance) cfg.seed_balance = *balance;
        if (init) cfg.seed_init = *init;
        if (train) cfg.seed_train = *train;
        if (split || balance || init || train) cfg.seeds_set = true;
    }
};

std::ofstream must_open(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    return out;
}

Dataset load_from_manifest(const fs::path& manifest) {
    return load_dataset(load_manifest_file(manifest), manifest.parent_path());
}

int cmd_ingest(const fs::path& manifest) {
    const Dataset ds = load_from_manifest(manifest);
    std::printf("records: %zu\ncases: %zu\ncontrols: %zu\n", ds.summary.total,
                ds.summary.cases, ds.summary.controls);
    return 0;
}

int cmd_preprocess(const fs::path& manifest, const fs::path& out_dir, Band band) {
    const Dataset ds = load_from_manifest(manifest);
    fs::create_directories(out_dir);
    auto report = must_open(out_dir / "preprocess_report.csv");
    report << "id,n_samples,n_gaps,repaired_samples,quality,flag_low_quality,"
              "long_spans_over_60s\n";
    const auto long_span = static_cast<std::size_t>(60.0 * kSampleHz);
    for (const auto& rec : ds.records) {
        const auto gaps = detect_gaps(rec.fhr, band);
        const CleanSignal clean = interpolate_gaps(rec.fhr, gaps);
        const auto fractions = quality_fraction(rec.fhr, 30.0, band);
        double min_q = 1.0;
        for (double f : fractions) min_q = std::min(min_q, f);
        std::size_t repaired = 0;
        std::size_t long_spans = 0;
        for (const auto& g : gaps) {
            repaired += g.length();
            if (g.length() > long_span) ++long_spans;
        }
        Record out_rec = rec;
        out_rec.fhr = clean.samples;
        auto out = must_open(out_dir / (rec.id + ".csv"));
        write_record_csv(out, out_rec);
        char qbuf[32];
        std::snprintf(qbuf, sizeof(qbuf), "%.6f", clean.quality);
        report << rec.id << ',' << rec.fhr.size() << ',' << gaps.size() << ',' << repaired
               << ',' << qbuf << ',' << (min_q <= 0.5 ? 1 : 0) << ',' << long_spans << '\n';
    }
    std::printf("repaired %zu records into %s\n", ds.summary.total, out_dir.c_str());
    return 0;
}

int cmd_segment(const fs::path& manifest, std::size_t window, const fs::path& out_file,
                Band band, const std::string& side, double train_ratio, bool balance,
                std::uint64_t seed_split, std::uint64_t seed_balance) {
    const Dataset ds = load_from_manifest(manifest);

    std::vector<Record> repaired;
    repaired.reserve(ds.records.size());
    for (const auto& rec : ds.records) {
        Record r = rec;
        r.fhr = interpolate_gaps(rec.fhr, detect_gaps(rec.fhr, band)).samples;
        repaired.push_back(std::move(r));
    }

    std::vector<Window> cases;
    std::vector<Window> controls;
    std::optional<SplitPlan> plan;
    if (side != "all") {
        plan = split_records(repaired, {train_ratio, 1.0 - train_ratio}, seed_split);
    }
    for (const auto& rec : repaired) {
        if (plan) {
            const auto& wanted = side == "train" ? plan->train_records : plan->test_records;
            if (wanted.count(rec.id) == 0) continue;
        }
        for (auto& w : segment(rec, window)) {
            (rec.label == Label::case_ ? cases : controls).push_back(std::move(w));
        }
    }

    std::vector<Window> out_windows;
    if (balance) {
        BalancedSet bal = balance_undersample(std::move(cases), std::move(controls),
                                              seed_balance);
        out_windows.reserve(bal.total());
        for (auto& w : bal.case_windows) out_windows.push_back(std::move(w));
        for (auto& w : bal.control_windows) out_windows.push_back(std::move(w));
    } else {
        out_windows.reserve(cases.size() + controls.size());
        for (auto& w : cases) out_windows.push_back(std::move(w));
        for (auto& w : controls) out_windows.push_back(std::move(w));
    }

    auto out = must_open(out_file);
    write_windows_csv(out, out_windows);
    std::printf("wrote %zu windows to %s\n", out_windows.size(), out_file.c_str());
    return 0;
}

int cmd_train(const fs::path& config_path, const std::string& family_name_str,
              std::size_t window, const SeedOverrides& seeds,
              const std::optional<fs::path>& out_override) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    seeds.apply(cfg);
    if (out_override) cfg.out_dir = *out_override;
    cfg.windows = {window};
    cfg.families = {family_from_name(family_name_str)};
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    const Family family = cfg.families.front();
    const PreparedDataset data = prepare_dataset(cfg);
    const SplitPlan plan = split_records(data.records, cfg.ratios, cfg.seed_split);
    const WindowData wd = prepare_window_data(cfg, data, plan, window);

    ModelSpec spec = apply_overrides(cfg, preset_for(family, window));
    std::vector<Window> train_windows;
    train_windows.reserve(wd.train.total());
    for (const auto& w : wd.train.case_windows) train_windows.push_back(w);
    for (const auto& w : wd.train.control_windows) train_windows.push_back(w);

    auto [model, report] =
        train_model(spec, train_windows, cell_seed(cfg.seed_init, family, window),
                    cell_seed(cfg.seed_train, family, window));

    const std::string stem = family_name(family) + "_w" + std::to_string(window);
    model.save(cfg.out_dir / ("model_" + stem + ".json"));
    if (!report.epochs.empty()) {
        auto log = must_open(cfg.out_dir / ("train_log_" + stem + ".csv"));
        write_train_log(log, report);
    }
    std::printf("trained %s on %zu windows; model saved under %s\n", stem.c_str(),
                train_windows.size(), cfg.out_dir.c_str());
    return 0;
}

int cmd_evaluate(const fs::path& model_path, const fs::path& windows_path,
                 const fs::path& out_dir, double threshold,
                 const std::string& positive_class) {
    const TrainedModel model = TrainedModel::load(model_path);
    std::ifstream win_in(windows_path);
    if (!win_in) throw data_error("cannot open '" + windows_path.string() + "'");
    const auto windows = read_windows_csv(win_in);

    ScoredSet scored = score_windows(model, windows);
    if (positive_class == "control") scored = flip_positive(scored);
    const EvalReport rep = evaluate(scored, threshold);
    const RocCurve roc = roc_curve(scored);

    fs::create_directories(out_dir);
    {
        auto out = must_open(out_dir / "metrics.csv");
        write_metrics_header(out);
        write_metrics_row(out, family_name(model.spec.family), model.spec.window, rep);
    }
    {
        auto out = must_open(out_dir / "roc.csv");
        out << "window,fpr,tpr,threshold\n";
        write_roc_rows(out, model.spec.window, roc);
    }
    {
        auto out = must_open(out_dir / "roc.svg");
        out << roc_svg({{family_name(model.spec.family) + " W=" +
                             std::to_string(model.spec.window),
                         roc}});
    }
    std::printf("auc %.4f (%.4f, %.4f)  sens %.4f  spec %.4f  logloss %.4f\n",
                rep.auc.value, rep.auc.lo, rep.auc.hi, rep.sensitivity.value,
                rep.specificity.value, rep.logloss);
    return 0;
}

int cmd_figo(const fs::path& manifest, const fs::path& out_file, Band band,
             double deviation_bpm, double min_duration_s) {
    const Dataset ds = load_from_manifest(manifest);
    auto out = must_open(out_file);
    out << "id,vbl,rbl,n_accel,n_decel\n";
    FigoConfig fig;
    fig.deviation_bpm = deviation_bpm;
    fig.min_duration_s = min_duration_s;
    for (const auto& rec : ds.records) {
        const auto repaired = interpolate_gaps(rec.fhr, detect_gaps(rec.fhr, band));
        const FigoSummary s = figo_summary(repaired.samples, fig);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f", s.vbl, s.rbl);
        out << rec.id << ',' << buf << ',' << s.accelerations << ',' << s.decelerations
            << '\n';
    }
    std::printf("figo summaries for %zu records written to %s\n", ds.summary.total,
                out_file.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Windowed CTG classification toolkit"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load a manifest and report label counts");
    fs::path ingest_manifest;
    ingest->add_option("--manifest", ingest_manifest, "Manifest CSV")->required();

    // preprocess
    auto* preprocess = app.add_subcommand("preprocess", "Repair gaps and export clean records");
    fs::path pre_manifest, pre_out;
    Band pre_band;
    preprocess->add_option("--manifest", pre_manifest, "Manifest CSV")->required();
    preprocess->add_option("--out", pre_out, "Output directory")->required();
    preprocess->add_option("--band-low", pre_band.low, "Validity band low (bpm)");
    preprocess->add_option("--band-high", pre_band.high, "Validity band high (bpm)");

    // segment
    auto* seg = app.add_subcommand("segment", "Window records and export a windows CSV");
    fs::path seg_manifest, seg_out;
    std::size_t seg_window = 200;
    Band seg_band;
    std::string seg_side = "all";
    double seg_train_ratio = 0.8;
    bool seg_balance = false;
    std::uint64_t seg_seed_split = 0, seg_seed_balance = 0;
    seg->add_option("--manifest", seg_manifest, "Manifest CSV")->required();
    seg->add_option("--window", seg_window, "Window size in samples")->required();
    seg->add_option("--out", seg_out, "Output CSV file")->required();
    seg->add_option("--band-low", seg_band.low, "Validity band low (bpm)");
    seg->add_option("--band-high", seg_band.high, "Validity band high (bpm)");
    seg->add_option("--side", seg_side, "all, train or test")
        ->check(CLI::IsMember({"all", "train", "test"}));
    seg->add_option("--train-ratio", seg_train_ratio, "Train fraction for --side");
    seg->add_flag("--balance", seg_balance, "Undersample controls to the case count");
    seg->add_option("--seed-split", seg_seed_split, "Record split seed");
    seg->add_option("--seed-balance", seg_seed_balance, "Balancing seed");

    // train
    auto* train = app.add_subcommand("train", "Train one model from a config");
    fs::path train_config;
    std::string train_family = "cnn1d";
    std::size_t train_window = 200;
    std::optional<fs::path> train_out;
    SeedOverrides train_seeds;
    train->add_option("--config", train_config, "Experiment config file")->required();
    train->add_option("--family", train_family, "Model family")->required();
    train->add_option("--window", train_window, "Window size")->required();
    train->add_option("--out", train_out, "Override output directory");
    train_seeds.add_flags(train);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score a saved model on a windows CSV");
    fs::path eval_model, eval_windows, eval_out = ".";
    double eval_threshold = 0.5;
    std::string eval_positive = "case";
    eval->add_option("--model", eval_model, "model_*.json")->required();
    eval->add_option("--windows", eval_windows, "Windows CSV (see segment)")->required();
    eval->add_option("--out", eval_out, "Output directory");
    eval->add_option("--threshold", eval_threshold, "Decision threshold");
    eval->add_option("--positive-class", eval_positive, "case or control")
        ->check(CLI::IsMember({"case", "control"}));

    // run
    auto* run = app.add_subcommand("run", "Run the full experiment grid from a config");
    fs::path run_config;
    std::optional<fs::path> run_out;
    std::optional<std::string> run_positive;
    SeedOverrides run_seeds;
    run->add_option("--config", run_config, "Experiment config file")->required();
    run->add_option("--out", run_out, "Override output directory");
    run->add_option("--positive-class", run_positive, "case or control");
    run_seeds.add_flags(run);

    // compare
    auto* compare = app.add_subcommand("compare", "Rank metrics.csv files by test AUC");
    std::vector<fs::path> compare_inputs;
    fs::path compare_out;
    compare->add_option("inputs", compare_inputs, "metrics.csv files")->required();
    compare->add_option("--out", compare_out, "Output CSV (stdout when omitted)");

    // figo
    auto* figo_cmd = app.add_subcommand("figo", "Per-record FIGO-style baselines and events");
    fs::path figo_manifest, figo_out;
    Band figo_band;
    double figo_dev = 10.0, figo_dur = 10.0;
    figo_cmd->add_option("--manifest", figo_manifest, "Manifest CSV")->required();
    figo_cmd->add_option("--out", figo_out, "Output CSV")->required();
    figo_cmd->add_option("--band-low", figo_band.low, "Validity band low (bpm)");
    figo_cmd->add_option("--band-high", figo_band.high, "Validity band high (bpm)");
    figo_cmd->add_option("--deviation-bpm", figo_dev, "Event deviation threshold (bpm)");
    figo_cmd->add_option("--min-duration-s", figo_dur, "Event minimum duration (s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_manifest);
        if (*preprocess) return cmd_preprocess(pre_manifest, pre_out, pre_band);
        if (*seg) {
            return cmd_segment(seg_manifest, seg_window, seg_out, seg_band, seg_side,
                               seg_train_ratio, seg_balance, seg_seed_split,
                               seg_seed_balance);
        }
        if (*train) {
            return cmd_train(train_config, train_family, train_window, train_seeds,
                             train_out);
        }
        if (*eval) {
            return cmd_evaluate(eval_model, eval_windows, eval_out, eval_threshold,
                                eval_positive);
        }
        if (*run) {
            ExperimentConfig cfg = ExperimentConfig::load(run_config);
            run_seeds.apply(cfg);
            if (run_out) cfg.out_dir = *run_out;
            if (run_positive) cfg.positive_class = *run_positive;
            run_experiment(cfg);
            std::printf("experiment artifacts written to %s\n", cfg.out_dir.c_str());
            return 0;
        }
        if (*compare) {
            if (compare_out.empty()) {
                compare_report(compare_inputs, std::cout);
            } else {
                auto out = must_open(compare_out);
                compare_report(compare_inputs, out);
            }
            return 0;
        }
        if (*figo_cmd) {
            return cmd_figo(figo_manifest, figo_out, figo_band, figo_dev, figo_dur);
        }
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
