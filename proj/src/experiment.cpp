#include "ctg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ctg/errors.hpp"
#include "ctg/rng.hpp"

namespace ctg {

namespace {

constexpr const char* kMetricsColumns =
    "family,window,sens,sens_lo,sens_hi,spec,spec_lo,spec_hi,auc,auc_lo,auc_hi,"
    "logloss,threshold,youden_threshold,youden_sens,youden_spec,n_case,n_control,"
    "tp,fp,tn,fn";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !items.empty()) items.push_back(trim(cur));
    return items;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' needs an unsigned integer, got '" +
                           value + "'");
    }
}

double parse_f64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' needs a number, got '" + value + "'");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("run_experiment: cannot write '" + path.string() + "'");
    }
    return out;
}

}  // namespace

std::string to_string(Balancing b) {
    return b == Balancing::window_undersample ? "window_undersample"
                                              : "smote_plus_undersample";
}

Balancing balancing_from_string(const std::string& s) {
    if (s == "window_undersample") return Balancing::window_undersample;
    if (s == "smote_plus_undersample") return Balancing::smote_plus_undersample;
    throw config_error("config: unknown balancing '" + s + "'");
}

ExperimentConfig ExperimentConfig::parse(std::istream& in,
                                         const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    bool saw_split = false;
    bool saw_balance = false;
    bool saw_init = false;
    bool saw_train = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config: line " + std::to_string(line_no) +
                               " is not key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "manifest") {
            std::filesystem::path p(value);
            cfg.manifest = p.is_relative() ? base_dir / p : p;
        } else if (key == "out") {
            std::filesystem::path p(value);
            cfg.out_dir = p.is_relative() ? base_dir / p : p;
        } else if (key == "windows") {
            cfg.windows.clear();
            for (const auto& item : split_list(value)) {
                cfg.windows.push_back(static_cast<std::size_t>(parse_u64(key, item)));
            }
            if (cfg.windows.empty()) {
                throw config_error("config: 'windows' needs at least one entry");
            }
        } else if (key == "families") {
            cfg.families.clear();
            for (const auto& item : split_list(value)) {
                cfg.families.push_back(family_from_name(item));
            }
            if (cfg.families.empty()) {
                throw config_error("config: 'families' needs at least one entry");
            }
        } else if (key == "train_ratio") {
            cfg.ratios.train = parse_f64(key, value);
        } else if (key == "test_ratio") {
            cfg.ratios.test = parse_f64(key, value);
        } else if (key == "val_fraction") {
            cfg.val_fraction = parse_f64(key, value);
        } else if (key == "balancing") {
            cfg.balancing = balancing_from_string(value);
        } else if (key == "band_low") {
            cfg.band.low = parse_f64(key, value);
        } else if (key == "band_high") {
            cfg.band.high = parse_f64(key, value);
        } else if (key == "seed_split") {
            cfg.seed_split = parse_u64(key, value);
            saw_split = true;
        } else if (key == "seed_balance") {
            cfg.seed_balance = parse_u64(key, value);
            saw_balance = true;
        } else if (key == "seed_init") {
            cfg.seed_init = parse_u64(key, value);
            saw_init = true;
        } else if (key == "seed_train") {
            cfg.seed_train = parse_u64(key, value);
            saw_train = true;
        } else if (key == "smote_k") {
            cfg.smote_k = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "smote_percent") {
            cfg.smote_percent = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "workers") {
            cfg.workers = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "positive_class") {
            cfg.positive_class = value;
        } else if (key == "epochs") {
            cfg.epochs_override = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "batch") {
            cfg.batch_override = static_cast<std::size_t>(parse_u64(key, value));
        } else {
            throw config_error("config: unknown key '" + key + "' at line " +
                               std::to_string(line_no));
        }
    }
    cfg.seeds_set = saw_split && saw_balance && saw_init && saw_train;
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("config: cannot open '" + path.string() + "'");
    }
    return parse(in, path.parent_path());
}

void ExperimentConfig::validate() const {
    if (manifest.empty()) throw config_error("config: 'manifest' is required");
    if (out_dir.empty()) throw config_error("config: 'out' is required");
    if (!seeds_set) {
        throw config_error(
            "config: seed_split, seed_balance, seed_init and seed_train are all required");
    }
    if (windows.empty()) throw config_error("config: at least one window size is required");
    if (families.empty()) throw config_error("config: at least one family is required");
    for (std::size_t w : windows) {
        if (w < 2) throw config_error("config: window sizes must be at least 2");
    }
    if (std::abs(ratios.train + ratios.test - 1.0) > 1e-9) {
        throw config_error("config: train_ratio + test_ratio must equal 1");
    }
    if (val_fraction <= 0.0 || val_fraction >= 1.0) {
        throw config_error("config: val_fraction must be in (0,1)");
    }
    if (band.low >= band.high) {
        throw config_error("config: band_low must be below band_high");
    }
    if (positive_class != "case" && positive_class != "control") {
        throw config_error("config: positive_class must be 'case' or 'control'");
    }
    if (workers == 0) throw config_error("config: workers must be at least 1");
}

PreparedDataset prepare_dataset(const ExperimentConfig& cfg) {
    const DatasetManifest manifest = load_manifest_file(cfg.manifest);
    Dataset ds = load_dataset(manifest, cfg.manifest.parent_path());

    PreparedDataset prepared;
    prepared.summary = ds.summary;
    prepared.records.reserve(ds.records.size());

    const std::size_t long_span_samples = static_cast<std::size_t>(60.0 * kSampleHz);
    for (auto& rec : ds.records) {
        const auto gaps = detect_gaps(rec.fhr, cfg.band);
        CleanSignal clean = interpolate_gaps(rec.fhr, gaps);
        const auto fractions = quality_fraction(rec.fhr, 30.0, cfg.band);
        double min_quality = 1.0;
        for (double f : fractions) min_quality = std::min(min_quality, f);
        std::size_t repaired = 0;
        std::size_t long_spans = 0;
        for (const auto& g : gaps) {
            repaired += g.length();
            if (g.length() > long_span_samples) ++long_spans;
        }
        std::ostringstream row;
        row << rec.id << ',' << rec.fhr.size() << ',' << gaps.size() << ',' << repaired << ','
            << fmt(clean.quality) << ',' << fmt(min_quality) << ','
            << (min_quality <= 0.5 ? 1 : 0) << ',' << long_spans;
        prepared.report_rows.push_back(row.str());

        rec.fhr = std::move(clean.samples);
        prepared.records.push_back(std::move(rec));
    }
    return prepared;
}

WindowData prepare_window_data(const ExperimentConfig& cfg, const PreparedDataset& data,
                               const SplitPlan& plan, std::size_t window) {
    WindowData wd;
    wd.window = window;

    std::vector<Window> train_cases;
    std::vector<Window> train_controls;
    std::vector<Window> test_cases;
    std::vector<Window> test_controls;
    for (const auto& rec : data.records) {
        const bool in_train = plan.train_records.count(rec.id) > 0;
        auto windows = segment(rec, window);
        for (auto& w : windows) {
            auto& pool = rec.label == Label::case_ ? (in_train ? train_cases : test_cases)
                                                   : (in_train ? train_controls : test_controls);
            pool.push_back(std::move(w));
        }
    }

    auto require_windows = [&](const std::vector<Window>& pool, const char* what) {
        if (pool.empty()) {
            throw data_error("prepare_window_data: no " + std::string(what) +
                             " windows at window size " + std::to_string(window));
        }
    };
    require_windows(train_cases, "train-side case");
    require_windows(train_controls, "train-side control");
    require_windows(test_cases, "test-side case");
    require_windows(test_controls, "test-side control");

    const std::uint64_t train_seed = Rng(cfg.seed_balance).spawn(window).seed();
    const std::uint64_t test_seed = Rng(cfg.seed_balance).spawn(window + 1000003).seed();

    if (cfg.balancing == Balancing::smote_plus_undersample) {
        auto synthetic =
            smote(train_cases, cfg.smote_k, cfg.smote_percent,
                  Rng(cfg.seed_balance).spawn(window + 2000003).seed());
        for (auto& w : synthetic) train_cases.push_back(std::move(w));
        wd.train.seed = train_seed;
        wd.train.case_windows = std::move(train_cases);
        wd.train.control_windows =
            undersample_majority(train_controls, wd.train.case_windows.size(), train_seed);
    } else {
        wd.train = balance_undersample(std::move(train_cases), std::move(train_controls),
                                       train_seed);
    }

    wd.test_all.reserve(test_cases.size() + test_controls.size());
    for (const auto& w : test_cases) wd.test_all.push_back(w);
    for (const auto& w : test_controls) wd.test_all.push_back(w);
    wd.test = balance_undersample(std::move(test_cases), std::move(test_controls), test_seed);
    return wd;
}

ModelSpec preset_for(Family family, std::size_t window) {
    switch (family) {
        case Family::cnn1d: return preset_cnn1d(window);
        case Family::mlp_baseline: return preset_mlp(window);
        default: return preset_baseline(family, window);
    }
}

ModelSpec apply_overrides(const ExperimentConfig& cfg, ModelSpec spec) {
    if (spec.family == Family::cnn1d || spec.family == Family::mlp_baseline) {
        if (cfg.epochs_override) spec.set("epochs", static_cast<double>(*cfg.epochs_override));
        if (cfg.batch_override) spec.set("batch", static_cast<double>(*cfg.batch_override));
        spec.set("val_fraction", cfg.val_fraction);
    }
    return spec;
}

std::uint64_t cell_seed(std::uint64_t base, Family family, std::size_t window) {
    return splitmix64(base ^ splitmix64(window * 8 + static_cast<std::uint64_t>(family)));
}

ScoredSet score_windows(const TrainedModel& model, const std::vector<Window>& windows) {
    ScoredSet scored;
    scored.scores.reserve(windows.size());
    scored.labels.reserve(windows.size());
    for (const auto& w : windows) {
        scored.scores.push_back(model.predict(w.samples));
        scored.labels.push_back(w.label);
    }
    return scored;
}

void write_metrics_header(std::ostream& out) { out << kMetricsColumns << '\n'; }

void write_metrics_row(std::ostream& out, const std::string& family, std::size_t window,
                       const EvalReport& rep) {
    out << family << ',' << window << ',' << fmt(rep.sensitivity.value) << ','
        << fmt(rep.sensitivity.lo) << ',' << fmt(rep.sensitivity.hi) << ','
        << fmt(rep.specificity.value) << ',' << fmt(rep.specificity.lo) << ','
        << fmt(rep.specificity.hi) << ',' << fmt(rep.auc.value) << ',' << fmt(rep.auc.lo)
        << ',' << fmt(rep.auc.hi) << ',' << fmt(rep.logloss) << ',' << fmt(rep.threshold)
        << ',' << fmt(rep.youden_threshold) << ',' << fmt(rep.youden_sensitivity) << ','
        << fmt(rep.youden_specificity) << ',' << rep.n_case << ',' << rep.n_control << ','
        << rep.counts.tp << ',' << rep.counts.fp << ',' << rep.counts.tn << ','
        << rep.counts.fn << '\n';
}

void write_train_log(std::ostream& out, const TrainReport& report) {
    out << "epoch,train_logloss,train_auc,val_logloss,val_auc\n";
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        const auto& s = report.epochs[e];
        out << (e + 1) << ',' << fmt(s.train_logloss) << ',' << fmt(s.train_auc) << ','
            << fmt(s.val_logloss) << ',' << fmt(s.val_auc) << '\n';
    }
}

void write_roc_rows(std::ostream& out, std::size_t window, const RocCurve& curve) {
    for (const auto& pt : curve.points) {
        out << window << ',' << fmt(pt.fpr) << ',' << fmt(pt.tpr) << ','
            << (std::isinf(pt.threshold) ? std::string("inf") : fmt(pt.threshold)) << '\n';
    }
}

namespace {

struct CellResult {
    bool ok = false;
    bool attempted = false;
    std::string stage;
    std::string message;
    EvalReport balanced;
    EvalReport unbalanced;
    RocCurve roc;
    TrainReport train_report;
    bool has_train_report = false;
};

ScoredSet oriented(const ExperimentConfig& cfg, const ScoredSet& scored) {
    return cfg.positive_class == "control" ? flip_positive(scored) : scored;
}

void run_cell(const ExperimentConfig& cfg, const WindowData& wd, Family family,
              CellResult& result, const std::filesystem::path& out_dir) {
    result.attempted = true;
    std::string stage = "train";
    try {
        ModelSpec spec = apply_overrides(cfg, preset_for(family, wd.window));
        std::vector<Window> train_windows;
        train_windows.reserve(wd.train.total());
        for (const auto& w : wd.train.case_windows) train_windows.push_back(w);
        for (const auto& w : wd.train.control_windows) train_windows.push_back(w);

        auto [model, train_report] =
            train_model(spec, train_windows, cell_seed(cfg.seed_init, family, wd.window),
                        cell_seed(cfg.seed_train, family, wd.window));
        result.train_report = std::move(train_report);
        result.has_train_report =
            family == Family::cnn1d || family == Family::mlp_baseline;

        stage = "evaluate";
        std::vector<Window> test_windows;
        test_windows.reserve(wd.test.total());
        for (const auto& w : wd.test.case_windows) test_windows.push_back(w);
        for (const auto& w : wd.test.control_windows) test_windows.push_back(w);

        const ScoredSet balanced = oriented(cfg, score_windows(model, test_windows));
        result.balanced = evaluate(balanced);
        result.roc = roc_curve(balanced);

        const ScoredSet unbalanced = oriented(cfg, score_windows(model, wd.test_all));
        result.unbalanced = evaluate(unbalanced);

        stage = "save";
        model.save(out_dir / ("model_" + family_name(family) + "_w" +
                              std::to_string(wd.window) + ".json"));
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.stage = stage;
        result.message = e.what();
    }
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);

    const PreparedDataset data = prepare_dataset(cfg);
    {
        auto out = open_out(cfg.out_dir / "preprocess_report.csv");
        out << "id,n_samples,n_gaps,repaired_samples,quality,quality_min_30min,"
               "flag_low_quality,long_spans_over_60s\n";
        for (const auto& row : data.report_rows) out << row << '\n';
    }

    const SplitPlan plan = split_records(data.records, cfg.ratios, cfg.seed_split);
    for (const auto& id : plan.train_records) {
        if (plan.test_records.count(id) > 0) {
            throw std::logic_error("run_experiment: split sides overlap on id " + id);
        }
    }

    // window-level data prepared once and shared across families
    std::vector<WindowData> window_data;
    std::vector<std::string> window_errors(cfg.windows.size());
    window_data.resize(cfg.windows.size());
    for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
        try {
            window_data[wi] = prepare_window_data(cfg, data, plan, cfg.windows[wi]);
            // leakage check: every window must descend from its side of the plan
            for (const auto* set :
                 {&window_data[wi].train.case_windows, &window_data[wi].train.control_windows}) {
                for (const auto& w : *set) {
                    if (!w.synthetic && plan.train_records.count(w.record_id) == 0) {
                        throw std::logic_error("train window from non-train record " +
                                               w.record_id);
                    }
                }
            }
            for (const auto* set :
                 {&window_data[wi].test.case_windows, &window_data[wi].test.control_windows}) {
                for (const auto& w : *set) {
                    if (plan.test_records.count(w.record_id) == 0) {
                        throw std::logic_error("test window from non-test record " +
                                               w.record_id);
                    }
                }
            }
        } catch (const std::exception& e) {
            window_errors[wi] = e.what();
        }
    }

    const std::size_t n_cells = cfg.windows.size() * cfg.families.size();
    std::vector<CellResult> results(n_cells);
    auto cell_index = [&](std::size_t wi, std::size_t fi) {
        return wi * cfg.families.size() + fi;
    };

    std::atomic<std::size_t> next_cell{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t c = next_cell.fetch_add(1);
            if (c >= n_cells) break;
            const std::size_t wi = c / cfg.families.size();
            const std::size_t fi = c % cfg.families.size();
            CellResult& res = results[c];
            if (!window_errors[wi].empty()) {
                res.attempted = true;
                res.ok = false;
                res.stage = "balance";
                res.message = window_errors[wi];
                continue;
            }
            run_cell(cfg, window_data[wi], cfg.families[fi], res, cfg.out_dir);
        }
    };
    if (cfg.workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(cfg.workers, n_cells); ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) th.join();
    }

    // outputs in fixed (window, family) order regardless of worker scheduling
    {
        auto out = open_out(cfg.out_dir / "metrics.csv");
        out << "# balanced test windows; ci: wald 95%; sens n = case windows, spec n = "
               "control windows, auc n = all windows\n";
        if (cfg.balancing == Balancing::smote_plus_undersample) {
            out << "# balancing=smote_plus_undersample: windowed adaptation of the "
                   "record-level oversampling protocol\n";
        }
        write_metrics_header(out);
        for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
            for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
                const auto& res = results[cell_index(wi, fi)];
                if (res.ok) {
                    write_metrics_row(out, family_name(cfg.families[fi]), cfg.windows[wi],
                                      res.balanced);
                }
            }
        }
    }
    {
        auto out = open_out(cfg.out_dir / "metrics_unbalanced.csv");
        out << "# all test windows (controls not undersampled)\n";
        write_metrics_header(out);
        for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
            for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
                const auto& res = results[cell_index(wi, fi)];
                if (res.ok) {
                    write_metrics_row(out, family_name(cfg.families[fi]), cfg.windows[wi],
                                      res.unbalanced);
                }
            }
        }
    }
    {
        auto out = open_out(cfg.out_dir / "train_summary.csv");
        out << "family,window,mean_train_auc,mean_train_logloss,mean_val_auc,"
               "mean_val_logloss,final_train_auc,final_train_logloss,final_val_auc,"
               "final_val_logloss\n";
        for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
            for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
                const auto& res = results[cell_index(wi, fi)];
                if (!res.ok || !res.has_train_report) continue;
                const auto mean = res.train_report.mean_stats();
                const auto last = res.train_report.final_stats();
                out << family_name(cfg.families[fi]) << ',' << cfg.windows[wi] << ','
                    << fmt(mean.train_auc) << ',' << fmt(mean.train_logloss) << ','
                    << fmt(mean.val_auc) << ',' << fmt(mean.val_logloss) << ','
                    << fmt(last.train_auc) << ',' << fmt(last.train_logloss) << ','
                    << fmt(last.val_auc) << ',' << fmt(last.val_logloss) << '\n';
            }
        }
    }
    for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
        for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
            const auto& res = results[cell_index(wi, fi)];
            if (!res.ok || !res.has_train_report) continue;
            auto out = open_out(cfg.out_dir /
                                ("train_log_" + family_name(cfg.families[fi]) + "_w" +
                                 std::to_string(cfg.windows[wi]) + ".csv"));
            write_train_log(out, res.train_report);
        }
    }
    for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
        const std::string fam = family_name(cfg.families[fi]);
        bool any = false;
        for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
            any = any || results[cell_index(wi, fi)].ok;
        }
        if (!any) continue;
        auto out = open_out(cfg.out_dir / ("roc_" + fam + ".csv"));
        out << "window,fpr,tpr,threshold\n";
        std::vector<std::pair<std::string, RocCurve>> curves;
        for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
            const auto& res = results[cell_index(wi, fi)];
            if (!res.ok) continue;
            write_roc_rows(out, cfg.windows[wi], res.roc);
            curves.emplace_back("W=" + std::to_string(cfg.windows[wi]), res.roc);
        }
        auto svg = open_out(cfg.out_dir / ("roc_" + fam + ".svg"));
        svg << roc_svg(curves);
    }
    {
        auto out = open_out(cfg.out_dir / "failures.csv");
        out << "family,window,stage,message\n";
        for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
            for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
                const auto& res = results[cell_index(wi, fi)];
                if (res.attempted && !res.ok) {
                    std::string msg = res.message;
                    std::replace(msg.begin(), msg.end(), ',', ';');
                    std::replace(msg.begin(), msg.end(), '\n', ' ');
                    out << family_name(cfg.families[fi]) << ',' << cfg.windows[wi] << ','
                        << res.stage << ',' << msg << '\n';
                }
            }
        }
    }
    {
        auto out = open_out(cfg.out_dir / "run_manifest.txt");
        out << "manifest = " << cfg.manifest.string() << '\n';
        out << "records = " << data.summary.total << " (cases " << data.summary.cases
            << ", controls " << data.summary.controls << ")\n";
        out << "train_records = " << plan.train_records.size() << '\n';
        out << "test_records = " << plan.test_records.size() << '\n';
        out << "windows =";
        for (std::size_t w : cfg.windows) out << ' ' << w;
        out << '\n';
        out << "families =";
        for (Family f : cfg.families) out << ' ' << family_name(f);
        out << '\n';
        out << "balancing = " << to_string(cfg.balancing) << '\n';
        out << "train_ratio = " << fmt(cfg.ratios.train) << '\n';
        out << "test_ratio = " << fmt(cfg.ratios.test) << '\n';
        out << "val_fraction = " << fmt(cfg.val_fraction) << '\n';
        out << "band = [" << fmt(cfg.band.low) << ", " << fmt(cfg.band.high) << "]\n";
        out << "positive_class = " << cfg.positive_class << '\n';
        out << "seed_split = " << cfg.seed_split << '\n';
        out << "seed_balance = " << cfg.seed_balance << '\n';
        out << "seed_init = " << cfg.seed_init << '\n';
        out << "seed_train = " << cfg.seed_train << '\n';
    }
}

void compare_report(const std::vector<std::filesystem::path>& metric_csvs, std::ostream& out) {
    if (metric_csvs.empty()) {
        throw config_error("compare_report: at least one metrics file required");
    }
    struct Row {
        std::string family;
        std::size_t window;
        double auc, auc_lo, auc_hi, sens, spec;
    };
    std::vector<Row> rows;
    for (const auto& path : metric_csvs) {
        std::ifstream in(path);
        if (!in) {
            throw data_error("compare_report: cannot open '" + path.string() + "'");
        }
        std::string line;
        bool header_seen = false;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            if (!header_seen) {
                if (line != kMetricsColumns) {
                    throw data_error("compare_report: schema mismatch in '" + path.string() +
                                     "'");
                }
                header_seen = true;
                continue;
            }
            const auto fields = split_list(line);
            if (fields.size() < 22) {
                throw data_error("compare_report: short row in '" + path.string() + "'");
            }
            Row r;
            r.family = fields[0];
            r.window = static_cast<std::size_t>(std::stoull(fields[1]));
            r.sens = std::stod(fields[2]);
            r.spec = std::stod(fields[5]);
            r.auc = std::stod(fields[8]);
            r.auc_lo = std::stod(fields[9]);
            r.auc_hi = std::stod(fields[10]);
            rows.push_back(std::move(r));
        }
        if (!header_seen) {
            throw data_error("compare_report: no header in '" + path.string() + "'");
        }
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.auc != b.auc) return a.auc > b.auc;
        if (a.sens != b.sens) return a.sens > b.sens;  // documented tiebreak
        if (a.family != b.family) return a.family < b.family;
        return a.window < b.window;
    });

    out << "rank,family,window,auc,auc_lo,auc_hi,sens,spec,best_in_family\n";
    std::map<std::string, bool> family_seen;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const bool best = !family_seen[r.family];
        family_seen[r.family] = true;
        out << (i + 1) << ',' << r.family << ',' << r.window << ',' << fmt(r.auc) << ','
            << fmt(r.auc_lo) << ',' << fmt(r.auc_hi) << ',' << fmt(r.sens) << ','
            << fmt(r.spec) << ',' << (best ? 1 : 0) << '\n';
    }
}

}  // namespace ctg
