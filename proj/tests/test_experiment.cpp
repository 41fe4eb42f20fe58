#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ctg/errors.hpp"
#include "ctg/experiment.hpp"
#include "helpers.hpp"

using namespace ctg;
using namespace ctg::testing;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string minimal_config(const std::filesystem::path& manifest,
                           const std::filesystem::path& out) {
    std::string cfg;
    cfg += "manifest = " + manifest.string() + "\n";
    cfg += "out = " + out.string() + "\n";
    cfg += "windows = 50\n";
    cfg += "families = flda\n";
    cfg += "train_ratio = 0.75\n";
    cfg += "test_ratio = 0.25\n";
    cfg += "seed_split = 1\nseed_balance = 2\nseed_init = 3\nseed_train = 4\n";
    return cfg;
}

}  // namespace

TEST_CASE("config parsing, comments and validation") {
    std::istringstream in(
        "# experiment\n"
        "manifest = data/m.csv\n"
        "out = results  # inline comment\n"
        "windows = 100, 200\n"
        "families = cnn1d, flda\n"
        "balancing = smote_plus_undersample\n"
        "seed_split = 1\n"
        "seed_balance = 2\n"
        "seed_init = 3\n"
        "seed_train = 4\n"
        "workers = 2\n");
    const ExperimentConfig cfg = ExperimentConfig::parse(in, "/base");
    CHECK(cfg.manifest == std::filesystem::path("/base/data/m.csv"));
    CHECK(cfg.out_dir == std::filesystem::path("/base/results"));
    CHECK(cfg.windows == std::vector<std::size_t>{100, 200});
    CHECK(cfg.families == std::vector<Family>{Family::cnn1d, Family::flda});
    CHECK(cfg.balancing == Balancing::smote_plus_undersample);
    CHECK(cfg.workers == 2);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config error paths") {
    {
        std::istringstream in("bogus_key = 1\n");
        CHECK_THROWS_AS(ExperimentConfig::parse(in, "."), config_error);
    }
    {
        std::istringstream in("manifest m.csv\n");
        CHECK_THROWS_AS(ExperimentConfig::parse(in, "."), config_error);
    }
    {
        // seeds missing
        std::istringstream in("manifest = m.csv\nout = o\n");
        const ExperimentConfig cfg = ExperimentConfig::parse(in, ".");
        CHECK_THROWS_AS(cfg.validate(), config_error);
    }
    {
        std::istringstream in(
            "manifest = m.csv\nout = o\nfamilies = \nseed_split = 1\nseed_balance = 2\n"
            "seed_init = 3\nseed_train = 4\n");
        CHECK_THROWS_AS(ExperimentConfig::parse(in, "."), config_error);
    }
}

TEST_CASE("empty families list is a validation error before any work") {
    ExperimentConfig cfg;
    cfg.manifest = "m.csv";
    cfg.out_dir = "o";
    cfg.seeds_set = true;
    cfg.families.clear();
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("prepare_window_data balances and never leaks records across sides") {
    TempDir dir("pipeline");
    const auto manifest = write_synthetic_dataset(dir, 6, 600, 21);

    ExperimentConfig cfg;
    cfg.manifest = manifest;
    cfg.out_dir = dir.path() / "out";
    cfg.ratios = {0.7, 0.3};
    cfg.seeds_set = true;
    cfg.seed_split = 5;
    cfg.seed_balance = 6;

    const PreparedDataset data = prepare_dataset(cfg);
    CHECK(data.summary.total == 12);
    const SplitPlan plan = split_records(data.records, cfg.ratios, cfg.seed_split);

    const WindowData wd = prepare_window_data(cfg, data, plan, 100);
    CHECK(wd.train.case_windows.size() == wd.train.control_windows.size());
    CHECK(wd.test.case_windows.size() == wd.test.control_windows.size());
    CHECK(!wd.train.case_windows.empty());
    CHECK(!wd.test.case_windows.empty());
    CHECK(wd.test_all.size() >= wd.test.total());

    for (const auto& w : wd.train.case_windows) {
        CHECK(plan.train_records.count(w.record_id) == 1);
    }
    for (const auto& w : wd.test.control_windows) {
        CHECK(plan.test_records.count(w.record_id) == 1);
    }
}

TEST_CASE("smote balancing arm oversamples the cases") {
    TempDir dir("smote_arm");
    // controls dominate so the post-smote undersample has room
    const auto manifest = write_synthetic_dataset(dir, 5, 15, 800, 33);

    ExperimentConfig cfg;
    cfg.manifest = manifest;
    cfg.out_dir = dir.path() / "out";
    cfg.ratios = {0.7, 0.3};
    cfg.seeds_set = true;
    cfg.balancing = Balancing::smote_plus_undersample;
    cfg.smote_k = 2;
    cfg.smote_percent = 100;

    const PreparedDataset data = prepare_dataset(cfg);
    const SplitPlan plan = split_records(data.records, cfg.ratios, cfg.seed_split);
    const WindowData wd = prepare_window_data(cfg, data, plan, 100);

    std::size_t synthetic = 0;
    for (const auto& w : wd.train.case_windows) synthetic += w.synthetic ? 1 : 0;
    CHECK(synthetic > 0);
    CHECK(wd.train.case_windows.size() == wd.train.control_windows.size());
}

TEST_CASE("run_experiment writes the full artifact set") {
    TempDir dir("run");
    const auto manifest = write_synthetic_dataset(dir, 5, 500, 13);
    const auto out = dir.path() / "results";

    ExperimentConfig cfg;
    cfg.manifest = manifest;
    cfg.out_dir = out;
    cfg.windows = {50, 100};
    cfg.families = {Family::flda, Family::random_forest};
    cfg.ratios = {0.7, 0.3};
    cfg.seeds_set = true;
    cfg.seed_split = 1;
    cfg.seed_balance = 2;
    cfg.seed_init = 3;
    cfg.seed_train = 4;

    run_experiment(cfg);

    for (const char* name :
         {"metrics.csv", "metrics_unbalanced.csv", "train_summary.csv", "failures.csv",
          "run_manifest.txt", "preprocess_report.csv", "roc_flda.csv", "roc_flda.svg",
          "roc_random_forest.csv", "roc_random_forest.svg", "model_flda_w50.json",
          "model_random_forest_w100.json"}) {
        CHECK_MESSAGE(std::filesystem::exists(out / name), name);
    }

    // four successful cells, no failures
    const std::string metrics = slurp(out / "metrics.csv");
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') >= 6);
    const std::string failures = slurp(out / "failures.csv");
    CHECK(failures == "family,window,stage,message\n");
}

TEST_CASE("run_experiment reruns byte-identical and worker-count independent") {
    TempDir dir("determinism");
    const auto manifest = write_synthetic_dataset(dir, 4, 400, 17);

    ExperimentConfig cfg;
    cfg.manifest = manifest;
    cfg.windows = {50};
    cfg.families = {Family::flda, Family::random_forest};
    cfg.ratios = {0.7, 0.3};
    cfg.seeds_set = true;
    cfg.seed_split = 9;
    cfg.seed_balance = 8;
    cfg.seed_init = 7;
    cfg.seed_train = 6;

    cfg.out_dir = dir.path() / "a";
    run_experiment(cfg);
    cfg.out_dir = dir.path() / "b";
    run_experiment(cfg);
    cfg.out_dir = dir.path() / "c";
    cfg.workers = 4;
    run_experiment(cfg);

    const std::string a = slurp(dir.path() / "a" / "metrics.csv");
    CHECK(a == slurp(dir.path() / "b" / "metrics.csv"));
    CHECK(a == slurp(dir.path() / "c" / "metrics.csv"));
    CHECK(slurp(dir.path() / "a" / "metrics_unbalanced.csv") ==
          slurp(dir.path() / "b" / "metrics_unbalanced.csv"));
}

TEST_CASE("run_experiment records cell failures and proceeds") {
    TempDir dir("failures");
    // records too short for the second window size: balancing fails there
    const auto manifest = write_synthetic_dataset(dir, 4, 120, 19);

    ExperimentConfig cfg;
    cfg.manifest = manifest;
    cfg.out_dir = dir.path() / "out";
    cfg.windows = {50, 500};
    cfg.families = {Family::flda};
    cfg.ratios = {0.7, 0.3};
    cfg.seeds_set = true;

    run_experiment(cfg);
    const std::string failures = slurp(cfg.out_dir / "failures.csv");
    CHECK(failures.find("flda,500,balance") != std::string::npos);
    const std::string metrics = slurp(cfg.out_dir / "metrics.csv");
    CHECK(metrics.find("flda,50,") != std::string::npos);
}

TEST_CASE("config file load drives run_experiment") {
    TempDir dir("cfgfile");
    const auto manifest = write_synthetic_dataset(dir, 4, 300, 23);
    const auto out = dir.path() / "res";
    write_file(dir.path() / "exp.cfg", minimal_config(manifest, out));

    const ExperimentConfig cfg = ExperimentConfig::load(dir.path() / "exp.cfg");
    run_experiment(cfg);
    CHECK(std::filesystem::exists(out / "metrics.csv"));
}

TEST_CASE("compare_report ranks by auc with the documented tiebreak") {
    TempDir dir("compare");
    const std::string header =
        "family,window,sens,sens_lo,sens_hi,spec,spec_lo,spec_hi,auc,auc_lo,auc_hi,"
        "logloss,threshold,youden_threshold,youden_sens,youden_spec,n_case,n_control,"
        "tp,fp,tn,fn\n";
    std::string a = "# comment\n" + header;
    a += "cnn1d,200,0.80,0.75,0.85,0.79,0.73,0.84,0.86,0.81,0.91,0.5,0.5,0.5,0.8,0.8,"
         "620,620,496,130,490,124\n";
    a += "flda,300,0.71,0.64,0.79,0.77,0.70,0.84,0.74,0.70,0.81,0.6,0.5,0.5,0.7,0.7,"
         "413,413,293,95,318,120\n";
    std::string b = header;
    b += "svm_rbf,500,0.68,0.60,0.76,0.56,0.48,0.65,0.74,0.54,0.70,0.7,0.5,0.5,0.6,0.6,"
         "248,248,169,109,139,79\n";
    write_file(dir.path() / "a.csv", a);
    write_file(dir.path() / "b.csv", b);

    std::ostringstream out;
    compare_report({dir.path() / "a.csv", dir.path() / "b.csv"}, out);
    const std::string report = out.str();

    const auto pos_cnn = report.find("cnn1d");
    const auto pos_flda = report.find("flda");
    const auto pos_svm = report.find("svm_rbf");
    REQUIRE(pos_cnn != std::string::npos);
    REQUIRE(pos_flda != std::string::npos);
    REQUIRE(pos_svm != std::string::npos);
    CHECK(pos_cnn < pos_flda);
    // tie on auc 0.74: flda wins on sensitivity 0.71 > 0.68
    CHECK(pos_flda < pos_svm);
    CHECK(report.find("1,cnn1d,200") != std::string::npos);

    // every family's best row is flagged
    std::istringstream lines(report);
    std::string line;
    std::getline(lines, line);  // header
    std::size_t best_count = 0;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '1') ++best_count;
    }
    CHECK(best_count == 3);
}

TEST_CASE("compare_report schema mismatch names the file") {
    TempDir dir("schema");
    write_file(dir.path() / "bad.csv", "not,the,schema\n1,2,3\n");
    std::ostringstream out;
    try {
        compare_report({dir.path() / "bad.csv"}, out);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
    }
}

TEST_CASE("single metrics file passes through with rank 1") {
    TempDir dir("single");
    const std::string header =
        "family,window,sens,sens_lo,sens_hi,spec,spec_lo,spec_hi,auc,auc_lo,auc_hi,"
        "logloss,threshold,youden_threshold,youden_sens,youden_spec,n_case,n_control,"
        "tp,fp,tn,fn\n";
    write_file(dir.path() / "one.csv",
               header +
                   "flda,100,0.6,0.5,0.7,0.6,0.5,0.7,0.65,0.6,0.7,0.6,0.5,0.5,0.6,0.6,"
                   "100,100,60,40,60,40\n");
    std::ostringstream out;
    compare_report({dir.path() / "one.csv"}, out);
    CHECK(out.str().find("1,flda,100,0.650000") != std::string::npos);
}
