#include "ctg/models.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "ctg/errors.hpp"

namespace ctg {

std::string family_name(Family f) {
    switch (f) {
        case Family::cnn1d: return "cnn1d";
        case Family::mlp_baseline: return "mlp_baseline";
        case Family::svm_rbf: return "svm_rbf";
        case Family::random_forest: return "random_forest";
        case Family::flda: return "flda";
    }
    return "cnn1d";
}

Family family_from_name(const std::string& s) {
    if (s == "cnn1d") return Family::cnn1d;
    if (s == "mlp_baseline") return Family::mlp_baseline;
    if (s == "svm_rbf") return Family::svm_rbf;
    if (s == "random_forest") return Family::random_forest;
    if (s == "flda") return Family::flda;
    throw config_error("family_from_name: unknown family '" + s + "'");
}

double ModelSpec::at(const std::string& key) const {
    const auto it = hyper.find(key);
    if (it == hyper.end()) {
        throw config_error("ModelSpec: missing hyperparameter '" + key + "' for family " +
                           family_name(family));
    }
    return it->second;
}

double ModelSpec::at_or(const std::string& key, double fallback) const {
    const auto it = hyper.find(key);
    return it == hyper.end() ? fallback : it->second;
}

namespace {

const std::set<std::string>& allowed_keys(Family f) {
    static const std::set<std::string> cnn = {"filters", "kernel",  "pool",     "dense_units",
                                              "dropout", "lr",      "beta1",    "beta2",
                                              "epsilon", "decay",   "batch",    "epochs",
                                              "val_fraction", "standardize"};
    static const std::set<std::string> mlp = {"hidden_layers", "hidden_units", "dropout",
                                              "lr",            "beta1",        "beta2",
                                              "epsilon",       "decay",        "batch",
                                              "epochs",        "val_fraction", "standardize"};
    static const std::set<std::string> svm = {"gamma", "c", "tol", "platt"};
    static const std::set<std::string> rf = {"trees", "bootstrap", "mtry", "min_leaf",
                                             "max_depth"};
    static const std::set<std::string> flda = {"ridge"};
    switch (f) {
        case Family::cnn1d: return cnn;
        case Family::mlp_baseline: return mlp;
        case Family::svm_rbf: return svm;
        case Family::random_forest: return rf;
        case Family::flda: return flda;
    }
    return cnn;
}

}  // namespace

void ModelSpec::validate() const {
    if (window < 2) {
        throw config_error("ModelSpec: window size must be at least 2");
    }
    const auto& allowed = allowed_keys(family);
    for (const auto& [key, value] : hyper) {
        if (allowed.find(key) == allowed.end()) {
            throw config_error("ModelSpec: unknown hyperparameter '" + key + "' for family " +
                               family_name(family));
        }
        if (!std::isfinite(value)) {
            throw config_error("ModelSpec: non-finite value for '" + key + "'");
        }
    }
    if (family == Family::cnn1d) {
        if (at("kernel") < 1 || at("kernel") > static_cast<double>(window)) {
            throw config_error("ModelSpec: kernel must lie in [1, window]");
        }
    }
}

nlohmann::json ModelSpec::to_json() const {
    return {{"family", family_name(family)},
            {"window", window},
            {"hyper", hyper},
            {"seed", seed}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
    ModelSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.window = j.at("window").get<std::size_t>();
    spec.hyper = j.at("hyper").get<std::map<std::string, double>>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

ModelSpec preset_cnn1d(std::size_t n) {
    if (n < 2 || n % 2 != 0) {
        throw config_error("preset_cnn1d: window must be even (kernel = n/2); try " +
                           std::to_string(n < 2 ? 2 : n - 1 + (n % 2)) + " or " +
                           std::to_string(n + 1 + ((n + 1) % 2)));
    }
    ModelSpec spec;
    spec.family = Family::cnn1d;
    spec.window = n;
    spec.hyper = {{"filters", 20},   {"kernel", static_cast<double>(n / 2)},
                  {"pool", 2},       {"dense_units", 10},
                  {"dropout", 0.0},  {"lr", 1e-4},
                  {"beta1", 0.9},    {"beta2", 0.999},
                  {"epsilon", 1e-8}, {"decay", 0.0},
                  {"batch", 32},     {"epochs", 500},
                  {"val_fraction", 0.1}, {"standardize", 1}};
    return spec;
}

ModelSpec preset_mlp(std::size_t n) {
    if (n < 1) {
        throw config_error("preset_mlp: window must be positive");
    }
    ModelSpec spec;
    spec.family = Family::mlp_baseline;
    spec.window = n;
    spec.hyper = {{"hidden_layers", 5}, {"hidden_units", 10},
                  {"dropout", 0.5},     {"lr", 1e-3},
                  {"beta1", 0.9},       {"beta2", 0.999},
                  {"epsilon", 1e-8},    {"decay", 0.0},
                  {"batch", 32},        {"epochs", 500},
                  {"val_fraction", 0.1}, {"standardize", 1}};
    return spec;
}

ModelSpec preset_baseline(Family family, std::size_t n) {
    ModelSpec spec;
    spec.family = family;
    spec.window = n;
    switch (family) {
        case Family::svm_rbf:
            spec.hyper = {{"gamma", 0.3333}, {"c", 1.0}, {"tol", 1e-3}, {"platt", 1}};
            break;
        case Family::random_forest:
            // mtry 0 resolves to floor(sqrt(n)) at fit time
            spec.hyper = {{"trees", 500}, {"bootstrap", 1}, {"mtry", 0}, {"min_leaf", 1},
                          {"max_depth", 0}};
            break;
        case Family::flda:
            spec.hyper = {{"ridge", 1e-6}};
            break;
        default:
            throw config_error("preset_baseline: family must be svm_rbf, random_forest or flda");
    }
    return spec;
}

Network build_network(const ModelSpec& spec, std::uint64_t init_seed) {
    spec.validate();
    Rng seeder(init_seed);
    Network net;

    if (spec.family == Family::cnn1d) {
        const auto filters = static_cast<std::size_t>(spec.at("filters"));
        const auto kernel = static_cast<std::size_t>(spec.at("kernel"));
        const auto pool = static_cast<std::size_t>(spec.at("pool"));
        const auto dense_units = static_cast<std::size_t>(spec.at("dense_units"));
        const double dropout = spec.at_or("dropout", 0.0);

        if (spec.at_or("standardize", 1) != 0) {
            net.add(std::make_unique<Standardize>());
        }
        auto conv = std::make_unique<Conv1D>(1, filters, kernel);
        conv->kernels = he_initialize(conv->kernels.shape(), kernel, seeder.spawn(0).seed());
        net.add(std::move(conv));
        net.add(std::make_unique<Relu>());
        net.add(std::make_unique<MaxPool1D>(pool));
        net.add(std::make_unique<Flatten>());

        const std::size_t conv_out = spec.window - kernel + 1;
        const std::size_t flat = filters * (conv_out / pool);
        auto hidden = std::make_unique<Dense>(flat, dense_units, Activation::sigmoid);
        hidden->weights = he_initialize(hidden->weights.shape(), flat, seeder.spawn(1).seed());
        net.add(std::move(hidden));
        if (dropout > 0.0) net.add(std::make_unique<Dropout>(dropout));
        auto head = std::make_unique<Dense>(dense_units, 1, Activation::sigmoid);
        head->weights =
            he_initialize(head->weights.shape(), dense_units, seeder.spawn(2).seed());
        net.add(std::move(head));
        return net;
    }

    if (spec.family == Family::mlp_baseline) {
        const auto layers = static_cast<std::size_t>(spec.at("hidden_layers"));
        const auto units = static_cast<std::size_t>(spec.at("hidden_units"));
        const double dropout = spec.at("dropout");

        if (spec.at_or("standardize", 1) != 0) {
            net.add(std::make_unique<Standardize>());
        }
        net.add(std::make_unique<Flatten>());
        std::size_t in = spec.window;
        for (std::size_t l = 0; l < layers; ++l) {
            auto dense = std::make_unique<Dense>(in, units, Activation::relu);
            dense->weights =
                he_initialize(dense->weights.shape(), in, seeder.spawn(l).seed());
            net.add(std::move(dense));
            if (dropout > 0.0) net.add(std::make_unique<Dropout>(dropout));
            in = units;
        }
        auto head = std::make_unique<Dense>(in, 1, Activation::sigmoid);
        head->weights =
            he_initialize(head->weights.shape(), in, seeder.spawn(layers).seed());
        net.add(std::move(head));
        return net;
    }

    throw config_error("build_network: family " + family_name(spec.family) +
                       " is not a neural network");
}

Tensor window_to_tensor(const Window& w) {
    return Tensor({1, w.samples.size()}, w.samples);
}

namespace {

void windows_to_features(const std::vector<Window>& windows,
                         std::vector<std::vector<double>>& x, std::vector<int>& y) {
    x.reserve(windows.size());
    y.reserve(windows.size());
    for (const auto& w : windows) {
        x.push_back(w.samples);
        y.push_back(w.label == Label::case_ ? 1 : 0);
    }
}

}  // namespace

std::pair<TrainedModel, TrainReport> train_model(const ModelSpec& spec,
                                                 const std::vector<Window>& train_windows,
                                                 std::uint64_t init_seed,
                                                 std::uint64_t train_seed) {
    spec.validate();
    if (train_windows.empty()) {
        throw data_error("train_model: empty training set");
    }
    for (const auto& w : train_windows) {
        if (w.samples.size() != spec.window) {
            throw data_error("train_model: window length " + std::to_string(w.samples.size()) +
                             " does not match spec window " + std::to_string(spec.window));
        }
    }

    TrainedModel trained;
    trained.spec = spec;
    TrainReport report;

    if (spec.family == Family::cnn1d || spec.family == Family::mlp_baseline) {
        Network net = build_network(spec, init_seed);
        std::vector<Tensor> inputs;
        std::vector<double> targets;
        inputs.reserve(train_windows.size());
        targets.reserve(train_windows.size());
        for (const auto& w : train_windows) {
            inputs.push_back(window_to_tensor(w));
            targets.push_back(w.label == Label::case_ ? 1.0 : 0.0);
        }
        TrainConfig cfg;
        cfg.epochs = static_cast<std::size_t>(spec.at("epochs"));
        cfg.batch = static_cast<std::size_t>(spec.at("batch"));
        cfg.val_fraction = spec.at("val_fraction");
        cfg.seed = train_seed;
        cfg.adam.lr = spec.at("lr");
        cfg.adam.beta1 = spec.at("beta1");
        cfg.adam.beta2 = spec.at("beta2");
        cfg.adam.epsilon = spec.at("epsilon");
        cfg.adam.decay = spec.at("decay");
        report = train_network(net, inputs, targets, cfg);
        trained.model = std::move(net);
        return {std::move(trained), std::move(report)};
    }

    std::vector<std::vector<double>> x;
    std::vector<int> y;
    windows_to_features(train_windows, x, y);

    if (spec.family == Family::flda) {
        trained.model = flda_fit(x, y, spec.at("ridge"));
    } else if (spec.family == Family::random_forest) {
        RfConfig cfg;
        cfg.trees = static_cast<std::size_t>(spec.at("trees"));
        cfg.bootstrap = spec.at("bootstrap") != 0;
        cfg.mtry = static_cast<std::size_t>(spec.at("mtry"));
        cfg.min_leaf = static_cast<std::size_t>(spec.at("min_leaf"));
        cfg.max_depth = static_cast<std::size_t>(spec.at("max_depth"));
        trained.model = rf_fit(x, y, cfg, train_seed);
    } else {
        SvmConfig cfg;
        cfg.gamma = spec.at("gamma");
        cfg.c = spec.at("c");
        cfg.tol = spec.at("tol");
        cfg.platt = spec.at("platt") != 0;
        trained.model = svm_fit(x, y, cfg, train_seed);
    }
    return {std::move(trained), std::move(report)};
}

double TrainedModel::predict(const std::vector<double>& window_samples) const {
    if (std::holds_alternative<Network>(model)) {
        // forward mutates layer caches; clone-free scoring needs a mutable view
        auto& net = const_cast<Network&>(std::get<Network>(model));
        return net.forward(Tensor({1, window_samples.size()}, window_samples), false, nullptr);
    }
    if (std::holds_alternative<FldaModel>(model)) {
        return flda_predict(std::get<FldaModel>(model), window_samples);
    }
    if (std::holds_alternative<ForestModel>(model)) {
        return rf_predict(std::get<ForestModel>(model), window_samples);
    }
    return svm_predict(std::get<SvmModel>(model), window_samples);
}

nlohmann::json TrainedModel::to_json() const {
    nlohmann::json j;
    j["format"] = "ctg-model";
    j["version"] = 1;
    j["spec"] = spec.to_json();
    if (std::holds_alternative<Network>(model)) {
        j["model"] = std::get<Network>(model).to_json();
    } else if (std::holds_alternative<FldaModel>(model)) {
        j["model"] = std::get<FldaModel>(model).to_json();
    } else if (std::holds_alternative<ForestModel>(model)) {
        j["model"] = std::get<ForestModel>(model).to_json();
    } else {
        j["model"] = std::get<SvmModel>(model).to_json();
    }
    return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "ctg-model" || j.value("version", 0) != 1) {
        throw data_error("TrainedModel::from_json: not a version-1 ctg-model file");
    }
    TrainedModel trained;
    trained.spec = ModelSpec::from_json(j.at("spec"));
    switch (trained.spec.family) {
        case Family::cnn1d:
        case Family::mlp_baseline:
            trained.model = Network::from_json(j.at("model"));
            break;
        case Family::flda:
            trained.model = FldaModel::from_json(j.at("model"));
            break;
        case Family::random_forest:
            trained.model = ForestModel::from_json(j.at("model"));
            break;
        case Family::svm_rbf:
            trained.model = SvmModel::from_json(j.at("model"));
            break;
    }
    return trained;
}

void TrainedModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw data_error("TrainedModel::save: cannot write '" + path.string() + "'");
    }
    out << to_json().dump(1) << '\n';
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("TrainedModel::load: cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

}  // namespace ctg
