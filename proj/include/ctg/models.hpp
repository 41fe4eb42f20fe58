#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctg/baselines.hpp"
#include "ctg/nn.hpp"
#include "ctg/segmentation.hpp"

namespace ctg {

enum class Family { cnn1d, mlp_baseline, svm_rbf, random_forest, flda };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

/// Immutable description of one classifier: family, window size and the
/// family-specific hyperparameter map. No randomness until training.
struct ModelSpec {
    Family family = Family::cnn1d;
    std::size_t window = 200;
    std::map<std::string, double> hyper;
    std::uint64_t seed = 0;

    double at(const std::string& key) const;
    double at_or(const std::string& key, double fallback) const;
    void set(const std::string& key, double value) { hyper[key] = value; }

    /// Rejects unknown keys and family-invalid values.
    void validate() const;

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

/// Single conv/pool pair into a two-layer dense head, kernel = n/2.
ModelSpec preset_cnn1d(std::size_t n);

/// Five ReLU hidden layers of 10 units with dropout 0.5, sigmoid head.
ModelSpec preset_mlp(std::size_t n);

/// svm_rbf, random_forest or flda with the published settings.
ModelSpec preset_baseline(Family family, std::size_t n);

/// He-initialized network for the cnn1d / mlp_baseline families.
Network build_network(const ModelSpec& spec, std::uint64_t init_seed);

/// A fitted classifier of any family plus the spec that produced it.
struct TrainedModel {
    ModelSpec spec;
    std::variant<Network, FldaModel, ForestModel, SvmModel> model;

    double predict(const std::vector<double>& window_samples) const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);
};

/// Fit one model of any family on (already balanced) training windows.
/// Returns an empty TrainReport for the non-NN families.
std::pair<TrainedModel, TrainReport> train_model(const ModelSpec& spec,
                                                 const std::vector<Window>& train_windows,
                                                 std::uint64_t init_seed,
                                                 std::uint64_t train_seed);

Tensor window_to_tensor(const Window& w);

}  // namespace ctg
