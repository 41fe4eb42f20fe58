#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace ctg {

// All three classifiers consume plain feature vectors (window samples) with
// labels 0 = control, 1 = case, and score P(case) in [0,1].

// ---------------------------------------------------------------------------
// Fisher linear discriminant

struct FldaModel {
    std::vector<double> w;  // discriminant direction, case side positive
    double threshold = 0.0; // midpoint of projected class means
    double mean_case = 0.0;
    double mean_control = 0.0;
    double var_case = 0.0;
    double var_control = 0.0;
    double pooled_sd = 1.0;

    nlohmann::json to_json() const;
    static FldaModel from_json(const nlohmann::json& j);
};

/// w ~ (S_w + ridge I)^-1 (mu_case - mu_control); projection statistics are
/// stored for the probability output.
FldaModel flda_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   double ridge = 1e-6);

/// Equal-prior, equal-variance two-Gaussian likelihood ratio on the
/// projection: monotone in the projected value.
double flda_predict(const FldaModel& model, const std::vector<double>& x);

// ---------------------------------------------------------------------------
// Random forest (CART, Gini)

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left if x[feature] <= threshold
    int left = -1;
    int right = -1;
    double p_case = 0.0;     // leaf class probability
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
};

struct RfConfig {
    std::size_t trees = 500;
    bool bootstrap = true;
    std::size_t mtry = 0;      // 0 = floor(sqrt(n_features))
    std::size_t min_leaf = 1;
    std::size_t max_depth = 0; // 0 = grow to purity
};

struct ForestModel {
    RfConfig cfg;
    std::vector<DecisionTree> trees;
    // per-tree in-bag counts, kept for out-of-bag reporting (not serialized)
    std::vector<std::vector<std::uint32_t>> in_bag;

    nlohmann::json to_json() const;
    static ForestModel from_json(const nlohmann::json& j);
};

/// Bootstrapped CART trees with Gini splits over mtry random features per
/// node; per-tree seeds derive from the master seed by counter, so results
/// do not depend on thread scheduling.
ForestModel rf_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const RfConfig& cfg, std::uint64_t seed, std::size_t n_threads = 1);

/// Mean of per-tree leaf case probabilities.
double rf_predict(const ForestModel& model, const std::vector<double>& x);

/// Out-of-bag score per training example: mean over trees whose bootstrap
/// excluded it. NaN where no tree qualifies.
std::vector<double> rf_oob_predictions(const ForestModel& model,
                                       const std::vector<std::vector<double>>& x);

// ---------------------------------------------------------------------------
// RBF-kernel SVM trained with SMO, Platt-calibrated

struct SvmConfig {
    double gamma = 0.3333;
    double c = 1.0;
    double tol = 1e-3;
    bool platt = true;
    std::size_t max_passes_factor = 10;  // examine-all sweep budget: factor * N
};

struct SvmModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> alpha_y;  // alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 0.0;
    double c = 1.0;
    double platt_a = -1.0;
    double platt_b = 0.0;
    bool converged = true;

    nlohmann::json to_json() const;
    static SvmModel from_json(const nlohmann::json& j);
};

SvmModel svm_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                 const SvmConfig& cfg, std::uint64_t seed);

/// Uncalibrated kernel decision value f(x).
double svm_decision(const SvmModel& model, const std::vector<double>& x);

/// sigmoid(A f(x) + B) from the Platt fit.
double svm_predict(const SvmModel& model, const std::vector<double>& x);

}  // namespace ctg
