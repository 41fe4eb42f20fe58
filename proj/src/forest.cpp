#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "ctg/baselines.hpp"
#include "ctg/errors.hpp"
#include "ctg/rng.hpp"

namespace ctg {

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double gini(std::size_t cases, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(cases) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                const RfConfig& cfg, std::uint64_t seed)
        : x_(x), y_(y), cfg_(cfg), rng_(seed) {
        mtry_ = cfg.mtry != 0
                    ? cfg.mtry
                    : static_cast<std::size_t>(
                          std::floor(std::sqrt(static_cast<double>(x.front().size()))));
        mtry_ = std::clamp<std::size_t>(mtry_, 1, x.front().size());
    }

    DecisionTree build(std::vector<std::uint32_t>& in_bag_counts) {
        const std::size_t n = x_.size();
        in_bag_counts.assign(n, 0);
        std::vector<std::size_t> idx;
        idx.reserve(n);
        if (cfg_.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t pick = rng_.index(n);
                idx.push_back(pick);
                ++in_bag_counts[pick];
            }
        } else {
            idx.resize(n);
            std::iota(idx.begin(), idx.end(), 0);
            for (std::size_t i = 0; i < n; ++i) in_bag_counts[i] = 1;
        }
        tree_.nodes.clear();
        grow(std::move(idx), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t> idx, std::size_t depth) {
        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        std::size_t cases = 0;
        for (std::size_t i : idx) cases += static_cast<std::size_t>(y_[i] == 1);
        const double p_case = static_cast<double>(cases) / static_cast<double>(idx.size());

        const bool pure = cases == 0 || cases == idx.size();
        const bool too_small = idx.size() < 2 * cfg_.min_leaf;
        const bool too_deep = cfg_.max_depth != 0 && depth >= cfg_.max_depth;
        if (pure || too_small || too_deep) {
            tree_.nodes[node_id].p_case = p_case;
            return node_id;
        }

        const SplitChoice split = best_split(idx, cases);
        if (split.feature < 0) {
            tree_.nodes[node_id].p_case = p_case;
            return node_id;
        }

        std::vector<std::size_t> left_idx;
        std::vector<std::size_t> right_idx;
        for (std::size_t i : idx) {
            (x_[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left_idx
                                                                               : right_idx)
                .push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        tree_.nodes[node_id].feature = split.feature;
        tree_.nodes[node_id].threshold = split.threshold;
        const int left = grow(std::move(left_idx), depth + 1);
        tree_.nodes[node_id].left = left;
        const int right = grow(std::move(right_idx), depth + 1);
        tree_.nodes[node_id].right = right;
        return node_id;
    }

    SplitChoice best_split(const std::vector<std::size_t>& idx, std::size_t cases) {
        const std::size_t n_features = x_.front().size();
        std::vector<std::size_t> features(n_features);
        std::iota(features.begin(), features.end(), 0);
        for (std::size_t i = 0; i < mtry_; ++i) {
            std::swap(features[i], features[i + rng_.index(n_features - i)]);
        }

        const double parent = gini(cases, idx.size());
        SplitChoice best;

        std::vector<std::pair<double, int>> vals(idx.size());
        for (std::size_t f = 0; f < mtry_; ++f) {
            const std::size_t feat = features[f];
            for (std::size_t i = 0; i < idx.size(); ++i) {
                vals[i] = {x_[idx[i]][feat], y_[idx[i]]};
            }
            std::sort(vals.begin(), vals.end());

            std::size_t left_n = 0;
            std::size_t left_cases = 0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                ++left_n;
                left_cases += static_cast<std::size_t>(vals[i].second == 1);
                if (vals[i].first == vals[i + 1].first) continue;
                const std::size_t right_n = vals.size() - left_n;
                if (left_n < cfg_.min_leaf || right_n < cfg_.min_leaf) continue;
                const double wl = static_cast<double>(left_n) / static_cast<double>(vals.size());
                const double child = wl * gini(left_cases, left_n) +
                                     (1.0 - wl) * gini(cases - left_cases, right_n);
                const double gain = parent - child;
                if (gain > best.gain + 1e-15) {
                    best.gain = gain;
                    best.feature = static_cast<int>(feat);
                    best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        return best;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<int>& y_;
    const RfConfig& cfg_;
    Rng rng_;
    std::size_t mtry_;
    DecisionTree tree_;
};

double tree_predict(const DecisionTree& tree, const std::vector<double>& x) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& n = tree.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].p_case;
}

}  // namespace

ForestModel rf_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const RfConfig& cfg, std::uint64_t seed, std::size_t n_threads) {
    if (x.empty() || x.size() != y.size()) {
        throw data_error("rf_fit: inputs and labels must be nonempty and equal in length");
    }
    std::size_t cases = 0;
    for (int v : y) cases += static_cast<std::size_t>(v == 1);
    if (cases < 2 || x.size() - cases < 2) {
        throw data_error("rf_fit: need at least 2 examples per class");
    }
    if (cfg.trees == 0) {
        throw config_error("rf_fit: tree count must be positive");
    }

    ForestModel model;
    model.cfg = cfg;
    model.trees.resize(cfg.trees);
    model.in_bag.resize(cfg.trees);

    Rng master(seed);
    std::vector<std::uint64_t> tree_seeds(cfg.trees);
    for (std::size_t t = 0; t < cfg.trees; ++t) tree_seeds[t] = master.spawn(t).seed();

    auto build_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            TreeBuilder builder(x, y, cfg, tree_seeds[t]);
            model.trees[t] = builder.build(model.in_bag[t]);
        }
    };

    if (n_threads <= 1 || cfg.trees < 4) {
        build_range(0, cfg.trees);
    } else {
        const std::size_t workers = std::min<std::size_t>(n_threads, cfg.trees);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * cfg.trees / workers;
            const std::size_t end = (w + 1) * cfg.trees / workers;
            pool.emplace_back(build_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return model;
}

double rf_predict(const ForestModel& model, const std::vector<double>& x) {
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree_predict(tree, x);
    return sum / static_cast<double>(model.trees.size());
}

std::vector<double> rf_oob_predictions(const ForestModel& model,
                                       const std::vector<std::vector<double>>& x) {
    if (model.in_bag.size() != model.trees.size()) {
        throw data_error("rf_oob_predictions: in-bag bookkeeping unavailable");
    }
    std::vector<double> out(x.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double sum = 0.0;
        std::size_t votes = 0;
        for (std::size_t t = 0; t < model.trees.size(); ++t) {
            if (i < model.in_bag[t].size() && model.in_bag[t][i] == 0) {
                sum += tree_predict(model.trees[t], x[i]);
                ++votes;
            }
        }
        if (votes > 0) out[i] = sum / static_cast<double>(votes);
    }
    return out;
}

nlohmann::json ForestModel::to_json() const {
    nlohmann::json trees_json = nlohmann::json::array();
    for (const auto& tree : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p_case});
        }
        trees_json.push_back(std::move(nodes));
    }
    return {{"trees", std::move(trees_json)},
            {"n_trees", cfg.trees},
            {"bootstrap", cfg.bootstrap},
            {"mtry", cfg.mtry},
            {"min_leaf", cfg.min_leaf},
            {"max_depth", cfg.max_depth}};
}

ForestModel ForestModel::from_json(const nlohmann::json& j) {
    ForestModel m;
    m.cfg.trees = j.at("n_trees").get<std::size_t>();
    m.cfg.bootstrap = j.at("bootstrap").get<bool>();
    m.cfg.mtry = j.at("mtry").get<std::size_t>();
    m.cfg.min_leaf = j.at("min_leaf").get<std::size_t>();
    m.cfg.max_depth = j.at("max_depth").get<std::size_t>();
    for (const auto& tree_json : j.at("trees")) {
        DecisionTree tree;
        for (const auto& n : tree_json) {
            TreeNode node;
            node.feature = n.at(0).get<int>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<int>();
            node.right = n.at(3).get<int>();
            node.p_case = n.at(4).get<double>();
            tree.nodes.push_back(node);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

}  // namespace ctg
