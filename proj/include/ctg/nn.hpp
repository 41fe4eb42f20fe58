#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctg/rng.hpp"
#include "ctg/tensor.hpp"

namespace ctg {

enum class Activation { relu, sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

double sigmoid(double z);

/// Binary cross-entropy for a single prediction; p is clipped to
/// [1e-15, 1-1e-15] before the logs.
double bce_loss(double p, double y);

/// Normal(0, sqrt(2/fan_in)) samples under a fixed seed.
Tensor he_initialize(const std::vector<std::size_t>& shape, std::size_t fan_in,
                     std::uint64_t seed);

class Layer {
public:
    virtual ~Layer() = default;

    /// Runs the layer and caches whatever backward() needs. rng is only
    /// consulted by layers with train-time randomness (dropout).
    virtual Tensor forward(const Tensor& x, bool training, Rng* rng) = 0;

    /// Gradient of the loss w.r.t. this layer's input, given the gradient
    /// w.r.t. its output; accumulates parameter gradients along the way.
    virtual Tensor backward(const Tensor& grad_out) = 0;

    virtual std::vector<Tensor*> parameters() { return {}; }
    virtual std::vector<Tensor*> gradients() { return {}; }
    virtual void zero_grad() {}

    virtual std::string kind() const = 0;
    virtual std::unique_ptr<Layer> clone() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

std::unique_ptr<Layer> layer_from_json(const nlohmann::json& spec);

/// Fixed affine input scaling x -> (x - mean)/scale, fitted once on the
/// training windows. Not trainable.
class Standardize final : public Layer {
public:
    Standardize() = default;
    Standardize(double mean, double scale);

    void fit(const std::vector<Tensor>& inputs);

    Tensor forward(const Tensor& x, bool training, Rng* rng) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "standardize"; }
    std::unique_ptr<Layer> clone() const override;
    nlohmann::json to_json() const override;

    double mean() const { return mean_; }
    double scale() const { return scale_; }

private:
    double mean_ = 0.0;
    double scale_ = 1.0;
};

/// Valid cross-correlation, stride 1, no padding. Input (C, L), kernels
/// (M, C, K), output (M, L-K+1).
class Conv1D final : public Layer {
public:
    Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel);

    Tensor forward(const Tensor& x, bool training, Rng* rng) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> parameters() override { return {&kernels, &biases}; }
    std::vector<Tensor*> gradients() override { return {&grad_kernels_, &grad_biases_}; }
    void zero_grad() override;
    std::string kind() const override { return "conv1d"; }
    std::unique_ptr<Layer> clone() const override;
    nlohmann::json to_json() const override;

    std::size_t in_channels() const { return in_channels_; }
    std::size_t filters() const { return filters_; }
    std::size_t kernel() const { return kernel_; }

    Tensor kernels;  // (filters, in_channels, kernel)
    Tensor biases;   // (filters)

private:
    std::size_t in_channels_;
    std::size_t filters_;
    std::size_t kernel_;
    Tensor input_;
    Tensor grad_kernels_;
    Tensor grad_biases_;
};

class Relu final : public Layer {
public:
    Tensor forward(const Tensor& x, bool training, Rng* rng) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "relu"; }
    std::unique_ptr<Layer> clone() const override;
    nlohmann::json to_json() const override;

private:
    Tensor input_;
};

/// Non-overlapping max pooling per channel; pool == stride. The trailing
/// remainder shorter than the pool is dropped. Ties keep the lowest index.
class MaxPool1D final : public Layer {
public:
    explicit MaxPool1D(std::size_t pool = 2);

    Tensor forward(const Tensor& x, bool training, Rng* rng) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "maxpool1d"; }
    std::unique_ptr<Layer> clone() const override;
    nlohmann::json to_json() const override;

    std::size_t pool() const { return pool_; }
    const std::vector<std::size_t>& argmax_cache() const { return argmax_; }

private:
    std::size_t pool_;
    std::vector<std::size_t> input_shape_;
    std::vector<std::size_t> argmax_;  // flat input index per output element
};

class Flatten final : public Layer {
public:
    Tensor forward(const Tensor& x, bool training, Rng* rng) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "flatten"; }
    std::unique_ptr<Layer> clone() const override;
    nlohmann::json to_json() const override;

private:
    std::vector<std::size_t> input_shape_;
};

/// Fully connected layer, weights (out, in).
class Dense final : public Layer {
public:
    Dense(std::size_t in, std::size_t out, Activation act);

    Tensor forward(const Tensor& x, bool training, Rng* rng) override;
    Tensor backward(const Tensor& grad_out) override;

    /// Backward entry for the fused sigmoid+BCE head: grad is d(loss)/d(z)
    /// directly, skipping the activation derivative.
    Tensor backward_logits(const Tensor& grad_z);

    std::vector<Tensor*> parameters() override { return {&weights, &biases}; }
    std::vector<Tensor*> gradients() override { return {&grad_weights_, &grad_biases_}; }
    void zero_grad() override;
    std::string kind() const override { return "dense"; }
    std::unique_ptr<Layer> clone() const override;
    nlohmann::json to_json() const override;

    std::size_t in() const { return in_; }
    std::size_t out() const { return out_; }
    Activation activation() const { return act_; }

    Tensor weights;  // (out, in)
    Tensor biases;   // (out)

private:
    Tensor backward_delta(const Tensor& delta);

    std::size_t in_;
    std::size_t out_;
    Activation act_;
    Tensor input_;
    Tensor preact_;
    Tensor output_;
    Tensor grad_weights_;
    Tensor grad_biases_;
};

/// Inverted dropout: train-time mask scaled by 1/(1-rate), identity at
/// inference.
class Dropout final : public Layer {
public:
    explicit Dropout(double rate);

    Tensor forward(const Tensor& x, bool training, Rng* rng) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "dropout"; }
    std::unique_ptr<Layer> clone() const override;
    nlohmann::json to_json() const override;

    double rate() const { return rate_; }

private:
    double rate_;
    std::vector<double> mask_;
};

/// Feed-forward stack ending in a single sigmoid unit; forward yields P(case).
class Network {
public:
    Network() = default;
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    void add(std::unique_ptr<Layer> layer);

    double forward(const Tensor& input, bool training = false, Rng* rng = nullptr);

    /// Exact BCE backprop from the cached forward pass; the output delta is
    /// p - y on the final pre-activation.
    void backward(double target);

    std::vector<Tensor*> parameters();
    std::vector<Tensor*> gradients();
    void zero_grad();
    std::size_t parameter_count() const;

    /// Fit any Standardize layer on the given training inputs.
    void fit_standardize(const std::vector<Tensor>& inputs);

    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
    std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }

    nlohmann::json to_json() const;
    static Network from_json(const nlohmann::json& spec);

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    double last_output_ = 0.0;
    bool forward_done_ = false;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double decay = 0.0;  // lr_t = lr / (1 + decay * (t-1))
};

/// Adam with bias correction; one moment pair per parameter tensor.
class Adam {
public:
    Adam(AdamConfig cfg, const std::vector<Tensor*>& params);

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads);

    std::size_t t() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::size_t t_ = 0;
};

/// Plain momentum SGD with the optional ramp/annealing knobs; all default
/// to off.
struct MomentumSgdConfig {
    double lr = 0.005;
    double momentum_start = 0.5;
    double momentum_stable = 0.0;
    double momentum_ramp = 0.0;   // updates over which momentum moves start->stable
    double rate_annealing = 0.0;  // lr_t = lr / (1 + annealing * t)
    double weight_decay = 0.0;    // L2 added to gradients
};

class MomentumSgd {
public:
    MomentumSgd(MomentumSgdConfig cfg, const std::vector<Tensor*>& params);

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads);

private:
    MomentumSgdConfig cfg_;
    std::vector<Tensor> velocity_;
    std::size_t t_ = 0;
};

enum class OptimizerKind { adam, momentum_sgd };

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch = 32;
    double val_fraction = 0.1;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adam;
    AdamConfig adam;
    MomentumSgdConfig sgd;
};

struct EpochStats {
    double train_logloss = 0.0;
    double train_auc = 0.0;
    double val_logloss = 0.0;
    double val_auc = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;

    EpochStats final_stats() const;
    EpochStats mean_stats() const;
};

/// Mini-batch training with per-epoch seeded shuffling and a stratified
/// validation holdout; no early stopping. targets are 0/1.
TrainReport train_network(Network& net, const std::vector<Tensor>& inputs,
                          const std::vector<double>& targets, const TrainConfig& cfg);

}  // namespace ctg
