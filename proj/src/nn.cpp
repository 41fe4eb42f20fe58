#include "ctg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ctg/errors.hpp"
#include "ctg/metrics.hpp"

namespace ctg {

namespace {

constexpr double kProbClip = 1e-15;

std::vector<double> tensor_values(const nlohmann::json& j) {
    return j.get<std::vector<double>>();
}

}  // namespace

std::string to_string(Activation a) {
    return a == Activation::relu ? "relu" : "sigmoid";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    throw data_error("activation_from_string: unknown activation '" + s + "'");
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double bce_loss(double p, double y) {
    const double q = std::clamp(p, kProbClip, 1.0 - kProbClip);
    return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

Tensor he_initialize(const std::vector<std::size_t>& shape, std::size_t fan_in,
                     std::uint64_t seed) {
    if (fan_in < 1) {
        throw config_error("he_initialize: fan_in must be at least 1");
    }
    Tensor t(shape);
    Rng rng(seed);
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = sd * rng.normal();
    return t;
}

// ---------------------------------------------------------------------------
// Standardize

Standardize::Standardize(double mean, double scale) : mean_(mean), scale_(scale) {
    if (scale_ <= 0.0) {
        throw config_error("Standardize: scale must be positive");
    }
}

void Standardize::fit(const std::vector<Tensor>& inputs) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : inputs) {
        for (std::size_t i = 0; i < t.size(); ++i) sum += t[i];
        n += t.size();
    }
    if (n == 0) return;
    mean_ = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& t : inputs) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double d = t[i] - mean_;
            ss += d * d;
        }
    }
    scale_ = std::sqrt(ss / static_cast<double>(n));
    if (scale_ < 1e-12) scale_ = 1.0;  // constant input, centering is enough
}

Tensor Standardize::forward(const Tensor& x, bool, Rng*) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (y[i] - mean_) / scale_;
    return y;
}

Tensor Standardize::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] /= scale_;
    return g;
}

std::unique_ptr<Layer> Standardize::clone() const {
    return std::make_unique<Standardize>(*this);
}

nlohmann::json Standardize::to_json() const {
    return {{"kind", "standardize"}, {"mean", mean_}, {"scale", scale_}};
}

// ---------------------------------------------------------------------------
// Conv1D

Conv1D::Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel)
    : kernels({filters, in_channels, kernel}),
      biases({filters}),
      in_channels_(in_channels),
      filters_(filters),
      kernel_(kernel),
      grad_kernels_({filters, in_channels, kernel}),
      grad_biases_({filters}) {
    if (filters < 1 || in_channels < 1 || kernel < 1) {
        throw config_error("Conv1D: filters, channels and kernel must be positive");
    }
}

Tensor Conv1D::forward(const Tensor& x, bool, Rng*) {
    if (x.rank() != 2 || x.extent(0) != in_channels_) {
        throw std::invalid_argument("Conv1D::forward: expected input shape (" +
                                    std::to_string(in_channels_) + ", L)");
    }
    const std::size_t len = x.extent(1);
    if (len < kernel_) {
        throw std::invalid_argument("Conv1D::forward: input length " + std::to_string(len) +
                                    " shorter than kernel " + std::to_string(kernel_));
    }
    input_ = x;
    const std::size_t out_len = len - kernel_ + 1;
    Tensor z({filters_, out_len});
    for (std::size_t j = 0; j < filters_; ++j) {
        for (std::size_t t = 0; t < out_len; ++t) {
            double acc = biases[j];
            for (std::size_t i = 0; i < in_channels_; ++i) {
                const double* row = x.data() + i * len + t;
                const double* ker = kernels.data() + (j * in_channels_ + i) * kernel_;
                for (std::size_t tau = 0; tau < kernel_; ++tau) {
                    acc += row[tau] * ker[tau];
                }
            }
            z.at(j, t) = acc;
        }
    }
    return z;
}

Tensor Conv1D::backward(const Tensor& grad_out) {
    if (input_.empty()) {
        throw std::logic_error("Conv1D::backward: forward pass required first");
    }
    const std::size_t len = input_.extent(1);
    const std::size_t out_len = len - kernel_ + 1;
    Tensor grad_in({in_channels_, len});
    for (std::size_t j = 0; j < filters_; ++j) {
        for (std::size_t t = 0; t < out_len; ++t) {
            const double delta = grad_out.at(j, t);
            grad_biases_[j] += delta;
            for (std::size_t i = 0; i < in_channels_; ++i) {
                const double* row = input_.data() + i * len + t;
                double* grow = grad_in.data() + i * len + t;
                double* gker = grad_kernels_.data() + (j * in_channels_ + i) * kernel_;
                const double* ker = kernels.data() + (j * in_channels_ + i) * kernel_;
                for (std::size_t tau = 0; tau < kernel_; ++tau) {
                    gker[tau] += delta * row[tau];
                    grow[tau] += delta * ker[tau];
                }
            }
        }
    }
    return grad_in;
}

void Conv1D::zero_grad() {
    grad_kernels_.fill(0.0);
    grad_biases_.fill(0.0);
}

std::unique_ptr<Layer> Conv1D::clone() const {
    return std::make_unique<Conv1D>(*this);
}

nlohmann::json Conv1D::to_json() const {
    return {{"kind", "conv1d"},
            {"in_channels", in_channels_},
            {"filters", filters_},
            {"kernel", kernel_},
            {"kernels", kernels.values()},
            {"biases", biases.values()}};
}

// ---------------------------------------------------------------------------
// Relu

Tensor Relu::forward(const Tensor& x, bool, Rng*) {
    input_ = x;
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(0.0, y[i]);
    return y;
}

Tensor Relu::backward(const Tensor& grad_out) {
    if (input_.size() != grad_out.size()) {
        throw std::logic_error("Relu::backward: forward pass required first");
    }
    Tensor g = grad_out;
    // subgradient 0 at z == 0
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (input_[i] <= 0.0) g[i] = 0.0;
    }
    return g;
}

std::unique_ptr<Layer> Relu::clone() const { return std::make_unique<Relu>(*this); }

nlohmann::json Relu::to_json() const { return {{"kind", "relu"}}; }

// ---------------------------------------------------------------------------
// MaxPool1D

MaxPool1D::MaxPool1D(std::size_t pool) : pool_(pool) {
    if (pool_ < 2) {
        throw config_error("MaxPool1D: pool must be at least 2");
    }
}

Tensor MaxPool1D::forward(const Tensor& x, bool, Rng*) {
    if (x.rank() != 2) {
        throw std::invalid_argument("MaxPool1D::forward: expected input shape (C, L)");
    }
    const std::size_t channels = x.extent(0);
    const std::size_t len = x.extent(1);
    if (len < pool_) {
        throw std::invalid_argument("MaxPool1D::forward: input length " + std::to_string(len) +
                                    " shorter than pool " + std::to_string(pool_));
    }
    input_shape_ = x.shape();
    const std::size_t out_len = len / pool_;
    Tensor y({channels, out_len});
    argmax_.assign(channels * out_len, 0);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t u = 0; u < out_len; ++u) {
            std::size_t best = c * len + u * pool_;
            double best_v = x[best];
            for (std::size_t p = 1; p < pool_; ++p) {
                const std::size_t idx = c * len + u * pool_ + p;
                if (x[idx] > best_v) {  // tie keeps the lowest index
                    best_v = x[idx];
                    best = idx;
                }
            }
            y.at(c, u) = best_v;
            argmax_[c * out_len + u] = best;
        }
    }
    return y;
}

Tensor MaxPool1D::backward(const Tensor& grad_out) {
    if (input_shape_.empty()) {
        throw std::logic_error("MaxPool1D::backward: forward pass required first");
    }
    Tensor grad_in(input_shape_);
    for (std::size_t i = 0; i < grad_out.size(); ++i) {
        grad_in[argmax_[i]] += grad_out[i];
    }
    return grad_in;
}

std::unique_ptr<Layer> MaxPool1D::clone() const {
    return std::make_unique<MaxPool1D>(*this);
}

nlohmann::json MaxPool1D::to_json() const {
    return {{"kind", "maxpool1d"}, {"pool", pool_}};
}

// ---------------------------------------------------------------------------
// Flatten

Tensor Flatten::forward(const Tensor& x, bool, Rng*) {
    input_shape_ = x.shape();
    return x.reshaped({x.size()});
}

Tensor Flatten::backward(const Tensor& grad_out) {
    if (input_shape_.empty()) {
        throw std::logic_error("Flatten::backward: forward pass required first");
    }
    return grad_out.reshaped(input_shape_);
}

std::unique_ptr<Layer> Flatten::clone() const { return std::make_unique<Flatten>(*this); }

nlohmann::json Flatten::to_json() const { return {{"kind", "flatten"}}; }

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::size_t in, std::size_t out, Activation act)
    : weights({out, in}),
      biases({out}),
      in_(in),
      out_(out),
      act_(act),
      grad_weights_({out, in}),
      grad_biases_({out}) {
    if (in < 1 || out < 1) {
        throw config_error("Dense: in and out must be positive");
    }
}

Tensor Dense::forward(const Tensor& x, bool, Rng*) {
    if (x.size() != in_) {
        throw std::invalid_argument("Dense::forward: expected " + std::to_string(in_) +
                                    " inputs, got " + std::to_string(x.size()));
    }
    input_ = x.rank() == 1 ? x : x.reshaped({x.size()});
    preact_ = Tensor({out_});
    for (std::size_t o = 0; o < out_; ++o) {
        double acc = biases[o];
        const double* w = weights.data() + o * in_;
        for (std::size_t i = 0; i < in_; ++i) acc += w[i] * input_[i];
        preact_[o] = acc;
    }
    output_ = preact_;
    for (std::size_t o = 0; o < out_; ++o) {
        output_[o] = act_ == Activation::relu ? std::max(0.0, preact_[o])
                                              : sigmoid(preact_[o]);
    }
    return output_;
}

Tensor Dense::backward_delta(const Tensor& delta) {
    Tensor grad_in({in_});
    for (std::size_t o = 0; o < out_; ++o) {
        const double d = delta[o];
        grad_biases_[o] += d;
        double* gw = grad_weights_.data() + o * in_;
        const double* w = weights.data() + o * in_;
        for (std::size_t i = 0; i < in_; ++i) {
            gw[i] += d * input_[i];
            grad_in[i] += d * w[i];
        }
    }
    return grad_in;
}

Tensor Dense::backward(const Tensor& grad_out) {
    if (preact_.empty()) {
        throw std::logic_error("Dense::backward: forward pass required first");
    }
    Tensor delta = grad_out;
    for (std::size_t o = 0; o < out_; ++o) {
        if (act_ == Activation::relu) {
            if (preact_[o] <= 0.0) delta[o] = 0.0;
        } else {
            delta[o] *= output_[o] * (1.0 - output_[o]);
        }
    }
    return backward_delta(delta);
}

Tensor Dense::backward_logits(const Tensor& grad_z) {
    if (preact_.empty()) {
        throw std::logic_error("Dense::backward_logits: forward pass required first");
    }
    return backward_delta(grad_z);
}

void Dense::zero_grad() {
    grad_weights_.fill(0.0);
    grad_biases_.fill(0.0);
}

std::unique_ptr<Layer> Dense::clone() const { return std::make_unique<Dense>(*this); }

nlohmann::json Dense::to_json() const {
    return {{"kind", "dense"},       {"in", in_},
            {"out", out_},           {"activation", to_string(act_)},
            {"weights", weights.values()}, {"biases", biases.values()}};
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(double rate) : rate_(rate) {
    if (rate_ < 0.0 || rate_ >= 1.0) {
        throw config_error("Dropout: rate must be in [0,1)");
    }
}

Tensor Dropout::forward(const Tensor& x, bool training, Rng* rng) {
    if (!training || rate_ == 0.0) {
        mask_.clear();
        return x;
    }
    if (rng == nullptr) {
        throw std::logic_error("Dropout::forward: training mode needs an rng");
    }
    const double keep_scale = 1.0 / (1.0 - rate_);
    mask_.resize(x.size());
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
        mask_[i] = rng->uniform() >= rate_ ? keep_scale : 0.0;
        y[i] *= mask_[i];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& grad_out) {
    if (mask_.empty()) return grad_out;  // inference or rate 0
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask_[i];
    return g;
}

std::unique_ptr<Layer> Dropout::clone() const { return std::make_unique<Dropout>(*this); }

nlohmann::json Dropout::to_json() const {
    return {{"kind", "dropout"}, {"rate", rate_}};
}

// ---------------------------------------------------------------------------
// Layer factory

std::unique_ptr<Layer> layer_from_json(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "standardize") {
        return std::make_unique<Standardize>(spec.at("mean").get<double>(),
                                             spec.at("scale").get<double>());
    }
    if (kind == "conv1d") {
        auto layer = std::make_unique<Conv1D>(spec.at("in_channels").get<std::size_t>(),
                                              spec.at("filters").get<std::size_t>(),
                                              spec.at("kernel").get<std::size_t>());
        layer->kernels = Tensor(layer->kernels.shape(), tensor_values(spec.at("kernels")));
        layer->biases = Tensor(layer->biases.shape(), tensor_values(spec.at("biases")));
        return layer;
    }
    if (kind == "relu") return std::make_unique<Relu>();
    if (kind == "maxpool1d") {
        return std::make_unique<MaxPool1D>(spec.at("pool").get<std::size_t>());
    }
    if (kind == "flatten") return std::make_unique<Flatten>();
    if (kind == "dense") {
        auto layer = std::make_unique<Dense>(
            spec.at("in").get<std::size_t>(), spec.at("out").get<std::size_t>(),
            activation_from_string(spec.at("activation").get<std::string>()));
        layer->weights = Tensor(layer->weights.shape(), tensor_values(spec.at("weights")));
        layer->biases = Tensor(layer->biases.shape(), tensor_values(spec.at("biases")));
        return layer;
    }
    if (kind == "dropout") {
        return std::make_unique<Dropout>(spec.at("rate").get<double>());
    }
    throw data_error("layer_from_json: unknown layer kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Network

Network::Network(const Network& other)
    : last_output_(other.last_output_), forward_done_(other.forward_done_) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        Network copy(other);
        *this = std::move(copy);
    }
    return *this;
}

void Network::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

double Network::forward(const Tensor& input, bool training, Rng* rng) {
    if (layers_.empty()) {
        throw std::logic_error("Network::forward: empty network");
    }
    Tensor x = input;
    for (auto& layer : layers_) {
        x = layer->forward(x, training, rng);
    }
    if (x.size() != 1) {
        throw std::invalid_argument("Network::forward: final layer produced " +
                                    std::to_string(x.size()) + " outputs, expected 1");
    }
    last_output_ = x[0];
    forward_done_ = true;
    return last_output_;
}

void Network::backward(double target) {
    if (!forward_done_) {
        throw std::logic_error("Network::backward: forward pass required first");
    }
    auto* head = dynamic_cast<Dense*>(layers_.back().get());
    if (head == nullptr || head->activation() != Activation::sigmoid || head->out() != 1) {
        throw std::logic_error(
            "Network::backward: final layer must be a single-unit sigmoid dense head");
    }
    // d(BCE)/d(logit) of the sigmoid head
    Tensor grad = head->backward_logits(Tensor({1}, {last_output_ - target}));
    for (std::size_t i = layers_.size() - 1; i-- > 0;) {
        grad = layers_[i]->backward(grad);
    }
    forward_done_ = false;
}

std::vector<Tensor*> Network::parameters() {
    std::vector<Tensor*> params;
    for (auto& l : layers_) {
        for (Tensor* t : l->parameters()) params.push_back(t);
    }
    return params;
}

std::vector<Tensor*> Network::gradients() {
    std::vector<Tensor*> grads;
    for (auto& l : layers_) {
        for (Tensor* t : l->gradients()) grads.push_back(t);
    }
    return grads;
}

void Network::zero_grad() {
    for (auto& l : layers_) l->zero_grad();
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) {
        for (Tensor* t : const_cast<Layer&>(*l).parameters()) n += t->size();
    }
    return n;
}

void Network::fit_standardize(const std::vector<Tensor>& inputs) {
    for (auto& l : layers_) {
        if (auto* s = dynamic_cast<Standardize*>(l.get())) s->fit(inputs);
    }
}

nlohmann::json Network::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : layers_) layers.push_back(l->to_json());
    return {{"layers", layers}};
}

Network Network::from_json(const nlohmann::json& spec) {
    Network net;
    for (const auto& l : spec.at("layers")) net.add(layer_from_json(l));
    return net;
}

// ---------------------------------------------------------------------------
// Optimizers

Adam::Adam(AdamConfig cfg, const std::vector<Tensor*>& params) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* p : params) {
        m_.push_back(Tensor::zeros_like(*p));
        v_.push_back(Tensor::zeros_like(*p));
    }
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw std::logic_error("Adam::step: parameter list changed since construction");
    }
    ++t_;
    const double lr_t = cfg_.lr / (1.0 + cfg_.decay * static_cast<double>(t_ - 1));
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i];
            if (!std::isfinite(gi)) {
                throw numeric_error("Adam::step: non-finite gradient at step " +
                                    std::to_string(t_));
            }
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= lr_t * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
        }
    }
}

MomentumSgd::MomentumSgd(MomentumSgdConfig cfg, const std::vector<Tensor*>& params)
    : cfg_(cfg) {
    velocity_.reserve(params.size());
    for (const Tensor* p : params) velocity_.push_back(Tensor::zeros_like(*p));
}

void MomentumSgd::step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads) {
    if (params.size() != velocity_.size() || grads.size() != velocity_.size()) {
        throw std::logic_error("MomentumSgd::step: parameter list changed since construction");
    }
    ++t_;
    const double progress =
        cfg_.momentum_ramp > 0.0
            ? std::min(1.0, static_cast<double>(t_) / cfg_.momentum_ramp)
            : 0.0;
    const double momentum =
        cfg_.momentum_start + (cfg_.momentum_stable - cfg_.momentum_start) * progress;
    const double lr_t = cfg_.lr / (1.0 + cfg_.rate_annealing * static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        Tensor& v = velocity_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i] + cfg_.weight_decay * p[i];
            if (!std::isfinite(gi)) {
                throw numeric_error("MomentumSgd::step: non-finite gradient at step " +
                                    std::to_string(t_));
            }
            v[i] = momentum * v[i] - lr_t * gi;
            p[i] += v[i];
        }
    }
}

// ---------------------------------------------------------------------------
// Training loop

EpochStats TrainReport::final_stats() const {
    return epochs.empty() ? EpochStats{} : epochs.back();
}

EpochStats TrainReport::mean_stats() const {
    EpochStats mean;
    if (epochs.empty()) return mean;
    for (const auto& e : epochs) {
        mean.train_logloss += e.train_logloss;
        mean.train_auc += e.train_auc;
        mean.val_logloss += e.val_logloss;
        mean.val_auc += e.val_auc;
    }
    const double n = static_cast<double>(epochs.size());
    mean.train_logloss /= n;
    mean.train_auc /= n;
    mean.val_logloss /= n;
    mean.val_auc /= n;
    return mean;
}

namespace {

ScoredSet score_set(Network& net, const std::vector<Tensor>& inputs,
                    const std::vector<double>& targets,
                    const std::vector<std::size_t>& idx) {
    ScoredSet s;
    s.scores.reserve(idx.size());
    s.labels.reserve(idx.size());
    for (std::size_t i : idx) {
        s.scores.push_back(net.forward(inputs[i], false, nullptr));
        s.labels.push_back(targets[i] >= 0.5 ? Label::case_ : Label::control);
    }
    return s;
}

double safe_auc(const ScoredSet& s) {
    try {
        return auc_rank(s);
    } catch (const data_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

TrainReport train_network(Network& net, const std::vector<Tensor>& inputs,
                          const std::vector<double>& targets, const TrainConfig& cfg) {
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw config_error("train_network: inputs and targets must be nonempty and equal");
    }
    if (cfg.val_fraction <= 0.0 || cfg.val_fraction >= 1.0) {
        throw config_error("train_network: val_fraction must be in (0,1)");
    }
    if (cfg.batch < 1) {
        throw config_error("train_network: batch must be at least 1");
    }

    TrainReport report;
    if (cfg.epochs == 0) return report;  // untouched model, empty report

    Rng master(cfg.seed);
    Rng split_rng = master.spawn(0);
    Rng shuffle_rng = master.spawn(1);
    Rng dropout_rng = master.spawn(2);

    // stratified validation holdout
    std::vector<std::size_t> case_idx;
    std::vector<std::size_t> control_idx;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        (targets[i] >= 0.5 ? case_idx : control_idx).push_back(i);
    }
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    for (auto* cls : {&case_idx, &control_idx}) {
        split_rng.shuffle(*cls);
        auto val_n = static_cast<std::size_t>(
            std::llround(cfg.val_fraction * static_cast<double>(cls->size())));
        val_n = std::min(val_n, cls->size());
        for (std::size_t i = 0; i < cls->size(); ++i) {
            (i < val_n ? val_idx : train_idx).push_back((*cls)[i]);
        }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    if (train_idx.empty()) {
        throw config_error("train_network: validation holdout consumed all training data");
    }

    std::vector<Tensor> fit_inputs;
    fit_inputs.reserve(train_idx.size());
    for (std::size_t i : train_idx) fit_inputs.push_back(inputs[i]);
    net.fit_standardize(fit_inputs);
    fit_inputs.clear();
    fit_inputs.shrink_to_fit();

    auto params = net.parameters();
    auto grads = net.gradients();
    Adam adam(cfg.adam, params);
    MomentumSgd sgd(cfg.sgd, params);

    std::vector<std::size_t> order = train_idx;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch) {
            const std::size_t end = std::min(begin + cfg.batch, order.size());
            net.zero_grad();
            double batch_loss = 0.0;
            for (std::size_t b = begin; b < end; ++b) {
                const std::size_t i = order[b];
                const double p = net.forward(inputs[i], true, &dropout_rng);
                batch_loss += bce_loss(p, targets[i]);
                net.backward(targets[i]);
            }
            if (!std::isfinite(batch_loss)) {
                throw numeric_error("train_network: non-finite loss at epoch " +
                                    std::to_string(epoch));
            }
            const double inv = 1.0 / static_cast<double>(end - begin);
            for (Tensor* g : grads) {
                for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] *= inv;
            }
            if (cfg.optimizer == OptimizerKind::adam) {
                adam.step(params, grads);
            } else {
                sgd.step(params, grads);
            }
        }

        EpochStats stats;
        const ScoredSet train_scored = score_set(net, inputs, targets, train_idx);
        stats.train_logloss = logloss(train_scored);
        stats.train_auc = safe_auc(train_scored);
        if (!val_idx.empty()) {
            const ScoredSet val_scored = score_set(net, inputs, targets, val_idx);
            stats.val_logloss = logloss(val_scored);
            stats.val_auc = safe_auc(val_scored);
        } else {
            stats.val_logloss = std::numeric_limits<double>::quiet_NaN();
            stats.val_auc = std::numeric_limits<double>::quiet_NaN();
        }
        if (!std::isfinite(stats.train_logloss)) {
            throw numeric_error("train_network: non-finite loss at epoch " +
                                std::to_string(epoch));
        }
        report.epochs.push_back(stats);
    }
    return report;
}

}  // namespace ctg
