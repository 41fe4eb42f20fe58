#include <doctest.h>

#include <cmath>

#include "ctg/errors.hpp"
#include "ctg/models.hpp"
#include "ctg/nn.hpp"
#include "helpers.hpp"

using namespace ctg;
using namespace ctg::testing;

namespace {

// Small random conv net of the family under test; layout mirrors the
// production presets but at toy sizes.
Network random_small_net(Rng& rng, std::size_t len) {
    const std::size_t filters = 1 + rng.index(3);
    const std::size_t kernel = 1 + rng.index(4);
    const std::size_t conv_out = len - kernel + 1;
    const std::size_t flat = filters * (conv_out / 2);
    const std::size_t hidden = 2 + rng.index(3);

    Network net;
    auto conv = std::make_unique<Conv1D>(1, filters, kernel);
    for (std::size_t i = 0; i < conv->kernels.size(); ++i) {
        conv->kernels[i] = 0.5 * rng.normal();
    }
    for (std::size_t i = 0; i < conv->biases.size(); ++i) {
        conv->biases[i] = 0.1 * rng.normal();
    }
    net.add(std::move(conv));
    net.add(std::make_unique<Relu>());
    net.add(std::make_unique<MaxPool1D>(2));
    net.add(std::make_unique<Flatten>());
    auto dense = std::make_unique<Dense>(flat, hidden,
                                         rng.uniform() < 0.5 ? Activation::relu
                                                             : Activation::sigmoid);
    for (std::size_t i = 0; i < dense->weights.size(); ++i) {
        dense->weights[i] = 0.5 * rng.normal();
    }
    net.add(std::move(dense));
    auto head = std::make_unique<Dense>(hidden, 1, Activation::sigmoid);
    for (std::size_t i = 0; i < head->weights.size(); ++i) {
        head->weights[i] = 0.5 * rng.normal();
    }
    net.add(std::move(head));
    return net;
}

}  // namespace

TEST_CASE("conv1d identity, sliding sum and bias-only kernels") {
    Conv1D ident(1, 1, 1);
    ident.kernels[0] = 1.0;
    const Tensor x({1, 4}, {1, 2, 3, 4});
    const Tensor y = ident.forward(x, false, nullptr);
    CHECK(y.values() == std::vector<double>{1, 2, 3, 4});

    Conv1D sum2(1, 1, 2);
    sum2.kernels[0] = 1.0;
    sum2.kernels[1] = 1.0;
    const Tensor y2 = sum2.forward(x, false, nullptr);
    CHECK(y2.values() == std::vector<double>{3, 5, 7});

    Conv1D bias_only(1, 1, 2);
    bias_only.biases[0] = 2.0;
    const Tensor y3 = bias_only.forward(Tensor({1, 2}, {1, 2}), false, nullptr);
    CHECK(y3.values() == std::vector<double>{2});

    CHECK_THROWS_AS(sum2.forward(Tensor({1, 1}, {1}), false, nullptr), std::invalid_argument);
}

TEST_CASE("conv1d matches the naive oracle exactly") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t channels = 1 + rng.index(3);
        const std::size_t filters = 1 + rng.index(4);
        const std::size_t kernel = 1 + rng.index(5);
        const std::size_t len = kernel + rng.index(20);

        Conv1D conv(channels, filters, kernel);
        for (std::size_t i = 0; i < conv.kernels.size(); ++i) conv.kernels[i] = rng.normal();
        for (std::size_t i = 0; i < conv.biases.size(); ++i) conv.biases[i] = rng.normal();
        Tensor x({channels, len});
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();

        const Tensor got = conv.forward(x, false, nullptr);
        const Tensor want = conv_oracle(x, conv.kernels, conv.biases.values());
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i] == want[i]);  // bit-exact: same accumulation order
        }
    }
}

TEST_CASE("relu forward and gradient mask") {
    Relu relu;
    const Tensor y = relu.forward(Tensor({3}, {-1, 0, 2}), false, nullptr);
    CHECK(y.values() == std::vector<double>{0, 0, 2});

    const Tensor all_neg = relu.forward(Tensor({3}, {-5, -2, -0.1}), false, nullptr);
    CHECK(all_neg.values() == std::vector<double>{0, 0, 0});

    Relu masked;
    masked.forward(Tensor({3}, {3, -3, 0}), false, nullptr);
    const Tensor g = masked.backward(Tensor({3}, {1, 1, 1}));
    CHECK(g.values() == std::vector<double>{1, 0, 0});  // subgradient 0 at z == 0
}

TEST_CASE("maxpool forward, ties and backward routing") {
    MaxPool1D pool(2);
    const Tensor y = pool.forward(Tensor({1, 4}, {1, 3, 2, 5}), false, nullptr);
    CHECK(y.values() == std::vector<double>{3, 5});

    const Tensor g = pool.backward(Tensor({1, 2}, {1, 1}));
    CHECK(g.values() == std::vector<double>{0, 1, 0, 1});

    MaxPool1D tie(2);
    tie.forward(Tensor({1, 2}, {7, 7}), false, nullptr);
    CHECK(tie.argmax_cache() == std::vector<std::size_t>{0});  // tie -> lowest index

    MaxPool1D odd(2);
    const Tensor yo = odd.forward(Tensor({1, 5}, {1, 2, 3, 4, 9}), false, nullptr);
    CHECK(yo.values() == std::vector<double>{2, 4});  // trailing element dropped
}

TEST_CASE("maxpool backward conserves and routes all gradient mass") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t channels = 1 + rng.index(3);
        const std::size_t len = 2 + rng.index(20);
        MaxPool1D pool(2);
        Tensor x({channels, len});
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
        const Tensor y = pool.forward(x, false, nullptr);
        Tensor up = Tensor::zeros_like(y);
        double mass = 0.0;
        for (std::size_t i = 0; i < up.size(); ++i) {
            up[i] = rng.uniform();
            mass += up[i];
        }
        const Tensor g = pool.backward(up);
        double routed = 0.0;
        std::size_t nonzero = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            routed += g[i];
            nonzero += g[i] != 0.0 ? 1 : 0;
        }
        CHECK(routed == doctest::Approx(mass).epsilon(1e-12));
        CHECK(nonzero <= y.size());
    }
}

TEST_CASE("bce loss pinned values") {
    CHECK(bce_loss(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bce_loss(0.5, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.5, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.25, 1.0) == doctest::Approx(-std::log(0.25)).epsilon(1e-12));
    CHECK(bce_loss(0.25, 1.0) == doctest::Approx(1.3863).epsilon(1e-4));
}

TEST_CASE("he initialization statistics, zero biases and determinism") {
    const Tensor big = he_initialize({100000}, 2, 33);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < big.size(); ++i) {
        sum += big[i];
        sum_sq += big[i] * big[i];
    }
    const double mean = sum / static_cast<double>(big.size());
    const double var = sum_sq / static_cast<double>(big.size()) - mean * mean;
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));

    const Tensor a = he_initialize({4, 4}, 7, 12);
    const Tensor b = he_initialize({4, 4}, 7, 12);
    CHECK(a.values() == b.values());

    // bias tensors are zero-built by the layers themselves
    Dense dense(3, 2, Activation::relu);
    for (std::size_t i = 0; i < dense.biases.size(); ++i) CHECK(dense.biases[i] == 0.0);
    CHECK_THROWS_AS(he_initialize({2}, 0, 1), config_error);
}

TEST_CASE("network forward architecture shapes and zero-weight output") {
    ModelSpec spec = preset_cnn1d(200);
    Network net = build_network(spec, 5);

    // zero all parameters: sigmoid(0) = 0.5
    for (Tensor* p : net.parameters()) p->fill(0.0);
    Tensor x({1, 200});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 100.0 + static_cast<double>(i % 7);
    CHECK(net.forward(x, false, nullptr) == doctest::Approx(0.5).epsilon(1e-12));

    // W=200: conv(20,100) -> (20,101); pool -> (20,50); flatten 1000 -> 10 -> 1
    std::size_t flat_in = 0;
    for (const auto& layer : net.layers()) {
        if (layer->kind() == "dense") {
            flat_in = dynamic_cast<const Dense&>(*layer).in();
            break;
        }
    }
    CHECK(flat_in == 1000);

    // deterministic inference
    Network net2 = build_network(spec, 5);
    const double p1 = net2.forward(x, false, nullptr);
    const double p2 = net2.forward(x, false, nullptr);
    CHECK(p1 == p2);
}

TEST_CASE("network backward requires a forward pass") {
    Network net = build_network(preset_cnn1d(8 * 2), 3);
    CHECK_THROWS_AS(net.backward(1.0), std::logic_error);
}

TEST_CASE("gradient check on random small networks") {
    Rng rng(2718);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t len = trial % 2 == 0 ? 8 : 16;
        Network net = random_small_net(rng, len);
        Tensor x({1, len});
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
        const double target = trial % 2 == 0 ? 1.0 : 0.0;
        const double err = max_gradient_error(net, x, target);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("saturated head still backpropagates p - y") {
    // huge positive logit saturates sigmoid to 1.0 exactly; the fused head
    // must still produce a finite, correct delta
    Network net;
    auto head = std::make_unique<Dense>(1, 1, Activation::sigmoid);
    head->weights[0] = 50.0;
    net.add(std::move(head));
    const double p = net.forward(Tensor({1}, {1.0}), false, nullptr);
    CHECK(p == 1.0);
    net.zero_grad();
    net.forward(Tensor({1}, {1.0}), false, nullptr);
    net.backward(0.0);
    auto grads = net.gradients();
    CHECK((*grads[0])[0] == doctest::Approx(1.0));  // dL/dw = (p - y) * x = 1
}

TEST_CASE("zero input window zeroes conv kernel gradients but not biases") {
    Network net = build_network(preset_cnn1d(16), 2);
    // drop the standardize layer so the zero input stays exactly zero
    auto& layers = net.layers();
    if (layers.front()->kind() == "standardize") {
        layers.erase(layers.begin());
    }
    // positive biases keep the ReLU open at z = b; kernel grads are still
    // x (x) delta = 0
    for (auto& layer : layers) {
        if (layer->kind() == "conv1d") {
            dynamic_cast<Conv1D&>(*layer).biases.fill(0.5);
        }
    }
    net.zero_grad();
    net.forward(Tensor({1, 16}), false, nullptr);
    net.backward(1.0);
    for (auto& layer : layers) {
        if (layer->kind() != "conv1d") continue;
        auto grads = layer->gradients();
        const Tensor& gk = *grads[0];
        const Tensor& gb = *grads[1];
        for (std::size_t i = 0; i < gk.size(); ++i) CHECK(gk[i] == 0.0);
        double bias_mass = 0.0;
        for (std::size_t i = 0; i < gb.size(); ++i) bias_mass += std::abs(gb[i]);
        CHECK(bias_mass > 0.0);
    }
}

TEST_CASE("adam single-step hand computation") {
    Tensor theta({1}, {0.0});
    Tensor grad({1}, {1.0});
    AdamConfig cfg;
    cfg.lr = 0.1;
    Adam adam(cfg, {&theta});
    adam.step({&theta}, {&grad});
    CHECK(theta[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    Tensor theta({3}, {1.0, -2.0, 3.0});
    Tensor grad({3});
    Adam adam(AdamConfig{}, {&theta});
    adam.step({&theta}, {&grad});
    CHECK(theta.values() == std::vector<double>{1.0, -2.0, 3.0});
}

TEST_CASE("adam updates tensors independently") {
    Tensor a({2}, {0.0, 0.0});
    Tensor b({1}, {0.0});
    Tensor ga({2}, {1.0, -1.0});
    Tensor gb({1}, {1.0});
    Adam joint(AdamConfig{.lr = 0.01}, {&a, &b});
    joint.step({&a, &b}, {&ga, &gb});

    Tensor a2({2}, {0.0, 0.0});
    Tensor ga2({2}, {1.0, -1.0});
    Adam solo(AdamConfig{.lr = 0.01}, {&a2});
    solo.step({&a2}, {&ga2});
    CHECK(a.values() == a2.values());
    CHECK(b[0] == a[0]);
}

TEST_CASE("adam rejects non-finite gradients") {
    Tensor theta({1}, {0.0});
    Tensor grad({1}, {std::numeric_limits<double>::quiet_NaN()});
    Adam adam(AdamConfig{}, {&theta});
    CHECK_THROWS_AS(adam.step({&theta}, {&grad}), numeric_error);
}

TEST_CASE("momentum sgd reduces a quadratic") {
    Tensor theta({1}, {5.0});
    MomentumSgdConfig cfg;
    cfg.lr = 0.05;
    cfg.momentum_start = 0.5;
    MomentumSgd sgd(cfg, {&theta});
    for (int i = 0; i < 200; ++i) {
        Tensor grad({1}, {2.0 * (theta[0] - 3.0)});
        sgd.step({&theta}, {&grad});
    }
    CHECK(theta[0] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("one-sample adam training strictly reduces the loss") {
    Network net = build_network(preset_cnn1d(16), 17);
    Tensor x({1, 16});
    Rng rng(3);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 140.0 + rng.normal();
    net.fit_standardize({x});

    auto params = net.parameters();
    auto grads = net.gradients();
    Adam adam(AdamConfig{.lr = 1e-3}, params);
    const double initial = bce_loss(net.forward(x, false, nullptr), 1.0);
    for (int step = 0; step < 200; ++step) {
        net.zero_grad();
        net.forward(x, false, nullptr);
        net.backward(1.0);
        adam.step(params, grads);
    }
    const double final_loss = bce_loss(net.forward(x, false, nullptr), 1.0);
    CHECK(final_loss < initial);
}

TEST_CASE("dropout trains stochastically and is off at inference") {
    Dropout drop(0.5);
    Tensor x({1000});
    x.fill(1.0);
    Rng rng(6);
    const Tensor once = drop.forward(x, true, &rng);
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < once.size(); ++i) {
        if (once[i] == 0.0) ++zeros;
        else CHECK(once[i] == doctest::Approx(2.0));  // inverted scaling
    }
    CHECK(zeros > 400);
    CHECK(zeros < 600);

    const Tensor off = drop.forward(x, false, nullptr);
    CHECK(off.values() == x.values());
}

TEST_CASE("train epochs=0 returns the untouched model and empty report") {
    const auto corpus = separable_corpus(10, 16, 5);
    ModelSpec spec = preset_cnn1d(16);
    spec.set("epochs", 0);
    auto [model, report] = train_model(spec, corpus, 1, 2);
    CHECK(report.epochs.empty());

    const Network reference = build_network(spec, 1);
    const auto& trained_net = std::get<Network>(model.model);
    const auto ref_json = reference.to_json().dump();
    CHECK(trained_net.to_json().dump() == ref_json);
}

TEST_CASE("training is deterministic under a fixed seed") {
    const auto corpus = separable_corpus(12, 16, 9);
    ModelSpec spec = preset_cnn1d(16);
    spec.set("epochs", 5);
    spec.set("batch", 4);

    auto [m1, r1] = train_model(spec, corpus, 10, 20);
    auto [m2, r2] = train_model(spec, corpus, 10, 20);
    REQUIRE(r1.epochs.size() == r2.epochs.size());
    for (std::size_t e = 0; e < r1.epochs.size(); ++e) {
        CHECK(r1.epochs[e].train_logloss == r2.epochs[e].train_logloss);
        CHECK(r1.epochs[e].train_auc == r2.epochs[e].train_auc);
        CHECK(r1.epochs[e].val_logloss == r2.epochs[e].val_logloss);
        CHECK(r1.epochs[e].val_auc == r2.epochs[e].val_auc);
    }
    CHECK(m1.to_json().dump() == m2.to_json().dump());
}

TEST_CASE("training a small cnn separates the synthetic corpus") {
    const auto corpus = separable_corpus(30, 32, 21);
    ModelSpec spec = preset_cnn1d(32);
    spec.set("epochs", 150);
    auto [model, report] = train_model(spec, corpus, 4, 8);
    std::size_t correct = 0;
    for (const auto& w : corpus) {
        const double p = model.predict(w.samples);
        const bool predicted_case = p >= 0.5;
        correct += predicted_case == (w.label == Label::case_) ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(corpus.size()) >= 0.9);
    CHECK(report.epochs.size() == 150);
    // per-epoch log holds finite numbers
    for (const auto& e : report.epochs) {
        CHECK(std::isfinite(e.train_logloss));
        CHECK(std::isfinite(e.train_auc));
    }
}

TEST_CASE("network serialization round-trips predictions") {
    const auto corpus = separable_corpus(8, 16, 31);
    ModelSpec spec = preset_cnn1d(16);
    spec.set("epochs", 3);
    auto [model, report] = train_model(spec, corpus, 6, 7);

    const auto j = model.to_json();
    const TrainedModel back = TrainedModel::from_json(j);
    for (const auto& w : corpus) {
        CHECK(model.predict(w.samples) == back.predict(w.samples));
    }
}
