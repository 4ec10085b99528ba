#include <doctest.h>

#include <cmath>

#include "advd/nn.hpp"
#include "oracles.hpp"

using namespace advd;

namespace {

Checkpoint random_ckpt(const NetworkSpec& spec, std::uint64_t seed) {
    RngStream rng(seed);
    return init_checkpoint(spec, rng);
}

Tensor random_batch(const NetworkSpec& spec, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> shape{n};
    shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
    Tensor x(shape);
    RngStream rng(seed);
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform();
    return x;
}

std::vector<int> random_labels(std::size_t n, std::size_t K, std::uint64_t seed) {
    std::vector<int> y(n);
    RngStream rng(seed);
    for (auto& v : y) v = int(rng.below(K));
    return y;
}

void check_gradients(const NetworkSpec& spec, std::uint64_t seed, DropoutMode mode) {
    const Checkpoint ckpt = random_ckpt(spec, seed);
    const std::size_t n = 2;
    const Tensor batch = random_batch(spec, n, seed + 1);
    const std::vector<int> labels = random_labels(n, spec.class_count, seed + 2);

    oracles::LossProbe probe{&ckpt, batch, labels, mode, seed + 3};

    RngStream rng(seed + 3);
    const ActivationTrace trace = forward(ckpt, batch, mode, rng);

    const Tensor gi = input_gradient(ckpt, trace, labels);
    const auto fd_in = oracles::finite_difference(
        [&](const std::vector<double>& v) { return probe.loss_with_input(v); },
        batch.values());
    REQUIRE(gi.numel() == fd_in.size());
    for (std::size_t i = 0; i < fd_in.size(); ++i)
        CHECK(oracles::rel_error(gi[i], fd_in[i]) < 1e-4);

    const auto gp = param_gradients(ckpt, trace, labels);
    for (const auto& [name, g] : gp) {
        const auto fd_p = oracles::finite_difference(
            [&](const std::vector<double>& v) { return probe.loss_with_param(name, v); },
            ckpt.weights.at(name).values());
        REQUIRE(g.numel() == fd_p.size());
        for (std::size_t i = 0; i < fd_p.size(); ++i)
            CHECK(oracles::rel_error(g[i], fd_p[i]) < 1e-4);
    }
}

}  // namespace

TEST_CASE("single dense layer matches the hand chain rule") {
    NetworkSpec spec;
    spec.input_shape = {3};
    spec.class_count = 2;
    spec.layers = {LayerSpec::Dense(3, 2)};
    Checkpoint ckpt = random_ckpt(spec, 7);

    const Tensor x({1, 3}, {0.2, -0.5, 0.9});
    const ActivationTrace t = forward_det(ckpt, x);
    const int labels[1] = {1};
    const Tensor g = input_gradient(ckpt, t, labels);

    const Tensor p = softmax(t.logits);
    const Tensor& W = ckpt.weights.at("L0.weight");  // {2,3}
    for (std::size_t i = 0; i < 3; ++i) {
        double expect = 0.0;
        for (std::size_t o = 0; o < 2; ++o)
            expect += W[o * 3 + i] * (p[o] - (o == 1 ? 1.0 : 0.0));
        CHECK(g[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("one-hot output gives a vanishing gradient") {
    NetworkSpec spec;
    spec.input_shape = {2};
    spec.class_count = 2;
    spec.layers = {LayerSpec::Dense(2, 2)};
    Checkpoint ckpt = random_ckpt(spec, 8);
    // a huge margin makes the softmax numerically one-hot
    ckpt.weights.at("L0.weight") = Tensor({2, 2}, {80.0, 0.0, -80.0, 0.0});
    ckpt.weights.at("L0.bias") = Tensor({2});

    const Tensor x({1, 2}, {1.0, 0.5});
    const ActivationTrace t = forward_det(ckpt, x);
    const int labels[1] = {0};
    const Tensor g = input_gradient(ckpt, t, labels);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::fabs(g[i]) < 1e-12);
}

TEST_CASE("zero input kills the weight gradient but not the bias") {
    NetworkSpec spec;
    spec.input_shape = {3};
    spec.class_count = 2;
    spec.layers = {LayerSpec::Dense(3, 2)};
    const Checkpoint ckpt = random_ckpt(spec, 9);

    Tensor x({2, 3});  // zeros
    const ActivationTrace t = forward_det(ckpt, x);
    const std::vector<int> labels{0, 1};
    const auto gp = param_gradients(ckpt, t, labels);
    const Tensor& gw = gp.at("L0.weight");
    for (std::size_t k = 0; k < gw.numel(); ++k) CHECK(gw[k] == 0.0);

    const Tensor p = softmax(t.logits);
    const Tensor& gb = gp.at("L0.bias");
    for (std::size_t o = 0; o < 2; ++o) {
        const double expect = ((p[o] - (o == 0 ? 1 : 0)) + (p[2 + o] - (o == 1 ? 1 : 0))) / 2.0;
        CHECK(gb[o] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("a duplicated sample leaves the mean gradient unchanged") {
    NetworkSpec spec;
    spec.input_shape = {4};
    spec.class_count = 3;
    spec.layers = {LayerSpec::Dense(4, 3)};
    const Checkpoint ckpt = random_ckpt(spec, 10);

    Tensor x1({1, 4}, {0.1, 0.2, 0.3, 0.4});
    Tensor x2({2, 4}, {0.1, 0.2, 0.3, 0.4, 0.1, 0.2, 0.3, 0.4});
    const std::vector<int> y1{2}, y2{2, 2};
    const auto g1 = param_gradients(ckpt, forward_det(ckpt, x1), y1);
    const auto g2 = param_gradients(ckpt, forward_det(ckpt, x2), y2);
    for (const auto& [name, g] : g1) {
        const Tensor& h = g2.at(name);
        for (std::size_t k = 0; k < g.numel(); ++k)
            CHECK(g[k] == doctest::Approx(h[k]).epsilon(1e-12));
    }
}

TEST_CASE("finite differences validate every layer kind") {
    SUBCASE("dense stack") {
        NetworkSpec spec;
        spec.input_shape = {5};
        spec.class_count = 3;
        spec.layers = {LayerSpec::Dense(5, 7), LayerSpec::Relu(), LayerSpec::Dense(7, 3)};
        check_gradients(spec, 100, DropoutMode::off);
    }
    SUBCASE("conv stack") {
        NetworkSpec spec;
        spec.input_shape = {1, 7, 7};
        spec.class_count = 2;
        spec.layers = {LayerSpec::Conv2d(1, 3, 3, 0), LayerSpec::Relu(), LayerSpec::Flatten(),
                       LayerSpec::Dense(75, 2)};
        check_gradients(spec, 200, DropoutMode::off);
    }
    SUBCASE("conv with padding and pooling") {
        NetworkSpec spec;
        spec.input_shape = {2, 6, 6};
        spec.class_count = 3;
        spec.layers = {LayerSpec::Conv2d(2, 4, 3, 1), LayerSpec::Relu(),
                       LayerSpec::MaxPool2d(2, 2), LayerSpec::Flatten(),
                       LayerSpec::Dense(36, 3)};
        check_gradients(spec, 300, DropoutMode::off);
    }
    SUBCASE("dropout with replayed masks") {
        NetworkSpec spec;
        spec.input_shape = {6};
        spec.class_count = 2;
        spec.layers = {LayerSpec::Dense(6, 8), LayerSpec::Relu(), LayerSpec::Dropout(0.4),
                       LayerSpec::Dense(8, 2)};
        check_gradients(spec, 400, DropoutMode::sample);
    }
}

TEST_CASE("label range is enforced") {
    NetworkSpec spec;
    spec.input_shape = {2};
    spec.class_count = 2;
    spec.layers = {LayerSpec::Dense(2, 2)};
    const Checkpoint ckpt = random_ckpt(spec, 11);
    const ActivationTrace t = forward_det(ckpt, Tensor({1, 2}, {0.1, 0.2}));
    const int bad[1] = {2};
    CHECK_THROWS(input_gradient(ckpt, t, bad));
    CHECK_THROWS(param_gradients(ckpt, t, bad));
}
