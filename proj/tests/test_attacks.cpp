#include <doctest.h>

#include <cmath>

#include "advd/attacks.hpp"

using namespace advd;

namespace {

// logits [0, w*x]: a logistic model on one pixel
Checkpoint logistic_toy(double w) {
    NetworkSpec spec;
    spec.input_shape = {1};
    spec.class_count = 2;
    spec.layers = {LayerSpec::Dense(1, 2)};
    RngStream rng(1);
    Checkpoint ckpt = init_checkpoint(spec, rng);
    ckpt.weights.at("L0.weight") = Tensor({2, 1}, {0.0, w});
    ckpt.weights.at("L0.bias") = Tensor({2});
    return ckpt;
}

Checkpoint linear_2d(const std::vector<double>& w_rows, const std::vector<double>& bias) {
    NetworkSpec spec;
    spec.input_shape = {2};
    spec.class_count = 2;
    spec.layers = {LayerSpec::Dense(2, 2)};
    RngStream rng(2);
    Checkpoint ckpt = init_checkpoint(spec, rng);
    ckpt.weights.at("L0.weight") = Tensor({2, 2}, w_rows);
    ckpt.weights.at("L0.bias") = Tensor({2}, bias);
    return ckpt;
}

Checkpoint random_small_net(std::uint64_t seed) {
    NetworkSpec spec;
    spec.input_shape = {8};
    spec.class_count = 3;
    spec.layers = {LayerSpec::Dense(8, 12), LayerSpec::Relu(), LayerSpec::Dense(12, 3)};
    RngStream rng(seed);
    return init_checkpoint(spec, rng);
}

}  // namespace

TEST_CASE("linf_to_l2 closed forms") {
    CHECK(linf_to_l2(0.0, 784) == 0.0);
    const double factor = std::sqrt(2.0 / (3.14159265358979323846 * 2.71828182845904523536));
    CHECK(linf_to_l2(0.30, 784) == doctest::Approx(0.30 * 28.0 * factor).epsilon(1e-12));
    CHECK(linf_to_l2(0.30, 784) == doctest::Approx(4.065).epsilon(1e-3));
    CHECK(linf_to_l2(0.02, 3072) == doctest::Approx(0.5365).epsilon(1e-3));
    CHECK_THROWS(linf_to_l2(-0.1, 10));
    CHECK_THROWS(linf_to_l2(0.1, 0));
}

TEST_CASE("fgsm") {
    SUBCASE("eps=0 returns the input unchanged") {
        const Checkpoint ckpt = logistic_toy(2.0);
        const Tensor x({1, 1}, {0.3});
        const AttackOutcome out = fgsm(ckpt, x, 1, 0.0);
        CHECK(out.x_adv[0] == 0.3);
        CHECK(out.final_linf == 0.0);
    }
    SUBCASE("1-D logistic toy steps downhill") {
        // w=2, y=1: dL/dx = (p-1)*w < 0, so the attack subtracts eps
        const Checkpoint ckpt = logistic_toy(2.0);
        const AttackOutcome out = fgsm(ckpt, Tensor({1, 1}, {0.3}), 1, 0.1);
        CHECK(out.x_adv[0] == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("budget is respected exactly") {
        const Checkpoint ckpt = random_small_net(3);
        RngStream rng(4);
        for (int t = 0; t < 20; ++t) {
            Tensor x({1, 8});
            for (std::size_t i = 0; i < 8; ++i) x[i] = rng.uniform();
            const double eps = rng.uniform(0.0, 0.5);
            const AttackOutcome out = fgsm(ckpt, x, int(rng.below(3)), eps);
            CHECK(out.final_linf <= eps + 1e-9);
            for (std::size_t i = 0; i < 8; ++i) {
                CHECK(out.x_adv[i] >= 0.0);
                CHECK(out.x_adv[i] <= 1.0);
            }
        }
    }
}

TEST_CASE("bim") {
    const Checkpoint ckpt = random_small_net(5);
    RngStream rng(6);
    Tensor x({1, 8});
    for (std::size_t i = 0; i < 8; ++i) x[i] = rng.uniform();

    SUBCASE("iters=1 with alpha=eps reproduces fgsm bit-exactly") {
        const AttackOutcome a = fgsm(ckpt, x, 1, 0.15);
        const AttackOutcome b = bim(ckpt, x, 1, 0.15, 0.15, 1);
        for (std::size_t i = 0; i < 8; ++i) CHECK(a.x_adv[i] == b.x_adv[i]);
        CHECK(a.success == b.success);
    }
    SUBCASE("clip keeps the full run inside the ball") {
        const AttackOutcome out = bim(ckpt, x, 1, 0.3, 0.03, 10);
        CHECK(out.final_linf <= 0.3 + 1e-9);
        CHECK(out.iterations_used == 10);
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS(bim(ckpt, x, 1, -0.1, 0.01, 5));
        CHECK_THROWS(bim(ckpt, x, 1, 0.1, 0.01, 0));
    }
}

TEST_CASE("pgd") {
    const Checkpoint ckpt = random_small_net(7);
    RngStream rng(8);
    Tensor x({1, 8});
    for (std::size_t i = 0; i < 8; ++i) x[i] = rng.uniform();

    SUBCASE("eps=0 collapses to the input for any iteration count") {
        RngStream r1(9);
        const AttackOutcome out = pgd(ckpt, x, 1, 0.0, 0.01, 7, r1);
        for (std::size_t i = 0; i < 8; ++i) CHECK(out.x_adv[i] == x[i]);
    }
    SUBCASE("fixed seed reproduces bit-identically") {
        RngStream r1(10), r2(10);
        const AttackOutcome a = pgd(ckpt, x, 1, 0.2, 0.02, 10, r1);
        const AttackOutcome b = pgd(ckpt, x, 1, 0.2, 0.02, 10, r2);
        for (std::size_t i = 0; i < 8; ++i) CHECK(a.x_adv[i] == b.x_adv[i]);
    }
    SUBCASE("random start stays inside the ball") {
        // one step of size zero isolates the start displacement
        RngStream r1(11);
        const AttackOutcome out = pgd(ckpt, x, 1, 0.25, 0.0, 1, r1);
        CHECK(out.final_linf <= 0.25 + 1e-9);
    }
}

TEST_CASE("deepfool") {
    SUBCASE("linear two-class closed form") {
        // logits z0 = w0.x + b0, z1 = w1.x; boundary gap g = z0 - z1,
        // minimal L-inf step is |g| / ||w1 - w0||_1
        const Checkpoint ckpt = linear_2d({1.0, 0.5, -0.5, 1.5}, {0.4, 0.0});
        const Tensor x({1, 2}, {0.6, 0.4});
        // z0 = 0.6*1 + 0.4*0.5 + 0.4 = 1.2; z1 = 0.6*-0.5 + 0.4*1.5 = 0.3
        // w_diff = w1 - w0 = (-1.5, 1.0), l1 = 2.5, gap = 0.9 -> step 0.36
        const AttackOutcome out = deepfool(ckpt, x, 1.0, 0.02, 50);
        CHECK(out.success);
        CHECK(out.iterations_used <= 2);
        CHECK(out.final_linf == doctest::Approx(0.36 * 1.02).epsilon(0.05));
    }
    SUBCASE("zero gap needs only a degenerate step") {
        const Checkpoint ckpt = linear_2d({1.0, 0.0, 0.0, 1.0}, {0.0, 0.0});
        const Tensor x({1, 2}, {0.5, 0.5});  // z0 == z1, interior point
        const AttackOutcome out = deepfool(ckpt, x, 1.0, 0.02, 50);
        CHECK(out.success);
        CHECK(out.iterations_used <= 1);
        CHECK(out.final_linf < 1e-3);
    }
    SUBCASE("projection keeps the eps budget") {
        const Checkpoint ckpt = linear_2d({1.0, 0.5, -0.5, 1.5}, {2.0, 0.0});
        const AttackOutcome out = deepfool(ckpt, Tensor({1, 2}, {0.6, 0.4}), 0.05, 0.02, 50);
        CHECK(out.final_linf <= 0.05 + 1e-9);
    }
}

TEST_CASE("carlini-wagner") {
    SUBCASE("linear two-class oracle: minimal perturbation is margin over ||w||2") {
        const Checkpoint ckpt = linear_2d({1.0, 0.0, -1.0, 0.0}, {-0.2, 0.0});
        const Tensor x({1, 2}, {0.5, 0.5});
        // margin(x) = z0 - z1 = 2*0.5 - 0.2 = 0.8; w = w0 - w1 = (2, 0);
        // the boundary sits at x0 = 0.1, inside the pixel box, so the
        // minimal L2 is 0.8 / 2 = 0.4
        AttackConfig cfg = AttackConfig::defaults(AttackKind::cw, 0.0);
        cfg.inner_steps = 300;
        cfg.binary_steps = 6;
        const AttackOutcome out = carlini_wagner(ckpt, x, 0, 10.0, cfg);
        CHECK(out.success);
        CHECK(out.final_l2 == doctest::Approx(0.4).epsilon(0.05));
    }
    SUBCASE("infeasible setup reports failure with a best-effort point") {
        const Checkpoint ckpt = linear_2d({50.0, 0.0, -50.0, 0.0}, {5.0, 0.0});
        AttackConfig cfg = AttackConfig::defaults(AttackKind::cw, 0.0);
        cfg.inner_steps = 1;
        cfg.binary_steps = 1;
        cfg.init_c = 1e-8;
        const AttackOutcome out = carlini_wagner(ckpt, Tensor({1, 2}, {0.9, 0.5}), 0, 10.0,
                                                 cfg);
        CHECK_FALSE(out.success);
        CHECK(out.x_adv.numel() == 2);
    }
    SUBCASE("budget rescale keeps the L2 bound") {
        const Checkpoint ckpt = linear_2d({1.0, 0.0, -1.0, 0.0}, {-0.2, 0.0});
        AttackConfig cfg = AttackConfig::defaults(AttackKind::cw, 0.0);
        cfg.inner_steps = 200;
        cfg.binary_steps = 4;
        const AttackOutcome out =
            carlini_wagner(ckpt, Tensor({1, 2}, {0.5, 0.5}), 0, 0.3, cfg);
        CHECK(out.final_l2 <= 0.3 + 1e-9);  // 0.4 needed, so the rescale binds
        CHECK_FALSE(out.success);           // the rescaled point no longer flips
    }
}

TEST_CASE("run_attack dispatches every kind within budget") {
    const Checkpoint ckpt = random_small_net(12);
    RngStream xr(13);
    for (AttackKind kind : {AttackKind::fgsm, AttackKind::bim, AttackKind::pgd,
                            AttackKind::deepfool, AttackKind::cw}) {
        Tensor x({1, 8});
        for (std::size_t i = 0; i < 8; ++i) x[i] = xr.uniform();
        AttackConfig cfg = AttackConfig::defaults(kind, 0.2);
        if (kind == AttackKind::cw) {
            cfg.inner_steps = 20;
            cfg.binary_steps = 2;
        }
        RngStream rng(14);
        const AttackOutcome out = run_attack(ckpt, x, 0, cfg, rng);
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(out.x_adv[i] >= 0.0);
            CHECK(out.x_adv[i] <= 1.0);
        }
        if (kind == AttackKind::cw)
            CHECK(out.final_l2 <= linf_to_l2(0.2, 8) + 1e-9);
        else
            CHECK(out.final_linf <= 0.2 + 1e-9);
    }
}

TEST_CASE("attack string round-trips") {
    for (AttackKind kind : {AttackKind::fgsm, AttackKind::bim, AttackKind::pgd,
                            AttackKind::deepfool, AttackKind::cw})
        CHECK(attack_from_string(to_string(kind)) == kind);
    CHECK_THROWS(attack_from_string("square"));
}
