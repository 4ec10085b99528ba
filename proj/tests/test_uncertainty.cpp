#include <doctest.h>

#include <cmath>
#include <numeric>

#include "advd/uncertainty.hpp"
#include "oracles.hpp"

using namespace advd;

namespace {

PredictionEnsemble make_ens(std::size_t T, std::size_t K, const std::vector<double>& rows) {
    PredictionEnsemble ens;
    ens.probs = Tensor({T, K}, rows);
    return ens;
}

PredictionEnsemble random_ens(std::size_t T, std::size_t K, std::uint64_t seed) {
    RngStream rng(seed);
    Tensor p({T, K});
    for (std::size_t t = 0; t < T; ++t) {
        double sum = 0;
        for (std::size_t k = 0; k < K; ++k) {
            p[t * K + k] = -std::log(rng.uniform_pos());
            sum += p[t * K + k];
        }
        for (std::size_t k = 0; k < K; ++k) p[t * K + k] /= sum;
    }
    PredictionEnsemble ens;
    ens.probs = std::move(p);
    return ens;
}

}  // namespace

TEST_CASE("aleatoric hand values") {
    SUBCASE("one-hot rows give zero") {
        const auto ens = make_ens(3, 2, {1, 0, 0, 1, 1, 0});
        CHECK(aleatoric(ens) == 0.0);
    }
    SUBCASE("uniform rows, K=10") {
        std::vector<double> rows(2 * 10, 0.1);
        const auto ens = make_ens(2, 10, rows);
        CHECK(aleatoric(ens) == doctest::Approx(0.09).epsilon(1e-12));
    }
    SUBCASE("two mixed rows") {
        const auto ens = make_ens(2, 2, {1, 0, 0.5, 0.5});
        CHECK(aleatoric(ens) == doctest::Approx(0.125).epsilon(1e-12));
    }
}

TEST_CASE("epistemic hand values and oracle equivalence") {
    SUBCASE("identical rows give exactly zero") {
        const auto ens = make_ens(4, 3, {0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2,
                                         0.3, 0.5});
        CHECK(epistemic(ens) == 0.0);
    }
    SUBCASE("opposed one-hot rows") {
        const auto ens = make_ens(2, 2, {1, 0, 0, 1});
        CHECK(epistemic(ens) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("matches the two-pass variance oracle on random ensembles") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const auto ens = random_ens(7, 5, seed);
            CHECK(epistemic(ens) ==
                  doctest::Approx(oracles::mean_column_variance(ens.probs)).epsilon(1e-12));
        }
    }
}

TEST_CASE("scibilic quotient") {
    CHECK(scibilic(0.0, 0.09) == 0.0);
    CHECK(scibilic(0.02, 0.04) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(scibilic(0.25, 0.0) == doctest::Approx(2.5e11).epsilon(1e-9));
    CHECK(std::isfinite(scibilic(0.25, 0.0)));
    CHECK_THROWS(scibilic(-0.1, 0.1));
}

TEST_CASE("predictive entropy") {
    SUBCASE("one-hot mean distribution") {
        const auto ens = make_ens(2, 3, {1, 0, 0, 1, 0, 0});
        CHECK(predictive_entropy(ens) == 0.0);
    }
    SUBCASE("uniform mean, K=10") {
        std::vector<double> rows(10, 0.1);
        const auto ens = make_ens(1, 10, rows);
        CHECK(predictive_entropy(ens) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
    }
    SUBCASE("mean [0.75, 0.25]") {
        const auto ens = make_ens(2, 2, {0.8, 0.2, 0.7, 0.3});
        const double expect = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
        CHECK(predictive_entropy(ens) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(predictive_entropy(ens) == doctest::Approx(0.5623).epsilon(1e-3));
    }
}

TEST_CASE("bounds and identities on random ensembles") {
    for (std::uint64_t seed = 100; seed < 150; ++seed) {
        const auto ens = random_ens(11, 7, seed);
        const double ale = aleatoric(ens), epi = epistemic(ens);
        const double ent = predictive_entropy(ens);
        CHECK(ale >= 0.0);
        CHECK(ale <= 0.25 + 1e-12);
        CHECK(epi >= 0.0);
        CHECK(epi <= 0.25 + 1e-12);
        CHECK(ent >= 0.0);
        CHECK(ent <= std::log(7.0) + 1e-12);

        // law of total variance: ale + epi == diag-mean of E[diag p] - pbar pbar^T
        const std::size_t T = ens.samples(), K = ens.classes();
        double rhs = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            double pbar = 0.0;
            for (std::size_t t = 0; t < T; ++t) pbar += ens.probs[t * K + k];
            pbar /= double(T);
            rhs += pbar - pbar * pbar;  // E[diag p] - pbar pbar^T, k-th diagonal
        }
        rhs /= double(K);
        CHECK(std::fabs((ale + epi) - rhs) <= 1e-12);
    }
}

TEST_CASE("permutation invariance of every metric") {
    const auto ens = random_ens(9, 4, 777);
    PredictionEnsemble shuffled = ens;
    std::vector<std::size_t> order(9);
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(3);
    rng.shuffle(order);
    for (std::size_t t = 0; t < 9; ++t)
        for (std::size_t k = 0; k < 4; ++k)
            shuffled.probs[t * 4 + k] = ens.probs[order[t] * 4 + k];

    CHECK(aleatoric(shuffled) == doctest::Approx(aleatoric(ens)).epsilon(1e-12));
    CHECK(epistemic(shuffled) == doctest::Approx(epistemic(ens)).epsilon(1e-12));
    CHECK(predictive_entropy(shuffled) ==
          doctest::Approx(predictive_entropy(ens)).epsilon(1e-12));
}

TEST_CASE("mc_predict") {
    NetworkSpec with_dropout;
    with_dropout.input_shape = {6};
    with_dropout.class_count = 3;
    with_dropout.layers = {LayerSpec::Dense(6, 10), LayerSpec::Relu(), LayerSpec::Dropout(0.5),
                           LayerSpec::Dense(10, 3)};
    NetworkSpec no_dropout = with_dropout;
    no_dropout.layers = {LayerSpec::Dense(6, 10), LayerSpec::Relu(), LayerSpec::Dense(10, 3)};

    RngStream init1(5), init2(5);
    const Checkpoint ck_drop = init_checkpoint(with_dropout, init1);
    const Checkpoint ck_plain = init_checkpoint(no_dropout, init2);
    const Tensor x({1, 6}, {0.1, 0.9, 0.4, 0.2, 0.8, 0.5});

    SUBCASE("T=0 is rejected") {
        RngStream rng(1);
        CHECK_THROWS(mc_predict(ck_drop, x, 0, rng));
    }
    SUBCASE("no dropout layers means identical rows and exactly zero epistemic") {
        RngStream rng(2);
        const auto ens = mc_predict(ck_plain, x, 8, rng);
        for (std::size_t t = 1; t < 8; ++t)
            for (std::size_t k = 0; k < 3; ++k)
                CHECK(ens.probs[t * 3 + k] == ens.probs[k]);
        CHECK(epistemic(ens) == 0.0);
    }
    SUBCASE("fixed seed reproduces the ensemble") {
        RngStream r1(3), r2(3);
        const auto a = mc_predict(ck_drop, x, 16, r1);
        const auto b = mc_predict(ck_drop, x, 16, r2);
        for (std::size_t i = 0; i < a.probs.numel(); ++i) CHECK(a.probs[i] == b.probs[i]);
    }
    SUBCASE("rows are softmax distributions and dropout adds spread") {
        RngStream rng(4);
        const auto ens = mc_predict(ck_drop, x, 32, rng);
        for (std::size_t t = 0; t < 32; ++t) {
            double sum = 0;
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(ens.probs[t * 3 + k] >= 0.0);
                CHECK(ens.probs[t * 3 + k] <= 1.0);
                sum += ens.probs[t * 3 + k];
            }
            CHECK(std::fabs(sum - 1.0) <= 1e-9);
        }
        CHECK(epistemic(ens) > 0.0);
    }
    SUBCASE("estimate bundles the metrics consistently") {
        RngStream rng(6);
        const auto ens = mc_predict(ck_drop, x, 16, rng);
        const UncertaintyEstimate est = estimate_uncertainty(ens);
        CHECK(est.aleatoric == doctest::Approx(aleatoric(ens)).epsilon(1e-12));
        CHECK(est.epistemic == doctest::Approx(epistemic(ens)).epsilon(1e-12));
        CHECK(est.scibilic ==
              doctest::Approx(scibilic(est.epistemic, est.aleatoric)).epsilon(1e-12));
        CHECK(est.entropy == doctest::Approx(predictive_entropy(ens)).epsilon(1e-12));
        double sum = 0;
        for (double p : est.mean_probs) sum += p;
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
        CHECK(est.predicted_class >= 0);
        CHECK(est.predicted_class < 3);
    }
}
