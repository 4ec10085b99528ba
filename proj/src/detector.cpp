#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "advd/detector.hpp"
#include "advd/parallel.hpp"
#include "advd/uncertainty.hpp"

namespace advd {

std::string to_string(SampleOrigin o) {
    switch (o) {
        case SampleOrigin::clean: return "clean";
        case SampleOrigin::noisy: return "noisy";
        case SampleOrigin::adversarial: return "adversarial";
    }
    throw std::logic_error("bad SampleOrigin");
}

namespace {

struct RowFeatures {
    std::array<double, 5> features;
    int mc_predicted_class;
};

RowFeatures features_for(const Checkpoint& cnn, const Checkpoint& mlp, const Tensor& x,
                         std::size_t T, std::uint64_t mc_seed) {
    RngStream mc_rng(mc_seed);
    const PredictionEnsemble ens = mc_predict(cnn, x, T, mc_rng);
    const UncertaintyEstimate est = estimate_uncertainty(ens);

    const ActivationTrace det = forward_det(cnn, x);
    const std::size_t K = det.logits.dim(1);
    std::size_t pred = 0;
    for (std::size_t k = 1; k < K; ++k)
        if (det.logits[k] > det.logits[pred]) pred = k;
    const double close = closeness_score(mlp, det.penultimate, int(pred));

    return {{est.epistemic, est.aleatoric, est.scibilic, est.entropy, close},
            est.predicted_class};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// MC streams keyed by pixel content: identical inputs (e.g. an eps=0 attack
// row and its clean row) get identical ensembles.
std::uint64_t content_hash(const Tensor& x) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(x.data());
    for (std::size_t i = 0; i < x.numel() * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::vector<DetectionSample> assemble_detection_set(const Checkpoint& cnn,
                                                    const Checkpoint& mlp,
                                                    const LabeledDataset& test,
                                                    const AttackConfig& attack_cfg,
                                                    std::size_t T, std::size_t cap,
                                                    std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("assemble_detection_set: T must be >= 1");

    // Only samples the deterministic model already classifies correctly are
    // worth attacking.
    const std::vector<int> preds = predict_classes(cnn, test.images);
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < test.size() && survivors.size() < cap; ++i)
        if (preds[i] == test.labels[i]) survivors.push_back(i);
    if (survivors.empty())
        throw std::runtime_error("assemble_detection_set: no correctly-classified samples");

    std::vector<DetectionSample> rows(3 * survivors.size());
    parallel_items(survivors.size(), [&](std::size_t s) {
        const std::size_t idx = survivors[s];
        const Tensor x = test.sample(idx);
        const int y = test.labels[idx];

        RngStream noise_rng = RngStream::derive(seed, "detect-noise", idx);
        const Tensor noisy = gaussian_noisify(x, attack_cfg.eps, noise_rng);

        RngStream attack_rng = RngStream::derive(seed, "detect-attack", idx);
        const AttackOutcome atk = run_attack(cnn, x, y, attack_cfg, attack_rng);

        const Tensor* inputs[3] = {&x, &noisy, &atk.x_adv};
        const SampleOrigin origins[3] = {SampleOrigin::clean, SampleOrigin::noisy,
                                         SampleOrigin::adversarial};
        for (int r = 0; r < 3; ++r) {
            DetectionSample& row = rows[3 * s + std::size_t(r)];
            const RowFeatures rf = features_for(
                cnn, mlp, *inputs[r], T,
                derive_seed(seed, "detect-mc", content_hash(*inputs[r])));
            row.features = rf.features;
            row.mc_predicted_class = rf.mc_predicted_class;
            row.origin = origins[r];
            row.label = origins[r] == SampleOrigin::adversarial ? 1 : 0;
            row.sample_id = idx;
            if (row.label == 1) {
                row.attack_id = to_string(attack_cfg.kind);
                row.eps = attack_cfg.eps;
                row.attack_success = atk.success;
            }
        }
    });
    return rows;
}

LogRegModel train_logreg(std::span<const DetectionSample> samples, const LogRegHyper& hyper) {
    const std::size_t n = samples.size();
    std::size_t n_pos = 0;
    for (const auto& s : samples) n_pos += s.label == 1;
    if (n_pos == 0 || n_pos == n)
        throw std::invalid_argument("train_logreg: both classes must be present");

    LogRegModel model{};
    for (std::size_t f = 0; f < 5; ++f) {
        double mean = 0.0;
        for (const auto& s : samples) mean += s.features[f];
        mean /= double(n);
        double var = 0.0;
        for (const auto& s : samples) {
            const double d = s.features[f] - mean;
            var += d * d;
        }
        var /= double(n);
        model.means[f] = mean;
        model.stds[f] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::array<double, 5> gw{};
        double gb = 0.0;
        for (const auto& s : samples) {
            double z = model.bias;
            for (std::size_t f = 0; f < 5; ++f)
                z += model.weights[f] * (s.features[f] - model.means[f]) / model.stds[f];
            const double err = sigmoid(z) - double(s.label);
            for (std::size_t f = 0; f < 5; ++f)
                gw[f] += err * (s.features[f] - model.means[f]) / model.stds[f];
            gb += err;
        }
        for (std::size_t f = 0; f < 5; ++f) {
            gw[f] = gw[f] / double(n) + hyper.l2 * model.weights[f];
            model.weights[f] -= hyper.lr * gw[f];
        }
        model.bias -= hyper.lr * gb / double(n);
    }
    return model;
}

double logreg_score(const LogRegModel& model, std::span<const double> features) {
    if (features.size() != 5) throw std::invalid_argument("logreg_score: expected 5 features");
    double z = model.bias;
    for (std::size_t f = 0; f < 5; ++f) {
        if (!std::isfinite(features[f]))
            throw std::invalid_argument("logreg_score: non-finite feature");
        z += model.weights[f] * (features[f] - model.means[f]) / model.stds[f];
    }
    return sigmoid(z);
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
    const std::size_t n = scores.size();
    if (labels.size() != n) throw std::invalid_argument("roc_auc: size mismatch");
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += y == 1;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over tie groups (1-based)
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double rank_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == 1) rank_sum += rank[k];

    RocCurve curve;
    curve.auc = (rank_sum - double(n_pos) * double(n_pos + 1) / 2.0) /
                (double(n_pos) * double(n_neg));

    // ROC points: predict positive when score >= threshold, thresholds from
    // +inf down through the unique scores.
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = n; k > 0;) {
        const double thr = scores[order[k - 1]];
        while (k > 0 && scores[order[k - 1]] == thr) {
            if (labels[order[k - 1]] == 1)
                ++tp;
            else
                ++fp;
            --k;
        }
        curve.thresholds.push_back(thr);
        curve.fpr.push_back(double(fp) / double(n_neg));
        curve.tpr.push_back(double(tp) / double(n_pos));
    }
    return curve;
}

double cross_validated_auc(std::span<const DetectionSample> samples, std::size_t folds,
                           std::uint64_t seed, const LogRegHyper& hyper) {
    if (folds < 2) throw std::invalid_argument("cross_validated_auc: need >= 2 folds");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].label == 1 ? pos : neg).push_back(i);
    if (pos.size() < folds || neg.size() < folds)
        throw std::invalid_argument("cross_validated_auc: too few samples per class");

    RngStream pos_rng = RngStream::derive(seed, "cv-pos");
    RngStream neg_rng = RngStream::derive(seed, "cv-neg");
    pos_rng.shuffle(pos);
    neg_rng.shuffle(neg);

    std::vector<std::size_t> fold_of(samples.size());
    for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % folds;
    for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = i % folds;

    double auc_sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<DetectionSample> train;
        std::vector<double> held_scores;
        std::vector<int> held_labels;
        std::vector<std::size_t> held;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (fold_of[i] == f)
                held.push_back(i);
            else
                train.push_back(samples[i]);
        }
        const LogRegModel model = train_logreg(train, hyper);
        for (std::size_t i : held) {
            held_scores.push_back(logreg_score(model, samples[i].features));
            held_labels.push_back(samples[i].label);
        }
        auc_sum += roc_auc(held_scores, held_labels).auc;
    }
    return auc_sum / double(folds);
}

}  // namespace advd
