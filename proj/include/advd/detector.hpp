#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advd/attacks.hpp"
#include "advd/closeness.hpp"
#include "advd/data.hpp"
#include "advd/nn.hpp"

namespace advd {

enum class SampleOrigin { clean, noisy, adversarial };

std::string to_string(SampleOrigin o);

/// One detector row: the five metric features in fixed order
/// [epistemic, aleatoric, scibilic, entropy, closeness] and a binary label
/// (1 = adversarial, 0 = clean or noisy).
struct DetectionSample {
    std::array<double, 5> features{};
    int label = 0;
    SampleOrigin origin = SampleOrigin::clean;
    std::size_t sample_id = 0;
    std::string attack_id;  // set on adversarial rows
    double eps = 0.0;       // set on adversarial rows
    bool attack_success = false;
    int mc_predicted_class = 0;  // argmax of the MC-mean distribution
};

struct LogRegModel {
    std::array<double, 5> weights{};
    double bias = 0.0;
    std::array<double, 5> means{};
    std::array<double, 5> stds{};  // constant features get std 1
};

struct RocCurve {
    std::vector<double> thresholds;
    std::vector<double> fpr;
    std::vector<double> tpr;
    double auc = 0.0;
};

struct LogRegHyper {
    std::size_t epochs = 200;
    double lr = 0.1;
    double l2 = 1e-4;
};

/// Keeps the first `cap` test samples the deterministic model classifies
/// correctly and emits three rows for each: clean, gaussian-noisy at the
/// attack's eps, and attacked. All five features are computed per row; the
/// closeness feature is scored at the deterministic predicted class of that
/// row's own input.
std::vector<DetectionSample> assemble_detection_set(const Checkpoint& cnn,
                                                    const Checkpoint& mlp,
                                                    const LabeledDataset& test,
                                                    const AttackConfig& attack_cfg,
                                                    std::size_t T, std::size_t cap,
                                                    std::uint64_t seed);

/// Full-batch gradient descent on the standardized, L2-regularized logistic
/// loss; zero init, deterministic.
LogRegModel train_logreg(std::span<const DetectionSample> samples, const LogRegHyper& hyper);

double logreg_score(const LogRegModel& model, std::span<const double> features);

/// Rank-statistic (Mann-Whitney) AUC with tie correction, plus the ROC points
/// swept over the unique score thresholds.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Seeded stratified k-fold CV: trains on k-1 folds, scores the held-out
/// fold, returns the mean held-out AUC.
double cross_validated_auc(std::span<const DetectionSample> samples, std::size_t folds,
                           std::uint64_t seed, const LogRegHyper& hyper);

}  // namespace advd
