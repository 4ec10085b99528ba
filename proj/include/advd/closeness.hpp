#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advd/data.hpp"
#include "advd/nn.hpp"

namespace advd {

enum class Provenance : std::uint8_t { clean = 0, noisy = 1, pert = 2 };

/// Pooled penultimate activations of clean, noisy and attacked copies of the
/// training set, all labeled with the clean class. Row layout: m clean rows,
/// then m noisy, then m perturbed.
struct FeatureDataset {
    Tensor features;  // {3m, j}
    std::vector<int> labels;
    std::vector<Provenance> provenance;
    double eps = 0.0;
    std::string attack_id;

    std::size_t rows() const { return labels.size(); }
    std::size_t width() const { return features.rank() == 2 ? features.dim(1) : 0; }
};

/// For every training sample: penultimate features of the clean image, its
/// gaussian-noised copy, and its attacked copy (all extracted with dropout
/// off). The attack matches the noise scale. Requires a trained checkpoint.
FeatureDataset build_feature_dataset(const Checkpoint& cnn, const LabeledDataset& train,
                                     double eps, std::uint64_t seed);

/// Trains the feature-space classifier for the dataset on (V, Y).
TrainResult train_closeness_mlp(const FeatureDataset& fd, DatasetId dataset,
                                const TrainHyper& hyper, std::uint64_t seed);

/// Softmax output of the feature-space classifier at the class the primary
/// model predicted; in (0,1).
double closeness_score(const Checkpoint& mlp, const Tensor& penultimate,
                       int cnn_predicted_class);

void save_feature_dataset(const FeatureDataset& fd, const std::string& path);
FeatureDataset load_feature_dataset(const std::string& path);

}  // namespace advd
