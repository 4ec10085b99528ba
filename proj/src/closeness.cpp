#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "advd/attacks.hpp"
#include "advd/closeness.hpp"
#include "advd/parallel.hpp"

namespace advd {

FeatureDataset build_feature_dataset(const Checkpoint& cnn, const LabeledDataset& train,
                                     double eps, std::uint64_t seed) {
    if (cnn.meta.epochs_completed == 0)
        throw std::invalid_argument("build_feature_dataset: checkpoint is untrained");
    if (eps <= 0.0) throw std::invalid_argument("build_feature_dataset: eps must be > 0");
    const std::size_t m = train.size();
    if (m == 0) throw std::invalid_argument("build_feature_dataset: empty training set");

    // penultimate width = input of the final dense layer
    std::size_t j = 0;
    for (auto it = cnn.spec.layers.rbegin(); it != cnn.spec.layers.rend(); ++it) {
        if (it->kind == LayerKind::dense) {
            j = it->in_width;
            break;
        }
    }

    FeatureDataset fd;
    fd.features = Tensor({3 * m, j});
    fd.labels.resize(3 * m);
    fd.provenance.resize(3 * m);
    fd.eps = eps;
    fd.attack_id = "bim";

    const AttackConfig bim_cfg = AttackConfig::defaults(AttackKind::bim, eps);

    parallel_items(m, [&](std::size_t i) {
        const Tensor x = train.sample(i);
        const int y = train.labels[i];

        const Tensor clean_feat = forward_det(cnn, x).penultimate;

        RngStream noise_rng = RngStream::derive(seed, "closeness-noise", i);
        const Tensor noisy = gaussian_noisify(x, eps, noise_rng);
        const Tensor noisy_feat = forward_det(cnn, noisy).penultimate;

        const AttackOutcome atk = bim(cnn, x, y, bim_cfg.eps, bim_cfg.alpha, bim_cfg.iters);
        const Tensor pert_feat = forward_det(cnn, atk.x_adv).penultimate;

        std::copy(clean_feat.data(), clean_feat.data() + j, fd.features.data() + i * j);
        std::copy(noisy_feat.data(), noisy_feat.data() + j, fd.features.data() + (m + i) * j);
        std::copy(pert_feat.data(), pert_feat.data() + j, fd.features.data() + (2 * m + i) * j);
        fd.labels[i] = fd.labels[m + i] = fd.labels[2 * m + i] = y;
        fd.provenance[i] = Provenance::clean;
        fd.provenance[m + i] = Provenance::noisy;
        fd.provenance[2 * m + i] = Provenance::pert;
    });
    return fd;
}

TrainResult train_closeness_mlp(const FeatureDataset& fd, DatasetId dataset,
                                const TrainHyper& hyper, std::uint64_t seed) {
    if (fd.rows() == 0) throw std::invalid_argument("train_closeness_mlp: empty feature set");
    const NetworkSpec spec = build_architecture(dataset, ModelKind::mlp);
    if (fd.width() != spec.input_shape[0])
        throw std::invalid_argument("train_closeness_mlp: feature width " +
                                    std::to_string(fd.width()) + " != MLP input width " +
                                    std::to_string(spec.input_shape[0]));
    return train_classifier(spec, fd.features, fd.labels, hyper, seed,
                            to_string(dataset) + "/closeness");
}

double closeness_score(const Checkpoint& mlp, const Tensor& penultimate,
                       int cnn_predicted_class) {
    Tensor x = penultimate;
    if (x.rank() == 1) x.reshape({std::size_t(1), x.dim(0)});
    if (cnn_predicted_class < 0 || std::size_t(cnn_predicted_class) >= mlp.spec.class_count)
        throw std::out_of_range("closeness_score: class index out of range");
    const Tensor p = softmax(forward_det(mlp, x).logits);
    return p[std::size_t(cnn_predicted_class)];
}

void save_feature_dataset(const FeatureDataset& fd, const std::string& path) {
    nlohmann::json meta;
    meta["format"] = "feature_dataset";
    meta["eps"] = fd.eps;
    meta["attack_id"] = fd.attack_id;

    std::map<std::string, Tensor> tensors;
    tensors["features"] = fd.features;
    Tensor labels({fd.rows()});
    Tensor prov({fd.rows()});
    for (std::size_t i = 0; i < fd.rows(); ++i) {
        labels[i] = double(fd.labels[i]);
        prov[i] = double(static_cast<std::uint8_t>(fd.provenance[i]));
    }
    tensors["labels"] = std::move(labels);
    tensors["provenance"] = std::move(prov);
    save_container(path, meta.dump(), tensors);
}

FeatureDataset load_feature_dataset(const std::string& path) {
    auto [metadata, tensors] = load_container(path);
    nlohmann::json meta = nlohmann::json::parse(metadata);
    if (meta.value("format", "") != "feature_dataset")
        throw std::runtime_error("not a feature dataset container: " + path);

    FeatureDataset fd;
    fd.eps = meta.at("eps").get<double>();
    fd.attack_id = meta.at("attack_id").get<std::string>();
    fd.features = std::move(tensors.at("features"));
    const Tensor& labels = tensors.at("labels");
    const Tensor& prov = tensors.at("provenance");
    fd.labels.resize(labels.numel());
    fd.provenance.resize(prov.numel());
    for (std::size_t i = 0; i < labels.numel(); ++i) {
        fd.labels[i] = int(labels[i]);
        fd.provenance[i] = static_cast<Provenance>(int(prov[i]));
    }
    return fd;
}

}  // namespace advd
