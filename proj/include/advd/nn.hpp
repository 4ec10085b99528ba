#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "advd/rng.hpp"
#include "advd/tensor.hpp"

namespace advd {

enum class DatasetId { mnist_digit, mnist_fashion, cifar10 };
enum class ModelKind { cnn, mlp };

std::string to_string(DatasetId id);
DatasetId dataset_from_string(const std::string& s);

enum class LayerKind { conv2d, maxpool2d, relu, dropout, flatten, dense };

struct LayerSpec {
    LayerKind kind{};
    // conv2d
    std::size_t in_channels = 0, out_channels = 0, kernel = 0, padding = 0;
    // maxpool2d
    std::size_t pool = 0, stride = 0;
    // dropout
    double drop_p = 0.0;
    // dense
    std::size_t in_width = 0, out_width = 0;

    static LayerSpec Conv2d(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t pad);
    static LayerSpec MaxPool2d(std::size_t k, std::size_t stride);
    static LayerSpec Relu();
    static LayerSpec Dropout(double p);
    static LayerSpec Flatten();
    static LayerSpec Dense(std::size_t in_w, std::size_t out_w);

    bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    std::vector<std::size_t> input_shape;  // {C,H,W} for CNNs, {width} for MLPs
    std::size_t class_count = 0;

    bool operator==(const NetworkSpec&) const = default;
};

/// Layer stacks for the three datasets. The conv geometry follows the
/// fully-connected input widths (2880 / 3136 / 4096); flatten widths are
/// always computed from actual shapes and checked, never assumed.
NetworkSpec build_architecture(DatasetId dataset, ModelKind kind);

/// Per-layer output shapes (index 0 = input shape). Throws on any mismatch,
/// invalid layer parameter, or final width != class_count.
std::vector<std::vector<std::size_t>> infer_shapes(const NetworkSpec& spec);

struct AdamState {
    std::map<std::string, Tensor> m;  // first moments, keyed like weights
    std::map<std::string, Tensor> v;  // second moments
    std::uint64_t step = 0;
};

struct TrainMeta {
    std::string dataset_id;
    std::size_t epochs_completed = 0;
    std::uint64_t seed = 0;

    bool operator==(const TrainMeta&) const = default;
};

struct Checkpoint {
    NetworkSpec spec;
    std::map<std::string, Tensor> weights;  // "L<i>.weight" / "L<i>.bias"
    AdamState adam;
    TrainMeta meta;
};

/// Kaiming-uniform fan-in init for conv/dense weights, zero biases.
Checkpoint init_checkpoint(const NetworkSpec& spec, RngStream& rng);

enum class DropoutMode { off, sample };

struct ActivationTrace {
    Tensor input;                        // {N, ...}
    std::vector<Tensor> outputs;         // one per layer
    std::vector<Tensor> dropout_masks;   // per layer; empty unless sampled dropout
    std::vector<std::vector<std::uint32_t>> pool_argmax;  // per layer; max locations
    Tensor penultimate;                  // {N, j}: input of the final dense layer
    Tensor logits;                       // {N, K}
};

/// Batched forward pass. mode=off is deterministic; mode=sample draws fresh
/// Bernoulli masks from rng with inverted-dropout scaling 1/(1-p).
ActivationTrace forward(const Checkpoint& ckpt, const Tensor& batch, DropoutMode mode,
                        RngStream& rng);

/// Convenience deterministic forward.
ActivationTrace forward_det(const Checkpoint& ckpt, const Tensor& batch);

/// Row-wise softmax with max-subtraction.
Tensor softmax(const Tensor& logits);

/// Mean cross-entropy of logits rows against labels (natural log, via
/// log-sum-exp).
double cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Gradient of the *per-sample* cross-entropy w.r.t. the input batch (same
/// shape as the input). Dropout masks cached in the trace are reused exactly.
Tensor input_gradient(const Checkpoint& ckpt, const ActivationTrace& trace,
                      std::span<const int> labels);

/// Gradients of the batch-mean cross-entropy w.r.t. every trainable weight.
std::map<std::string, Tensor> param_gradients(const Checkpoint& ckpt,
                                              const ActivationTrace& trace,
                                              std::span<const int> labels);

/// Backpropagates an arbitrary cotangent on the logits. Used by the attacks
/// that differentiate logit margins rather than the training loss.
Tensor backprop_logits(const Checkpoint& ckpt, const ActivationTrace& trace,
                       const Tensor& dlogits);

struct AdamHyper {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Standard bias-corrected Adam update; increments state.step.
void adam_step(std::map<std::string, Tensor>& weights,
               const std::map<std::string, Tensor>& grads, AdamState& state,
               const AdamHyper& hyper);

struct TrainHyper {
    std::size_t epochs = 10;
    std::size_t batch_size = 64;
    double lr = 0.001;
};

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainResult {
    Checkpoint ckpt;
    std::vector<EpochStats> history;  // one entry per epoch
};

/// Trains a classifier on (X {N,...}, y) with Adam and sampled dropout.
/// Deterministic given the seed: fixed shuffle order, fixed dropout streams,
/// fixed-order gradient reduction.
TrainResult train_classifier(const NetworkSpec& spec, const Tensor& X,
                             const std::vector<int>& y, const TrainHyper& hyper,
                             std::uint64_t seed, const std::string& dataset_id = "");

/// Deterministic (dropout-off) accuracy over a labeled set.
double evaluate_accuracy(const Checkpoint& ckpt, const Tensor& X, const std::vector<int>& y,
                         std::size_t batch_size = 256);

/// Deterministic predictions (argmax of dropout-off logits).
std::vector<int> predict_classes(const Checkpoint& ckpt, const Tensor& X,
                                 std::size_t batch_size = 256);

// --- Checkpoint container -------------------------------------------------
//
// Versioned binary file: magic "ADVD", u32 LE format version, u64 LE metadata
// length + UTF-8 JSON metadata, u64 LE tensor count, then per tensor
// (u64 LE name length, name bytes, u64 LE rank, dims as u64 LE, raw f64 LE
// data), and a trailing CRC-32 of all preceding bytes.

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// The same container with arbitrary named tensors and a metadata document
/// (used for crafted-attack blobs and feature datasets).
void save_container(const std::string& path, const std::string& metadata_json,
                    const std::map<std::string, Tensor>& tensors);
std::pair<std::string, std::map<std::string, Tensor>> load_container(const std::string& path);

}  // namespace advd
