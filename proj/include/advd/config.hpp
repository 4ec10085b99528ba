#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advd/nn.hpp"

namespace advd {

/// Thrown on malformed config text or invalid values (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on missing/corrupt data or checkpoint files (CLI exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything a run needs; flat `key = value` text with `#` comments.
struct ExperimentConfig {
    DatasetId dataset = DatasetId::mnist_digit;
    std::string data_dir = "data";
    std::string out_dir = "out";
    std::uint64_t seed = 42;

    std::vector<std::string> attacks = {"fgsm", "bim", "pgd", "deepfool", "cw"};
    std::vector<double> eps_list;     // defaulted per dataset
    double closeness_eps = 0.0;       // defaulted per dataset
    std::size_t T = 50;
    std::size_t cap = 1000;           // attacked test samples per cell
    std::size_t closeness_cap = 0;    // 0 = full training set
    std::size_t train_cap = 0;        // 0 = full training set

    std::size_t cnn_epochs = 10;
    std::size_t cnn_batch = 64;
    double cnn_lr = 0.001;
    std::size_t mlp_epochs = 50;
    std::size_t mlp_batch = 128;
    double mlp_lr = 0.001;

    std::string cnn_checkpoint;  // defaults to <out_dir>/cnn_<dataset>.advd
    std::string mlp_checkpoint;  // defaults to <out_dir>/mlp_<dataset>.advd

    std::vector<double> sweep_eps_list = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};

    bool operator==(const ExperimentConfig&) const = default;
};

/// Dataset-dependent defaults: eps_list {0.12,0.30} / {0.03,0.12} /
/// {0.02,0.04}, closeness_eps 0.2 / 0.07 / 0.03, cifar epochs 50/150,
/// cifar batch 128.
ExperimentConfig default_config(DatasetId dataset);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical rendering; parse(render(c)) == c.
std::string render_config(const ExperimentConfig& c);

/// Applies one `key=value` override (same keys as the file format).
void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value);

/// FNV-1a hash of the canonical rendering, printed in CSV footers.
std::string config_hash(const ExperimentConfig& c);

/// Resolved checkpoint paths (explicit value or out_dir default).
std::string cnn_checkpoint_path(const ExperimentConfig& c);
std::string mlp_checkpoint_path(const ExperimentConfig& c);

}  // namespace advd
