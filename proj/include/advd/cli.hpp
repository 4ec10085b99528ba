#pragma once

#include <string>
#include <vector>

#include "advd/config.hpp"
#include "advd/data.hpp"
#include "advd/detector.hpp"

namespace advd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;

/// Loads "train" or "test" split from config.data_dir (IDX files for the
/// MNIST pair, binary batches for CIFAR). Throws DataError on missing files.
LabeledDataset load_split(const ExperimentConfig& c, const std::string& split);

/// Six AUC columns of one detection cell: the five raw-metric AUCs plus the
/// cross-validated logistic-regression "all" AUC.
struct CellResult {
    std::vector<DetectionSample> rows;
    double auc_epistemic = 0.0;
    double auc_aleatoric = 0.0;
    double auc_scibilic = 0.0;
    double auc_entropy = 0.0;
    double auc_closeness = 0.0;
    double auc_all = 0.0;
    double attack_success_rate = 0.0;
};

CellResult evaluate_cell(const Checkpoint& cnn, const Checkpoint& mlp,
                         const LabeledDataset& test, const std::string& attack, double eps,
                         const ExperimentConfig& c);

int cmd_train_cnn(const ExperimentConfig& c);
int cmd_build_closeness(const ExperimentConfig& c);
int cmd_craft(const ExperimentConfig& c);
int cmd_evaluate(const ExperimentConfig& c);
int cmd_sweep(const ExperimentConfig& c, const std::string& attack,
              const std::vector<double>& eps_list);

}  // namespace advd
