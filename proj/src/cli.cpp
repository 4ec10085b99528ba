#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "advd/cli.hpp"
#include "advd/parallel.hpp"
#include "advd/report.hpp"
#include "advd/uncertainty.hpp"

namespace advd {

namespace fs = std::filesystem;

namespace {

std::string eps_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eps);
    std::string s = buf;
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw DataError("missing file: " + path);
}

LabeledDataset truncate(LabeledDataset ds, std::size_t cap) {
    if (cap == 0 || cap >= ds.size()) return ds;
    std::vector<std::size_t> shape = ds.images.shape();
    shape[0] = cap;
    const std::size_t stride = ds.images.numel() / ds.images.dim(0);
    ds.images = Tensor(std::move(shape), std::vector<double>(ds.images.data(),
                                                             ds.images.data() + cap * stride));
    ds.labels.resize(cap);
    return ds;
}

Checkpoint load_ckpt_or_data_error(const std::string& path) {
    require_file(path);
    try {
        return load_checkpoint(path);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

void ensure_out_dir(const ExperimentConfig& c) { fs::create_directories(c.out_dir); }

TrainHyper cnn_hyper(const ExperimentConfig& c) {
    return TrainHyper{c.cnn_epochs, c.cnn_batch, c.cnn_lr};
}
TrainHyper mlp_hyper(const ExperimentConfig& c) {
    return TrainHyper{c.mlp_epochs, c.mlp_batch, c.mlp_lr};
}

}  // namespace

LabeledDataset load_split(const ExperimentConfig& c, const std::string& split) {
    const bool train = split == "train";
    try {
        if (c.dataset == DatasetId::cifar10) {
            std::vector<std::string> paths;
            if (train) {
                for (int b = 1; b <= 5; ++b) {
                    const std::string p =
                        c.data_dir + "/data_batch_" + std::to_string(b) + ".bin";
                    if (fs::exists(p)) paths.push_back(p);
                }
                if (paths.empty())
                    throw DataError("no CIFAR training batches under " + c.data_dir);
            } else {
                const std::string p = c.data_dir + "/test_batch.bin";
                require_file(p);
                paths.push_back(p);
            }
            LabeledDataset ds = load_cifar_binary(paths);
            ds.dataset_id = to_string(c.dataset);
            ds.split = split;
            return ds;
        }
        const std::string img =
            c.data_dir + (train ? "/train-images-idx3-ubyte" : "/t10k-images-idx3-ubyte");
        const std::string lab =
            c.data_dir + (train ? "/train-labels-idx1-ubyte" : "/t10k-labels-idx1-ubyte");
        require_file(img);
        require_file(lab);
        LabeledDataset ds = load_idx(img, lab);
        ds.dataset_id = to_string(c.dataset);
        ds.split = split;
        return ds;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

CellResult evaluate_cell(const Checkpoint& cnn, const Checkpoint& mlp,
                         const LabeledDataset& test, const std::string& attack, double eps,
                         const ExperimentConfig& c) {
    AttackConfig cfg = AttackConfig::defaults(attack_from_string(attack), eps);
    const std::uint64_t cell_seed =
        derive_seed(c.seed, "cell/" + attack + "/" + format_double(eps));
    cfg.seed = cell_seed;

    CellResult r;
    r.rows = assemble_detection_set(cnn, mlp, test, cfg, c.T, c.cap, cell_seed);

    std::vector<int> labels;
    labels.reserve(r.rows.size());
    std::size_t adv = 0, adv_success = 0;
    for (const auto& row : r.rows) {
        labels.push_back(row.label);
        if (row.label == 1) {
            ++adv;
            adv_success += row.attack_success;
        }
    }
    r.attack_success_rate = adv ? double(adv_success) / double(adv) : 0.0;

    double* aucs[5] = {&r.auc_epistemic, &r.auc_aleatoric, &r.auc_scibilic, &r.auc_entropy,
                       &r.auc_closeness};
    for (std::size_t f = 0; f < 5; ++f) {
        std::vector<double> scores;
        scores.reserve(r.rows.size());
        for (const auto& row : r.rows) scores.push_back(row.features[f]);
        // low closeness marks adversarials, so the raw column scores with
        // its sign flipped
        if (f == 4)
            for (double& s : scores) s = -s;
        *aucs[f] = roc_auc(scores, labels).auc;
    }
    r.auc_all = cross_validated_auc(r.rows, 5, cell_seed, LogRegHyper{});
    return r;
}

int cmd_train_cnn(const ExperimentConfig& c) {
    ensure_out_dir(c);
    LabeledDataset train = truncate(load_split(c, "train"), c.train_cap);
    LabeledDataset test = load_split(c, "test");

    const NetworkSpec spec = build_architecture(c.dataset, ModelKind::cnn);
    TrainResult result = train_classifier(spec, train.images, train.labels, cnn_hyper(c),
                                          derive_seed(c.seed, "train-cnn"),
                                          to_string(c.dataset));
    save_checkpoint(result.ckpt, cnn_checkpoint_path(c));

    CsvWriter csv;
    csv.header({"epoch", "loss", "accuracy"});
    for (std::size_t e = 0; e < result.history.size(); ++e)
        csv.cell(e + 1).cell(result.history[e].loss).cell(result.history[e].accuracy).end_row();
    csv.write(c.out_dir + "/train_cnn_" + to_string(c.dataset) + ".csv", c.seed,
              config_hash(c));

    const double acc = evaluate_accuracy(result.ckpt, test.images, test.labels);
    std::cout << "checkpoint " << cnn_checkpoint_path(c) << "\n";
    std::cout << "test_accuracy " << format_double(acc) << "\n";
    return kExitOk;
}

int cmd_build_closeness(const ExperimentConfig& c) {
    ensure_out_dir(c);
    const Checkpoint cnn = load_ckpt_or_data_error(cnn_checkpoint_path(c));
    LabeledDataset train = truncate(load_split(c, "train"), c.closeness_cap);

    const FeatureDataset fd = build_feature_dataset(cnn, train, c.closeness_eps,
                                                    derive_seed(c.seed, "closeness"));
    save_feature_dataset(fd, c.out_dir + "/features_" + to_string(c.dataset) + ".advd");

    TrainResult result =
        train_closeness_mlp(fd, c.dataset, mlp_hyper(c), derive_seed(c.seed, "train-mlp"));
    save_checkpoint(result.ckpt, mlp_checkpoint_path(c));

    std::cout << "feature_rows " << fd.rows() << "\n";
    if (!result.history.empty())
        std::cout << "mlp_train_accuracy " << format_double(result.history.back().accuracy)
                  << "\n";
    std::cout << "checkpoint " << mlp_checkpoint_path(c) << "\n";
    return kExitOk;
}

int cmd_craft(const ExperimentConfig& c) {
    ensure_out_dir(c);
    const Checkpoint cnn = load_ckpt_or_data_error(cnn_checkpoint_path(c));
    const LabeledDataset test = load_split(c, "test");

    const std::vector<int> preds = predict_classes(cnn, test.images);
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < test.size() && survivors.size() < c.cap; ++i)
        if (preds[i] == test.labels[i]) survivors.push_back(i);
    if (survivors.empty()) throw DataError("craft: no correctly-classified samples");

    for (const std::string& attack : c.attacks) {
        for (double eps : c.eps_list) {
            AttackConfig cfg = AttackConfig::defaults(attack_from_string(attack), eps);
            const std::uint64_t cell_seed =
                derive_seed(c.seed, "craft/" + attack + "/" + format_double(eps));

            const std::size_t n = survivors.size();
            std::vector<AttackOutcome> outcomes(n);
            parallel_items(n, [&](std::size_t s) {
                const std::size_t idx = survivors[s];
                RngStream rng = RngStream::derive(cell_seed, "attack", idx);
                outcomes[s] =
                    run_attack(cnn, test.sample(idx), test.labels[idx], cfg, rng);
            });

            const std::string base =
                c.out_dir + "/craft_" + attack + "_" + eps_tag(eps);
            CsvWriter csv;
            csv.header({"index", "attack", "eps", "success", "linf", "l2"});
            for (std::size_t s = 0; s < n; ++s)
                csv.cell(survivors[s])
                    .cell(attack)
                    .cell(eps)
                    .cell(int(outcomes[s].success))
                    .cell(outcomes[s].final_linf)
                    .cell(outcomes[s].final_l2)
                    .end_row();
            csv.write(base + ".csv", c.seed, config_hash(c));

            std::vector<std::size_t> shape = test.images.shape();
            shape[0] = n;
            Tensor images(shape);
            const std::size_t stride = images.numel() / n;
            Tensor labels({n}), success({n});
            for (std::size_t s = 0; s < n; ++s) {
                std::copy(outcomes[s].x_adv.data(), outcomes[s].x_adv.data() + stride,
                          images.data() + s * stride);
                labels[s] = double(test.labels[survivors[s]]);
                success[s] = outcomes[s].success ? 1.0 : 0.0;
            }
            nlohmann::json meta;
            meta["format"] = "crafted_set";
            meta["attack"] = attack;
            meta["eps"] = eps;
            meta["dataset"] = to_string(c.dataset);
            save_container(base + ".advd", meta.dump(),
                           {{"images", images}, {"labels", labels}, {"success", success}});
            std::cout << "crafted " << attack << " eps=" << format_double(eps) << " n=" << n
                      << "\n";
        }
    }
    return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& c) {
    ensure_out_dir(c);
    const Checkpoint cnn = load_ckpt_or_data_error(cnn_checkpoint_path(c));
    const Checkpoint mlp = load_ckpt_or_data_error(mlp_checkpoint_path(c));
    const LabeledDataset test = load_split(c, "test");

    CsvWriter table;
    table.header({"attack", "eps", "rows", "attack_success_rate", "auc_epistemic",
                  "auc_aleatoric", "auc_scibilic", "auc_entropy", "auc_closeness", "auc_all"});

    for (const std::string& attack : c.attacks) {
        for (double eps : c.eps_list) {
            const CellResult r = evaluate_cell(cnn, mlp, test, attack, eps, c);
            table.cell(attack)
                .cell(eps)
                .cell(r.rows.size())
                .cell(r.attack_success_rate)
                .cell(r.auc_epistemic)
                .cell(r.auc_aleatoric)
                .cell(r.auc_scibilic)
                .cell(r.auc_entropy)
                .cell(r.auc_closeness)
                .cell(r.auc_all)
                .end_row();

            const std::string base =
                c.out_dir + "/detect_" + attack + "_" + eps_tag(eps);
            CsvWriter rows_csv;
            rows_csv.header({"sample_id", "origin", "attack", "eps", "epi", "ale", "sci",
                             "ent", "close", "label"});
            for (const auto& row : r.rows)
                rows_csv.cell(row.sample_id)
                    .cell(to_string(row.origin))
                    .cell(row.label == 1 ? row.attack_id : std::string("-"))
                    .cell(row.label == 1 ? row.eps : 0.0)
                    .cell(row.features[0])
                    .cell(row.features[1])
                    .cell(row.features[2])
                    .cell(row.features[3])
                    .cell(row.features[4])
                    .cell(row.label)
                    .end_row();
            rows_csv.write(base + ".csv", c.seed, config_hash(c));

            CsvWriter unc_csv;
            unc_csv.header({"sample_id", "epistemic", "aleatoric", "scibilic", "entropy",
                            "predicted_class"});
            for (const auto& row : r.rows)
                unc_csv.cell(row.sample_id)
                    .cell(row.features[0])
                    .cell(row.features[1])
                    .cell(row.features[2])
                    .cell(row.features[3])
                    .cell(row.mc_predicted_class)
                    .end_row();
            unc_csv.write(c.out_dir + "/uncertainty_" + attack + "_" + eps_tag(eps) + ".csv",
                          c.seed, config_hash(c));

            // ROC panel: the five metrics plus the full-set LR model
            std::vector<ChartSeries> curves;
            std::vector<int> labels;
            for (const auto& row : r.rows) labels.push_back(row.label);
            const char* names[5] = {"epistemic", "aleatoric", "scibilic", "entropy",
                                    "closeness"};
            for (std::size_t f = 0; f < 5; ++f) {
                std::vector<double> scores;
                for (const auto& row : r.rows)
                    scores.push_back(f == 4 ? -row.features[f] : row.features[f]);
                const RocCurve curv = roc_auc(scores, labels);
                curves.push_back({names[f], curv.fpr, curv.tpr});
            }
            const LogRegModel lr = train_logreg(r.rows, LogRegHyper{});
            std::vector<double> lr_scores;
            for (const auto& row : r.rows) lr_scores.push_back(logreg_score(lr, row.features));
            const RocCurve all_curve = roc_auc(lr_scores, labels);
            curves.push_back({"all", all_curve.fpr, all_curve.tpr});
            write_svg_chart(c.out_dir + "/roc_" + attack + "_" + eps_tag(eps) + ".svg",
                            "ROC " + attack + " eps=" + format_double(eps), "FPR", "TPR",
                            curves, 0.0, 1.0, 0.0, 1.0);

            std::cout << attack << " eps=" << format_double(eps)
                      << " auc_all=" << format_double(r.auc_all) << "\n";
        }
    }
    table.write(c.out_dir + "/evaluate_" + to_string(c.dataset) + ".csv", c.seed,
                config_hash(c));
    return kExitOk;
}

int cmd_sweep(const ExperimentConfig& c, const std::string& attack,
              const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw ConfigError("sweep: empty eps list");
    attack_from_string(attack);  // validate early

    ensure_out_dir(c);
    const Checkpoint cnn = load_ckpt_or_data_error(cnn_checkpoint_path(c));
    const Checkpoint mlp = load_ckpt_or_data_error(mlp_checkpoint_path(c));
    const LabeledDataset test = load_split(c, "test");

    CsvWriter table;
    table.header({"eps", "rows", "attack_success_rate", "auc_epistemic", "auc_aleatoric",
                  "auc_scibilic", "auc_entropy", "auc_closeness", "auc_all"});
    std::vector<ChartSeries> series(6);
    const char* names[6] = {"epistemic", "aleatoric", "scibilic", "entropy", "closeness",
                            "all"};
    for (int i = 0; i < 6; ++i) series[std::size_t(i)].name = names[i];

    for (double eps : eps_list) {
        const CellResult r = evaluate_cell(cnn, mlp, test, attack, eps, c);
        table.cell(eps)
            .cell(r.rows.size())
            .cell(r.attack_success_rate)
            .cell(r.auc_epistemic)
            .cell(r.auc_aleatoric)
            .cell(r.auc_scibilic)
            .cell(r.auc_entropy)
            .cell(r.auc_closeness)
            .cell(r.auc_all)
            .end_row();
        const double aucs[6] = {r.auc_epistemic, r.auc_aleatoric, r.auc_scibilic,
                                r.auc_entropy,   r.auc_closeness, r.auc_all};
        for (int i = 0; i < 6; ++i) {
            series[std::size_t(i)].x.push_back(eps);
            series[std::size_t(i)].y.push_back(aucs[i]);
        }
        std::cout << attack << " eps=" << format_double(eps)
                  << " auc_all=" << format_double(r.auc_all) << "\n";
    }

    const std::string base = c.out_dir + "/sweep_" + attack + "_" + to_string(c.dataset);
    table.write(base + ".csv", c.seed, config_hash(c));
    write_svg_chart(base + ".svg", "AUC vs eps (" + attack + ")", "eps", "ROC-AUC", series,
                    eps_list.front(), eps_list.back(), 0.0, 1.0);
    return kExitOk;
}

}  // namespace advd
