#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advd/cli.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    std::string dataset, data_dir, out_dir, cnn_ckpt, mlp_ckpt;
    long long seed = -1, cap = -1, t_samples = -1, epochs = -1, train_cap = -1,
              closeness_cap = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "Config file (key = value lines)");
    cmd->add_option("--set", f.overrides, "Extra key=value override (repeatable)");
    cmd->add_option("--dataset", f.dataset, "mnist_digit | mnist_fashion | cifar10");
    cmd->add_option("--data-dir", f.data_dir, "Directory with the dataset files");
    cmd->add_option("--out-dir", f.out_dir, "Output directory");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--cap", f.cap, "Sample cap (detection cells and closeness build)");
    cmd->add_option("--train-cap", f.train_cap, "Training-set cap (0 = full)");
    cmd->add_option("--closeness-cap", f.closeness_cap, "Closeness source cap (0 = full)");
    cmd->add_option("--T", f.t_samples, "MC dropout sample count");
    cmd->add_option("--epochs", f.epochs, "Training epochs override");
}

advd::ExperimentConfig resolve(const CommonFlags& f, bool epochs_are_mlp = false) {
    advd::ExperimentConfig c = f.config_path.empty()
                                   ? advd::default_config(advd::DatasetId::mnist_digit)
                                   : advd::load_config_file(f.config_path);
    if (!f.dataset.empty()) advd::apply_override(c, "dataset", f.dataset);
    if (!f.data_dir.empty()) advd::apply_override(c, "data_dir", f.data_dir);
    if (!f.out_dir.empty()) advd::apply_override(c, "out_dir", f.out_dir);
    if (f.seed >= 0) advd::apply_override(c, "seed", std::to_string(f.seed));
    if (f.cap >= 0) {
        advd::apply_override(c, "cap", std::to_string(f.cap));
        advd::apply_override(c, "closeness_cap", std::to_string(f.cap));
    }
    if (f.train_cap >= 0) advd::apply_override(c, "train_cap", std::to_string(f.train_cap));
    if (f.closeness_cap >= 0)
        advd::apply_override(c, "closeness_cap", std::to_string(f.closeness_cap));
    if (f.t_samples >= 0) advd::apply_override(c, "T", std::to_string(f.t_samples));
    if (f.epochs >= 0)
        advd::apply_override(c, epochs_are_mlp ? "mlp_epochs" : "cnn_epochs",
                             std::to_string(f.epochs));
    for (const auto& kv : f.overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw advd::ConfigError("--set expects key=value, got '" + kv + "'");
        advd::apply_override(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial-sample detection experiments"};
    app.require_subcommand(1);

    CommonFlags train_f, close_f, craft_f, eval_f, sweep_f;
    std::string sweep_attack = "bim";
    std::string sweep_eps;

    CLI::App* train = app.add_subcommand("train-cnn", "Train the image classifier");
    add_common(train, train_f);
    CLI::App* close =
        app.add_subcommand("build-closeness", "Build the feature dataset and train the MLP");
    add_common(close, close_f);
    CLI::App* craft = app.add_subcommand("craft", "Craft adversarial datasets");
    add_common(craft, craft_f);
    CLI::App* eval = app.add_subcommand("evaluate", "Per-attack AUC tables and ROC figures");
    add_common(eval, eval_f);
    CLI::App* sweep = app.add_subcommand("sweep", "Per-metric AUC across eps values");
    add_common(sweep, sweep_f);
    sweep->add_option("--attack", sweep_attack, "Attack to sweep");
    sweep->add_option("--eps-list", sweep_eps, "Comma-separated eps values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : advd::kExitConfigError;
    }

    try {
        if (train->parsed()) return advd::cmd_train_cnn(resolve(train_f));
        if (close->parsed()) return advd::cmd_build_closeness(resolve(close_f, true));
        if (craft->parsed()) return advd::cmd_craft(resolve(craft_f));
        if (eval->parsed()) return advd::cmd_evaluate(resolve(eval_f));
        if (sweep->parsed()) {
            advd::ExperimentConfig c = resolve(sweep_f);
            std::vector<double> eps_list = c.sweep_eps_list;
            if (!sweep_eps.empty()) {
                advd::apply_override(c, "sweep_eps_list", sweep_eps);
                eps_list = c.sweep_eps_list;
            }
            return advd::cmd_sweep(c, sweep_attack, eps_list);
        }
    } catch (const advd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return advd::kExitConfigError;
    } catch (const advd::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return advd::kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return advd::kExitConfigError;
}
