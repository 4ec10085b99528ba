#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "advd/config.hpp"
#include "advd/data.hpp"
#include "advd/synth.hpp"

using namespace advd;
namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* bin = std::getenv("ADVDETECT_BIN");
    return bin ? bin : "../advdetect";
}

int run(const std::string& args) {
    const int rc = std::system((binary() + " " + args + " >> e2e_out/cli.log 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("full command pipeline on a miniature dataset") {
    if (!fs::exists(binary())) {
        MESSAGE("advdetect binary not found, skipping");
        return;
    }
    fs::create_directories("e2e_data");
    fs::create_directories("e2e_out");
    std::ofstream("e2e_out/cli.log", std::ios::trunc);
    {
        const LabeledDataset train = synth_dataset(DatasetId::mnist_digit, 300, 41, "train");
        const LabeledDataset test = synth_dataset(DatasetId::mnist_digit, 80, 41, "test");
        write_idx(train, "e2e_data/train-images-idx3-ubyte", "e2e_data/train-labels-idx1-ubyte");
        write_idx(test, "e2e_data/t10k-images-idx3-ubyte", "e2e_data/t10k-labels-idx1-ubyte");
    }
    const std::string common =
        " --dataset mnist_digit --data-dir e2e_data --out-dir e2e_out --seed 11";

    SUBCASE("train with epochs=0 still writes a checkpoint") {
        REQUIRE(run("train-cnn" + common + " --epochs 0") == 0);
        CHECK(fs::exists("e2e_out/cnn_mnist_digit.advd"));
        CHECK(fs::exists("e2e_out/train_cnn_mnist_digit.csv"));
    }

    SUBCASE("trained pipeline end to end") {
        REQUIRE(run("train-cnn" + common + " --epochs 2") == 0);
        const std::string history = slurp("e2e_out/train_cnn_mnist_digit.csv");
        CHECK(history.rfind("epoch,loss,accuracy\n", 0) == 0);
        CHECK(history.find("# seed=11") != std::string::npos);

        // same seed, same bytes
        const std::string ckpt_bytes = slurp("e2e_out/cnn_mnist_digit.advd");
        REQUIRE(run("train-cnn" + common + " --epochs 2") == 0);
        CHECK(slurp("e2e_out/train_cnn_mnist_digit.csv") == history);
        CHECK(slurp("e2e_out/cnn_mnist_digit.advd") == ckpt_bytes);

        REQUIRE(run("build-closeness" + common +
                    " --closeness-cap 40 --set mlp_epochs=2") == 0);
        CHECK(fs::exists("e2e_out/mlp_mnist_digit.advd"));
        CHECK(fs::exists("e2e_out/features_mnist_digit.advd"));

        REQUIRE(run("craft" + common +
                    " --cap 4 --set attacks=fgsm,bim --set eps_list=0.1") == 0);
        CHECK(fs::exists("e2e_out/craft_fgsm_0p1.csv"));
        CHECK(fs::exists("e2e_out/craft_fgsm_0p1.advd"));
        CHECK(fs::exists("e2e_out/craft_bim_0p1.advd"));
        const std::string manifest = slurp("e2e_out/craft_fgsm_0p1.csv");
        CHECK(manifest.rfind("index,attack,eps,success,linf,l2\n", 0) == 0);

        REQUIRE(run("evaluate" + common +
                    " --cap 12 --T 4 --set attacks=fgsm,bim --set eps_list=0.1") == 0);
        CHECK(fs::exists("e2e_out/evaluate_mnist_digit.csv"));
        CHECK(fs::exists("e2e_out/detect_fgsm_0p1.csv"));
        CHECK(fs::exists("e2e_out/uncertainty_fgsm_0p1.csv"));
        CHECK(fs::exists("e2e_out/roc_fgsm_0p1.svg"));
        const std::string detect = slurp("e2e_out/detect_fgsm_0p1.csv");
        CHECK(detect.rfind("sample_id,origin,attack,eps,epi,ale,sci,ent,close,label\n", 0) ==
              0);

        REQUIRE(run("sweep" + common +
                    " --cap 12 --T 4 --attack bim --eps-list 0.1,0.2") == 0);
        CHECK(fs::exists("e2e_out/sweep_bim_mnist_digit.csv"));
        CHECK(fs::exists("e2e_out/sweep_bim_mnist_digit.svg"));

        // crafted blob holds the adversarial tensors
        auto [meta, tensors] = load_container("e2e_out/craft_bim_0p1.advd");
        CHECK(meta.find("crafted_set") != std::string::npos);
        CHECK(tensors.count("images") == 1);
        CHECK(tensors.count("labels") == 1);
        CHECK(tensors.count("success") == 1);
        CHECK(tensors.at("images").dim(0) == tensors.at("labels").numel());
    }
}
