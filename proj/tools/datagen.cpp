#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "advd/data.hpp"
#include "advd/synth.hpp"

// Writes procedurally generated stand-in datasets in the exact on-disk
// formats the loaders read (IDX for the two 28x28 sets, CIFAR-10 binary
// batches for the 32x32 RGB set). Useful when the real files are not
// available locally.
int main(int argc, char** argv) {
    CLI::App app{"Generate synthetic datasets in IDX / CIFAR binary format"};
    std::string dataset = "mnist_digit";
    std::string out_dir = "data";
    std::size_t train_n = 60000, test_n = 10000;
    std::uint64_t seed = 7;
    app.add_option("--dataset", dataset, "mnist_digit | mnist_fashion | cifar10");
    app.add_option("--out-dir", out_dir, "Target directory");
    app.add_option("--train", train_n, "Training sample count");
    app.add_option("--test", test_n, "Test sample count");
    app.add_option("--seed", seed, "Generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        const advd::DatasetId id = advd::dataset_from_string(dataset);
        std::filesystem::create_directories(out_dir);
        const advd::LabeledDataset train = advd::synth_dataset(id, train_n, seed, "train");
        const advd::LabeledDataset test = advd::synth_dataset(id, test_n, seed, "test");

        if (id == advd::DatasetId::cifar10) {
            const std::size_t per = (train_n + 4) / 5;
            for (int b = 0; b < 5; ++b) {
                const std::size_t begin = std::size_t(b) * per;
                if (begin >= train_n) break;
                const std::size_t end = std::min(train_n, begin + per);
                advd::LabeledDataset part;
                part.images = advd::Tensor(
                    {end - begin, 3, 32, 32},
                    std::vector<double>(train.images.data() + begin * 3072,
                                        train.images.data() + end * 3072));
                part.labels.assign(train.labels.begin() + std::ptrdiff_t(begin),
                                   train.labels.begin() + std::ptrdiff_t(end));
                advd::write_cifar_binary(
                    part, out_dir + "/data_batch_" + std::to_string(b + 1) + ".bin");
            }
            advd::write_cifar_binary(test, out_dir + "/test_batch.bin");
        } else {
            advd::write_idx(train, out_dir + "/train-images-idx3-ubyte",
                            out_dir + "/train-labels-idx1-ubyte");
            advd::write_idx(test, out_dir + "/t10k-images-idx3-ubyte",
                            out_dir + "/t10k-labels-idx1-ubyte");
        }
        std::cout << "wrote " << dataset << " (" << train_n << " train, " << test_n
                  << " test) to " << out_dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
