#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "advd/data.hpp"
#include "advd/synth.hpp"

using namespace advd;

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

void push_be32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back((x >> 24) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back(x & 0xff);
}

// two 2x3 images; first pixel 0x7F
std::vector<unsigned char> idx_image_fixture() {
    std::vector<unsigned char> v;
    push_be32(v, 0x00000803);
    push_be32(v, 2);
    push_be32(v, 2);
    push_be32(v, 3);
    const unsigned char pixels[12] = {0x7F, 0, 255, 10, 20, 30, 1, 2, 3, 4, 5, 6};
    v.insert(v.end(), pixels, pixels + 12);
    return v;
}

std::vector<unsigned char> idx_label_fixture(std::uint32_t n = 2) {
    std::vector<unsigned char> v;
    push_be32(v, 0x00000801);
    push_be32(v, n);
    for (std::uint32_t i = 0; i < n; ++i) v.push_back(static_cast<unsigned char>(3 + i));
    return v;
}

}  // namespace

TEST_CASE("IDX fixture loads with known pixel values") {
    write_bytes("fix-images", idx_image_fixture());
    write_bytes("fix-labels", idx_label_fixture());
    const LabeledDataset ds = load_idx("fix-images", "fix-labels");
    CHECK(ds.size() == 2);
    CHECK(ds.images.shape() == std::vector<std::size_t>{2, 1, 2, 3});
    CHECK(ds.images[0] == doctest::Approx(127.0 / 255.0).epsilon(1e-12));
    CHECK(ds.images[0] == doctest::Approx(0.498).epsilon(1e-3));
    CHECK(ds.images[2] == 1.0);
    CHECK(ds.labels[0] == 3);
    CHECK(ds.labels[1] == 4);

    SUBCASE("loading twice gives identical tensors") {
        const LabeledDataset again = load_idx("fix-images", "fix-labels");
        for (std::size_t i = 0; i < ds.images.numel(); ++i)
            CHECK(ds.images[i] == again.images[i]);
    }
}

TEST_CASE("IDX error paths") {
    write_bytes("fix-images", idx_image_fixture());

    SUBCASE("wrong label magic") {
        auto lab = idx_label_fixture();
        lab[3] = 0x05;
        write_bytes("fix-bad-labels", lab);
        CHECK_THROWS_WITH_AS(load_idx("fix-images", "fix-bad-labels"),
                             doctest::Contains("magic"), std::runtime_error);
    }
    SUBCASE("wrong image magic") {
        auto img = idx_image_fixture();
        img[3] = 0x01;
        write_bytes("fix-bad-images", img);
        write_bytes("fix-labels", idx_label_fixture());
        CHECK_THROWS_WITH_AS(load_idx("fix-bad-images", "fix-labels"),
                             doctest::Contains("magic"), std::runtime_error);
    }
    SUBCASE("count mismatch") {
        write_bytes("fix-labels3", idx_label_fixture(3));
        CHECK_THROWS_WITH_AS(load_idx("fix-images", "fix-labels3"),
                             doctest::Contains("mismatch"), std::runtime_error);
    }
    SUBCASE("truncated images") {
        auto img = idx_image_fixture();
        img.resize(img.size() - 4);
        write_bytes("fix-trunc", img);
        write_bytes("fix-labels", idx_label_fixture());
        CHECK_THROWS_WITH_AS(load_idx("fix-trunc", "fix-labels"),
                             doctest::Contains("truncated"), std::runtime_error);
    }
    SUBCASE("missing file") { CHECK_THROWS(load_idx("no-such-file", "fix-labels")); }
}

TEST_CASE("CIFAR binary loader") {
    SUBCASE("one record, label 9") {
        std::vector<unsigned char> rec(3073, 100);
        rec[0] = 9;
        write_bytes("cifar-one", rec);
        const LabeledDataset ds = load_cifar_binary({"cifar-one"});
        CHECK(ds.size() == 1);
        CHECK(ds.labels[0] == 9);
        CHECK(ds.images.shape() == std::vector<std::size_t>{1, 3, 32, 32});
        CHECK(ds.images[0] == doctest::Approx(100.0 / 255.0));
    }
    SUBCASE("label byte 10 is rejected") {
        std::vector<unsigned char> rec(3073, 0);
        rec[0] = 10;
        write_bytes("cifar-bad", rec);
        CHECK_THROWS_WITH_AS(load_cifar_binary({"cifar-bad"}), doctest::Contains("range"),
                             std::runtime_error);
    }
    SUBCASE("empty file gives an empty valid dataset") {
        write_bytes("cifar-empty", {});
        const LabeledDataset ds = load_cifar_binary({"cifar-empty"});
        CHECK(ds.size() == 0);
    }
    SUBCASE("size must be a multiple of 3073") {
        write_bytes("cifar-odd", std::vector<unsigned char>(3072, 0));
        CHECK_THROWS_WITH_AS(load_cifar_binary({"cifar-odd"}), doctest::Contains("3073"),
                             std::runtime_error);
    }
}

TEST_CASE("gaussian noise model") {
    RngStream rng(5);

    SUBCASE("eps=0 is the identity") {
        Tensor x({1, 4}, {0.1, 0.5, 0.9, 0.0});
        const Tensor out = gaussian_noisify(x, 0.0, rng);
        for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == x[i]);
    }
    SUBCASE("negative eps is rejected") {
        CHECK_THROWS(gaussian_noisify(Tensor({1}), -0.1, rng));
    }
    SUBCASE("sample std matches eps and mean is centered") {
        const std::size_t n = 1000000;
        Tensor x({n});
        x.fill(0.5);
        const double eps = 0.08;  // clipping never binds at 0.5 +- 5 sigma
        const Tensor out = gaussian_noisify(x, eps, rng);
        double sum = 0, sum2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = out[i] - 0.5;
            sum += d;
            sum2 += d * d;
        }
        const double mean = sum / double(n);
        const double std = std::sqrt(sum2 / double(n) - mean * mean);
        CHECK(std::fabs(mean) < 0.002);
        CHECK(std::fabs(std - eps) / eps < 0.02);
    }
    SUBCASE("clipping keeps pixels in range") {
        Tensor ones({5000});
        ones.fill(1.0);
        const Tensor out = gaussian_noisify(ones, 0.3, rng);
        for (std::size_t i = 0; i < out.numel(); ++i) {
            CHECK(out[i] <= 1.0);
            CHECK(out[i] >= 0.0);
        }
    }
}

TEST_CASE("synthetic datasets honor format and round-trip through the writers") {
    const LabeledDataset digits = synth_dataset(DatasetId::mnist_digit, 64, 3, "train");
    CHECK(digits.images.shape() == std::vector<std::size_t>{64, 1, 28, 28});
    for (int y : digits.labels) {
        CHECK(y >= 0);
        CHECK(y <= 9);
    }
    for (std::size_t i = 0; i < digits.images.numel(); ++i) {
        CHECK(digits.images[i] >= 0.0);
        CHECK(digits.images[i] <= 1.0);
    }
    const LabeledDataset again = synth_dataset(DatasetId::mnist_digit, 64, 3, "train");
    for (std::size_t i = 0; i < digits.images.numel(); ++i)
        CHECK(digits.images[i] == again.images[i]);

    SUBCASE("IDX writer round-trips within quantization") {
        write_idx(digits, "synth-images", "synth-labels");
        const LabeledDataset back = load_idx("synth-images", "synth-labels");
        REQUIRE(back.size() == 64);
        for (std::size_t i = 0; i < back.images.numel(); ++i)
            CHECK(std::fabs(back.images[i] - digits.images[i]) <= 0.5 / 255.0 + 1e-12);
        CHECK(back.labels == digits.labels);
    }

    SUBCASE("CIFAR writer round-trips within quantization") {
        const LabeledDataset cif = synth_dataset(DatasetId::cifar10, 16, 4, "test");
        CHECK(cif.images.shape() == std::vector<std::size_t>{16, 3, 32, 32});
        write_cifar_binary(cif, "synth-cifar.bin");
        const LabeledDataset back = load_cifar_binary({"synth-cifar.bin"});
        REQUIRE(back.size() == 16);
        for (std::size_t i = 0; i < back.images.numel(); ++i)
            CHECK(std::fabs(back.images[i] - cif.images[i]) <= 0.5 / 255.0 + 1e-12);
    }

    SUBCASE("fashion variant renders all classes") {
        const LabeledDataset fash = synth_dataset(DatasetId::mnist_fashion, 200, 5, "train");
        std::vector<int> hist(10, 0);
        for (int y : fash.labels) hist[std::size_t(y)]++;
        for (int h : hist) CHECK(h > 0);
        double mass = 0;
        for (std::size_t i = 0; i < fash.images.numel(); ++i) mass += fash.images[i];
        CHECK(mass / double(fash.images.numel()) > 0.05);  // silhouettes have area
    }
}
