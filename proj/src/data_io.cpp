#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "advd/data.hpp"

namespace advd {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr std::size_t kCifarRecord = 3073;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
    if (off + 4 > b.size()) throw std::runtime_error("IDX: truncated header");
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_file(images_path);
    const auto lab = read_file(labels_path);

    if (be32(img, 0) != kIdxImagesMagic)
        throw std::runtime_error("IDX: bad image magic in " + images_path);
    if (be32(lab, 0) != kIdxLabelsMagic)
        throw std::runtime_error("IDX: bad label magic in " + labels_path);

    const std::size_t n = be32(img, 4);
    const std::size_t rows = be32(img, 8);
    const std::size_t cols = be32(img, 12);
    const std::size_t n_labels = be32(lab, 4);
    if (n != n_labels)
        throw std::runtime_error("IDX: image/label count mismatch (" + std::to_string(n) +
                                 " vs " + std::to_string(n_labels) + ")");
    if (img.size() != 16 + n * rows * cols)
        throw std::runtime_error("IDX: truncated image file " + images_path);
    if (lab.size() != 8 + n) throw std::runtime_error("IDX: truncated label file " + labels_path);

    LabeledDataset ds;
    ds.images = Tensor({n, 1, rows, cols});
    ds.labels.resize(n);
    for (std::size_t k = 0; k < n * rows * cols; ++k)
        ds.images[k] = double(img[16 + k]) / 255.0;
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char y = lab[8 + i];
        if (y > 9) throw std::runtime_error("IDX: label out of range at " + std::to_string(i));
        ds.labels[i] = int(y);
    }
    return ds;
}

LabeledDataset load_cifar_binary(const std::vector<std::string>& batch_paths) {
    std::vector<unsigned char> all;
    for (const auto& p : batch_paths) {
        const auto b = read_file(p);
        if (b.size() % kCifarRecord != 0)
            throw std::runtime_error("CIFAR: file size not a multiple of 3073: " + p);
        all.insert(all.end(), b.begin(), b.end());
    }
    const std::size_t n = all.size() / kCifarRecord;

    LabeledDataset ds;
    ds.images = Tensor({n, 3, 32, 32});
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rec = all.data() + i * kCifarRecord;
        if (rec[0] > 9)
            throw std::runtime_error("CIFAR: label out of range at record " + std::to_string(i));
        ds.labels[i] = int(rec[0]);
        double* dst = ds.images.data() + i * 3072;
        for (std::size_t k = 0; k < 3072; ++k) dst[k] = double(rec[1 + k]) / 255.0;
    }
    return ds;
}

Tensor gaussian_noisify(const Tensor& x, double eps, RngStream& rng) {
    if (eps < 0.0) throw std::invalid_argument("gaussian_noisify: eps must be >= 0");
    Tensor out = x;
    if (eps == 0.0) return out;
    for (std::size_t k = 0; k < out.numel(); ++k) {
        const double v = out[k] + eps * rng.gaussian();
        out[k] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return out;
}

void write_idx(const LabeledDataset& ds, const std::string& images_path,
               const std::string& labels_path) {
    if (ds.images.rank() != 4 || ds.images.dim(1) != 1)
        throw std::invalid_argument("write_idx: expected {N,1,H,W} images");
    const std::size_t n = ds.images.dim(0), rows = ds.images.dim(2), cols = ds.images.dim(3);

    std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
    if (!img) throw std::runtime_error("cannot write " + images_path);
    put_be32(img, kIdxImagesMagic);
    put_be32(img, std::uint32_t(n));
    put_be32(img, std::uint32_t(rows));
    put_be32(img, std::uint32_t(cols));
    std::vector<unsigned char> buf(n * rows * cols);
    for (std::size_t k = 0; k < buf.size(); ++k) {
        const double v = std::min(1.0, std::max(0.0, ds.images[k]));
        buf[k] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    img.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));

    std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
    if (!lab) throw std::runtime_error("cannot write " + labels_path);
    put_be32(lab, kIdxLabelsMagic);
    put_be32(lab, std::uint32_t(n));
    for (int y : ds.labels) {
        const unsigned char b = static_cast<unsigned char>(y);
        lab.write(reinterpret_cast<const char*>(&b), 1);
    }
}

void write_cifar_binary(const LabeledDataset& ds, const std::string& path) {
    if (ds.images.rank() != 4 || ds.images.dim(1) != 3 || ds.images.dim(2) != 32 ||
        ds.images.dim(3) != 32)
        throw std::invalid_argument("write_cifar_binary: expected {N,3,32,32} images");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::size_t n = ds.images.dim(0);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char y = static_cast<unsigned char>(ds.labels[i]);
        out.write(reinterpret_cast<const char*>(&y), 1);
        unsigned char rec[3072];
        const double* src = ds.images.data() + i * 3072;
        for (std::size_t k = 0; k < 3072; ++k) {
            const double v = std::min(1.0, std::max(0.0, src[k]));
            rec[k] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        out.write(reinterpret_cast<const char*>(rec), 3072);
    }
}

}  // namespace advd
