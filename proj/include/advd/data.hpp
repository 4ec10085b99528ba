#pragma once

#include <string>
#include <vector>

#include "advd/rng.hpp"
#include "advd/tensor.hpp"

namespace advd {

/// Normalized labeled samples: images in [0,1], labels in [0,10).
struct LabeledDataset {
    Tensor images;            // {N,C,H,W}
    std::vector<int> labels;  // length N
    std::string dataset_id;
    std::string split;

    std::size_t size() const { return labels.size(); }
    Tensor sample(std::size_t i) const { return batch_row(images, i); }
};

/// Reads an IDX image/label file pair (big-endian magic + dims, u8 pixels
/// scaled by 1/255).
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Reads CIFAR-10 binary batches (3073-byte records: label byte + 3x32x32
/// channel-major pixels).
LabeledDataset load_cifar_binary(const std::vector<std::string>& batch_paths);

/// x + N(0, sigma=eps) i.i.d. per pixel, clipped back to [0,1].
Tensor gaussian_noisify(const Tensor& x, double eps, RngStream& rng);

/// Writers for the same two formats (fixture generation and the synthetic
/// dataset tool). Pixels are rounded to u8.
void write_idx(const LabeledDataset& ds, const std::string& images_path,
               const std::string& labels_path);
void write_cifar_binary(const LabeledDataset& ds, const std::string& path);

}  // namespace advd
