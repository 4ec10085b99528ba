#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "advd/aligned.hpp"

namespace advd {

/// Dense row-major tensor of doubles. The single value type for images,
/// activations, weights and gradients throughout the library. Storage is
/// 64-byte aligned (see aligned.hpp).
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(numel_of(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, AlignedVec data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != numel_of(shape_))
            throw std::invalid_argument("Tensor: data length does not match shape");
    }

    Tensor(std::vector<std::size_t> shape, const std::vector<double>& data)
        : shape_(std::move(shape)), data_(data.begin(), data.end()) {
        if (data_.size() != numel_of(shape_))
            throw std::invalid_argument("Tensor: data length does not match shape");
    }

    /// Construction path for external input: rejects NaN/Inf values.
    static Tensor validated(std::vector<std::size_t> shape, const std::vector<double>& data);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    AlignedVec& values() { return data_; }
    const AlignedVec& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    /// In-place reshape; element count must be preserved.
    void reshape(std::vector<std::size_t> shape) {
        if (numel_of(shape) != data_.size())
            throw std::invalid_argument("Tensor::reshape: element count mismatch");
        shape_ = std::move(shape);
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    static std::size_t numel_of(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

private:
    std::vector<std::size_t> shape_;
    AlignedVec data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Copies row `i` of a batched tensor {N, rest...} into a {1, rest...} tensor.
Tensor batch_row(const Tensor& batch, std::size_t i);

/// Max |a-b| over all elements; shapes must match.
double linf_distance(const Tensor& a, const Tensor& b);

/// Euclidean distance; shapes must match.
double l2_distance(const Tensor& a, const Tensor& b);

}  // namespace advd
