#include "advd/tensor.hpp"

#include <cmath>
#include <sstream>

namespace advd {

Tensor Tensor::validated(std::vector<std::size_t> shape, std::vector<double> data) {
    for (double v : data) {
        if (!std::isfinite(v))
            throw std::invalid_argument("Tensor: non-finite value in external input");
    }
    return Tensor(std::move(shape), std::move(data));
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor batch_row(const Tensor& batch, std::size_t i) {
    if (batch.rank() < 1 || i >= batch.dim(0))
        throw std::out_of_range("batch_row: index out of range");
    std::vector<std::size_t> row_shape = batch.shape();
    row_shape[0] = 1;
    const std::size_t stride = batch.numel() / batch.dim(0);
    std::vector<double> data(batch.data() + i * stride, batch.data() + (i + 1) * stride);
    return Tensor(std::move(row_shape), std::move(data));
}

double linf_distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("linf_distance: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double l2_distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("l2_distance: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace advd
