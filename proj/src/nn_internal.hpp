#pragma once

#include <Eigen/Dense>

#include "advd/nn.hpp"

namespace advd::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

// Unfolds one {C,H,W} sample into a (C*k*k) x (OH*OW) patch matrix, stride 1.
inline void im2col(const double* x, std::size_t C, std::size_t H, std::size_t W, std::size_t k,
                   std::size_t pad, double* cols) {
    const std::size_t OH = H + 2 * pad - k + 1, OW = W + 2 * pad - k + 1;
    const std::size_t ncols = OH * OW;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                double* row = cols + ((c * k + ki) * k + kj) * ncols;
                for (std::size_t oi = 0; oi < OH; ++oi) {
                    const std::ptrdiff_t ih = std::ptrdiff_t(oi + ki) - std::ptrdiff_t(pad);
                    double* dst = row + oi * OW;
                    if (ih < 0 || ih >= std::ptrdiff_t(H)) {
                        std::fill(dst, dst + OW, 0.0);
                        continue;
                    }
                    const double* src = x + (c * H + std::size_t(ih)) * W;
                    for (std::size_t oj = 0; oj < OW; ++oj) {
                        const std::ptrdiff_t iw = std::ptrdiff_t(oj + kj) - std::ptrdiff_t(pad);
                        dst[oj] = (iw < 0 || iw >= std::ptrdiff_t(W)) ? 0.0 : src[iw];
                    }
                }
            }
        }
    }
}

// Scatters a patch-matrix cotangent back onto the {C,H,W} input (accumulates).
inline void col2im(const double* cols, std::size_t C, std::size_t H, std::size_t W, std::size_t k,
                   std::size_t pad, double* dx) {
    const std::size_t OH = H + 2 * pad - k + 1, OW = W + 2 * pad - k + 1;
    const std::size_t ncols = OH * OW;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                const double* row = cols + ((c * k + ki) * k + kj) * ncols;
                for (std::size_t oi = 0; oi < OH; ++oi) {
                    const std::ptrdiff_t ih = std::ptrdiff_t(oi + ki) - std::ptrdiff_t(pad);
                    if (ih < 0 || ih >= std::ptrdiff_t(H)) continue;
                    double* dst = dx + (c * H + std::size_t(ih)) * W;
                    const double* src = row + oi * OW;
                    for (std::size_t oj = 0; oj < OW; ++oj) {
                        const std::ptrdiff_t iw = std::ptrdiff_t(oj + kj) - std::ptrdiff_t(pad);
                        if (iw >= 0 && iw < std::ptrdiff_t(W)) dst[iw] += src[oj];
                    }
                }
            }
        }
    }
}

inline std::size_t flat(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

}  // namespace advd::detail
