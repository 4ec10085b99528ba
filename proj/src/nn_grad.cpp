#include <cmath>
#include <stdexcept>

#include "advd/nn.hpp"
#include "nn_internal.hpp"

namespace advd {

using detail::CMapMat;
using detail::MapMat;

namespace {

struct BackwardResult {
    std::map<std::string, Tensor> params;
    Tensor input;
};

// Reverse pass from a logits cotangent. Dropout masks and pool argmaxes are
// replayed from the trace, so the differentiated function is exactly the one
// the forward pass evaluated.
BackwardResult backward_pass(const Checkpoint& ckpt, const ActivationTrace& trace,
                             const Tensor& dlogits, bool want_params, bool want_input) {
    const NetworkSpec& spec = ckpt.spec;
    const auto shapes = infer_shapes(spec);
    const std::size_t N = trace.input.dim(0);
    if (!dlogits.same_shape(trace.logits))
        throw std::invalid_argument("backward: cotangent shape mismatch");

    BackwardResult result;
    Tensor dcur = dlogits;

    for (std::size_t ii = spec.layers.size(); ii > 0; --ii) {
        const std::size_t i = ii - 1;
        const LayerSpec& l = spec.layers[i];
        const auto& in_shape = shapes[i];
        const auto& out_shape = shapes[i + 1];
        const std::size_t in_sz = detail::flat(in_shape), out_sz = detail::flat(out_shape);
        const Tensor& layer_in = i == 0 ? trace.input : trace.outputs[i - 1];

        // Gradient w.r.t. the input stops early when the caller only wants
        // parameter gradients of the first layer.
        const bool need_dx = want_input || i > 0;

        std::vector<std::size_t> full_in;
        full_in.push_back(N);
        full_in.insert(full_in.end(), in_shape.begin(), in_shape.end());
        Tensor dx(std::move(full_in));

        switch (l.kind) {
            case LayerKind::conv2d: {
                const std::size_t C = in_shape[0], H = in_shape[1], W = in_shape[2];
                const std::size_t OC = out_shape[0], OH = out_shape[1], OW = out_shape[2];
                const std::string prefix = "L" + std::to_string(i);
                const Tensor& wt = ckpt.weights.at(prefix + ".weight");
                const std::size_t patch = C * l.kernel * l.kernel;

                Tensor dw({OC, C, l.kernel, l.kernel});
                Tensor db({OC});
                std::vector<double> cols(patch * OH * OW);
                std::vector<double> dcols(patch * OH * OW);
                CMapMat wmat(wt.data(), OC, patch);
                MapMat dwmat(dw.data(), OC, patch);

                for (std::size_t n = 0; n < N; ++n) {
                    CMapMat dy(dcur.data() + n * out_sz, OC, OH * OW);
                    if (want_params) {
                        detail::im2col(layer_in.data() + n * in_sz, C, H, W, l.kernel, l.padding,
                                       cols.data());
                        CMapMat cmat(cols.data(), patch, OH * OW);
                        dwmat.noalias() += dy * cmat.transpose();
                        for (std::size_t oc = 0; oc < OC; ++oc) db[oc] += dy.row(oc).sum();
                    }
                    if (need_dx) {
                        MapMat dcmat(dcols.data(), patch, OH * OW);
                        dcmat.noalias() = wmat.transpose() * dy;
                        detail::col2im(dcols.data(), C, H, W, l.kernel, l.padding,
                                       dx.data() + n * in_sz);
                    }
                }
                if (want_params) {
                    result.params[prefix + ".weight"] = std::move(dw);
                    result.params[prefix + ".bias"] = std::move(db);
                }
                break;
            }
            case LayerKind::maxpool2d: {
                const auto& arg = trace.pool_argmax[i];
                if (arg.size() != N * out_sz)
                    throw std::invalid_argument("backward: trace missing pool argmax");
                for (std::size_t n = 0; n < N; ++n) {
                    const double* dy = dcur.data() + n * out_sz;
                    double* dxi = dx.data() + n * in_sz;
                    for (std::size_t o = 0; o < out_sz; ++o) dxi[arg[n * out_sz + o]] += dy[o];
                }
                break;
            }
            case LayerKind::relu: {
                const double* y = trace.outputs[i].data();
                const double* dy = dcur.data();
                double* dxi = dx.data();
                for (std::size_t k = 0; k < N * out_sz; ++k) dxi[k] = y[k] > 0.0 ? dy[k] : 0.0;
                break;
            }
            case LayerKind::dropout: {
                const Tensor& mask = trace.dropout_masks[i];
                const double* dy = dcur.data();
                double* dxi = dx.data();
                if (mask.empty()) {
                    std::copy(dy, dy + N * out_sz, dxi);
                } else {
                    for (std::size_t k = 0; k < N * out_sz; ++k) dxi[k] = dy[k] * mask[k];
                }
                break;
            }
            case LayerKind::flatten: {
                std::copy(dcur.data(), dcur.data() + N * out_sz, dx.data());
                break;
            }
            case LayerKind::dense: {
                const std::string prefix = "L" + std::to_string(i);
                const Tensor& wt = ckpt.weights.at(prefix + ".weight");
                CMapMat dy(dcur.data(), N, l.out_width);
                CMapMat x(layer_in.data(), N, l.in_width);
                CMapMat w(wt.data(), l.out_width, l.in_width);
                if (want_params) {
                    Tensor dw({l.out_width, l.in_width});
                    Tensor db({l.out_width});
                    MapMat dwm(dw.data(), l.out_width, l.in_width);
                    dwm.noalias() = dy.transpose() * x;
                    for (std::size_t o = 0; o < l.out_width; ++o) db[o] = dy.col(o).sum();
                    result.params[prefix + ".weight"] = std::move(dw);
                    result.params[prefix + ".bias"] = std::move(db);
                }
                if (need_dx) {
                    MapMat dxm(dx.data(), N, l.in_width);
                    dxm.noalias() = dy * w;
                }
                break;
            }
        }
        dcur = std::move(dx);
    }
    if (want_input) result.input = std::move(dcur);
    return result;
}

// (softmax - onehot) rows, optionally scaled.
Tensor ce_logit_grad(const ActivationTrace& trace, std::span<const int> labels, double scale) {
    const std::size_t N = trace.logits.dim(0), K = trace.logits.dim(1);
    if (labels.size() != N) throw std::invalid_argument("gradient: label count mismatch");
    Tensor d = softmax(trace.logits);
    for (std::size_t n = 0; n < N; ++n) {
        const int y = labels[n];
        if (y < 0 || std::size_t(y) >= K) throw std::out_of_range("gradient: label out of range");
        d[n * K + std::size_t(y)] -= 1.0;
    }
    if (scale != 1.0)
        for (std::size_t k = 0; k < d.numel(); ++k) d[k] *= scale;
    return d;
}

}  // namespace

Tensor input_gradient(const Checkpoint& ckpt, const ActivationTrace& trace,
                      std::span<const int> labels) {
    const Tensor d = ce_logit_grad(trace, labels, 1.0);
    return backward_pass(ckpt, trace, d, false, true).input;
}

std::map<std::string, Tensor> param_gradients(const Checkpoint& ckpt,
                                              const ActivationTrace& trace,
                                              std::span<const int> labels) {
    const std::size_t N = trace.logits.dim(0);
    const Tensor d = ce_logit_grad(trace, labels, 1.0 / double(N));
    return backward_pass(ckpt, trace, d, true, false).params;
}

Tensor backprop_logits(const Checkpoint& ckpt, const ActivationTrace& trace,
                       const Tensor& dlogits) {
    return backward_pass(ckpt, trace, dlogits, false, true).input;
}

}  // namespace advd
