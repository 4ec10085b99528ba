#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advd/nn.hpp"
#include "advd/parallel.hpp"
#include "nn_internal.hpp"

namespace advd {

using detail::CMapMat;
using detail::MapMat;

namespace {

// Index of the last dense layer; its input is the penultimate activation.
std::size_t final_dense_index(const NetworkSpec& spec) {
    for (std::size_t i = spec.layers.size(); i > 0; --i)
        if (spec.layers[i - 1].kind == LayerKind::dense) return i - 1;
    throw std::invalid_argument("network has no dense layer");
}

}  // namespace

ActivationTrace forward(const Checkpoint& ckpt, const Tensor& batch, DropoutMode mode,
                        RngStream& rng) {
    const NetworkSpec& spec = ckpt.spec;
    const auto shapes = infer_shapes(spec);

    if (batch.rank() != spec.input_shape.size() + 1)
        throw std::invalid_argument("forward: batch must have a leading batch dimension");
    for (std::size_t d = 0; d < spec.input_shape.size(); ++d)
        if (batch.dim(d + 1) != spec.input_shape[d])
            throw std::invalid_argument("forward: input shape " + shape_string(batch.shape()) +
                                        " does not match " + shape_string(spec.input_shape));

    const std::size_t N = batch.dim(0);
    ActivationTrace trace;
    trace.input = batch;
    trace.outputs.resize(spec.layers.size());
    trace.dropout_masks.resize(spec.layers.size());
    trace.pool_argmax.resize(spec.layers.size());

    const Tensor* cur = &trace.input;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        const auto& in_shape = shapes[i];
        const auto& out_shape = shapes[i + 1];
        const std::size_t in_sz = detail::flat(in_shape), out_sz = detail::flat(out_shape);

        std::vector<std::size_t> full_out;
        full_out.push_back(N);
        full_out.insert(full_out.end(), out_shape.begin(), out_shape.end());
        Tensor out(std::move(full_out));

        switch (l.kind) {
            case LayerKind::conv2d: {
                const std::size_t C = in_shape[0], H = in_shape[1], W = in_shape[2];
                const std::size_t OC = out_shape[0], OH = out_shape[1], OW = out_shape[2];
                const Tensor& wt = ckpt.weights.at("L" + std::to_string(i) + ".weight");
                const Tensor& bias = ckpt.weights.at("L" + std::to_string(i) + ".bias");
                const std::size_t patch = C * l.kernel * l.kernel;
                std::vector<double> cols(patch * OH * OW);
                CMapMat wmat(wt.data(), OC, patch);
                for (std::size_t n = 0; n < N; ++n) {
                    detail::im2col(cur->data() + n * in_sz, C, H, W, l.kernel, l.padding,
                                   cols.data());
                    CMapMat cmat(cols.data(), patch, OH * OW);
                    MapMat omat(out.data() + n * out_sz, OC, OH * OW);
                    omat.noalias() = wmat * cmat;
                    for (std::size_t oc = 0; oc < OC; ++oc) omat.row(oc).array() += bias[oc];
                }
                break;
            }
            case LayerKind::maxpool2d: {
                const std::size_t C = in_shape[0], H = in_shape[1], W = in_shape[2];
                const std::size_t OH = out_shape[1], OW = out_shape[2];
                auto& arg = trace.pool_argmax[i];
                arg.resize(N * out_sz);
                for (std::size_t n = 0; n < N; ++n) {
                    const double* x = cur->data() + n * in_sz;
                    double* y = out.data() + n * out_sz;
                    for (std::size_t c = 0; c < C; ++c) {
                        for (std::size_t oi = 0; oi < OH; ++oi) {
                            for (std::size_t oj = 0; oj < OW; ++oj) {
                                const std::size_t h0 = oi * l.stride, w0 = oj * l.stride;
                                double best = -1e300;
                                std::size_t best_idx = 0;
                                for (std::size_t di = 0; di < l.pool; ++di) {
                                    for (std::size_t dj = 0; dj < l.pool; ++dj) {
                                        const std::size_t idx =
                                            (c * H + h0 + di) * W + (w0 + dj);
                                        if (x[idx] > best) {
                                            best = x[idx];
                                            best_idx = idx;
                                        }
                                    }
                                }
                                const std::size_t o = (c * OH + oi) * OW + oj;
                                y[o] = best;
                                arg[n * out_sz + o] = static_cast<std::uint32_t>(best_idx);
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::relu: {
                const double* x = cur->data();
                double* y = out.data();
                for (std::size_t k = 0; k < N * out_sz; ++k) y[k] = x[k] > 0.0 ? x[k] : 0.0;
                break;
            }
            case LayerKind::dropout: {
                const double* x = cur->data();
                double* y = out.data();
                if (mode == DropoutMode::off || l.drop_p == 0.0) {
                    std::copy(x, x + N * out_sz, y);
                } else {
                    Tensor mask(out.shape());
                    const double keep = 1.0 - l.drop_p;
                    const double scale = 1.0 / keep;
                    for (std::size_t k = 0; k < N * out_sz; ++k) {
                        mask[k] = rng.uniform() < keep ? scale : 0.0;
                        y[k] = x[k] * mask[k];
                    }
                    trace.dropout_masks[i] = std::move(mask);
                }
                break;
            }
            case LayerKind::flatten: {
                std::copy(cur->data(), cur->data() + N * out_sz, out.data());
                break;
            }
            case LayerKind::dense: {
                const Tensor& wt = ckpt.weights.at("L" + std::to_string(i) + ".weight");
                const Tensor& bias = ckpt.weights.at("L" + std::to_string(i) + ".bias");
                CMapMat x(cur->data(), N, l.in_width);
                CMapMat w(wt.data(), l.out_width, l.in_width);
                MapMat y(out.data(), N, l.out_width);
                y.noalias() = x * w.transpose();
                CMapMat b(bias.data(), 1, l.out_width);
                y.rowwise() += b.row(0);
                break;
            }
        }
        trace.outputs[i] = std::move(out);
        cur = &trace.outputs[i];
    }

    const std::size_t fd = final_dense_index(spec);
    trace.penultimate = fd == 0 ? trace.input : trace.outputs[fd - 1];
    trace.logits = trace.outputs.back();
    for (double v : trace.logits.values())
        if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite logits");
    return trace;
}

ActivationTrace forward_det(const Checkpoint& ckpt, const Tensor& batch) {
    RngStream unused(0);
    return forward(ckpt, batch, DropoutMode::off, unused);
}

Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 2) throw std::invalid_argument("softmax: expected {N,K}");
    const std::size_t N = logits.dim(0), K = logits.dim(1);
    Tensor out(logits.shape());
    for (std::size_t n = 0; n < N; ++n) {
        const double* z = logits.data() + n * K;
        double* p = out.data() + n * K;
        double m = z[0];
        for (std::size_t k = 1; k < K; ++k) m = std::max(m, z[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            p[k] = std::exp(z[k] - m);
            sum += p[k];
        }
        for (std::size_t k = 0; k < K; ++k) p[k] /= sum;
    }
    return out;
}

double cross_entropy(const Tensor& logits, std::span<const int> labels) {
    const std::size_t N = logits.dim(0), K = logits.dim(1);
    if (labels.size() != N) throw std::invalid_argument("cross_entropy: label count mismatch");
    double total = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const int y = labels[n];
        if (y < 0 || std::size_t(y) >= K)
            throw std::out_of_range("cross_entropy: label out of range");
        const double* z = logits.data() + n * K;
        double m = z[0];
        for (std::size_t k = 1; k < K; ++k) m = std::max(m, z[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) sum += std::exp(z[k] - m);
        total += m + std::log(sum) - z[std::size_t(y)];
    }
    return total / double(N);
}

std::vector<int> predict_classes(const Checkpoint& ckpt, const Tensor& X,
                                 std::size_t batch_size) {
    const std::size_t N = X.dim(0);
    std::vector<int> preds(N, -1);
    const std::size_t stride = X.numel() / std::max<std::size_t>(N, 1);
    std::vector<std::size_t> rest(X.shape().begin() + 1, X.shape().end());

    const std::size_t nbatches = (N + batch_size - 1) / batch_size;
    parallel_items(nbatches, [&](std::size_t b) {
        const std::size_t begin = b * batch_size, end = std::min(N, begin + batch_size);
        std::vector<std::size_t> shape{end - begin};
        shape.insert(shape.end(), rest.begin(), rest.end());
        Tensor sub(std::move(shape),
                   std::vector<double>(X.data() + begin * stride, X.data() + end * stride));
        ActivationTrace t = forward_det(ckpt, sub);
        const std::size_t K = t.logits.dim(1);
        for (std::size_t n = 0; n < end - begin; ++n) {
            const double* z = t.logits.data() + n * K;
            std::size_t best = 0;
            for (std::size_t k = 1; k < K; ++k)
                if (z[k] > z[best]) best = k;
            preds[begin + n] = int(best);
        }
    });
    return preds;
}

double evaluate_accuracy(const Checkpoint& ckpt, const Tensor& X, const std::vector<int>& y,
                         std::size_t batch_size) {
    if (X.dim(0) != y.size()) throw std::invalid_argument("evaluate_accuracy: size mismatch");
    if (y.empty()) throw std::invalid_argument("evaluate_accuracy: empty dataset");
    const std::vector<int> preds = predict_classes(ckpt, X, batch_size);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += preds[i] == y[i];
    return double(correct) / double(y.size());
}

}  // namespace advd
