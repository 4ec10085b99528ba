#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "advd/nn.hpp"
#include "advd/parallel.hpp"

namespace advd {

void adam_step(std::map<std::string, Tensor>& weights,
               const std::map<std::string, Tensor>& grads, AdamState& state,
               const AdamHyper& hyper) {
    state.step += 1;
    const double t = double(state.step);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);
    for (auto& [name, w] : weights) {
        auto git = grads.find(name);
        if (git == grads.end()) continue;
        const Tensor& g = git->second;
        if (!g.same_shape(w)) throw std::invalid_argument("adam_step: shape mismatch for " + name);
        Tensor& m = state.m.at(name);
        Tensor& v = state.v.at(name);
        for (std::size_t k = 0; k < w.numel(); ++k) {
            m[k] = hyper.beta1 * m[k] + (1.0 - hyper.beta1) * g[k];
            v[k] = hyper.beta2 * v[k] + (1.0 - hyper.beta2) * g[k] * g[k];
            w[k] -= hyper.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + hyper.eps);
        }
    }
}

namespace {

Tensor gather_rows(const Tensor& X, const std::vector<std::size_t>& order, std::size_t begin,
                   std::size_t end) {
    const std::size_t stride = X.numel() / X.dim(0);
    std::vector<std::size_t> shape = X.shape();
    shape[0] = end - begin;
    Tensor out(std::move(shape));
    for (std::size_t r = begin; r < end; ++r) {
        const double* src = X.data() + order[r] * stride;
        std::copy(src, src + stride, out.data() + (r - begin) * stride);
    }
    return out;
}

}  // namespace

TrainResult train_classifier(const NetworkSpec& spec, const Tensor& X, const std::vector<int>& y,
                             const TrainHyper& hyper, std::uint64_t seed,
                             const std::string& dataset_id) {
    const std::size_t N = X.rank() >= 1 ? X.dim(0) : 0;
    if (N == 0 || y.empty()) throw std::invalid_argument("train_classifier: empty dataset");
    if (y.size() != N) throw std::invalid_argument("train_classifier: label count mismatch");

    RngStream init_rng = RngStream::derive(seed, "init");
    TrainResult result;
    result.ckpt = init_checkpoint(spec, init_rng);
    result.ckpt.meta.dataset_id = dataset_id;
    result.ckpt.meta.seed = seed;

    const std::size_t batch = std::max<std::size_t>(1, std::min(hyper.batch_size, N));
    const std::size_t nbatches = (N + batch - 1) / batch;
    AdamHyper adam;
    adam.lr = hyper.lr;

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        RngStream shuffle_rng = RngStream::derive(seed, "shuffle", epoch);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t epoch_correct = 0;

        for (std::size_t b = 0; b < nbatches; ++b) {
            const std::size_t begin = b * batch, end = std::min(N, begin + batch);
            const std::size_t bn = end - begin;

            struct ChunkOut {
                std::map<std::string, Tensor> grads;
                double loss_sum = 0.0;
                std::size_t correct = 0;
                std::size_t count = 0;
            };
            std::vector<ChunkOut> chunk_out(kReductionChunks);

            parallel_chunks(bn, kReductionChunks, [&](std::size_t c, std::size_t cb,
                                                      std::size_t ce) {
                Tensor sub = gather_rows(X, order, begin + cb, begin + ce);
                std::vector<int> labels(ce - cb);
                for (std::size_t r = cb; r < ce; ++r) labels[r - cb] = y[order[begin + r]];

                RngStream drop_rng = RngStream::derive(
                    seed, "dropout", (epoch * nbatches + b) * kReductionChunks + c);
                ActivationTrace trace = forward(result.ckpt, sub, DropoutMode::sample, drop_rng);
                ChunkOut& out = chunk_out[c];
                out.count = ce - cb;
                out.loss_sum = cross_entropy(trace.logits, labels) * double(out.count);
                const std::size_t K = trace.logits.dim(1);
                for (std::size_t n = 0; n < out.count; ++n) {
                    const double* z = trace.logits.data() + n * K;
                    std::size_t best = 0;
                    for (std::size_t k = 1; k < K; ++k)
                        if (z[k] > z[best]) best = k;
                    out.correct += int(best) == labels[n];
                }
                out.grads = param_gradients(result.ckpt, trace, labels);
            });

            // Fixed-order reduction across chunks keeps results bit-identical
            // for any worker count.
            std::map<std::string, Tensor> total;
            for (std::size_t c = 0; c < kReductionChunks; ++c) {
                ChunkOut& out = chunk_out[c];
                if (out.count == 0) continue;
                const double w = double(out.count) / double(bn);
                for (auto& [name, g] : out.grads) {
                    auto it = total.find(name);
                    if (it == total.end()) {
                        Tensor scaled(g.shape());
                        for (std::size_t k = 0; k < g.numel(); ++k) scaled[k] = w * g[k];
                        total.emplace(name, std::move(scaled));
                    } else {
                        Tensor& acc = it->second;
                        for (std::size_t k = 0; k < g.numel(); ++k) acc[k] += w * g[k];
                    }
                }
                epoch_loss += out.loss_sum;
                epoch_correct += out.correct;
            }
            adam_step(result.ckpt.weights, total, result.ckpt.adam, adam);
        }

        result.history.push_back(
            {epoch_loss / double(N), double(epoch_correct) / double(N)});
        result.ckpt.meta.epochs_completed = epoch + 1;
    }
    return result;
}

}  // namespace advd
