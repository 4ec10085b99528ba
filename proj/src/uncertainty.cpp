#include <cmath>
#include <stdexcept>

#include "advd/parallel.hpp"
#include "advd/uncertainty.hpp"

namespace advd {

PredictionEnsemble mc_predict(const Checkpoint& ckpt, const Tensor& x, std::size_t T,
                              RngStream& rng) {
    if (T < 1) throw std::invalid_argument("mc_predict: T must be >= 1");
    const std::size_t K = ckpt.spec.class_count;
    Tensor x1 = x;
    if (x1.rank() == ckpt.spec.input_shape.size()) {
        std::vector<std::size_t> shape{1};
        shape.insert(shape.end(), x.shape().begin(), x.shape().end());
        x1.reshape(shape);
    }

    PredictionEnsemble ens;
    ens.probs = Tensor({T, K});
    const std::uint64_t base = rng.next_u64();
    parallel_items(T, [&](std::size_t t) {
        RngStream pass_rng = RngStream::derive(base, "mc-pass", t);
        ActivationTrace trace = forward(ckpt, x1, DropoutMode::sample, pass_rng);
        Tensor p = softmax(trace.logits);
        std::copy(p.data(), p.data() + K, ens.probs.data() + t * K);
    });
    return ens;
}

double aleatoric(const PredictionEnsemble& ens) {
    const std::size_t T = ens.samples(), K = ens.classes();
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double p = ens.probs[t * K + k];
            s += p - p * p;
        }
        acc += s / double(T);
    }
    return acc / double(K);
}

double epistemic(const PredictionEnsemble& ens) {
    const std::size_t T = ens.samples(), K = ens.classes();
    // pairwise form of the population variance; exactly zero when every pass
    // returned the same distribution
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < T; ++i) {
            for (std::size_t j = i + 1; j < T; ++j) {
                const double d = ens.probs[i * K + k] - ens.probs[j * K + k];
                sum += d * d;
            }
        }
        acc += sum / (double(T) * double(T));
    }
    return acc / double(K);
}

double scibilic(double epi, double ale) {
    if (epi < 0.0 || ale < 0.0) throw std::invalid_argument("scibilic: negative input");
    return epi / (ale + 1e-12);
}

double predictive_entropy(const PredictionEnsemble& ens) {
    const std::size_t T = ens.samples(), K = ens.classes();
    double h = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double mean = 0.0;
        for (std::size_t t = 0; t < T; ++t) mean += ens.probs[t * K + k];
        mean /= double(T);
        if (mean > 0.0) h -= mean * std::log(mean);
    }
    return h;
}

UncertaintyEstimate estimate_uncertainty(const PredictionEnsemble& ens) {
    const std::size_t T = ens.samples(), K = ens.classes();
    UncertaintyEstimate est;
    est.aleatoric = aleatoric(ens);
    est.epistemic = epistemic(ens);
    est.scibilic = scibilic(est.epistemic, est.aleatoric);
    est.entropy = predictive_entropy(ens);
    est.mean_probs.assign(K, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < K; ++k) est.mean_probs[k] += ens.probs[t * K + k];
    for (double& p : est.mean_probs) p /= double(T);
    est.predicted_class = 0;
    for (std::size_t k = 1; k < K; ++k)
        if (est.mean_probs[k] > est.mean_probs[std::size_t(est.predicted_class)])
            est.predicted_class = int(k);
    return est;
}

}  // namespace advd
