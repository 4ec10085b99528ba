#pragma once

#include <vector>

#include "advd/nn.hpp"

namespace advd {

/// T stochastic softmax outputs for one input: rows sum to 1, entries in [0,1].
struct PredictionEnsemble {
    Tensor probs;  // {T, K}

    std::size_t samples() const { return probs.dim(0); }
    std::size_t classes() const { return probs.dim(1); }
};

struct UncertaintyEstimate {
    double epistemic = 0.0;
    double aleatoric = 0.0;
    double scibilic = 0.0;
    double entropy = 0.0;
    std::vector<double> mean_probs;
    int predicted_class = 0;
};

/// T independent dropout-sampled forward passes, each with a stream derived
/// from rng, reduced in fixed row order.
PredictionEnsemble mc_predict(const Checkpoint& ckpt, const Tensor& x, std::size_t T,
                              RngStream& rng);

/// Mean over classes of (1/T) sum_t p_t[k](1 - p_t[k]): the diagonal mean of
/// the expected per-pass covariance.
double aleatoric(const PredictionEnsemble& ens);

/// Mean over classes of the population variance of p_t[k] across passes.
double epistemic(const PredictionEnsemble& ens);

/// epi / (ale + 1e-12)
double scibilic(double epi, double ale);

/// Shannon entropy (natural log) of the MC-mean distribution, 0 ln 0 := 0.
double predictive_entropy(const PredictionEnsemble& ens);

UncertaintyEstimate estimate_uncertainty(const PredictionEnsemble& ens);

}  // namespace advd
