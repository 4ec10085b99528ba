#pragma once

#include <cstdint>
#include <string>

#include "advd/nn.hpp"
#include "advd/rng.hpp"
#include "advd/tensor.hpp"

namespace advd {

enum class AttackKind { fgsm, bim, pgd, deepfool, cw };

std::string to_string(AttackKind k);
AttackKind attack_from_string(const std::string& s);

struct AttackConfig {
    AttackKind kind = AttackKind::fgsm;
    double eps = 0.0;        // L-inf budget in pixel units
    double alpha = 0.0;      // step size for iterative attacks
    std::size_t iters = 1;   // iteration budget (bim/pgd)
    // deepfool
    double overshoot = 0.02;
    std::size_t max_iter = 50;
    // cw
    std::size_t binary_steps = 5;
    std::size_t inner_steps = 100;
    double init_c = 1e-2;
    double confidence = 0.0;
    double cw_lr = 0.01;
    std::uint64_t seed = 0;

    /// Per-kind defaults for a given budget: bim alpha=eps/10 iters=10,
    /// pgd alpha=eps/10 iters=20.
    static AttackConfig defaults(AttackKind kind, double eps);
};

struct AttackOutcome {
    Tensor x_adv;
    bool success = false;      // deterministic prediction != reference label
    std::size_t iterations_used = 0;
    double final_linf = 0.0;
    double final_l2 = 0.0;
};

AttackOutcome fgsm(const Checkpoint& ckpt, const Tensor& x, int y_true, double eps);

AttackOutcome bim(const Checkpoint& ckpt, const Tensor& x, int y_true, double eps, double alpha,
                  std::size_t iters);

AttackOutcome pgd(const Checkpoint& ckpt, const Tensor& x, int y_true, double eps, double alpha,
                  std::size_t iters, RngStream& rng);

/// Untargeted: linearizes the logits around the current point, steps to the
/// nearest class boundary (L-inf dual step), repeats until the prediction
/// flips; the accumulated perturbation is scaled by (1+overshoot) and the
/// result projected onto the eps-ball and [0,1].
AttackOutcome deepfool(const Checkpoint& ckpt, const Tensor& x, double eps, double overshoot,
                       std::size_t max_iter);

/// L2 attack in tanh space with binary search over the margin weight c.
/// Returns the minimal-L2 successful candidate; if it exceeds l2_budget the
/// perturbation is rescaled radially onto the budget and success re-checked.
AttackOutcome carlini_wagner(const Checkpoint& ckpt, const Tensor& x, int y_true,
                             double l2_budget, const AttackConfig& cfg);

/// l2 = l_inf * sqrt(n) * sqrt(2) / sqrt(pi*e)
double linf_to_l2(double eps_inf, std::size_t n);

/// Dispatch on cfg.kind (cw uses linf_to_l2(cfg.eps, n) as its budget).
AttackOutcome run_attack(const Checkpoint& ckpt, const Tensor& x, int y_true,
                         const AttackConfig& cfg, RngStream& rng);

}  // namespace advd
