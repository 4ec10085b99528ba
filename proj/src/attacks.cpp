#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "advd/attacks.hpp"

namespace advd {

namespace {

Tensor as_batch1(const Tensor& x, const NetworkSpec& spec) {
    if (x.rank() == spec.input_shape.size() + 1) {
        if (x.dim(0) != 1) throw std::invalid_argument("attack: expected a single sample");
        return x;
    }
    if (x.rank() == spec.input_shape.size()) {
        Tensor b = x;
        std::vector<std::size_t> shape{1};
        shape.insert(shape.end(), x.shape().begin(), x.shape().end());
        b.reshape(shape);
        return b;
    }
    throw std::invalid_argument("attack: input rank mismatch");
}

void check_pixel_domain(const Tensor& x) {
    for (std::size_t i = 0; i < x.numel(); ++i)
        if (!(x[i] >= 0.0 && x[i] <= 1.0))
            throw std::invalid_argument("attack: input outside [0,1]");
}

int argmax_row(const Tensor& logits) {
    const std::size_t K = logits.dim(1);
    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k)
        if (logits[k] > logits[best]) best = k;
    return int(best);
}

int predict1(const Checkpoint& ckpt, const Tensor& x) {
    return argmax_row(forward_det(ckpt, x).logits);
}

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

AttackOutcome finish(const Checkpoint& ckpt, const Tensor& x0, Tensor x_adv, int reference,
                     std::size_t iters) {
    AttackOutcome out;
    out.final_linf = linf_distance(x_adv, x0);
    out.final_l2 = l2_distance(x_adv, x0);
    out.success = predict1(ckpt, x_adv) != reference;
    out.x_adv = std::move(x_adv);
    out.iterations_used = iters;
    return out;
}

Tensor ce_input_grad(const Checkpoint& ckpt, const Tensor& x, int y) {
    ActivationTrace trace = forward_det(ckpt, x);
    const int labels[1] = {y};
    return input_gradient(ckpt, trace, labels);
}

}  // namespace

std::string to_string(AttackKind k) {
    switch (k) {
        case AttackKind::fgsm: return "fgsm";
        case AttackKind::bim: return "bim";
        case AttackKind::pgd: return "pgd";
        case AttackKind::deepfool: return "deepfool";
        case AttackKind::cw: return "cw";
    }
    throw std::logic_error("bad AttackKind");
}

AttackKind attack_from_string(const std::string& s) {
    if (s == "fgsm") return AttackKind::fgsm;
    if (s == "bim") return AttackKind::bim;
    if (s == "pgd") return AttackKind::pgd;
    if (s == "deepfool") return AttackKind::deepfool;
    if (s == "cw") return AttackKind::cw;
    throw std::invalid_argument("unknown attack: " + s);
}

AttackConfig AttackConfig::defaults(AttackKind kind, double eps) {
    AttackConfig cfg;
    cfg.kind = kind;
    cfg.eps = eps;
    switch (kind) {
        case AttackKind::fgsm: cfg.iters = 1; break;
        case AttackKind::bim:
            cfg.alpha = eps / 10.0;
            cfg.iters = 10;
            break;
        case AttackKind::pgd:
            cfg.alpha = eps / 10.0;
            cfg.iters = 20;
            break;
        case AttackKind::deepfool: break;
        case AttackKind::cw: break;
    }
    return cfg;
}

double linf_to_l2(double eps_inf, std::size_t n) {
    if (eps_inf < 0.0) throw std::invalid_argument("linf_to_l2: eps must be >= 0");
    if (n < 1) throw std::invalid_argument("linf_to_l2: n must be >= 1");
    constexpr double pi_e = 3.14159265358979323846 * 2.71828182845904523536;
    return eps_inf * std::sqrt(double(n)) * std::sqrt(2.0 / pi_e);
}

AttackOutcome fgsm(const Checkpoint& ckpt, const Tensor& x, int y_true, double eps) {
    if (eps < 0.0) throw std::invalid_argument("fgsm: eps must be >= 0");
    const Tensor x0 = as_batch1(x, ckpt.spec);
    check_pixel_domain(x0);
    const Tensor g = ce_input_grad(ckpt, x0, y_true);
    Tensor x_adv = x0;
    for (std::size_t i = 0; i < x_adv.numel(); ++i) {
        const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
        x_adv[i] = clip01(x0[i] + eps * s);
    }
    return finish(ckpt, x0, std::move(x_adv), y_true, 1);
}

AttackOutcome bim(const Checkpoint& ckpt, const Tensor& x, int y_true, double eps, double alpha,
                  std::size_t iters) {
    if (eps < 0.0) throw std::invalid_argument("bim: eps must be >= 0");
    if (iters < 1) throw std::invalid_argument("bim: iters must be >= 1");
    const Tensor x0 = as_batch1(x, ckpt.spec);
    check_pixel_domain(x0);

    // BIM-B: the full iteration budget is always spent.
    Tensor cur = x0;
    for (std::size_t it = 0; it < iters; ++it) {
        const Tensor g = ce_input_grad(ckpt, cur, y_true);
        for (std::size_t i = 0; i < cur.numel(); ++i) {
            const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
            double v = cur[i] + alpha * s;
            v = std::clamp(v, x0[i] - eps, x0[i] + eps);
            cur[i] = clip01(v);
        }
    }
    return finish(ckpt, x0, std::move(cur), y_true, iters);
}

AttackOutcome pgd(const Checkpoint& ckpt, const Tensor& x, int y_true, double eps, double alpha,
                  std::size_t iters, RngStream& rng) {
    if (eps < 0.0) throw std::invalid_argument("pgd: eps must be >= 0");
    if (iters < 1) throw std::invalid_argument("pgd: iters must be >= 1");
    const Tensor x0 = as_batch1(x, ckpt.spec);
    check_pixel_domain(x0);

    Tensor cur = x0;
    for (std::size_t i = 0; i < cur.numel(); ++i)
        cur[i] = clip01(x0[i] + rng.uniform(-eps, eps));

    for (std::size_t it = 0; it < iters; ++it) {
        const Tensor g = ce_input_grad(ckpt, cur, y_true);
        for (std::size_t i = 0; i < cur.numel(); ++i) {
            const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
            double v = cur[i] + alpha * s;
            v = std::clamp(v, x0[i] - eps, x0[i] + eps);
            cur[i] = clip01(v);
        }
    }
    return finish(ckpt, x0, std::move(cur), y_true, iters);
}

AttackOutcome deepfool(const Checkpoint& ckpt, const Tensor& x, double eps, double overshoot,
                       std::size_t max_iter) {
    if (eps < 0.0) throw std::invalid_argument("deepfool: eps must be >= 0");
    const Tensor x0 = as_batch1(x, ckpt.spec);
    check_pixel_domain(x0);
    const std::size_t n = x0.numel();
    const std::size_t K = ckpt.spec.class_count;

    const int k0 = predict1(ckpt, x0);
    Tensor r_total(x0.shape());
    Tensor cur = x0;
    std::size_t it = 0;

    for (; it < max_iter; ++it) {
        ActivationTrace trace = forward_det(ckpt, cur);
        if (argmax_row(trace.logits) != k0) break;

        double best_dist = std::numeric_limits<double>::infinity();
        Tensor best_w;
        for (std::size_t j = 0; j < K; ++j) {
            if (int(j) == k0) continue;
            Tensor dlog({std::size_t(1), K});
            dlog[j] = 1.0;
            dlog[std::size_t(k0)] = -1.0;
            Tensor w = backprop_logits(ckpt, trace, dlog);
            double l1 = 0.0;
            for (std::size_t i = 0; i < n; ++i) l1 += std::fabs(w[i]);
            const double gap = std::fabs(trace.logits[j] - trace.logits[std::size_t(k0)]);
            // small additive constant so an exact-boundary point still crosses
            const double dist = (gap + 1e-6) / (l1 + 1e-12);
            if (dist < best_dist) {
                best_dist = dist;
                best_w = std::move(w);
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const double s = best_w[i] > 0.0 ? 1.0 : (best_w[i] < 0.0 ? -1.0 : 0.0);
            r_total[i] += best_dist * s;
        }
        for (std::size_t i = 0; i < n; ++i)
            cur[i] = clip01(x0[i] + (1.0 + overshoot) * r_total[i]);
    }

    Tensor x_adv(x0.shape());
    for (std::size_t i = 0; i < n; ++i) {
        double v = x0[i] + (1.0 + overshoot) * r_total[i];
        v = std::clamp(v, x0[i] - eps, x0[i] + eps);
        x_adv[i] = clip01(v);
    }
    return finish(ckpt, x0, std::move(x_adv), k0, it);
}

AttackOutcome carlini_wagner(const Checkpoint& ckpt, const Tensor& x, int y_true,
                             double l2_budget, const AttackConfig& cfg) {
    if (l2_budget < 0.0) throw std::invalid_argument("cw: budget must be >= 0");
    const Tensor x0 = as_batch1(x, ckpt.spec);
    check_pixel_domain(x0);
    const std::size_t n = x0.numel();
    const std::size_t K = ckpt.spec.class_count;
    const std::size_t y = std::size_t(y_true);
    if (y >= K) throw std::out_of_range("cw: label out of range");

    // tanh-space variable, initialized at (a clipped copy of) x
    Tensor w0(x0.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = std::clamp(x0[i], 1e-6, 1.0 - 1e-6);
        w0[i] = std::atanh(2.0 * xi - 1.0);
    }

    double c = cfg.init_c;
    double c_low = 0.0, c_high = std::numeric_limits<double>::infinity();
    double best_l2 = std::numeric_limits<double>::infinity();
    Tensor best_adv;
    double best_margin = std::numeric_limits<double>::infinity();
    Tensor best_effort = x0;
    std::size_t total_steps = 0;

    for (std::size_t round = 0; round < cfg.binary_steps; ++round) {
        Tensor wvar = w0;
        Tensor adam_m(x0.shape()), adam_v(x0.shape());
        bool round_success = false;

        for (std::size_t step = 0; step < cfg.inner_steps; ++step) {
            ++total_steps;
            Tensor xw(x0.shape());
            for (std::size_t i = 0; i < n; ++i) xw[i] = 0.5 * (std::tanh(wvar[i]) + 1.0);

            ActivationTrace trace = forward_det(ckpt, xw);
            const double* z = trace.logits.data();
            std::size_t jstar = y == 0 ? 1 : 0;
            for (std::size_t j = 0; j < K; ++j)
                if (j != y && z[j] > z[jstar]) jstar = j;
            const double margin = z[y] - z[jstar];
            const double f = std::max(margin, -cfg.confidence);

            const bool fooled = argmax_row(trace.logits) != y_true;
            if (fooled) {
                round_success = true;
                const double l2 = l2_distance(xw, x0);
                if (l2 < best_l2) {
                    best_l2 = l2;
                    best_adv = xw;
                }
            }
            if (margin < best_margin) {
                best_margin = margin;
                best_effort = xw;
            }

            // d(loss)/dx = 2(x-x0) + c * d f / dx when the margin is active
            Tensor dx(x0.shape());
            if (f > -cfg.confidence) {
                Tensor dlog({std::size_t(1), K});
                dlog[y] = c;
                dlog[jstar] = -c;
                dx = backprop_logits(ckpt, trace, dlog);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double t = std::tanh(wvar[i]);
                const double dxdw = 0.5 * (1.0 - t * t);
                const double grad = (2.0 * (xw[i] - x0[i]) + dx[i]) * dxdw;
                adam_m[i] = 0.9 * adam_m[i] + 0.1 * grad;
                adam_v[i] = 0.999 * adam_v[i] + 0.001 * grad * grad;
                const double mc = adam_m[i] / (1.0 - std::pow(0.9, double(step + 1)));
                const double vc = adam_v[i] / (1.0 - std::pow(0.999, double(step + 1)));
                wvar[i] -= cfg.cw_lr * mc / (std::sqrt(vc) + 1e-8);
            }
        }

        if (round_success) {
            c_high = c;
            c = 0.5 * (c_low + c_high);
        } else {
            c_low = c;
            c = std::isinf(c_high) ? c * 10.0 : 0.5 * (c_low + c_high);
        }
    }

    Tensor x_adv = best_adv.empty() ? best_effort : best_adv;
    const double l2 = l2_distance(x_adv, x0);
    if (l2 > l2_budget && l2 > 0.0) {
        const double scale = l2_budget / l2;
        for (std::size_t i = 0; i < n; ++i)
            x_adv[i] = clip01(x0[i] + scale * (x_adv[i] - x0[i]));
    }
    return finish(ckpt, x0, std::move(x_adv), y_true, total_steps);
}

AttackOutcome run_attack(const Checkpoint& ckpt, const Tensor& x, int y_true,
                         const AttackConfig& cfg, RngStream& rng) {
    switch (cfg.kind) {
        case AttackKind::fgsm: return fgsm(ckpt, x, y_true, cfg.eps);
        case AttackKind::bim: return bim(ckpt, x, y_true, cfg.eps, cfg.alpha, cfg.iters);
        case AttackKind::pgd: return pgd(ckpt, x, y_true, cfg.eps, cfg.alpha, cfg.iters, rng);
        case AttackKind::deepfool:
            return deepfool(ckpt, x, cfg.eps, cfg.overshoot, cfg.max_iter);
        case AttackKind::cw: {
            const Tensor x0 = as_batch1(x, ckpt.spec);
            return carlini_wagner(ckpt, x0, y_true, linf_to_l2(cfg.eps, x0.numel()), cfg);
        }
    }
    throw std::logic_error("bad AttackKind");
}

}  // namespace advd
