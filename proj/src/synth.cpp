#include <algorithm>
#include <array>
#include <cmath>

#include "advd/parallel.hpp"
#include "advd/synth.hpp"

namespace advd {

namespace {

struct Pt {
    double x, y;
};

using Polyline = std::vector<Pt>;
using Polygon = std::vector<Pt>;

struct Glyph {
    std::vector<Polyline> strokes;
    std::vector<Polygon> fills;
};

Polyline arc(double cx, double cy, double rx, double ry, double a0, double a1, int n) {
    Polyline p;
    for (int i = 0; i <= n; ++i) {
        const double a = a0 + (a1 - a0) * double(i) / double(n);
        p.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return p;
}

constexpr double kPi = 3.14159265358979323846;
double deg(double d) { return d * kPi / 180.0; }

// ---- digit glyphs (unit square, y down) --------------------------------

std::vector<Glyph> digit_glyphs() {
    std::vector<Glyph> g(10);
    g[0].strokes = {arc(0.5, 0.5, 0.22, 0.35, 0, deg(360), 18)};
    g[1].strokes = {{{0.36, 0.3}, {0.52, 0.13}}, {{0.52, 0.13}, {0.52, 0.87}}};
    g[2].strokes = {arc(0.5, 0.34, 0.21, 0.2, deg(180), deg(360), 9),
                    {{0.71, 0.36}, {0.3, 0.86}},
                    {{0.3, 0.86}, {0.73, 0.86}}};
    g[3].strokes = {arc(0.47, 0.31, 0.2, 0.18, deg(-160), deg(80), 10),
                    arc(0.47, 0.67, 0.22, 0.2, deg(-80), deg(170), 10)};
    g[4].strokes = {{{0.6, 0.13}, {0.26, 0.58}},
                    {{0.26, 0.58}, {0.76, 0.58}},
                    {{0.6, 0.32}, {0.6, 0.87}}};
    g[5].strokes = {{{0.7, 0.13}, {0.34, 0.13}},
                    {{0.34, 0.13}, {0.31, 0.44}},
                    arc(0.48, 0.63, 0.23, 0.22, deg(-110), deg(150), 11)};
    g[6].strokes = {{{0.66, 0.12}, {0.45, 0.34}, {0.34, 0.55}, {0.32, 0.65}},
                    arc(0.5, 0.66, 0.18, 0.19, 0, deg(360), 14)};
    g[7].strokes = {{{0.28, 0.14}, {0.73, 0.14}}, {{0.73, 0.14}, {0.42, 0.87}}};
    g[8].strokes = {arc(0.5, 0.31, 0.17, 0.17, 0, deg(360), 14),
                    arc(0.5, 0.67, 0.2, 0.19, 0, deg(360), 14)};
    g[9].strokes = {arc(0.5, 0.34, 0.18, 0.2, 0, deg(360), 14),
                    {{0.68, 0.36}, {0.66, 0.6}, {0.54, 0.87}}};
    return g;
}

// ---- fashion glyphs ------------------------------------------------------

std::vector<Glyph> fashion_glyphs() {
    std::vector<Glyph> g(10);
    // 0: t-shirt
    g[0].fills = {{{0.33, 0.24}, {0.67, 0.24}, {0.65, 0.84}, {0.35, 0.84}},
                  {{0.33, 0.24}, {0.15, 0.4}, {0.2, 0.5}, {0.35, 0.4}},
                  {{0.67, 0.24}, {0.85, 0.4}, {0.8, 0.5}, {0.65, 0.4}}};
    // 1: trouser
    g[1].fills = {{{0.34, 0.13}, {0.66, 0.13}, {0.66, 0.24}, {0.34, 0.24}},
                  {{0.34, 0.24}, {0.48, 0.24}, {0.46, 0.88}, {0.34, 0.88}},
                  {{0.52, 0.24}, {0.66, 0.24}, {0.66, 0.88}, {0.54, 0.88}}};
    // 2: pullover (long sleeves, wide body)
    g[2].fills = {{{0.3, 0.24}, {0.7, 0.24}, {0.68, 0.82}, {0.32, 0.82}},
                  {{0.3, 0.24}, {0.14, 0.34}, {0.1, 0.74}, {0.2, 0.76}, {0.3, 0.42}},
                  {{0.7, 0.24}, {0.86, 0.34}, {0.9, 0.74}, {0.8, 0.76}, {0.7, 0.42}}};
    // 3: dress (a-line)
    g[3].fills = {{{0.42, 0.12}, {0.58, 0.12}, {0.56, 0.32}, {0.76, 0.88}, {0.24, 0.88},
                   {0.44, 0.32}}};
    // 4: coat (long body, long sleeves, collar)
    g[4].fills = {{{0.3, 0.2}, {0.7, 0.2}, {0.7, 0.88}, {0.3, 0.88}},
                  {{0.3, 0.2}, {0.16, 0.3}, {0.12, 0.82}, {0.22, 0.84}, {0.3, 0.45}},
                  {{0.7, 0.2}, {0.84, 0.3}, {0.88, 0.82}, {0.78, 0.84}, {0.7, 0.45}},
                  {{0.42, 0.12}, {0.58, 0.12}, {0.5, 0.3}}};
    // 5: sandal (sole + straps)
    g[5].fills = {{{0.14, 0.7}, {0.86, 0.64}, {0.88, 0.78}, {0.16, 0.82}},
                  {{0.28, 0.42}, {0.36, 0.38}, {0.6, 0.64}, {0.5, 0.68}},
                  {{0.6, 0.38}, {0.68, 0.44}, {0.42, 0.66}, {0.36, 0.6}}};
    // 6: shirt (narrow body, mid sleeves)
    g[6].fills = {{{0.34, 0.22}, {0.66, 0.22}, {0.63, 0.86}, {0.37, 0.86}},
                  {{0.34, 0.22}, {0.16, 0.36}, {0.22, 0.56}, {0.34, 0.46}},
                  {{0.66, 0.22}, {0.84, 0.36}, {0.78, 0.56}, {0.66, 0.46}}};
    // 7: sneaker (low wedge + sole)
    g[7].fills = {{{0.12, 0.6}, {0.46, 0.54}, {0.6, 0.44}, {0.72, 0.46}, {0.88, 0.6},
                   {0.88, 0.72}, {0.12, 0.74}},
                  {{0.12, 0.72}, {0.88, 0.7}, {0.88, 0.78}, {0.12, 0.8}}};
    // 8: bag (body + flap), handle stroke
    g[8].fills = {{{0.2, 0.42}, {0.8, 0.42}, {0.8, 0.84}, {0.2, 0.84}},
                  {{0.2, 0.42}, {0.8, 0.42}, {0.76, 0.54}, {0.24, 0.54}}};
    g[8].strokes = {arc(0.5, 0.42, 0.17, 0.22, deg(180), deg(360), 10)};
    // 9: ankle boot (shaft + foot + heel)
    g[9].fills = {{{0.3, 0.16}, {0.54, 0.16}, {0.54, 0.56}, {0.3, 0.6}},
                  {{0.3, 0.52}, {0.54, 0.48}, {0.64, 0.52}, {0.86, 0.64}, {0.86, 0.76},
                   {0.3, 0.78}},
                  {{0.3, 0.74}, {0.42, 0.74}, {0.42, 0.86}, {0.3, 0.86}}};
    return g;
}

struct Affine {
    double a, b, c, d;  // 2x2
    double tx, ty;
    Pt apply(Pt p) const {
        const double x = p.x - 0.5, y = p.y - 0.5;
        return {a * x + b * y + 0.5 + tx, c * x + d * y + 0.5 + ty};
    }
};

Affine random_affine(RngStream& rng, double max_rot, double max_shear, double smin, double smax,
                     double max_shift) {
    const double th = rng.uniform(-max_rot, max_rot);
    const double sh = rng.uniform(-max_shear, max_shear);
    const double sx = rng.uniform(smin, smax);
    const double sy = rng.uniform(smin, smax);
    Affine t{};
    // M = R * Sh * S, where the shear mixes y into x
    const double ct = std::cos(th), st = std::sin(th);
    const double s00 = sx, s01 = sh * sy, s10 = 0.0, s11 = sy;
    t.a = ct * s00 - st * s10;
    t.b = ct * s01 - st * s11;
    t.c = st * s00 + ct * s10;
    t.d = st * s01 + ct * s11;
    t.tx = rng.uniform(-max_shift, max_shift);
    t.ty = rng.uniform(-max_shift, max_shift);
    return t;
}

double seg_dist(Pt p, Pt a, Pt b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double wx = p.x - a.x, wy = p.y - a.y;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = wx - t * vx, dy = wy - t * vy;
    return std::sqrt(dx * dx + dy * dy);
}

bool point_in_polygon(Pt p, const Polygon& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > p.y) != (poly[j].y > p.y)) {
            const double xx = poly[j].x + (p.y - poly[i].y) / (poly[j].y - poly[i].y) *
                                              (poly[j].x - poly[i].x);
            if (p.x < xx) in = !in;
        }
    }
    return in;
}

// Renders strokes (distance field) and fills (supersampled coverage) of a
// transformed glyph onto a side x side canvas.
void render_glyph(const Glyph& glyph, const Affine& t, RngStream& rng, double stroke_halfwidth,
                  double peak, double* img, std::size_t side) {
    const double px_scale = double(side);
    std::vector<double> dist(side * side, 1e30);

    for (const auto& stroke : glyph.strokes) {
        Polyline tp;
        tp.reserve(stroke.size());
        for (Pt p : stroke) {
            Pt q = t.apply(p);
            q.x = q.x * px_scale + rng.gaussian() * 0.35;
            q.y = q.y * px_scale + rng.gaussian() * 0.35;
            tp.push_back(q);
        }
        for (std::size_t s = 0; s + 1 < tp.size(); ++s) {
            const Pt a = tp[s], b = tp[s + 1];
            const double margin = stroke_halfwidth + 1.5;
            const int x0 = std::max(0, int(std::floor(std::min(a.x, b.x) - margin)));
            const int x1 = std::min(int(side) - 1, int(std::ceil(std::max(a.x, b.x) + margin)));
            const int y0 = std::max(0, int(std::floor(std::min(a.y, b.y) - margin)));
            const int y1 = std::min(int(side) - 1, int(std::ceil(std::max(a.y, b.y) + margin)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const double d = seg_dist({x + 0.5, y + 0.5}, a, b);
                    double& cell = dist[std::size_t(y) * side + std::size_t(x)];
                    if (d < cell) cell = d;
                }
            }
        }
    }
    for (std::size_t i = 0; i < side * side; ++i) {
        const double v = peak * std::clamp(stroke_halfwidth + 0.5 - dist[i], 0.0, 1.0);
        img[i] = std::max(img[i], v);
    }

    if (!glyph.fills.empty()) {
        std::vector<Polygon> tf;
        for (const auto& poly : glyph.fills) {
            Polygon q;
            for (Pt p : poly) {
                Pt r = t.apply(p);
                q.push_back({r.x * px_scale, r.y * px_scale});
            }
            tf.push_back(std::move(q));
        }
        // low-frequency texture so fills are not flat
        const double fa = rng.uniform(0.15, 0.5), fb = rng.uniform(0.15, 0.5);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        const double tex_amp = rng.uniform(0.02, 0.09);
        static const std::array<Pt, 4> sub = {
            Pt{0.25, 0.25}, Pt{0.75, 0.25}, Pt{0.25, 0.75}, Pt{0.75, 0.75}};
        for (std::size_t y = 0; y < side; ++y) {
            for (std::size_t x = 0; x < side; ++x) {
                int hits = 0;
                for (const Pt& o : sub) {
                    const Pt p{double(x) + o.x, double(y) + o.y};
                    for (const auto& poly : tf) {
                        if (point_in_polygon(p, poly)) {
                            ++hits;
                            break;
                        }
                    }
                }
                if (hits == 0) continue;
                const double cov = double(hits) / 4.0;
                const double tex =
                    tex_amp * std::sin(fa * double(x) + fb * double(y) + phase);
                const double v = (peak + tex) * cov;
                double& cell = img[y * side + x];
                cell = std::max(cell, std::clamp(v, 0.0, 1.0));
            }
        }
    }
}

void add_noise_clip(double* img, std::size_t n, double sigma, RngStream& rng) {
    for (std::size_t i = 0; i < n; ++i) {
        const double v = img[i] + sigma * rng.gaussian();
        img[i] = std::clamp(v, 0.0, 1.0);
    }
}

void hsv_to_rgb(double h, double s, double v, double* rgb) {
    h = h - std::floor(h);
    const double i = std::floor(h * 6.0);
    const double f = h * 6.0 - i;
    const double p = v * (1 - s), q = v * (1 - f * s), t = v * (1 - (1 - f) * s);
    switch (int(i) % 6) {
        case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
        case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
        case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
        case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
        case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
        default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
    }
}

void render_cifar_sample(int cls, RngStream& rng, double* img /* 3*32*32 */) {
    const int side = 32;
    const double hue1 = cls / 10.0 + rng.uniform(-0.03, 0.03);
    const double hue2 = hue1 + 0.38 + rng.uniform(-0.04, 0.04);
    const double sat = rng.uniform(0.55, 0.95), val = rng.uniform(0.55, 0.95);
    double c1[3], c2[3];
    hsv_to_rgb(hue1, sat, val, c1);
    hsv_to_rgb(hue2, sat * 0.8, val * 0.85, c2);

    const int pattern = cls % 5;
    const double freq = rng.uniform(0.5, 1.1);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double cx = rng.uniform(10.0, 22.0), cy = rng.uniform(10.0, 22.0);
    const double ang = rng.uniform(0.0, kPi);

    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double m = 0.0;
            switch (pattern) {
                case 0: m = 0.5 + 0.5 * std::sin(freq * y + phase); break;
                case 1: m = 0.5 + 0.5 * std::sin(freq * x + phase); break;
                case 2: {
                    const double r = std::hypot(x - cx, y - cy);
                    m = 0.5 + 0.5 * std::sin(freq * r + phase);
                    break;
                }
                case 3:
                    m = ((int(x * freq * 0.8) + int(y * freq * 0.8)) % 2 == 0) ? 1.0 : 0.0;
                    break;
                default: {
                    const double u = std::cos(ang) * (x - cx) + std::sin(ang) * (y - cy);
                    m = 0.5 + 0.5 * std::tanh(u * 0.25);
                    break;
                }
            }
            for (int c = 0; c < 3; ++c)
                img[(c * side + y) * side + x] = c1[c] * m + c2[c] * (1.0 - m);
        }
    }
    add_noise_clip(img, 3 * side * side, rng.uniform(0.03, 0.07), rng);
}

}  // namespace

LabeledDataset synth_dataset(DatasetId id, std::size_t n, std::uint64_t seed,
                             const std::string& split) {
    LabeledDataset ds;
    ds.dataset_id = to_string(id);
    ds.split = split;
    ds.labels.assign(n, 0);
    const std::string scope = "synth/" + ds.dataset_id + "/" + split;

    if (id == DatasetId::cifar10) {
        ds.images = Tensor({n, 3, 32, 32});
        parallel_items(n, [&](std::size_t i) {
            RngStream rng = RngStream::derive(seed, scope, i);
            const int cls = int(rng.below(10));
            ds.labels[i] = cls;
            render_cifar_sample(cls, rng, ds.images.data() + i * 3072);
        });
        return ds;
    }

    static const std::vector<Glyph> digits = digit_glyphs();
    static const std::vector<Glyph> fashion = fashion_glyphs();
    const bool is_digit = id == DatasetId::mnist_digit;
    const auto& glyphs = is_digit ? digits : fashion;

    ds.images = Tensor({n, 1, 28, 28});
    parallel_items(n, [&](std::size_t i) {
        RngStream rng = RngStream::derive(seed, scope, i);
        const int cls = int(rng.below(10));
        ds.labels[i] = cls;
        double* img = ds.images.data() + i * 784;

        const Affine t = is_digit
                             ? random_affine(rng, 0.30, 0.33, 0.70, 1.20, 0.11)
                             : random_affine(rng, 0.18, 0.2, 0.78, 1.14, 0.08);
        const double halfwidth = rng.uniform(0.7, 2.1);
        const double peak = rng.uniform(0.55, 1.0);
        render_glyph(glyphs[std::size_t(cls)], t, rng, halfwidth, peak, img, 28);
        // heavy-noise tail keeps the trained model calm on noised inputs
        const double sigma =
            rng.uniform() < 0.25 ? rng.uniform(0.12, 0.35) : rng.uniform(0.02, 0.1);
        add_noise_clip(img, 784, sigma, rng);
    });
    return ds;
}

}  // namespace advd
