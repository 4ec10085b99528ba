#include "advd/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace advd {

std::string to_string(DatasetId id) {
    switch (id) {
        case DatasetId::mnist_digit: return "mnist_digit";
        case DatasetId::mnist_fashion: return "mnist_fashion";
        case DatasetId::cifar10: return "cifar10";
    }
    throw std::logic_error("bad DatasetId");
}

DatasetId dataset_from_string(const std::string& s) {
    if (s == "mnist_digit") return DatasetId::mnist_digit;
    if (s == "mnist_fashion") return DatasetId::mnist_fashion;
    if (s == "cifar10") return DatasetId::cifar10;
    throw std::invalid_argument("unknown dataset id: " + s);
}

LayerSpec LayerSpec::Conv2d(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t pad) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.in_channels = in_c;
    s.out_channels = out_c;
    s.kernel = k;
    s.padding = pad;
    return s;
}
LayerSpec LayerSpec::MaxPool2d(std::size_t k, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::maxpool2d;
    s.pool = k;
    s.stride = stride;
    return s;
}
LayerSpec LayerSpec::Relu() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
}
LayerSpec LayerSpec::Dropout(double p) {
    LayerSpec s;
    s.kind = LayerKind::dropout;
    s.drop_p = p;
    return s;
}
LayerSpec LayerSpec::Flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}
LayerSpec LayerSpec::Dense(std::size_t in_w, std::size_t out_w) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.in_width = in_w;
    s.out_width = out_w;
    return s;
}

namespace {

NetworkSpec digit_cnn() {
    // 28 -> 26 -> 24 -> pool -> 12; 12*12*20 = 2880 matches the dense width.
    NetworkSpec s;
    s.input_shape = {1, 28, 28};
    s.class_count = 10;
    s.layers = {
        LayerSpec::Conv2d(1, 10, 3, 0), LayerSpec::Relu(),
        LayerSpec::Conv2d(10, 20, 3, 0), LayerSpec::Relu(),
        LayerSpec::MaxPool2d(2, 2),
        LayerSpec::Dropout(0.5),
        LayerSpec::Flatten(),
        LayerSpec::Dense(2880, 128), LayerSpec::Relu(),
        LayerSpec::Dropout(0.5),
        LayerSpec::Dense(128, 10),
    };
    return s;
}

NetworkSpec fashion_cnn() {
    // 28 -> pool 14 -> pool 7; 7*7*64 = 3136.
    NetworkSpec s;
    s.input_shape = {1, 28, 28};
    s.class_count = 10;
    s.layers = {
        LayerSpec::Conv2d(1, 32, 3, 1), LayerSpec::Relu(),
        LayerSpec::MaxPool2d(2, 2),
        LayerSpec::Conv2d(32, 32, 3, 1), LayerSpec::Relu(),
        LayerSpec::MaxPool2d(2, 2),
        LayerSpec::Conv2d(32, 64, 3, 1), LayerSpec::Relu(),
        LayerSpec::Dropout(0.25),
        LayerSpec::Conv2d(64, 64, 3, 1), LayerSpec::Relu(),
        LayerSpec::Dropout(0.25),
        LayerSpec::Flatten(),
        LayerSpec::Dense(3136, 600), LayerSpec::Relu(),
        LayerSpec::Dropout(0.5),
        LayerSpec::Dense(600, 128), LayerSpec::Relu(),
        LayerSpec::Dense(128, 10),
    };
    return s;
}

NetworkSpec cifar_cnn() {
    // 32 -> pool 16 -> pool 8 -> pool 4; 4*4*256 = 4096.
    NetworkSpec s;
    s.input_shape = {3, 32, 32};
    s.class_count = 10;
    s.layers = {
        LayerSpec::Conv2d(3, 32, 3, 1), LayerSpec::Relu(),
        LayerSpec::Conv2d(32, 64, 3, 1), LayerSpec::Relu(),
        LayerSpec::MaxPool2d(2, 2),
        LayerSpec::Conv2d(64, 128, 3, 1), LayerSpec::Relu(),
        LayerSpec::Conv2d(128, 128, 3, 1), LayerSpec::Relu(),
        LayerSpec::MaxPool2d(2, 2),
        LayerSpec::Dropout(0.5),
        LayerSpec::Conv2d(128, 256, 3, 1), LayerSpec::Relu(),
        LayerSpec::Conv2d(256, 256, 3, 1), LayerSpec::Relu(),
        LayerSpec::MaxPool2d(2, 2),
        LayerSpec::Flatten(),
        LayerSpec::Dense(4096, 1024), LayerSpec::Relu(),
        LayerSpec::Dropout(0.5),
        LayerSpec::Dense(1024, 256), LayerSpec::Relu(),
        LayerSpec::Dropout(0.5),
        LayerSpec::Dense(256, 10),
    };
    return s;
}

NetworkSpec mlp_for(std::size_t in_w, std::size_t h3, std::size_t out_w) {
    NetworkSpec s;
    s.input_shape = {in_w};
    s.class_count = out_w;
    s.layers = {
        LayerSpec::Dense(in_w, 512), LayerSpec::Relu(),
        LayerSpec::Dense(512, 1024), LayerSpec::Relu(),
        LayerSpec::Dense(1024, h3), LayerSpec::Relu(),
        LayerSpec::Dense(h3, out_w),
    };
    return s;
}

}  // namespace

NetworkSpec build_architecture(DatasetId dataset, ModelKind kind) {
    NetworkSpec spec;
    if (kind == ModelKind::cnn) {
        switch (dataset) {
            case DatasetId::mnist_digit: spec = digit_cnn(); break;
            case DatasetId::mnist_fashion: spec = fashion_cnn(); break;
            case DatasetId::cifar10: spec = cifar_cnn(); break;
        }
    } else {
        switch (dataset) {
            case DatasetId::mnist_digit: spec = mlp_for(128, 128, 10); break;
            case DatasetId::mnist_fashion: spec = mlp_for(128, 512, 10); break;
            case DatasetId::cifar10: spec = mlp_for(256, 512, 10); break;
        }
    }
    infer_shapes(spec);  // flag geometry mismatches at build time
    return spec;
}

std::vector<std::vector<std::size_t>> infer_shapes(const NetworkSpec& spec) {
    if (spec.class_count == 0) throw std::invalid_argument("NetworkSpec: class_count == 0");
    if (spec.input_shape.empty()) throw std::invalid_argument("NetworkSpec: empty input shape");

    std::vector<std::vector<std::size_t>> shapes;
    shapes.push_back(spec.input_shape);
    std::vector<std::size_t> cur = spec.input_shape;

    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
            case LayerKind::conv2d: {
                if (cur.size() != 3) throw std::invalid_argument("conv2d: expected C,H,W input");
                if (l.kernel % 2 == 0 || l.kernel == 0)
                    throw std::invalid_argument("conv2d: kernel must be odd");
                if (cur[0] != l.in_channels)
                    throw std::invalid_argument("conv2d: channel mismatch at layer " +
                                                std::to_string(i));
                const std::size_t h = cur[1] + 2 * l.padding, w = cur[2] + 2 * l.padding;
                if (h < l.kernel || w < l.kernel)
                    throw std::invalid_argument("conv2d: input smaller than kernel");
                cur = {l.out_channels, h - l.kernel + 1, w - l.kernel + 1};
                break;
            }
            case LayerKind::maxpool2d: {
                if (cur.size() != 3) throw std::invalid_argument("maxpool2d: expected C,H,W");
                if (l.pool == 0 || l.stride == 0)
                    throw std::invalid_argument("maxpool2d: zero size/stride");
                if (cur[1] < l.pool || cur[2] < l.pool)
                    throw std::invalid_argument("maxpool2d: input smaller than window");
                cur = {cur[0], (cur[1] - l.pool) / l.stride + 1, (cur[2] - l.pool) / l.stride + 1};
                break;
            }
            case LayerKind::relu:
                break;
            case LayerKind::dropout:
                if (!(l.drop_p >= 0.0 && l.drop_p < 1.0))
                    throw std::invalid_argument("dropout: p must be in [0,1)");
                break;
            case LayerKind::flatten: {
                std::size_t n = 1;
                for (std::size_t d : cur) n *= d;
                cur = {n};
                break;
            }
            case LayerKind::dense: {
                if (cur.size() != 1)
                    throw std::invalid_argument("dense: expected flat input at layer " +
                                                std::to_string(i));
                if (l.in_width == 0 || l.out_width == 0)
                    throw std::invalid_argument("dense: zero width");
                if (cur[0] != l.in_width)
                    throw std::invalid_argument(
                        "dense: width mismatch at layer " + std::to_string(i) + ": got " +
                        std::to_string(cur[0]) + ", expected " + std::to_string(l.in_width));
                cur = {l.out_width};
                break;
            }
        }
        shapes.push_back(cur);
    }

    if (cur.size() != 1 || cur[0] != spec.class_count)
        throw std::invalid_argument("NetworkSpec: final output width != class_count");
    return shapes;
}

Checkpoint init_checkpoint(const NetworkSpec& spec, RngStream& rng) {
    infer_shapes(spec);
    Checkpoint ckpt;
    ckpt.spec = spec;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        const std::string prefix = "L" + std::to_string(i);
        if (l.kind == LayerKind::conv2d) {
            Tensor w({l.out_channels, l.in_channels, l.kernel, l.kernel});
            const double bound = std::sqrt(6.0 / double(l.in_channels * l.kernel * l.kernel));
            for (std::size_t k = 0; k < w.numel(); ++k) w[k] = rng.uniform(-bound, bound);
            ckpt.weights[prefix + ".weight"] = std::move(w);
            ckpt.weights[prefix + ".bias"] = Tensor({l.out_channels});
        } else if (l.kind == LayerKind::dense) {
            Tensor w({l.out_width, l.in_width});
            const double bound = std::sqrt(6.0 / double(l.in_width));
            for (std::size_t k = 0; k < w.numel(); ++k) w[k] = rng.uniform(-bound, bound);
            ckpt.weights[prefix + ".weight"] = std::move(w);
            ckpt.weights[prefix + ".bias"] = Tensor({l.out_width});
        }
    }
    for (const auto& [name, w] : ckpt.weights) {
        ckpt.adam.m[name] = Tensor(w.shape());
        ckpt.adam.v[name] = Tensor(w.shape());
    }
    return ckpt;
}

}  // namespace advd
