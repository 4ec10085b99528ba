#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "advd/nn.hpp"

namespace advd {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'V', 'D'};
constexpr std::uint32_t kVersion = 1;

void append_bytes(std::string& buf, const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
}
void append_u32(std::string& buf, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
    append_bytes(buf, b, 4);
}
void append_u64(std::string& buf, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
    append_bytes(buf, b, 8);
}
void append_f64(std::string& buf, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    append_u64(buf, bits);
}

struct Reader {
    const unsigned char* p;
    std::size_t n;
    std::size_t pos = 0;

    void need(std::size_t k) const {
        if (pos + k > n) throw std::runtime_error("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
    std::string bytes(std::size_t k) {
        need(k);
        std::string s(reinterpret_cast<const char*>(p + pos), k);
        pos += k;
        return s;
    }
};

nlohmann::json layer_to_json(const LayerSpec& l) {
    nlohmann::json j;
    switch (l.kind) {
        case LayerKind::conv2d:
            j["kind"] = "conv2d";
            j["in_channels"] = l.in_channels;
            j["out_channels"] = l.out_channels;
            j["kernel"] = l.kernel;
            j["padding"] = l.padding;
            break;
        case LayerKind::maxpool2d:
            j["kind"] = "maxpool2d";
            j["pool"] = l.pool;
            j["stride"] = l.stride;
            break;
        case LayerKind::relu: j["kind"] = "relu"; break;
        case LayerKind::dropout:
            j["kind"] = "dropout";
            j["p"] = l.drop_p;
            break;
        case LayerKind::flatten: j["kind"] = "flatten"; break;
        case LayerKind::dense:
            j["kind"] = "dense";
            j["in_width"] = l.in_width;
            j["out_width"] = l.out_width;
            break;
    }
    return j;
}

LayerSpec layer_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv2d")
        return LayerSpec::Conv2d(j.at("in_channels"), j.at("out_channels"), j.at("kernel"),
                                 j.at("padding"));
    if (kind == "maxpool2d") return LayerSpec::MaxPool2d(j.at("pool"), j.at("stride"));
    if (kind == "relu") return LayerSpec::Relu();
    if (kind == "dropout") return LayerSpec::Dropout(j.at("p"));
    if (kind == "flatten") return LayerSpec::Flatten();
    if (kind == "dense") return LayerSpec::Dense(j.at("in_width"), j.at("out_width"));
    throw std::runtime_error("checkpoint: unknown layer kind " + kind);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw std::runtime_error("read failure on " + path);
    return data;
}

}  // namespace

void save_container(const std::string& path, const std::string& metadata_json,
                    const std::map<std::string, Tensor>& tensors) {
    std::string buf;
    append_bytes(buf, kMagic, 4);
    append_u32(buf, kVersion);
    append_u64(buf, metadata_json.size());
    append_bytes(buf, metadata_json.data(), metadata_json.size());
    append_u64(buf, tensors.size());
    for (const auto& [name, t] : tensors) {
        append_u64(buf, name.size());
        append_bytes(buf, name.data(), name.size());
        append_u64(buf, t.rank());
        for (std::size_t d : t.shape()) append_u64(buf, d);
        for (std::size_t k = 0; k < t.numel(); ++k) append_f64(buf, t[k]);
    }
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
    append_u32(buf, crc);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out.good()) throw std::runtime_error("write failure on " + path);
}

std::pair<std::string, std::map<std::string, Tensor>> load_container(const std::string& path) {
    const std::string data = read_file(path);
    if (data.size() < 12) throw std::runtime_error("checkpoint: truncated file");

    Reader r{reinterpret_cast<const unsigned char*>(data.data()), data.size() - 4};
    const std::uint32_t stored = [&] {
        Reader tail{reinterpret_cast<const unsigned char*>(data.data()), data.size()};
        tail.pos = data.size() - 4;
        return tail.u32();
    }();
    const std::uint32_t actual = static_cast<std::uint32_t>(crc32(
        0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size() - 4)));
    if (stored != actual) throw std::runtime_error("checkpoint: checksum mismatch");

    const std::string magic = r.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));

    const std::uint64_t meta_len = r.u64();
    std::string metadata = r.bytes(meta_len);
    const std::uint64_t count = r.u64();
    std::map<std::string, Tensor> tensors;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t name_len = r.u64();
        std::string name = r.bytes(name_len);
        const std::uint64_t rank = r.u64();
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = r.u64();
        const std::size_t numel = Tensor::numel_of(shape);
        std::vector<double> values(numel);
        for (auto& v : values) v = r.f64();
        tensors.emplace(std::move(name), Tensor(std::move(shape), std::move(values)));
    }
    return {std::move(metadata), std::move(tensors)};
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json meta;
    meta["format"] = "checkpoint";
    meta["spec"]["input_shape"] = ckpt.spec.input_shape;
    meta["spec"]["class_count"] = ckpt.spec.class_count;
    auto layers = nlohmann::json::array();
    for (const auto& l : ckpt.spec.layers) layers.push_back(layer_to_json(l));
    meta["spec"]["layers"] = layers;
    meta["train_meta"]["dataset_id"] = ckpt.meta.dataset_id;
    meta["train_meta"]["epochs_completed"] = ckpt.meta.epochs_completed;
    meta["train_meta"]["seed"] = ckpt.meta.seed;
    meta["adam_step"] = ckpt.adam.step;

    std::map<std::string, Tensor> tensors;
    for (const auto& [name, t] : ckpt.weights) tensors["w." + name] = t;
    for (const auto& [name, t] : ckpt.adam.m) tensors["adam.m." + name] = t;
    for (const auto& [name, t] : ckpt.adam.v) tensors["adam.v." + name] = t;
    save_container(path, meta.dump(), tensors);
}

Checkpoint load_checkpoint(const std::string& path) {
    auto [metadata, tensors] = load_container(path);
    nlohmann::json meta = nlohmann::json::parse(metadata);
    if (meta.value("format", "") != "checkpoint")
        throw std::runtime_error("checkpoint: not a checkpoint container");

    Checkpoint ckpt;
    ckpt.spec.input_shape = meta.at("spec").at("input_shape").get<std::vector<std::size_t>>();
    ckpt.spec.class_count = meta.at("spec").at("class_count").get<std::size_t>();
    for (const auto& lj : meta.at("spec").at("layers")) ckpt.spec.layers.push_back(layer_from_json(lj));
    ckpt.meta.dataset_id = meta.at("train_meta").at("dataset_id").get<std::string>();
    ckpt.meta.epochs_completed = meta.at("train_meta").at("epochs_completed").get<std::size_t>();
    ckpt.meta.seed = meta.at("train_meta").at("seed").get<std::uint64_t>();
    ckpt.adam.step = meta.at("adam_step").get<std::uint64_t>();

    for (auto& [name, t] : tensors) {
        for (double v : t.values())
            if (!std::isfinite(v))
                throw std::runtime_error("checkpoint: non-finite tensor value in " + name);
        if (name.rfind("w.", 0) == 0)
            ckpt.weights[name.substr(2)] = std::move(t);
        else if (name.rfind("adam.m.", 0) == 0)
            ckpt.adam.m[name.substr(7)] = std::move(t);
        else if (name.rfind("adam.v.", 0) == 0)
            ckpt.adam.v[name.substr(7)] = std::move(t);
        else
            throw std::runtime_error("checkpoint: unexpected tensor " + name);
    }

    // Every weight named by the spec must be present with a matching shape.
    RngStream probe(0);
    Checkpoint reference = init_checkpoint(ckpt.spec, probe);
    for (const auto& [name, ref] : reference.weights) {
        auto it = ckpt.weights.find(name);
        if (it == ckpt.weights.end())
            throw std::runtime_error("checkpoint: missing weight " + name);
        if (!it->second.same_shape(ref))
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        if (!ckpt.adam.m.count(name) || !ckpt.adam.v.count(name))
            throw std::runtime_error("checkpoint: missing optimizer state for " + name);
    }
    if (ckpt.weights.size() != reference.weights.size())
        throw std::runtime_error("checkpoint: unexpected extra weights");
    return ckpt;
}

}  // namespace advd
