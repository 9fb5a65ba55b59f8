#include "terraseg/unet.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace terraseg {

using nlohmann::json;

void UNetConfig::check() const {
    if (levels < 1) throw Error("unet config: levels must be >= 1");
    if (base_channels < 1) throw Error("unet config: base_channels must be >= 1");
    if (kernel < 1 || kernel % 2 == 0) throw Error("unet config: kernel must be odd and >= 1");
    if (pool < 2) throw Error("unet config: pool factor must be >= 2");
    if (convs_per_level < 1) throw Error("unet config: convs_per_level must be >= 1");
    if (classes != 3) throw Error("unet config: three terrain classes expected");
}

int UNetConfig::pool_multiple() const {
    int m = 1;
    for (int l = 0; l < levels; ++l) m *= pool;
    return m;
}

void WeightBundle::add(const std::string& name, std::vector<int> shape, std::vector<float> values) {
    std::size_t n = 1;
    for (int d : shape) n *= std::size_t(d);
    if (n != values.size())
        throw Error("weight tensor '" + name + "': shape does not match value count");
    tensors_[name] = {std::move(shape), std::move(values)};
}

const std::vector<float>& WeightBundle::get(const std::string& name,
                                            const std::vector<int>& expect_shape) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw Error("weight bundle is missing tensor '" + name + "'");
    if (it->second.first != expect_shape) {
        std::ostringstream os;
        os << "layer '" << name << "': expected shape [";
        for (std::size_t i = 0; i < expect_shape.size(); ++i)
            os << (i ? "," : "") << expect_shape[i];
        os << "], bundle has [";
        for (std::size_t i = 0; i < it->second.first.size(); ++i)
            os << (i ? "," : "") << it->second.first[i];
        os << "]";
        throw Error(os.str());
    }
    return it->second.second;
}

const std::vector<int>& WeightBundle::shape(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw Error("weight bundle is missing tensor '" + name + "'");
    return it->second.first;
}

void save_weight_bundle(const WeightBundle& bundle, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["schema_version"] = 1;
    manifest["dtype"] = "float32";
    manifest["byte_order"] = "little";
    manifest["bn_eps"] = bundle.bn_eps;
    json tensors = json::array();

    std::ofstream blob(dir + "/weights.bin", std::ios::binary);
    if (!blob) throw Error("cannot write '" + dir + "/weights.bin'");
    std::size_t offset = 0;
    for (const auto& [name, entry] : bundle.tensors()) {
        const auto& [shape, values] = entry;
        tensors.push_back({{"name", name}, {"shape", shape}, {"offset", offset}});
        blob.write(reinterpret_cast<const char*>(values.data()),
                   std::streamsize(values.size() * sizeof(float)));
        offset += values.size() * sizeof(float);
    }
    if (!blob) throw Error("write failed for '" + dir + "/weights.bin'");
    manifest["tensors"] = std::move(tensors);

    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw Error("cannot write '" + dir + "/manifest.json'");
    mf << manifest.dump(2) << "\n";
}

WeightBundle load_weight_bundle(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw Error("cannot open '" + dir + "/manifest.json'");
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        throw Error("bad weight manifest in '" + dir + "': " + e.what());
    }
    if (manifest.value("schema_version", 0) != 1)
        throw Error("unsupported weight manifest schema in '" + dir + "'");
    if (manifest.value("dtype", "") != "float32" || manifest.value("byte_order", "") != "little")
        throw Error("weight bundle '" + dir + "' must be little-endian float32");

    std::ifstream blob(dir + "/weights.bin", std::ios::binary);
    if (!blob) throw Error("cannot open '" + dir + "/weights.bin'");

    WeightBundle bundle;
    bundle.bn_eps = manifest.value("bn_eps", 1e-5f);
    for (const auto& t : manifest.at("tensors")) {
        const std::string name = t.at("name").get<std::string>();
        const std::vector<int> shape = t.at("shape").get<std::vector<int>>();
        const std::size_t offset = t.at("offset").get<std::size_t>();
        std::size_t n = 1;
        for (int d : shape) {
            if (d < 1) throw Error("tensor '" + name + "' has a non-positive dimension");
            n *= std::size_t(d);
        }
        std::vector<float> values(n);
        blob.seekg(std::streamoff(offset), std::ios::beg);
        blob.read(reinterpret_cast<char*>(values.data()), std::streamsize(n * sizeof(float)));
        if (std::size_t(blob.gcount()) != n * sizeof(float))
            throw Error("weights.bin truncated reading tensor '" + name + "'");
        bundle.add(name, shape, std::move(values));
    }
    return bundle;
}

namespace {

struct ConvSpec {
    std::string name;  // e.g. "enc0.conv1"
    int c_in = 0;
    int c_out = 0;
    int k = 3;
};

// The per-layer channel plan. Encoder level l works at base*2^l channels,
// the bottleneck at base*2^levels; decoder level l consumes its skip plus the
// upsampled coarser map (3 * base*2^l channels in).
std::vector<ConvSpec> conv_plan(const UNetConfig& cfg) {
    std::vector<ConvSpec> plan;
    auto width = [&](int level) { return cfg.base_channels << level; };
    auto add_level = [&](const std::string& prefix, int c_in, int c_out) {
        for (int j = 0; j < cfg.convs_per_level; ++j) {
            plan.push_back({prefix + ".conv" + std::to_string(j), j == 0 ? c_in : c_out, c_out,
                            cfg.kernel});
        }
    };
    add_level("enc0", 1, width(0));
    for (int l = 1; l < cfg.levels; ++l)
        add_level("enc" + std::to_string(l), width(l - 1), width(l));
    add_level("bottleneck", width(cfg.levels - 1), width(cfg.levels));
    for (int l = cfg.levels - 1; l >= 0; --l)
        add_level("dec" + std::to_string(l), width(l) + width(l + 1), width(l));
    return plan;
}

ConvKernel fetch_conv(const WeightBundle& w, const ConvSpec& spec, std::vector<float>& bias) {
    ConvKernel k(spec.k, spec.c_in, spec.c_out);
    k.values = w.get(spec.name + ".weight", {spec.k, spec.k, spec.k, spec.c_in, spec.c_out});
    bias = w.get(spec.name + ".bias", {spec.c_out});
    return k;
}

Tensor4 conv_bn_relu(const Tensor4& input, const WeightBundle& w, const ConvSpec& spec) {
    std::vector<float> bias;
    const ConvKernel kernel = fetch_conv(w, spec, bias);
    Tensor4 t = conv3d(input, kernel, bias);
    t = batchnorm_infer(t, w.get(spec.name + ".bn.gamma", {spec.c_out}),
                        w.get(spec.name + ".bn.beta", {spec.c_out}),
                        w.get(spec.name + ".bn.mean", {spec.c_out}),
                        w.get(spec.name + ".bn.var", {spec.c_out}), w.bn_eps);
    return relu(std::move(t));
}

}  // namespace

std::vector<std::pair<std::string, std::vector<int>>> unet_weight_layout(const UNetConfig& cfg) {
    cfg.check();
    std::vector<std::pair<std::string, std::vector<int>>> layout;
    for (const ConvSpec& spec : conv_plan(cfg)) {
        layout.emplace_back(spec.name + ".weight",
                            std::vector<int>{spec.k, spec.k, spec.k, spec.c_in, spec.c_out});
        layout.emplace_back(spec.name + ".bias", std::vector<int>{spec.c_out});
        for (const char* p : {".bn.gamma", ".bn.beta", ".bn.mean", ".bn.var"})
            layout.emplace_back(spec.name + p, std::vector<int>{spec.c_out});
    }
    layout.emplace_back("head.weight", std::vector<int>{1, 1, 1, cfg.base_channels, cfg.classes});
    layout.emplace_back("head.bias", std::vector<int>{cfg.classes});
    return layout;
}

WeightBundle random_weight_bundle(const UNetConfig& cfg, std::uint64_t seed) {
    cfg.check();
    std::mt19937_64 rng(seed);
    // Uniform in [-1,1) from the top 24 bits; implementation-independent.
    auto unit = [&rng]() { return float((rng() >> 40) * (1.0 / 8388608.0)) - 1.0f; };

    WeightBundle bundle;
    for (const auto& [name, shape] : unet_weight_layout(cfg)) {
        std::size_t n = 1;
        for (int d : shape) n *= std::size_t(d);
        std::vector<float> values(n);
        if (shape.size() == 5) {
            std::size_t fan_in = std::size_t(shape[0]) * shape[1] * shape[2] * shape[3];
            const float a = std::sqrt(6.0f / float(fan_in));
            for (float& v : values) v = a * unit();
        } else if (name.ends_with(".bn.gamma") || name.ends_with(".bn.var")) {
            values.assign(n, 1.0f);
        } else {
            values.assign(n, 0.0f);  // biases, bn beta/mean
        }
        bundle.add(name, shape, std::move(values));
    }
    return bundle;
}

Tensor4 unet_forward(const Tensor4& occupancy, const WeightBundle& weights, const UNetConfig& cfg) {
    cfg.check();
    if (occupancy.c != 1) throw Error("unet_forward: input must have a single occupancy channel");
    const int mult = cfg.pool_multiple();
    if (occupancy.x % mult || occupancy.y % mult || occupancy.z % mult)
        throw Error("unet_forward: input dims (" + std::to_string(occupancy.x) + "," +
                    std::to_string(occupancy.y) + "," + std::to_string(occupancy.z) +
                    ") must be divisible by pool^levels = " + std::to_string(mult));

    const std::vector<ConvSpec> plan = conv_plan(cfg);
    auto level_specs = [&](const std::string& prefix) {
        std::vector<ConvSpec> out;
        for (const ConvSpec& s : plan)
            if (s.name.rfind(prefix + ".", 0) == 0) out.push_back(s);
        return out;
    };
    auto run_level = [&](Tensor4 t, const std::string& prefix) {
        for (const ConvSpec& s : level_specs(prefix)) t = conv_bn_relu(t, weights, s);
        return t;
    };

    std::vector<Tensor4> skips;
    Tensor4 t = occupancy;
    for (int l = 0; l < cfg.levels; ++l) {
        t = run_level(std::move(t), "enc" + std::to_string(l));
        skips.push_back(t);
        t = maxpool3d(t, cfg.pool);
        // dropout after each pooling layer is identity at inference
    }
    t = run_level(std::move(t), "bottleneck");
    for (int l = cfg.levels - 1; l >= 0; --l) {
        t = upsample_concat(t, skips[std::size_t(l)], cfg.pool);
        t = run_level(std::move(t), "dec" + std::to_string(l));
    }

    ConvKernel head(1, cfg.base_channels, cfg.classes);
    head.values = weights.get("head.weight", {1, 1, 1, cfg.base_channels, cfg.classes});
    const std::vector<float>& head_bias = weights.get("head.bias", {cfg.classes});
    t = conv3d(t, head, head_bias);
    return softmax_channels(t);
}

}  // namespace terraseg
