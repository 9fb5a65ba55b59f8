#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "terraseg/tensor.hpp"

namespace terraseg {

// Encoder-decoder over the occupancy channel: `levels` conv blocks with
// max-pooling down, nearest-neighbor upsampling with skip concatenation up,
// and a 1x1x1 head producing per-cell class probabilities.
struct UNetConfig {
    int levels = 3;           // number of pooling steps
    int base_channels = 16;   // doubles per level
    int kernel = 3;
    int pool = 2;
    int convs_per_level = 2;
    int classes = 3;
    double dropout = 0.5;  // architectural only; inference is a no-op

    void check() const;
    int pool_multiple() const;  // pool^levels; input dims must divide by this
};

// Named float32 tensors backing one network. On disk: manifest.json (names,
// shapes, byte offsets) plus weights.bin (concatenated little-endian floats).
class WeightBundle {
public:
    float bn_eps = 1e-5f;

    void add(const std::string& name, std::vector<int> shape, std::vector<float> values);
    bool has(const std::string& name) const { return tensors_.count(name) != 0; }

    // Fetches a tensor, checking its shape; throws naming the layer on mismatch.
    const std::vector<float>& get(const std::string& name, const std::vector<int>& expect_shape) const;
    const std::vector<int>& shape(const std::string& name) const;

    const std::map<std::string, std::pair<std::vector<int>, std::vector<float>>>& tensors() const {
        return tensors_;
    }

private:
    std::map<std::string, std::pair<std::vector<int>, std::vector<float>>> tensors_;
};

// Directory layout: <dir>/manifest.json + <dir>/weights.bin.
void save_weight_bundle(const WeightBundle& bundle, const std::string& dir);
WeightBundle load_weight_bundle(const std::string& dir);

// Seeded uniform init with conv fan-in scaling; bn starts as identity.
// Deterministic for a given seed and config.
WeightBundle random_weight_bundle(const UNetConfig& config, std::uint64_t seed);

// Expected weight names/shapes for a config, e.g. "enc0.conv1.weight".
std::vector<std::pair<std::string, std::vector<int>>> unet_weight_layout(const UNetConfig& config);

// Full forward pass: (X,Y,Z,1) occupancy in, (X,Y,Z,classes) per-cell class
// probabilities out (softmax head). Spatial dims must divide pool^levels.
Tensor4 unet_forward(const Tensor4& occupancy, const WeightBundle& weights, const UNetConfig& config);

}  // namespace terraseg
