#pragma once

#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

// Dense 4D tensor (X, Y, Z, C), row-major with the channel axis fastest.
struct Tensor4 {
    int x = 0, y = 0, z = 0, c = 0;
    std::vector<float> values;

    Tensor4() = default;
    Tensor4(int x_, int y_, int z_, int c_, float fill = 0.0f)
        : x(x_), y(y_), z(z_), c(c_), values(std::size_t(x_) * y_ * z_ * c_, fill) {
        if (x_ < 1 || y_ < 1 || z_ < 1 || c_ < 1) throw Error("tensor dims must be >= 1");
    }

    std::size_t index(int xi, int yi, int zi, int ci) const {
        return ((std::size_t(xi) * y + yi) * z + zi) * c + ci;
    }
    float& at(int xi, int yi, int zi, int ci) { return values[index(xi, yi, zi, ci)]; }
    float at(int xi, int yi, int zi, int ci) const { return values[index(xi, yi, zi, ci)]; }
    std::size_t size() const { return values.size(); }
};

// Cubic convolution kernel (k, k, k, c_in, c_out), innermost axis fastest.
struct ConvKernel {
    int k = 3;
    int c_in = 1;
    int c_out = 1;
    std::vector<float> values;

    ConvKernel() = default;
    ConvKernel(int k_, int c_in_, int c_out_, float fill = 0.0f)
        : k(k_), c_in(c_in_), c_out(c_out_),
          values(std::size_t(k_) * k_ * k_ * c_in_ * c_out_, fill) {}

    std::size_t index(int kx, int ky, int kz, int ci, int co) const {
        return (((std::size_t(kx) * k + ky) * k + kz) * c_in + ci) * c_out + co;
    }
    float& at(int kx, int ky, int kz, int ci, int co) { return values[index(kx, ky, kz, ci, co)]; }
    float at(int kx, int ky, int kz, int ci, int co) const {
        return values[index(kx, ky, kz, ci, co)];
    }
};

// Same-padded (zero fill) stride-1 cross-correlation. Kernel size must be odd
// and its c_in must match the input channel count.
Tensor4 conv3d(const Tensor4& input, const ConvKernel& kernel, const std::vector<float>& bias);

// Per-channel max over factor^3 windows; spatial dims must divide by factor.
Tensor4 maxpool3d(const Tensor4& input, int factor = 2);

// Nearest-neighbor upsample of `low` by `factor`, channel-concatenated with
// `skip` (skip channels first). Spatial dims must satisfy low * factor == skip.
Tensor4 upsample_concat(const Tensor4& low, const Tensor4& skip, int factor = 2);

// out = gamma * (x - mean) / sqrt(var + eps) + beta, per channel.
Tensor4 batchnorm_infer(const Tensor4& input, const std::vector<float>& gamma,
                        const std::vector<float>& beta, const std::vector<float>& mean,
                        const std::vector<float>& var, float eps);

Tensor4 relu(Tensor4 input);

// Per-cell softmax over the channel axis.
Tensor4 softmax_channels(const Tensor4& input);

}  // namespace terraseg
