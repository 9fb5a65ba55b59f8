#include "terraseg/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace terraseg {

Tensor4 conv3d(const Tensor4& input, const ConvKernel& kernel, const std::vector<float>& bias) {
    if (kernel.c_in != input.c)
        throw Error("conv3d: kernel expects " + std::to_string(kernel.c_in) + " channels, input has " +
                    std::to_string(input.c));
    if (kernel.k % 2 == 0) throw Error("conv3d: kernel size must be odd");
    if (int(bias.size()) != kernel.c_out) throw Error("conv3d: bias length must equal c_out");
    const int r = kernel.k / 2;

    Tensor4 out(input.x, input.y, input.z, kernel.c_out);
    std::vector<float> acc(kernel.c_out);
    for (int xi = 0; xi < input.x; ++xi) {
        const int kx0 = std::max(0, r - xi), kx1 = std::min(kernel.k, input.x + r - xi);
        for (int yi = 0; yi < input.y; ++yi) {
            const int ky0 = std::max(0, r - yi), ky1 = std::min(kernel.k, input.y + r - yi);
            for (int zi = 0; zi < input.z; ++zi) {
                const int kz0 = std::max(0, r - zi), kz1 = std::min(kernel.k, input.z + r - zi);
                std::copy(bias.begin(), bias.end(), acc.begin());
                for (int kx = kx0; kx < kx1; ++kx)
                    for (int ky = ky0; ky < ky1; ++ky)
                        for (int kz = kz0; kz < kz1; ++kz) {
                            const float* in_px =
                                &input.values[input.index(xi + kx - r, yi + ky - r, zi + kz - r, 0)];
                            const float* w = &kernel.values[kernel.index(kx, ky, kz, 0, 0)];
                            for (int ci = 0; ci < input.c; ++ci) {
                                const float v = in_px[ci];
                                const float* wc = w + std::size_t(ci) * kernel.c_out;
                                for (int co = 0; co < kernel.c_out; ++co) acc[co] += v * wc[co];
                            }
                        }
                std::copy(acc.begin(), acc.end(), &out.values[out.index(xi, yi, zi, 0)]);
            }
        }
    }
    return out;
}

Tensor4 maxpool3d(const Tensor4& input, int factor) {
    if (factor < 1) throw Error("maxpool3d: factor must be >= 1");
    if (input.x % factor || input.y % factor || input.z % factor)
        throw Error("maxpool3d: spatial dims must be divisible by the pool factor");
    Tensor4 out(input.x / factor, input.y / factor, input.z / factor, input.c);
    for (int xo = 0; xo < out.x; ++xo)
        for (int yo = 0; yo < out.y; ++yo)
            for (int zo = 0; zo < out.z; ++zo)
                for (int ci = 0; ci < input.c; ++ci) {
                    float best = input.at(xo * factor, yo * factor, zo * factor, ci);
                    for (int dx = 0; dx < factor; ++dx)
                        for (int dy = 0; dy < factor; ++dy)
                            for (int dz = 0; dz < factor; ++dz)
                                best = std::max(best, input.at(xo * factor + dx, yo * factor + dy,
                                                               zo * factor + dz, ci));
                    out.at(xo, yo, zo, ci) = best;
                }
    return out;
}

Tensor4 upsample_concat(const Tensor4& low, const Tensor4& skip, int factor) {
    if (low.x * factor != skip.x || low.y * factor != skip.y || low.z * factor != skip.z)
        throw Error("upsample_concat: low dims * factor must equal skip spatial dims");
    Tensor4 out(skip.x, skip.y, skip.z, skip.c + low.c);
    for (int xi = 0; xi < skip.x; ++xi)
        for (int yi = 0; yi < skip.y; ++yi)
            for (int zi = 0; zi < skip.z; ++zi) {
                float* dst = &out.values[out.index(xi, yi, zi, 0)];
                const float* s = &skip.values[skip.index(xi, yi, zi, 0)];
                std::copy(s, s + skip.c, dst);
                const float* l = &low.values[low.index(xi / factor, yi / factor, zi / factor, 0)];
                std::copy(l, l + low.c, dst + skip.c);
            }
    return out;
}

Tensor4 batchnorm_infer(const Tensor4& input, const std::vector<float>& gamma,
                        const std::vector<float>& beta, const std::vector<float>& mean,
                        const std::vector<float>& var, float eps) {
    const std::size_t c = std::size_t(input.c);
    if (gamma.size() != c || beta.size() != c || mean.size() != c || var.size() != c)
        throw Error("batchnorm_infer: parameter length must equal channel count");
    for (float v : var)
        if (v < 0.0f) throw Error("batchnorm_infer: variance must be >= 0");
    std::vector<float> stddev(c);
    for (std::size_t i = 0; i < c; ++i) stddev[i] = std::sqrt(var[i] + eps);
    Tensor4 out = input;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const std::size_t ci = i % c;
        out.values[i] = gamma[ci] * (input.values[i] - mean[ci]) / stddev[ci] + beta[ci];
    }
    return out;
}

Tensor4 relu(Tensor4 input) {
    for (float& v : input.values) v = std::max(v, 0.0f);
    return input;
}

Tensor4 softmax_channels(const Tensor4& input) {
    Tensor4 out = input;
    const int c = input.c;
    for (std::size_t base = 0; base < out.values.size(); base += c) {
        float* px = &out.values[base];
        float peak = px[0];
        for (int i = 1; i < c; ++i) peak = std::max(peak, px[i]);
        float sum = 0.0f;
        for (int i = 0; i < c; ++i) {
            px[i] = std::exp(px[i] - peak);
            sum += px[i];
        }
        for (int i = 0; i < c; ++i) px[i] /= sum;
    }
    return out;
}

}  // namespace terraseg
