#include "terraseg/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "terraseg/raster_io.hpp"

namespace terraseg {

namespace {

int window_px(const Raster& ortho, double patch_m) {
    if (!(ortho.resolution > 0.0)) throw Error("crop_patches: raster resolution unknown");
    const int px = int(std::llround(patch_m / ortho.resolution));
    if (px < 1) throw Error("crop_patches: patch smaller than one pixel");
    return px;
}

}  // namespace

std::vector<Patch> crop_patches(const Raster& ortho, const PatchGridParams& params) {
    if (!(params.patch_m > 0.0) || !(params.stride_m > 0.0))
        throw Error("crop_patches: patch and stride must be positive");
    const int px = window_px(ortho, params.patch_m);
    const double half = params.patch_m / 2.0;
    auto start_px = [&](double center, double origin) {
        return int(std::floor((center - half - origin) / ortho.resolution + 0.5));
    };
    std::vector<int> cols, rows;
    for (int k = 0;; ++k) {
        const int c0 = start_px(ortho.origin_x + half + k * params.stride_m, ortho.origin_x);
        if (c0 < 0 || c0 + px > ortho.width) break;
        cols.push_back(c0);
    }
    for (int k = 0;; ++k) {
        const int r0 = start_px(ortho.origin_y + half + k * params.stride_m, ortho.origin_y);
        if (r0 < 0 || r0 + px > ortho.height) break;
        rows.push_back(r0);
    }
    std::vector<Patch> patches;
    patches.reserve(rows.size() * cols.size());
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < cols.size(); ++i) {
            Patch p;
            p.cx = ortho.origin_x + half + double(i) * params.stride_m;
            p.cy = ortho.origin_y + half + double(j) * params.stride_m;
            p.row = rows[j];
            p.col = cols[i];
            p.size_px = px;
            patches.push_back(p);
        }
    return patches;
}

MaterialClass majority_label(const MaskRaster& mask, int row, int col, int h, int w) {
    if (h <= 0 || w <= 0) throw Error("majority_label: empty window");
    if (row < 0 || col < 0 || row + h > mask.height || col + w > mask.width)
        throw Error("majority_label: window outside mask");
    std::size_t tally[kMaterialClassCount] = {};
    for (int r = row; r < row + h; ++r)
        for (int c = col; c < col + w; ++c) {
            const std::uint8_t code = mask.at(r, c);
            if (code >= kMaterialClassCount)
                throw Error("majority_label: unknown material code " + std::to_string(code));
            tally[code]++;
        }
    int best = 0;
    for (int k = 1; k < kMaterialClassCount; ++k)
        if (tally[k] > tally[best]) best = k;
    return MaterialClass(best);
}

MaterialClass majority_label(const MaskRaster& mask) {
    return majority_label(mask, 0, 0, mask.height, mask.width);
}

PatchDataset build_patch_dataset(const Raster& ortho, const MaskRaster& mask,
                                 const PatchGridParams& params) {
    const double tol = 1e-9;
    if (ortho.width != mask.width || ortho.height != mask.height ||
        std::abs(ortho.resolution - mask.resolution) > tol ||
        std::abs(ortho.origin_x - mask.origin_x) > tol ||
        std::abs(ortho.origin_y - mask.origin_y) > tol)
        throw Error("build_patch_dataset: ortho and mask geometry differ");
    PatchDataset ds;
    ds.patches = crop_patches(ortho, params);
    ds.labels.reserve(ds.patches.size());
    for (const Patch& p : ds.patches) {
        const MaterialClass label = majority_label(mask, p.row, p.col, p.size_px, p.size_px);
        ds.labels.push_back(label);
        ds.class_counts[std::size_t(label)]++;
    }
    return ds;
}

std::array<double, 7> patch_features(const Raster& ortho, const Patch& patch) {
    const int n = patch.size_px;
    if (n <= 0 || patch.row < 0 || patch.col < 0 || patch.row + n > ortho.height ||
        patch.col + n > ortho.width)
        throw Error("patch_features: window outside raster");
    double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
    std::vector<double> luma(std::size_t(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::uint8_t* px = ortho.at(patch.row + r, patch.col + c);
            for (int ch = 0; ch < 3; ++ch) {
                sum[ch] += px[ch];
                sum2[ch] += double(px[ch]) * px[ch];
            }
            luma[std::size_t(r) * n + c] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
        }
    const double count = double(n) * n;
    std::array<double, 7> f{};
    for (int ch = 0; ch < 3; ++ch) {
        f[std::size_t(ch)] = sum[ch] / count;
        const double var = std::max(0.0, sum2[ch] / count - f[std::size_t(ch)] * f[std::size_t(ch)]);
        f[std::size_t(ch + 3)] = std::sqrt(var);
    }
    double grad_sum = 0.0;
    std::size_t grad_n = 0;
    for (int r = 1; r + 1 < n; ++r)
        for (int c = 1; c + 1 < n; ++c) {
            const double gx = (luma[std::size_t(r) * n + c + 1] - luma[std::size_t(r) * n + c - 1]) / 2.0;
            const double gy = (luma[std::size_t(r + 1) * n + c] - luma[std::size_t(r - 1) * n + c]) / 2.0;
            grad_sum += std::sqrt(gx * gx + gy * gy);
            grad_n++;
        }
    f[6] = grad_n ? grad_sum / double(grad_n) : 0.0;
    return f;
}

BaselineMaterialModel fit_baseline(const Raster& ortho, const PatchDataset& dataset) {
    for (int k = 0; k < kMaterialClassCount; ++k)
        if (dataset.class_counts[std::size_t(k)] == 0)
            throw Error(std::string("fit_baseline: no training patches for class ") +
                        material_class_name(MaterialClass(k)));
    std::vector<std::array<double, 7>> feats;
    feats.reserve(dataset.patches.size());
    for (const Patch& p : dataset.patches) feats.push_back(patch_features(ortho, p));

    BaselineMaterialModel model;
    const double count = double(feats.size());
    for (const auto& f : feats)
        for (int d = 0; d < 7; ++d) model.feature_mean[std::size_t(d)] += f[std::size_t(d)];
    for (int d = 0; d < 7; ++d) model.feature_mean[std::size_t(d)] /= count;
    for (const auto& f : feats)
        for (int d = 0; d < 7; ++d) {
            const double delta = f[std::size_t(d)] - model.feature_mean[std::size_t(d)];
            model.feature_stddev[std::size_t(d)] += delta * delta;
        }
    for (int d = 0; d < 7; ++d) {
        model.feature_stddev[std::size_t(d)] = std::sqrt(model.feature_stddev[std::size_t(d)] / count);
        if (model.feature_stddev[std::size_t(d)] == 0.0) model.feature_stddev[std::size_t(d)] = 1.0;
    }
    for (std::size_t i = 0; i < feats.size(); ++i) {
        auto& centroid = model.centroids[std::size_t(dataset.labels[i])];
        for (int d = 0; d < 7; ++d)
            centroid[std::size_t(d)] += (feats[i][std::size_t(d)] - model.feature_mean[std::size_t(d)]) /
                                        model.feature_stddev[std::size_t(d)];
    }
    for (int k = 0; k < kMaterialClassCount; ++k)
        for (int d = 0; d < 7; ++d)
            model.centroids[std::size_t(k)][std::size_t(d)] /= double(dataset.class_counts[std::size_t(k)]);
    return model;
}

MaterialClass classify_patch(const BaselineMaterialModel& model, const Raster& ortho,
                             const Patch& patch) {
    const std::array<double, 7> raw = patch_features(ortho, patch);
    std::array<double, 7> f{};
    for (int d = 0; d < 7; ++d)
        f[std::size_t(d)] = (raw[std::size_t(d)] - model.feature_mean[std::size_t(d)]) /
                            model.feature_stddev[std::size_t(d)];
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kMaterialClassCount; ++k) {
        double d2 = 0.0;
        for (int d = 0; d < 7; ++d) {
            const double delta = f[std::size_t(d)] - model.centroids[std::size_t(k)][std::size_t(d)];
            d2 += delta * delta;
        }
        if (d2 < best_d2) {
            best_d2 = d2;
            best = k;
        }
    }
    return MaterialClass(best);
}

MaterialClass ImportedMaterialClassifier::classify(const Raster&, const Patch& patch) const {
    return majority_label(*predictions_, patch.row, patch.col, patch.size_px, patch.size_px);
}

MaterialVectorMap build_vector_map(const Raster& ortho, const PatchClassifier& classifier,
                                   const PatchGridParams& params) {
    MaterialVectorMap map;
    map.stride_m = params.stride_m;
    map.patch_m = params.patch_m;
    for (const Patch& p : crop_patches(ortho, params))
        map.entries.push_back({p.cx, p.cy, classifier.classify(ortho, p)});
    return map;
}

void write_vector_map(const MaterialVectorMap& map, const std::string& csv_path) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error("cannot write vector map: " + csv_path);
    out << "x,y,material_code\n";
    char line[96];
    for (const auto& e : map.entries) {
        std::snprintf(line, sizeof line, "%.6f,%.6f,%d\n", e.x, e.y, int(e.material));
        out << line;
    }
    nlohmann::json side;
    side["stride_m"] = map.stride_m;
    side["patch_m"] = map.patch_m;
    side["class_names"] = nlohmann::json::array();
    for (int k = 0; k < kMaterialClassCount; ++k)
        side["class_names"].push_back(material_class_name(MaterialClass(k)));
    const std::string side_path = default_sidecar_path(csv_path);
    std::ofstream sout(side_path, std::ios::binary);
    if (!sout) throw Error("cannot write vector map sidecar: " + side_path);
    sout << side.dump(2) << "\n";
}

MaterialVectorMap read_vector_map(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw Error("cannot read vector map: " + csv_path);
    MaterialVectorMap map;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("x,", 0) == 0) continue;  // header
        std::stringstream ss(line);
        std::string fx, fy, fc;
        if (!std::getline(ss, fx, ',') || !std::getline(ss, fy, ',') || !std::getline(ss, fc))
            throw Error(csv_path + ":" + std::to_string(lineno) + ": expected x,y,material_code");
        MaterialVectorMap::Entry e;
        try {
            e.x = std::stod(fx);
            e.y = std::stod(fy);
            const int code = std::stoi(fc);
            if (code < 0 || code >= kMaterialClassCount)
                throw Error("code out of range");
            e.material = MaterialClass(code);
        } catch (const std::exception&) {
            throw Error(csv_path + ":" + std::to_string(lineno) + ": malformed row");
        }
        map.entries.push_back(e);
    }
    const std::string side_path = default_sidecar_path(csv_path);
    std::ifstream sin(side_path);
    if (sin) {
        nlohmann::json side;
        try {
            sin >> side;
            map.stride_m = side.at("stride_m").get<double>();
            map.patch_m = side.at("patch_m").get<double>();
        } catch (const std::exception& e) {
            throw Error("bad vector map sidecar " + side_path + ": " + e.what());
        }
    }
    return map;
}

}  // namespace terraseg
