#pragma once

#include <array>
#include <string>
#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

struct PatchGridParams {
    double patch_m = 5.0;
    double stride_m = 3.0;
};

// One grid window: world center plus the pixel rectangle it covers. The
// window always lies fully inside the source raster.
struct Patch {
    double cx = 0.0, cy = 0.0;  // world meters
    int row = 0, col = 0;       // top-left pixel of the window
    int size_px = 0;            // square window side
};

// Overlapping patch grid: centers start at origin + patch/2 and step by the
// stride on both axes; windows that would overflow the raster are dropped.
// Row-major output order. Throws when the patch rounds to zero pixels.
std::vector<Patch> crop_patches(const Raster& ortho, const PatchGridParams& params = {});

// Most frequent class code in the window, ties to the lowest code. Throws on
// codes outside the material classes or an empty window.
MaterialClass majority_label(const MaskRaster& mask, int row, int col, int h, int w);
MaterialClass majority_label(const MaskRaster& mask);  // whole raster

struct PatchDataset {
    std::vector<Patch> patches;
    std::vector<MaterialClass> labels;
    std::array<std::size_t, kMaterialClassCount> class_counts{};
};

// Database-creation path: crop the ortho grid and label each patch by the
// mask-pixel majority. Ortho and mask must share geometry exactly.
PatchDataset build_patch_dataset(const Raster& ortho, const MaskRaster& mask,
                                 const PatchGridParams& params = {});

class PatchClassifier {
public:
    virtual ~PatchClassifier() = default;
    virtual MaterialClass classify(const Raster& ortho, const Patch& patch) const = 0;
    virtual std::string name() const = 0;
};

// 7 features per patch: mean RGB, per-channel stddev, mean gradient
// magnitude (central differences on luma, interior pixels only).
std::array<double, 7> patch_features(const Raster& ortho, const Patch& patch);

struct BaselineMaterialModel {
    std::array<double, 7> feature_mean{};
    std::array<double, 7> feature_stddev{};  // 1 where the training spread is 0
    std::array<std::array<double, 7>, kMaterialClassCount> centroids{};
};

// Nearest-centroid model over z-normalized patch features. Fit throws unless
// every class has at least one training patch.
BaselineMaterialModel fit_baseline(const Raster& ortho, const PatchDataset& dataset);
MaterialClass classify_patch(const BaselineMaterialModel& model, const Raster& ortho,
                             const Patch& patch);

class BaselineMaterialClassifier : public PatchClassifier {
public:
    explicit BaselineMaterialClassifier(BaselineMaterialModel model) : model_(model) {}
    MaterialClass classify(const Raster& ortho, const Patch& patch) const override {
        return classify_patch(model_, ortho, patch);
    }
    std::string name() const override { return "baseline"; }

private:
    BaselineMaterialModel model_;
};

// Pass-through for externally predicted per-pixel codes: patch label is the
// majority code inside the window.
class ImportedMaterialClassifier : public PatchClassifier {
public:
    explicit ImportedMaterialClassifier(const MaskRaster* predictions) : predictions_(predictions) {}
    MaterialClass classify(const Raster& ortho, const Patch& patch) const override;
    std::string name() const override { return "import"; }

private:
    const MaskRaster* predictions_;
};

struct MaterialVectorMap {
    struct Entry {
        double x = 0.0, y = 0.0;
        MaterialClass material = MaterialClass::BareSoil;
    };
    std::vector<Entry> entries;  // row-major over the patch grid
    double stride_m = 3.0;       // nominal map resolution
    double patch_m = 5.0;
};

// One labeled center per cropped patch, in grid order.
MaterialVectorMap build_vector_map(const Raster& ortho, const PatchClassifier& classifier,
                                   const PatchGridParams& params = {});

// CSV `x,y,material_code` with a header row, plus a JSON sidecar
// {stride_m, patch_m, class_names} next to it.
void write_vector_map(const MaterialVectorMap& map, const std::string& csv_path);
MaterialVectorMap read_vector_map(const std::string& csv_path);

}  // namespace terraseg
