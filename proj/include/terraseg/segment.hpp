#pragma once

#include <memory>
#include <string>

#include "terraseg/ground_model.hpp"
#include "terraseg/types.hpp"
#include "terraseg/unet.hpp"
#include "terraseg/voxelize.hpp"

namespace terraseg {

// Labels exactly the occupied cells of a block (fills block.label_grid).
class VoxelLabeler {
public:
    virtual ~VoxelLabeler() = default;
    virtual void label_block(VoxelBlock& block) const = 0;
    virtual std::string name() const = 0;
};

struct BaselineParams {
    double ground_height = 0.5;  // meters above the ground model
    double planar_rms = 0.15;    // plane-fit residual bound, meters
};

// Height + planarity rules: cells near the ground surface are Ground; higher
// cells are ManMade when the occupied 3x3x3 cell-center neighborhood fits a
// plane within planar_rms, otherwise Vegetation.
void baseline_geometric_label(VoxelBlock& block, const GroundElevationModel& ground,
                              const BaselineParams& params = {});

class BaselineLabeler : public VoxelLabeler {
public:
    BaselineLabeler(const GroundElevationModel* ground, BaselineParams params = {})
        : ground_(ground), params_(params) {}
    void label_block(VoxelBlock& block) const override {
        baseline_geometric_label(block, *ground_, params_);
    }
    std::string name() const override { return "baseline"; }

private:
    const GroundElevationModel* ground_;
    BaselineParams params_;
};

// Runs the network on the block occupancy grid and argmaxes the class
// probabilities into occupied cells.
class UNetLabeler : public VoxelLabeler {
public:
    UNetLabeler(WeightBundle weights, UNetConfig config)
        : weights_(std::move(weights)), config_(config) {}
    void label_block(VoxelBlock& block) const override;
    std::string name() const override { return "unet"; }

private:
    WeightBundle weights_;
    UNetConfig config_;
};

// Pass-through: voxel labels by majority vote of existing per-point labels.
class ImportedLabeler : public VoxelLabeler {
public:
    explicit ImportedLabeler(std::vector<TerrainClass> point_labels)
        : point_labels_(std::move(point_labels)) {}
    void label_block(VoxelBlock& block) const override {
        voxel_labels_from_points(block, point_labels_);
    }
    std::string name() const override { return "import"; }

private:
    std::vector<TerrainClass> point_labels_;
};

// voxelize -> label occupied cells per block -> pull labels back to points.
PointCloud segment_cloud(const PointCloud& cloud, const VoxelLabeler& labeler,
                         const VoxelParams& params = {});

// Ground surface estimate for unlabeled clouds: per-cell min z followed by a
// morphological opening (disk min then max) that removes bumps narrower than
// 2 * opening_radius. Feeds the baseline labeler when no labels exist yet.
GroundElevationModel estimate_ground_unlabeled(const PointCloud& cloud, double cell = 1.0,
                                               double opening_radius = 12.0);

}  // namespace terraseg
