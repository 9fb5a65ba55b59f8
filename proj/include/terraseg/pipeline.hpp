#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "terraseg/eval.hpp"
#include "terraseg/materials.hpp"
#include "terraseg/meshseg.hpp"
#include "terraseg/navigate.hpp"
#include "terraseg/preprocess.hpp"
#include "terraseg/segment.hpp"
#include "terraseg/trees.hpp"
#include "terraseg/voxelize.hpp"

namespace terraseg {

// One document drives the whole run; CLI flags override loaded fields.
struct PipelineConfig {
    std::string cloud_path;
    std::string dsm_path;
    std::string cameras_path;  // empty: skip cropping
    std::string ortho_path;    // empty: skip materials (and path)
    std::string mesh_path;     // empty: skip mesh segmentation
    std::string tree_table_path;  // empty: trees carry no species
    std::string train_mask_path;  // material classifier training labels
    std::string out_dir = "out";
    std::uint64_t seed = 42;

    CleaningParams clean;
    AoiParams aoi;
    VoxelParams voxel;
    std::string labeler = "baseline";  // baseline | unet | import
    std::string weights_dir;           // unet bundle; empty = seed-random weights
    BaselineParams baseline;
    TreeParams trees;
    PatchGridParams patches;
    MeshSegParams mesh_seg;

    bool path_enabled = false;
    double path_start[2] = {0.0, 0.0};
    double path_goal[2] = {0.0, 0.0};
    NavWeights nav_weights;
    double nav_cell = 1.0;
    double nav_lookup = 3.0;
};

PipelineConfig load_pipeline_config(const std::string& json_path);

struct PipelineResult {
    std::vector<std::pair<std::string, double>> stage_ms;  // in run order
    std::map<std::string, std::string> artifacts;          // name -> path
    EvalReport eval;
    bool eval_available = false;  // true when the input cloud carried truth labels
};

// Stages in order: clean, crop, segment, (eval), trees, materials, mesh,
// (path). Every artifact lands in out_dir together with manifest.json. A
// failing stage aborts with its name prefixed to the cause.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace terraseg
