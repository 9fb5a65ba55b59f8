// Command-line front end: one subcommand per pipeline stage plus `run`,
// `eval`, and the synthetic-scene generator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "terraseg/eval.hpp"
#include "terraseg/obj_io.hpp"
#include "terraseg/pipeline.hpp"
#include "terraseg/ply_io.hpp"
#include "terraseg/raster_io.hpp"
#include "terraseg/synth.hpp"
#include "terraseg/unet.hpp"

namespace {

using namespace terraseg;
namespace fs = std::filesystem;

int run_clean(const std::string& cloud_path, const std::string& dsm_path,
              const std::string& out_path, double radius) {
    CleaningParams params;
    params.cylinder_radius = radius;
    const PointCloud cloud = read_point_cloud(cloud_path);
    const PointCloud dsm = read_point_cloud(dsm_path);
    const CleanResult result = remove_underground(cloud, dsm, params);
    write_point_cloud(result.kept, out_path, PlyFormat::BinaryLittleEndian);
    std::printf("kept %zu points, removed %zu\n", result.kept.size(), result.removed_count);
    return 0;
}

int run_crop(const std::string& cloud_path, const std::string& cameras_path,
             const std::string& out_path, double alpha, bool no_fallback) {
    AoiParams params;
    params.alpha = alpha;
    params.fallback_to_convex = !no_fallback;
    const PointCloud cloud = read_point_cloud(cloud_path);
    const CameraPoseSet cameras = read_cameras(cameras_path);
    const Polygon2 aoi = compute_aoi(cameras, params);
    const PointCloud cropped = crop_to_aoi(cloud, aoi);
    write_point_cloud(cropped, out_path, PlyFormat::BinaryLittleEndian);
    std::printf("kept %zu of %zu points inside a %zu-vertex boundary\n", cropped.size(),
                cloud.size(), aoi.outer().size());
    return 0;
}

int run_voxelize(const std::string& cloud_path, const std::string& out_dir, double large_m,
                 double small_m) {
    VoxelParams params;
    params.large_w = params.large_d = params.large_h = large_m;
    params.small_w = params.small_d = params.small_h = small_m;
    const PointCloud cloud = read_point_cloud(cloud_path);
    const std::vector<VoxelBlock> blocks = voxelize(cloud, params);
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "block_%04zu.bin", i);
        write_block_dump(blocks[i], (fs::path(out_dir) / name).string());
    }
    const auto dims = params.grid_dims();
    std::printf("%zu blocks of %dx%dx%d cells -> %s\n", blocks.size(), dims[0], dims[1], dims[2],
                out_dir.c_str());
    return 0;
}

int run_segment(const std::string& cloud_path, const std::string& out_path,
                const std::string& labeler_name, const std::string& weights_dir,
                std::uint64_t seed, const BaselineParams& baseline) {
    const PointCloud cloud = read_point_cloud(cloud_path);
    std::unique_ptr<VoxelLabeler> labeler;
    GroundElevationModel ground;
    if (labeler_name == "baseline") {
        ground = estimate_ground_unlabeled(cloud);
        labeler = std::make_unique<BaselineLabeler>(&ground, baseline);
    } else if (labeler_name == "unet") {
        UNetConfig net_config;
        WeightBundle weights = weights_dir.empty() ? random_weight_bundle(net_config, seed)
                                                   : load_weight_bundle(weights_dir);
        labeler = std::make_unique<UNetLabeler>(std::move(weights), net_config);
    } else if (labeler_name == "import") {
        if (!cloud.labels) throw Error("import labeler needs a labeled input cloud");
        labeler = std::make_unique<ImportedLabeler>(*cloud.labels);
    } else {
        throw Error("unknown labeler '" + labeler_name + "'");
    }
    const PointCloud labeled = segment_cloud(cloud, *labeler, {});
    write_point_cloud(labeled, out_path, PlyFormat::BinaryLittleEndian);
    std::array<std::size_t, kTerrainClassCount> counts{};
    for (TerrainClass c : *labeled.labels) ++counts[std::size_t(c)];
    std::printf("ground %zu, manmade %zu, vegetation %zu -> %s\n", counts[0], counts[1], counts[2],
                out_path.c_str());
    return 0;
}

int run_trees(const std::string& cloud_path, const std::string& table_path,
              const std::string& out_path, TreeParams params) {
    const PointCloud cloud = read_point_cloud(cloud_path);
    const GroundElevationModel ground = build_ground_model(cloud);
    std::vector<TreeModelAttribute> table;
    if (!table_path.empty()) table = read_tree_table(table_path);
    const std::vector<TreeInstance> trees = extract_trees(cloud, ground, table, params);
    write_tree_instances(out_path, trees);
    std::printf("placed %zu trees -> %s\n", trees.size(), out_path.c_str());
    return 0;
}

int run_materials(const std::string& ortho_path, const std::string& mask_path,
                  const std::string& out_path, const PatchGridParams& params) {
    const Raster ortho = read_raster(ortho_path);
    const MaskRaster mask = read_mask(mask_path);
    const PatchDataset dataset = build_patch_dataset(ortho, mask, params);
    const BaselineMaterialModel model = fit_baseline(ortho, dataset);
    const BaselineMaterialClassifier classifier(model);
    const MaterialVectorMap map = build_vector_map(ortho, classifier, params);
    write_vector_map(map, out_path);
    std::printf("%zu map samples -> %s\n", map.entries.size(), out_path.c_str());
    return 0;
}

int run_mesh(const std::string& mesh_path, const std::string& cloud_path,
             const std::string& out_dir, double radius) {
    MeshSegParams params;
    params.match_radius = radius;
    const TriMesh mesh = read_mesh(mesh_path);
    const PointCloud cloud = read_point_cloud(cloud_path);
    if (!cloud.labels) throw Error("mesh segmentation needs a labeled cloud");
    const SegmentedMesh seg = segment_mesh(mesh, cloud, params);
    fs::create_directories(out_dir);
    const GroundElevationModel ground = build_ground_model(cloud);
    write_mesh(seg.submeshes[0], (fs::path(out_dir) / "ground.obj").string());
    write_mesh(seg.submeshes[1], (fs::path(out_dir) / "manmade.obj").string());
    const TriMesh& veg = seg.submeshes[2];
    std::vector<std::size_t> all(veg.vertices.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    write_mesh(flatten_trees(veg, all, ground),
               (fs::path(out_dir) / "vegetation_flattened.obj").string());
    std::printf("submeshes: ground %zu, manmade %zu, vegetation %zu faces -> %s\n",
                seg.submeshes[0].faces.size(), seg.submeshes[1].faces.size(),
                seg.submeshes[2].faces.size(), out_dir.c_str());
    return 0;
}

int run_path(const std::string& map_path, const std::array<double, 2>& start,
             const std::array<double, 2>& goal, const std::string& out_path,
             const NavWeights& weights, double cell, double lookup,
             const std::string& render_path) {
    const MaterialVectorMap map = read_vector_map(map_path);
    if (map.entries.empty()) throw Error("empty material map");
    double min_x = map.entries.front().x, max_x = min_x;
    double min_y = map.entries.front().y, max_y = min_y;
    for (const auto& e : map.entries) {
        min_x = std::min(min_x, e.x);
        max_x = std::max(max_x, e.x);
        min_y = std::min(min_y, e.y);
        max_y = std::max(max_y, e.y);
    }
    const double pad = map.stride_m;
    const NavGrid grid = build_navgrid(min_x - pad, min_y - pad, max_x + pad, max_y + pad, map,
                                       weights, cell, lookup);
    const PathResult result =
        astar(grid, grid.cell_of(start[0], start[1]), grid.cell_of(goal[0], goal[1]));
    if (!result.found) throw Error("no route between the endpoints");
    write_path(out_path, result);
    if (!render_path.empty()) render_navgrid(grid, result, render_path);
    std::printf("route of %zu cells, length %.2f m, weighted cost %.2f -> %s\n",
                result.cells.size(), result.length, result.cost, out_path.c_str());
    return 0;
}

int run_eval(const std::string& predicted_path, const std::string& truth_path) {
    const PointCloud predicted = read_point_cloud(predicted_path);
    const PointCloud truth = read_point_cloud(truth_path);
    if (!predicted.labels) throw Error("predicted cloud carries no labels");
    if (!truth.labels) throw Error("truth cloud carries no labels");
    const EvalReport report = evaluate(*predicted.labels, *truth.labels);
    std::cout << render_report(report);
    return 0;
}

int run_synth(const SceneSpec& spec, const std::string& out_dir) {
    const SynthScene scene = synth_scene(spec);
    fs::create_directories(out_dir);
    auto at = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    write_point_cloud(scene.cloud, at("cloud.ply"), PlyFormat::BinaryLittleEndian);
    write_point_cloud(scene.dsm, at("dsm.ply"), PlyFormat::BinaryLittleEndian);
    write_raster(scene.ortho, at("ortho.png"));
    write_mask(scene.material_mask, at("mask.png"));
    write_mesh(scene.mesh, at("mesh.obj"));
    write_cameras(at("cameras.json"), scene.cameras);
    write_default_tree_table(at("tree_table.csv"));

    // Ready-to-run configuration pointing at the generated inputs.
    nlohmann::json config;
    config["seed"] = spec.seed;
    config["out_dir"] = (fs::path(out_dir) / "out").string();
    config["inputs"] = {{"cloud", at("cloud.ply")},     {"dsm", at("dsm.ply")},
                        {"cameras", at("cameras.json")}, {"ortho", at("ortho.png")},
                        {"mesh", at("mesh.obj")},        {"tree_table", at("tree_table.csv")},
                        {"train_mask", at("mask.png")}};
    config["path"] = {{"enabled", true},
                      {"start", {5.0, 5.0}},
                      {"goal", {spec.extent_x - 5.0, spec.extent_y - 5.0}}};
    std::ofstream out(at("config.json"), std::ios::binary);
    out << config.dump(2) << "\n";
    std::printf("scene with %zu points (%zu ground, %zu manmade, %zu vegetation) -> %s\n",
                scene.cloud.size(), scene.class_counts[0], scene.class_counts[1],
                scene.class_counts[2], out_dir.c_str());
    return 0;
}

int run_run(const std::string& config_path, const PipelineConfig& overrides,
            const std::vector<std::string>& overridden) {
    PipelineConfig config =
        config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
    auto wants = [&](const char* flag) {
        return std::find(overridden.begin(), overridden.end(), flag) != overridden.end();
    };
    if (wants("seed")) config.seed = overrides.seed;
    if (wants("out_dir")) config.out_dir = overrides.out_dir;
    if (wants("labeler")) config.labeler = overrides.labeler;
    if (wants("weights_dir")) config.weights_dir = overrides.weights_dir;
    if (wants("cloud")) config.cloud_path = overrides.cloud_path;
    if (wants("dsm")) config.dsm_path = overrides.dsm_path;

    const PipelineResult result = run_pipeline(config);
    for (const auto& [name, ms] : result.stage_ms) std::printf("%-10s %8.1f ms\n", name.c_str(), ms);
    if (result.eval_available) std::cout << render_report(result.eval);
    std::printf("artifacts in %s\n", config.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photogrammetric terrain to simulation semantics"};
    app.require_subcommand(1);

    std::string cloud_path, dsm_path, cameras_path, ortho_path, mesh_path, mask_path, map_path;
    std::string table_path, out_path = "out", weights_dir, config_path, render_path;
    std::string labeler = "baseline", method = "poisson";
    std::uint64_t seed = 42;
    double radius = 5.0, alpha = 30.0, large_m = 40.0, small_m = 0.5;
    bool no_fallback = false;
    BaselineParams baseline;
    TreeParams tree_params;
    PatchGridParams patch_params;
    NavWeights nav_weights;
    double mesh_radius = 0.5, nav_cell = 1.0, nav_lookup = 3.0;
    std::array<double, 2> start{0, 0}, goal{0, 0};
    SceneSpec scene_spec;

    CLI::App* clean = app.add_subcommand("clean", "Remove underground artifact points");
    clean->add_option("--cloud", cloud_path)->required();
    clean->add_option("--dsm", dsm_path)->required();
    clean->add_option("--out", out_path)->required();
    clean->add_option("--radius", radius, "DSM cylinder radius, meters");

    CLI::App* crop = app.add_subcommand("crop", "Crop to the camera-coverage area");
    crop->add_option("--cloud", cloud_path)->required();
    crop->add_option("--cameras", cameras_path)->required();
    crop->add_option("--out", out_path)->required();
    crop->add_option("--alpha", alpha, "Concave-hull alpha, meters");
    crop->add_flag("--no-convex-fallback", no_fallback);

    CLI::App* voxelize_cmd = app.add_subcommand("voxelize", "Dump the two-level voxel grids");
    voxelize_cmd->add_option("--cloud", cloud_path)->required();
    voxelize_cmd->add_option("--outdir", out_path)->required();
    voxelize_cmd->add_option("--large", large_m, "Block edge, meters");
    voxelize_cmd->add_option("--small", small_m, "Cell edge, meters");

    CLI::App* segment = app.add_subcommand("segment", "Label the cloud per voxel cell");
    segment->add_option("--cloud", cloud_path)->required();
    segment->add_option("--out", out_path)->required();
    segment->add_option("--labeler", labeler, "baseline | unet | import");
    segment->add_option("--weights", weights_dir, "Weight bundle directory (unet)");
    segment->add_option("--seed", seed, "Random-weight seed when no bundle is given");
    segment->add_option("--ground-height", baseline.ground_height);
    segment->add_option("--planar-rms", baseline.planar_rms);

    CLI::App* trees = app.add_subcommand("trees", "Extract geo-typical tree instances");
    trees->add_option("--cloud", cloud_path, "Labeled cloud")->required();
    trees->add_option("--out", out_path)->required();
    trees->add_option("--table", table_path, "Species attribute CSV");
    trees->add_option("--zone", tree_params.zone, "Hardiness zone");
    trees->add_option("--method", method, "poisson | kmeans");
    trees->add_option("--seed", tree_params.seed);
    trees->add_option("--link-radius", tree_params.link_radius);
    trees->add_option("--max-edge", tree_params.max_edge);

    CLI::App* materials = app.add_subcommand("materials", "Build the ground-material map");
    materials->add_option("--ortho", ortho_path)->required();
    materials->add_option("--train-mask", mask_path)->required();
    materials->add_option("--out", out_path)->required();
    materials->add_option("--patch", patch_params.patch_m, "Patch size, meters");
    materials->add_option("--stride", patch_params.stride_m, "Patch stride, meters");

    CLI::App* mesh = app.add_subcommand("mesh", "Split the mesh by point-cloud class");
    mesh->add_option("--mesh", mesh_path)->required();
    mesh->add_option("--cloud", cloud_path, "Labeled cloud")->required();
    mesh->add_option("--outdir", out_path)->required();
    mesh->add_option("--radius", mesh_radius, "Vertex-to-point match radius, meters");

    CLI::App* path = app.add_subcommand("path", "Route across the material map");
    path->add_option("--map", map_path)->required();
    path->add_option("--start", start, "x y")->required();
    path->add_option("--goal", goal, "x y")->required();
    path->add_option("--out", out_path)->required();
    path->add_option("--road-weight", nav_weights.road);
    path->add_option("--soil-weight", nav_weights.bare_soil);
    path->add_option("--veg-weight", nav_weights.vegetation);
    path->add_option("--cell", nav_cell, "Grid cell, meters");
    path->add_option("--lookup", nav_lookup, "Sample lookup radius, meters");
    path->add_option("--render", render_path, "Optional PGM route render");

    CLI::App* eval_cmd = app.add_subcommand("eval", "Compare labeled clouds");
    eval_cmd->add_option("--predicted", cloud_path)->required();
    eval_cmd->add_option("--truth", dsm_path)->required();

    CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic test scene");
    synth->add_option("--outdir", out_path)->required();
    synth->add_option("--seed", scene_spec.seed);
    synth->add_option("--extent", scene_spec.extent_x, "Square scene edge, meters");
    synth->add_option("--slope-x", scene_spec.slope_x);
    synth->add_option("--slope-y", scene_spec.slope_y);
    synth->add_option("--boxes", scene_spec.boxes);
    synth->add_option("--trees", scene_spec.trees);
    synth->add_option("--roads", scene_spec.roads);
    synth->add_option("--underground", scene_spec.underground);

    PipelineConfig overrides;
    CLI::App* run = app.add_subcommand("run", "Run the full pipeline from a config");
    run->add_option("--config", config_path, "Pipeline JSON config");
    CLI::Option* o_seed = run->add_option("--seed", overrides.seed);
    CLI::Option* o_out = run->add_option("--out-dir", overrides.out_dir);
    CLI::Option* o_labeler = run->add_option("--labeler", overrides.labeler);
    CLI::Option* o_weights = run->add_option("--weights", overrides.weights_dir);
    CLI::Option* o_cloud = run->add_option("--cloud", overrides.cloud_path);
    CLI::Option* o_dsm = run->add_option("--dsm", overrides.dsm_path);

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "clean") return run_clean(cloud_path, dsm_path, out_path, radius);
        if (command == "crop")
            return run_crop(cloud_path, cameras_path, out_path, alpha, no_fallback);
        if (command == "voxelize") return run_voxelize(cloud_path, out_path, large_m, small_m);
        if (command == "segment")
            return run_segment(cloud_path, out_path, labeler, weights_dir, seed, baseline);
        if (command == "trees") {
            if (method == "kmeans")
                tree_params.method = PlacementMethod::KMeans;
            else if (method != "poisson")
                throw Error("unknown placement method '" + method + "'");
            return run_trees(cloud_path, table_path, out_path, tree_params);
        }
        if (command == "materials")
            return run_materials(ortho_path, mask_path, out_path, patch_params);
        if (command == "mesh") return run_mesh(mesh_path, cloud_path, out_path, mesh_radius);
        if (command == "path")
            return run_path(map_path, start, goal, out_path, nav_weights, nav_cell, nav_lookup,
                            render_path);
        if (command == "eval") return run_eval(cloud_path, dsm_path);
        if (command == "synth") {
            scene_spec.extent_y = scene_spec.extent_x;
            return run_synth(scene_spec, out_path);
        }
        if (command == "run") {
            std::vector<std::string> overridden;
            if (*o_seed) overridden.push_back("seed");
            if (*o_out) overridden.push_back("out_dir");
            if (*o_labeler) overridden.push_back("labeler");
            if (*o_weights) overridden.push_back("weights_dir");
            if (*o_cloud) overridden.push_back("cloud");
            if (*o_dsm) overridden.push_back("dsm");
            return run_run(config_path, overrides, overridden);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << command << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
