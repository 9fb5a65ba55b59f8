#include "terraseg/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "terraseg/obj_io.hpp"
#include "terraseg/ply_io.hpp"
#include "terraseg/raster_io.hpp"
#include "terraseg/unet.hpp"

namespace terraseg {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw Error("cannot open pipeline config: " + json_path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("bad pipeline config " + json_path + ": " + e.what());
    }
    PipelineConfig c;
    maybe(j, "seed", c.seed);
    maybe(j, "out_dir", c.out_dir);
    if (j.contains("inputs")) {
        const json& in_j = j.at("inputs");
        maybe(in_j, "cloud", c.cloud_path);
        maybe(in_j, "dsm", c.dsm_path);
        maybe(in_j, "cameras", c.cameras_path);
        maybe(in_j, "ortho", c.ortho_path);
        maybe(in_j, "mesh", c.mesh_path);
        maybe(in_j, "tree_table", c.tree_table_path);
        maybe(in_j, "train_mask", c.train_mask_path);
    }
    if (j.contains("clean")) maybe(j.at("clean"), "cylinder_radius_m", c.clean.cylinder_radius);
    if (j.contains("aoi")) {
        maybe(j.at("aoi"), "alpha_m", c.aoi.alpha);
        maybe(j.at("aoi"), "convex_fallback", c.aoi.fallback_to_convex);
    }
    if (j.contains("voxel")) {
        double large = c.voxel.large_w, small = c.voxel.small_w;
        maybe(j.at("voxel"), "large_m", large);
        maybe(j.at("voxel"), "small_m", small);
        c.voxel.large_w = c.voxel.large_d = c.voxel.large_h = large;
        c.voxel.small_w = c.voxel.small_d = c.voxel.small_h = small;
    }
    if (j.contains("segment")) {
        const json& s = j.at("segment");
        maybe(s, "labeler", c.labeler);
        maybe(s, "weights_dir", c.weights_dir);
        maybe(s, "ground_height_m", c.baseline.ground_height);
        maybe(s, "planar_rms_m", c.baseline.planar_rms);
    }
    if (j.contains("trees")) {
        const json& t = j.at("trees");
        maybe(t, "zone", c.trees.zone);
        maybe(t, "link_radius_m", c.trees.link_radius);
        maybe(t, "max_edge_m", c.trees.max_edge);
        std::string method = c.trees.method == PlacementMethod::KMeans ? "kmeans" : "poisson";
        maybe(t, "method", method);
        if (method == "poisson")
            c.trees.method = PlacementMethod::Poisson;
        else if (method == "kmeans")
            c.trees.method = PlacementMethod::KMeans;
        else
            throw Error("bad pipeline config: trees.method must be poisson or kmeans");
    }
    if (j.contains("materials")) {
        maybe(j.at("materials"), "patch_m", c.patches.patch_m);
        maybe(j.at("materials"), "stride_m", c.patches.stride_m);
    }
    if (j.contains("mesh")) maybe(j.at("mesh"), "match_radius_m", c.mesh_seg.match_radius);
    if (j.contains("path")) {
        const json& p = j.at("path");
        maybe(p, "enabled", c.path_enabled);
        if (p.contains("start")) {
            c.path_start[0] = p.at("start").at(0).get<double>();
            c.path_start[1] = p.at("start").at(1).get<double>();
        }
        if (p.contains("goal")) {
            c.path_goal[0] = p.at("goal").at(0).get<double>();
            c.path_goal[1] = p.at("goal").at(1).get<double>();
        }
        maybe(p, "road_weight", c.nav_weights.road);
        maybe(p, "bare_soil_weight", c.nav_weights.bare_soil);
        maybe(p, "vegetation_weight", c.nav_weights.vegetation);
        maybe(p, "cell_m", c.nav_cell);
        maybe(p, "lookup_m", c.nav_lookup);
    }
    return c;
}

namespace {

json config_echo(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["inputs"] = {{"cloud", c.cloud_path},   {"dsm", c.dsm_path},
                   {"cameras", c.cameras_path}, {"ortho", c.ortho_path},
                   {"mesh", c.mesh_path},     {"tree_table", c.tree_table_path},
                   {"train_mask", c.train_mask_path}};
    j["clean"] = {{"cylinder_radius_m", c.clean.cylinder_radius}};
    j["aoi"] = {{"alpha_m", c.aoi.alpha}, {"convex_fallback", c.aoi.fallback_to_convex}};
    j["voxel"] = {{"large_m", c.voxel.large_w}, {"small_m", c.voxel.small_w}};
    j["segment"] = {{"labeler", c.labeler},
                    {"weights_dir", c.weights_dir},
                    {"ground_height_m", c.baseline.ground_height},
                    {"planar_rms_m", c.baseline.planar_rms}};
    j["trees"] = {{"zone", c.trees.zone},
                  {"method", c.trees.method == PlacementMethod::KMeans ? "kmeans" : "poisson"},
                  {"link_radius_m", c.trees.link_radius},
                  {"max_edge_m", c.trees.max_edge}};
    j["materials"] = {{"patch_m", c.patches.patch_m}, {"stride_m", c.patches.stride_m}};
    j["mesh"] = {{"match_radius_m", c.mesh_seg.match_radius}};
    j["path"] = {{"enabled", c.path_enabled},
                 {"start", {c.path_start[0], c.path_start[1]}},
                 {"goal", {c.path_goal[0], c.path_goal[1]}},
                 {"road_weight", c.nav_weights.road},
                 {"bare_soil_weight", c.nav_weights.bare_soil},
                 {"vegetation_weight", c.nav_weights.vegetation},
                 {"cell_m", c.nav_cell},
                 {"lookup_m", c.nav_lookup}};
    return j;
}

class StageClock {
public:
    explicit StageClock(PipelineResult& result) : result_(result) {}

    template <typename F>
    void run(const std::string& name, F&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const std::exception& e) {
            throw Error(name + ": " + e.what());
        }
        const auto t1 = std::chrono::steady_clock::now();
        result_.stage_ms.emplace_back(name, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

private:
    PipelineResult& result_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    if (config.cloud_path.empty()) throw Error("run_pipeline: no input cloud configured");
    if (config.dsm_path.empty()) throw Error("run_pipeline: no input DSM configured");
    fs::create_directories(config.out_dir);
    auto out_path = [&](const char* name) { return (fs::path(config.out_dir) / name).string(); };

    PipelineResult result;
    StageClock clock(result);
    PointCloud working;

    clock.run("clean", [&] {
        const PointCloud raw = read_point_cloud(config.cloud_path);
        const PointCloud dsm = read_point_cloud(config.dsm_path);
        CleanResult cleaned = remove_underground(raw, dsm, config.clean);
        working = std::move(cleaned.kept);
        write_point_cloud(working, out_path("cleaned.ply"), PlyFormat::BinaryLittleEndian);
        result.artifacts["cleaned_cloud"] = out_path("cleaned.ply");
    });

    if (!config.cameras_path.empty())
        clock.run("crop", [&] {
            const CameraPoseSet cameras = read_cameras(config.cameras_path);
            const Polygon2 aoi = compute_aoi(cameras, config.aoi);
            working = crop_to_aoi(working, aoi);
            if (working.empty()) throw Error("no points inside the AOI");
        });

    // Truth labels (if the input carried them) ride along for evaluation.
    std::optional<std::vector<TerrainClass>> truth = working.labels;

    PointCloud labeled;
    clock.run("segment", [&] {
        std::unique_ptr<VoxelLabeler> labeler;
        GroundElevationModel ground_estimate;
        WeightBundle weights;
        UNetConfig net_config;
        if (config.labeler == "baseline") {
            ground_estimate = estimate_ground_unlabeled(working);
            labeler = std::make_unique<BaselineLabeler>(&ground_estimate, config.baseline);
        } else if (config.labeler == "unet") {
            weights = config.weights_dir.empty() ? random_weight_bundle(net_config, config.seed)
                                                 : load_weight_bundle(config.weights_dir);
            labeler = std::make_unique<UNetLabeler>(std::move(weights), net_config);
        } else if (config.labeler == "import") {
            if (!working.labels) throw Error("import labeler needs a labeled input cloud");
            labeler = std::make_unique<ImportedLabeler>(*working.labels);
        } else {
            throw Error("unknown labeler '" + config.labeler + "'");
        }
        labeled = segment_cloud(working, *labeler, config.voxel);
        write_point_cloud(labeled, out_path("labeled.ply"), PlyFormat::BinaryLittleEndian);
        result.artifacts["labeled_cloud"] = out_path("labeled.ply");
    });

    if (truth)
        clock.run("eval", [&] {
            result.eval = evaluate(*labeled.labels, *truth);
            result.eval_available = true;
            std::ofstream out(out_path("report.txt"), std::ios::binary);
            if (!out) throw Error("cannot write report");
            out << render_report(result.eval);
            result.artifacts["report"] = out_path("report.txt");
        });

    GroundElevationModel ground;
    clock.run("trees", [&] {
        ground = build_ground_model(labeled);
        std::vector<TreeModelAttribute> table;
        if (!config.tree_table_path.empty()) table = read_tree_table(config.tree_table_path);
        TreeParams params = config.trees;
        params.seed = config.seed;
        const std::vector<TreeInstance> trees = extract_trees(labeled, ground, table, params);
        write_tree_instances(out_path("trees.json"), trees);
        result.artifacts["trees"] = out_path("trees.json");
    });

    MaterialVectorMap map;
    bool have_map = false;
    if (!config.ortho_path.empty())
        clock.run("materials", [&] {
            const Raster ortho = read_raster(config.ortho_path);
            if (config.train_mask_path.empty())
                throw Error("materials stage needs a training mask for the baseline classifier");
            const MaskRaster mask = read_mask(config.train_mask_path);
            const PatchDataset dataset = build_patch_dataset(ortho, mask, config.patches);
            const BaselineMaterialModel model = fit_baseline(ortho, dataset);
            const BaselineMaterialClassifier classifier(model);
            map = build_vector_map(ortho, classifier, config.patches);
            write_vector_map(map, out_path("map.csv"));
            result.artifacts["material_map"] = out_path("map.csv");
            have_map = true;
        });

    if (!config.mesh_path.empty())
        clock.run("mesh", [&] {
            const TriMesh mesh = read_mesh(config.mesh_path);
            const SegmentedMesh seg = segment_mesh(mesh, labeled, config.mesh_seg);
            write_mesh(seg.submeshes[std::size_t(TerrainClass::Ground)], out_path("ground.obj"));
            write_mesh(seg.submeshes[std::size_t(TerrainClass::ManMade)], out_path("manmade.obj"));
            const TriMesh& veg = seg.submeshes[std::size_t(TerrainClass::Vegetation)];
            std::vector<std::size_t> all(veg.vertices.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            write_mesh(flatten_trees(veg, all, ground), out_path("vegetation_flattened.obj"));
            result.artifacts["ground_mesh"] = out_path("ground.obj");
            result.artifacts["manmade_mesh"] = out_path("manmade.obj");
            result.artifacts["vegetation_mesh"] = out_path("vegetation_flattened.obj");
        });

    if (config.path_enabled) {
        if (!have_map) throw Error("path: pathfinding needs the materials stage output");
        clock.run("path", [&] {
            double min_x = map.entries.front().x, max_x = min_x;
            double min_y = map.entries.front().y, max_y = min_y;
            for (const auto& e : map.entries) {
                min_x = std::min(min_x, e.x);
                max_x = std::max(max_x, e.x);
                min_y = std::min(min_y, e.y);
                max_y = std::max(max_y, e.y);
            }
            const double pad = map.stride_m;
            const NavGrid grid = build_navgrid(min_x - pad, min_y - pad, max_x + pad, max_y + pad,
                                               map, config.nav_weights, config.nav_cell,
                                               config.nav_lookup);
            const PathResult path = astar(grid, grid.cell_of(config.path_start[0], config.path_start[1]),
                                          grid.cell_of(config.path_goal[0], config.path_goal[1]));
            if (!path.found) throw Error("no route between the endpoints");
            write_path(out_path("path.json"), path);
            render_navgrid(grid, path, out_path("path.pgm"));
            result.artifacts["path"] = out_path("path.json");
        });
    }

    json manifest;
    manifest["schema_version"] = 1;
    manifest["seed"] = config.seed;
    manifest["parameters"] = config_echo(config);
    manifest["stages"] = json::array();
    for (const auto& [name, ms] : result.stage_ms)
        manifest["stages"].push_back({{"name", name}, {"ms", ms}});
    manifest["artifacts"] = json::object();
    for (const auto& [name, path] : result.artifacts) manifest["artifacts"][name] = path;
    std::ofstream mout(out_path("manifest.json"), std::ios::binary);
    if (!mout) throw Error("cannot write manifest");
    mout << manifest.dump(2) << "\n";
    result.artifacts["manifest"] = out_path("manifest.json");
    return result;
}

}  // namespace terraseg
