// Pipeline suite: synthetic scene generator, evaluation reporting, config
// loading, and the end-to-end orchestrator.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "terraseg/eval.hpp"
#include "terraseg/obj_io.hpp"
#include "terraseg/pipeline.hpp"
#include "terraseg/ply_io.hpp"
#include "terraseg/preprocess.hpp"
#include "terraseg/raster_io.hpp"
#include "terraseg/synth.hpp"
#include "terraseg/types.hpp"

#include "test_util.hpp"

using namespace terraseg;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("terraseg_pipe_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Writes every generator output to disk and returns a ready config.
PipelineConfig write_scene(const SynthScene& scene, const std::string& dir) {
    PipelineConfig config;
    config.cloud_path = dir + "/cloud.ply";
    config.dsm_path = dir + "/dsm.ply";
    config.cameras_path = dir + "/cameras.json";
    config.ortho_path = dir + "/ortho.png";
    config.train_mask_path = dir + "/mask.png";
    config.mesh_path = dir + "/mesh.obj";
    config.tree_table_path = dir + "/trees.csv";
    config.out_dir = dir + "/out";
    write_point_cloud(scene.cloud, config.cloud_path, PlyFormat::BinaryLittleEndian);
    write_point_cloud(scene.dsm, config.dsm_path, PlyFormat::BinaryLittleEndian);
    write_cameras(config.cameras_path, scene.cameras);
    write_raster(scene.ortho, config.ortho_path);
    write_mask(scene.material_mask, config.train_mask_path);
    write_mesh(scene.mesh, config.mesh_path);
    write_default_tree_table(config.tree_table_path);
    return config;
}

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic scenes

TEST_CASE("scene with no objects is pure labeled ground") {
    SceneSpec spec;
    spec.extent_x = spec.extent_y = 20.0;
    spec.boxes = 0;
    spec.trees = 0;
    spec.roads = 0;
    spec.underground = 0;
    const SynthScene scene = synth_scene(spec);
    REQUIRE(scene.cloud.has_labels());
    REQUIRE_FALSE(scene.cloud.empty());
    for (TerrainClass c : *scene.cloud.labels) CHECK(c == TerrainClass::Ground);
    CHECK(scene.class_counts[0] == scene.cloud.size());
    CHECK(scene.class_counts[1] == 0);
    CHECK(scene.class_counts[2] == 0);
}

TEST_CASE("class counts book-keep the emitted surface points") {
    SceneSpec spec;
    spec.extent_x = spec.extent_y = 30.0;
    spec.boxes = 1;
    spec.trees = 3;
    spec.roads = 1;
    spec.underground = 25;
    const SynthScene scene = synth_scene(spec);
    REQUIRE(scene.underground.size() == scene.cloud.size());

    std::array<std::size_t, 3> seen{};
    std::size_t noise = 0;
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        if (scene.underground[i]) {
            ++noise;
            continue;
        }
        ++seen[std::size_t(int((*scene.cloud.labels)[i]))];
    }
    CHECK(noise == 25);
    CHECK(seen == scene.class_counts);
    CHECK(scene.class_counts[2] > 0);  // the tree canopies emitted points

    const SynthScene again = synth_scene(spec);
    REQUIRE(again.cloud.size() == scene.cloud.size());
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        CHECK(again.cloud.points[i].x == scene.cloud.points[i].x);
        CHECK(again.cloud.points[i].z == scene.cloud.points[i].z);
    }
}

TEST_CASE("injected noise satisfies the removal predicate against the dsm") {
    SceneSpec spec;
    spec.extent_x = spec.extent_y = 25.0;
    spec.underground = 40;
    spec.slope_x = 0.05;
    const SynthScene scene = synth_scene(spec);

    std::size_t flagged = 0;
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        if (!scene.underground[i]) continue;
        ++flagged;
        const Point3& p = scene.cloud.points[i];
        double floor_z = std::numeric_limits<double>::infinity();
        for (const Point3& d : scene.dsm.points) {
            const double dx = d.x - p.x, dy = d.y - p.y;
            if (dx * dx + dy * dy <= 25.0) floor_z = std::min(floor_z, d.z);
        }
        REQUIRE(std::isfinite(floor_z));
        CHECK(p.z < floor_z);
    }
    CHECK(flagged == 40);

    // The cleaning rule therefore removes exactly the flagged points.
    const CleanResult cleaned = remove_underground(scene.cloud, scene.dsm);
    CHECK(cleaned.removed_count == flagged);
    REQUIRE(cleaned.kept.size() == scene.cloud.size() - flagged);
    std::set<std::tuple<double, double, double>> noise;
    for (std::size_t i = 0; i < scene.cloud.size(); ++i)
        if (scene.underground[i]) {
            const Point3& p = scene.cloud.points[i];
            noise.emplace(p.x, p.y, p.z);
        }
    for (const Point3& p : cleaned.kept.points)
        CHECK(noise.count({p.x, p.y, p.z}) == 0);
}

// ---------------------------------------------------------------------------
// Evaluation

TEST_CASE("evaluate scores identity predictions perfectly") {
    std::vector<TerrainClass> truth = {TerrainClass::Ground, TerrainClass::ManMade,
                                       TerrainClass::Vegetation, TerrainClass::Ground};
    const EvalReport report = evaluate(truth, truth);
    CHECK(report.total == 4);
    CHECK(report.correct == 4);
    for (double r : report.recall) CHECK(r == doctest::Approx(1.0));
    CHECK(report.confusion[0][0] == 2);
    CHECK(report.confusion[1][1] == 1);
    CHECK(report.confusion[2][2] == 1);
}

TEST_CASE("evaluate hand-counted ten point confusion") {
    using TC = TerrainClass;
    const std::vector<TC> truth = {TC::Ground, TC::Ground, TC::Ground, TC::Ground, TC::Ground,
                                   TC::ManMade, TC::ManMade, TC::ManMade,
                                   TC::Vegetation, TC::Vegetation};
    std::vector<TC> pred = truth;
    pred[0] = TC::ManMade;  // two Ground points drift to ManMade
    pred[1] = TC::ManMade;
    const EvalReport report = evaluate(pred, truth);
    CHECK(report.total == 10);
    CHECK(report.correct == 8);
    CHECK(report.recall[0] == doctest::Approx(0.6));
    CHECK(report.recall[1] == doctest::Approx(1.0));
    CHECK(report.recall[2] == doctest::Approx(1.0));
    CHECK(report.confusion[0][1] == 2);

    // Row sums conserve the truth counts.
    std::array<std::size_t, 3> rows{};
    for (int t = 0; t < 3; ++t)
        for (int p = 0; p < 3; ++p) rows[std::size_t(t)] += report.confusion[t][p];
    CHECK(rows[0] == 5);
    CHECK(rows[1] == 3);
    CHECK(rows[2] == 2);

    CHECK_THROWS_AS(evaluate(pred, std::vector<TC>{TC::Ground}), Error);
}

TEST_CASE("rendered report carries the three accuracy rows") {
    std::vector<TerrainClass> truth(12, TerrainClass::Ground);
    truth[5] = TerrainClass::ManMade;
    truth[6] = TerrainClass::Vegetation;
    const std::string text = render_report(evaluate(truth, truth));
    CHECK(text.find("Ground segmentation accuracy") != std::string::npos);
    CHECK(text.find("Manmade structure segmentation accuracy") != std::string::npos);
    CHECK(text.find("Vegetation segmentation accuracy") != std::string::npos);
    CHECK(text.find("100.0%") != std::string::npos);
}

TEST_CASE("absent truth classes score a vacuous perfect recall") {
    const std::vector<TerrainClass> truth(5, TerrainClass::Vegetation);
    const EvalReport report = evaluate(truth, truth);
    CHECK(report.recall[0] == doctest::Approx(1.0));
    CHECK(report.recall[1] == doctest::Approx(1.0));
    CHECK(report.recall[2] == doctest::Approx(1.0));
}

// ---------------------------------------------------------------------------
// Configuration

TEST_CASE("pipeline config json round trips every section") {
    const std::string dir = temp_dir("config");
    const std::string path = dir + "/config.json";
    {
        nlohmann::json j;
        j["seed"] = 7;
        j["out_dir"] = dir + "/out";
        j["inputs"] = {{"cloud", "c.ply"},     {"dsm", "d.ply"},    {"cameras", "cam.json"},
                       {"ortho", "o.png"},     {"mesh", "m.obj"},   {"tree_table", "t.csv"},
                       {"train_mask", "k.png"}};
        j["clean"] = {{"cylinder_radius_m", 4.0}};
        j["aoi"] = {{"alpha_m", 25.0}, {"convex_fallback", false}};
        j["voxel"] = {{"large_m", 20.0}, {"small_m", 0.25}};
        j["segment"] = {{"labeler", "unet"},
                        {"weights_dir", "w"},
                        {"ground_height_m", 0.4},
                        {"planar_rms_m", 0.2}};
        j["trees"] = {{"zone", 9},
                      {"link_radius_m", 1.5},
                      {"max_edge_m", 2.5},
                      {"method", "kmeans"}};
        j["materials"] = {{"patch_m", 6.0}, {"stride_m", 2.0}};
        j["mesh"] = {{"match_radius_m", 0.75}};
        j["path"] = {{"enabled", true},
                     {"start", {1.0, 2.0}},
                     {"goal", {3.0, 4.0}},
                     {"road_weight", 0.3},
                     {"cell_m", 0.5},
                     {"lookup_m", 2.0}};
        std::ofstream out(path);
        out << j.dump(2);
    }
    const PipelineConfig config = load_pipeline_config(path);
    CHECK(config.seed == 7);
    CHECK(config.cloud_path == "c.ply");
    CHECK(config.dsm_path == "d.ply");
    CHECK(config.cameras_path == "cam.json");
    CHECK(config.ortho_path == "o.png");
    CHECK(config.mesh_path == "m.obj");
    CHECK(config.tree_table_path == "t.csv");
    CHECK(config.train_mask_path == "k.png");
    CHECK(config.clean.cylinder_radius == doctest::Approx(4.0));
    CHECK(config.aoi.alpha == doctest::Approx(25.0));
    CHECK_FALSE(config.aoi.fallback_to_convex);
    CHECK(config.voxel.large_w == doctest::Approx(20.0));
    CHECK(config.voxel.small_h == doctest::Approx(0.25));
    CHECK(config.labeler == "unet");
    CHECK(config.weights_dir == "w");
    CHECK(config.baseline.ground_height == doctest::Approx(0.4));
    CHECK(config.baseline.planar_rms == doctest::Approx(0.2));
    CHECK(config.trees.zone == 9);
    CHECK(config.trees.link_radius == doctest::Approx(1.5));
    CHECK(config.trees.max_edge == doctest::Approx(2.5));
    CHECK(config.trees.method == PlacementMethod::KMeans);
    CHECK(config.patches.patch_m == doctest::Approx(6.0));
    CHECK(config.patches.stride_m == doctest::Approx(2.0));
    CHECK(config.mesh_seg.match_radius == doctest::Approx(0.75));
    CHECK(config.path_enabled);
    CHECK(config.path_start[0] == doctest::Approx(1.0));
    CHECK(config.path_goal[1] == doctest::Approx(4.0));
    CHECK(config.nav_weights.road == doctest::Approx(0.3));
    CHECK(config.nav_cell == doctest::Approx(0.5));
    CHECK(config.nav_lookup == doctest::Approx(2.0));

    // Defaults survive when sections are absent.
    const std::string bare = dir + "/bare.json";
    {
        std::ofstream out(bare);
        out << "{\"inputs\": {\"cloud\": \"c.ply\", \"dsm\": \"d.ply\"}}";
    }
    const PipelineConfig defaults = load_pipeline_config(bare);
    CHECK(defaults.seed == 42);
    CHECK(defaults.clean.cylinder_radius == doctest::Approx(5.0));
    CHECK(defaults.voxel.large_w == doctest::Approx(40.0));
    CHECK(defaults.labeler == "baseline");
    CHECK(defaults.nav_weights.road == doctest::Approx(0.2));
    CHECK_FALSE(defaults.path_enabled);
}

// ---------------------------------------------------------------------------
// Orchestration

TEST_CASE("missing dsm aborts in the clean stage naming the path") {
    const std::string dir = temp_dir("missing");
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const std::string cloud_path = dir + "/cloud.ply";
    write_point_cloud(cloud, cloud_path, PlyFormat::Ascii);

    PipelineConfig config;
    config.cloud_path = cloud_path;
    config.dsm_path = dir + "/nope.ply";
    config.out_dir = dir + "/out";
    try {
        run_pipeline(config);
        FAIL("expected the pipeline to abort");
    } catch (const Error& e) {
        const std::string what = e.what();
        CHECK(what.find("clean") != std::string::npos);
        CHECK(what.find("nope.ply") != std::string::npos);
    }
}

TEST_CASE("full synthetic run produces every artifact deterministically") {
    SceneSpec spec;
    spec.extent_x = spec.extent_y = 40.0;
    spec.boxes = 1;
    spec.trees = 4;
    spec.roads = 1;
    spec.underground = 30;
    const SynthScene scene = synth_scene(spec);

    const std::string dir = temp_dir("full");
    PipelineConfig config = write_scene(scene, dir);
    config.path_enabled = true;
    config.path_start[0] = config.path_start[1] = 4.0;
    config.path_goal[0] = config.path_goal[1] = 36.0;

    const PipelineResult result = run_pipeline(config);

    const char* artifacts[] = {"cleaned_cloud", "labeled_cloud", "report",
                               "trees",         "material_map",  "ground_mesh",
                               "manmade_mesh",  "vegetation_mesh", "path", "manifest"};
    for (const char* name : artifacts) {
        INFO(name);
        REQUIRE(result.artifacts.count(name) == 1);
        CHECK(fs::exists(result.artifacts.at(name)));
    }
    REQUIRE(result.eval_available);
    CHECK(result.eval.recall[0] >= 0.9);
    CHECK(result.eval.recall[1] >= 0.9);
    CHECK(result.eval.recall[2] >= 0.9);
    CHECK(result.stage_ms.size() >= 6);
    CHECK(result.stage_ms.front().first == "clean");

    // The cleaned cloud dropped exactly the injected noise.
    const PointCloud cleaned = read_point_cloud(result.artifacts.at("cleaned_cloud"));
    CHECK(cleaned.size() == scene.cloud.size() - 30);

    // Manifest: versioned schema, parameter echo, one timing per stage.
    const nlohmann::json manifest = nlohmann::json::parse(slurp(result.artifacts.at("manifest")));
    CHECK(manifest.at("schema_version").get<int>() == 1);
    CHECK(manifest.at("seed").get<std::uint64_t>() == config.seed);
    CHECK(manifest.at("stages").size() == result.stage_ms.size());
    for (const auto& stage : manifest.at("stages")) {
        CHECK(stage.contains("name"));
        CHECK(stage.at("ms").get<double>() >= 0.0);
    }
    CHECK(manifest.at("parameters").at("clean").at("cylinder_radius_m").get<double>() ==
          doctest::Approx(5.0));
    // The manifest lists every artifact except itself.
    CHECK(manifest.at("artifacts").size() == result.artifacts.size() - 1);
    CHECK_FALSE(manifest.at("artifacts").contains("manifest"));

    // Submeshes parse and the vegetation mesh is flattened to the ground.
    const TriMesh veg = read_mesh(result.artifacts.at("vegetation_mesh"));
    for (const Point3& v : veg.vertices)
        CHECK(std::abs(v.z - scene.ground_z(v.x, v.y)) <= 0.6);

    // Re-running the identical config reproduces the labeled artifacts.
    const std::string labeled_a = slurp(result.artifacts.at("labeled_cloud"));
    const std::string trees_a = slurp(result.artifacts.at("trees"));
    const std::string map_a = slurp(result.artifacts.at("material_map"));
    const PipelineResult rerun = run_pipeline(config);
    CHECK(slurp(rerun.artifacts.at("labeled_cloud")) == labeled_a);
    CHECK(slurp(rerun.artifacts.at("trees")) == trees_a);
    CHECK(slurp(rerun.artifacts.at("material_map")) == map_a);
}

TEST_CASE("import labeler replays truth labels through the pipeline") {
    SceneSpec spec;
    spec.extent_x = spec.extent_y = 25.0;
    spec.boxes = 1;
    spec.trees = 2;
    spec.roads = 0;
    spec.underground = 0;
    const SynthScene scene = synth_scene(spec);

    const std::string dir = temp_dir("import");
    PipelineConfig config = write_scene(scene, dir);
    config.labeler = "import";
    config.ortho_path.clear();  // skip materials to keep the run lean
    config.mesh_path.clear();

    const PipelineResult result = run_pipeline(config);
    REQUIRE(result.eval_available);
    // Voxel-majority replay of the truth stays near-perfect on every class.
    CHECK(result.eval.recall[0] >= 0.99);
    CHECK(result.eval.recall[1] >= 0.95);
    CHECK(result.eval.recall[2] >= 0.95);
    CHECK(result.artifacts.count("material_map") == 0);
    CHECK(result.artifacts.count("ground_mesh") == 0);
}

TEST_CASE("unet labeler with seeded random weights runs end to end") {
    SceneSpec spec;
    spec.extent_x = spec.extent_y = 16.0;
    spec.boxes = 0;
    spec.trees = 1;
    spec.roads = 0;
    spec.underground = 0;
    spec.ground_spacing = 0.5;
    const SynthScene scene = synth_scene(spec);

    const std::string dir = temp_dir("unet");
    PipelineConfig config = write_scene(scene, dir);
    config.labeler = "unet";
    config.ortho_path.clear();
    config.mesh_path.clear();
    config.cameras_path.clear();
    config.voxel.large_w = config.voxel.large_d = config.voxel.large_h = 16.0;
    config.voxel.small_w = config.voxel.small_d = config.voxel.small_h = 0.5;

    const PipelineResult a = run_pipeline(config);
    REQUIRE(a.artifacts.count("labeled_cloud") == 1);
    const PointCloud labeled = read_point_cloud(a.artifacts.at("labeled_cloud"));
    REQUIRE(labeled.has_labels());
    CHECK(labeled.size() == scene.cloud.size());

    // Random weights carry no skill, but the run must be deterministic.
    const std::string bytes_a = slurp(a.artifacts.at("labeled_cloud"));
    const PipelineResult b = run_pipeline(config);
    CHECK(slurp(b.artifacts.at("labeled_cloud")) == bytes_a);
}
