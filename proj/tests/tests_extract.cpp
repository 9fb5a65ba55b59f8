// Semantic extraction suite: voxel labeling, tree instancing, ground
// materials, mesh segmentation, and navigation grids.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "terraseg/ground_model.hpp"
#include "terraseg/materials.hpp"
#include "terraseg/meshseg.hpp"
#include "terraseg/navigate.hpp"
#include "terraseg/segment.hpp"
#include "terraseg/trees.hpp"
#include "terraseg/types.hpp"
#include "terraseg/voxelize.hpp"

#include "test_util.hpp"

using namespace terraseg;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("terraseg_test_" + name)).string();
}

// Labeled flat grid of Ground points; the usual elevation-model feedstock.
PointCloud ground_plane(double extent, double spacing, double z = 0.0) {
    PointCloud cloud;
    for (double x = 0.0; x <= extent + 1e-9; x += spacing)
        for (double y = 0.0; y <= extent + 1e-9; y += spacing)
            cloud.points.push_back({x, y, z});
    cloud.labels = std::vector<TerrainClass>(cloud.points.size(), TerrainClass::Ground);
    return cloud;
}

GroundElevationModel flat_ground(double extent, double z = 0.0) {
    return build_ground_model(ground_plane(extent, 1.0, z));
}

void append(PointCloud& cloud, const Point3& p, TerrainClass c) {
    cloud.points.push_back(p);
    cloud.labels->push_back(c);
}

// 5x5 m box footprint at [x0,x0+5] x [y0,y0+5], walls and a flat roof.
void append_box(PointCloud& cloud, double x0, double y0, double roof_z) {
    const double spacing = 0.25;
    for (double x = x0; x <= x0 + 5.0 + 1e-9; x += spacing)
        for (double y = y0; y <= y0 + 5.0 + 1e-9; y += spacing)
            append(cloud, {x, y, roof_z}, TerrainClass::ManMade);
    for (double t = 0.0; t <= 5.0 + 1e-9; t += spacing)
        for (double z = spacing; z < roof_z - 1e-9; z += spacing) {
            append(cloud, {x0 + t, y0, z}, TerrainClass::ManMade);
            append(cloud, {x0 + t, y0 + 5.0, z}, TerrainClass::ManMade);
            append(cloud, {x0, y0 + t, z}, TerrainClass::ManMade);
            append(cloud, {x0 + 5.0, y0 + t, z}, TerrainClass::ManMade);
        }
}

FootprintMask full_mask(int nx, int ny, double origin_x = 0.0, double origin_y = 0.0) {
    FootprintMask mask;
    mask.origin_x = origin_x;
    mask.origin_y = origin_y;
    mask.nx = nx;
    mask.ny = ny;
    mask.cells.assign(std::size_t(nx) * ny, 1);
    return mask;
}

// Flat-shaded texture patches with class-specific color and noise level.
Raster textured_ortho(int px, double res) {
    Raster ortho;
    ortho.width = px;
    ortho.height = px;
    ortho.resolution = res;
    ortho.pixels.assign(std::size_t(px) * px * 3, 0);
    std::mt19937_64 rng(99);
    auto noisy = [&](double base, double amp) {
        const double v = base + amp * (2.0 * testutil::unit(rng) - 1.0);
        return std::uint8_t(std::clamp(v, 0.0, 255.0));
    };
    for (int row = 0; row < px; ++row)
        for (int col = 0; col < px; ++col) {
            std::uint8_t* p = ortho.at(row, col);
            if (col < px / 3) {  // bare soil: mid gray-brown, small noise
                p[0] = noisy(150, 12);
                p[1] = noisy(120, 12);
                p[2] = noisy(90, 12);
            } else if (col < 2 * px / 3) {  // road: dark, nearly flat
                p[0] = noisy(45, 4);
                p[1] = noisy(45, 4);
                p[2] = noisy(50, 4);
            } else {  // vegetation: green, high variance
                p[0] = noisy(40, 35);
                p[1] = noisy(150, 60);
                p[2] = noisy(45, 35);
            }
        }
    return ortho;
}

MaskRaster thirds_mask(const Raster& ortho) {
    MaskRaster mask;
    mask.width = ortho.width;
    mask.height = ortho.height;
    mask.resolution = ortho.resolution;
    mask.origin_x = ortho.origin_x;
    mask.origin_y = ortho.origin_y;
    mask.codes.assign(std::size_t(mask.width) * mask.height, 0);
    for (int row = 0; row < mask.height; ++row)
        for (int col = 0; col < mask.width; ++col)
            mask.codes[std::size_t(row) * mask.width + col] =
                col < mask.width / 3 ? 0 : (col < 2 * mask.width / 3 ? 1 : 2);
    return mask;
}

TriMesh plane_mesh(int n, double spacing, double z = 0.0) {
    TriMesh mesh;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) mesh.vertices.push_back({i * spacing, j * spacing, z});
    const auto vid = [&](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            mesh.faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    return mesh;
}

TriMesh box_mesh(double x0, double y0, double z0, double s) {
    TriMesh mesh;
    for (int c = 0; c < 8; ++c)
        mesh.vertices.push_back(
            {x0 + ((c & 1) ? s : 0.0), y0 + ((c & 2) ? s : 0.0), z0 + ((c & 4) ? s : 0.0)});
    const int quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 2, 6, 4},
                             {1, 5, 7, 3}, {0, 4, 5, 1}, {2, 3, 7, 6}};
    for (const auto& q : quads) {
        mesh.faces.push_back({q[0], q[1], q[2]});
        mesh.faces.push_back({q[0], q[2], q[3]});
    }
    return mesh;
}

// Canonical face key by vertex coordinates, robust to re-indexing.
std::set<std::array<double, 9>> face_keys(const TriMesh& mesh) {
    std::set<std::array<double, 9>> keys;
    for (const auto& f : mesh.faces) {
        std::array<std::array<double, 3>, 3> vs;
        for (int k = 0; k < 3; ++k) {
            const Point3& v = mesh.vertices[std::size_t(f[k])];
            vs[std::size_t(k)] = {v.x, v.y, v.z};
        }
        std::sort(vs.begin(), vs.end());
        std::array<double, 9> key{};
        for (int k = 0; k < 3; ++k)
            for (int d = 0; d < 3; ++d) key[std::size_t(3 * k + d)] = vs[std::size_t(k)][std::size_t(d)];
        keys.insert(key);
    }
    return keys;
}

}  // namespace

// ---------------------------------------------------------------------------
// Baseline voxel labeling

TEST_CASE("baseline labels a flat plane scene all ground") {
    PointCloud cloud = ground_plane(20.0, 0.25);
    const GroundElevationModel ground = flat_ground(20.0);
    const PointCloud out = segment_cloud(cloud, BaselineLabeler(&ground));
    REQUIRE(out.has_labels());
    REQUIRE(out.labels->size() == cloud.size());
    for (TerrainClass c : *out.labels) CHECK(c == TerrainClass::Ground);
}

TEST_CASE("baseline labels box roof and walls man-made") {
    PointCloud cloud = ground_plane(30.0, 0.25);
    const std::size_t plane_points = cloud.size();
    append_box(cloud, 10.0, 10.0, 4.0);
    const GroundElevationModel ground = flat_ground(30.0);
    const PointCloud out = segment_cloud(cloud, BaselineLabeler(&ground));

    std::size_t checked_roof = 0, checked_wall = 0;
    for (std::size_t i = plane_points; i < out.size(); ++i) {
        const Point3& p = out.points[i];
        const TerrainClass got = (*out.labels)[i];
        const bool roof_interior = p.z == 4.0 && p.x >= 11.0 && p.x <= 14.0 && p.y >= 11.0 &&
                                   p.y <= 14.0;
        // Cells whose 3x3x3 neighborhood straddles two planes (wall-roof and
        // wall-wall dihedrals) are not planar, so the claim holds only below
        // z = 3 and at least 1 m from the corners.
        const bool on_x_wall = p.y == 10.0 || p.y == 15.0;
        const bool clear_of_corners =
            on_x_wall ? (p.x >= 11.0 && p.x <= 14.0) : (p.y >= 11.0 && p.y <= 14.0);
        const bool wall_middle = p.z >= 1.0 && p.z <= 3.0 && clear_of_corners;
        if (roof_interior) {
            CHECK(got == TerrainClass::ManMade);
            ++checked_roof;
        } else if (wall_middle) {
            CHECK(got == TerrainClass::ManMade);
            ++checked_wall;
        }
    }
    CHECK(checked_roof > 100);
    CHECK(checked_wall > 100);
    for (std::size_t i = 0; i < plane_points; ++i)
        CHECK((*out.labels)[i] == TerrainClass::Ground);
}

TEST_CASE("baseline labels an elevated blob vegetation") {
    PointCloud cloud = ground_plane(20.0, 0.25);
    const std::size_t plane_points = cloud.size();
    std::mt19937_64 rng(7);
    // Solid ellipsoid of scatter well above the ground rule threshold.
    while (cloud.size() < plane_points + 3000) {
        const double dx = 2.0 * (2.0 * testutil::unit(rng) - 1.0);
        const double dy = 2.0 * (2.0 * testutil::unit(rng) - 1.0);
        const double dz = 1.5 * (2.0 * testutil::unit(rng) - 1.0);
        if (dx * dx / 4.0 + dy * dy / 4.0 + dz * dz / 2.25 > 1.0) continue;
        append(cloud, {10.0 + dx, 10.0 + dy, 5.0 + dz}, TerrainClass::Vegetation);
    }
    const GroundElevationModel ground = flat_ground(20.0);
    const PointCloud out = segment_cloud(cloud, BaselineLabeler(&ground));

    std::size_t veg = 0, ground_hits = 0;
    for (std::size_t i = plane_points; i < out.size(); ++i) {
        if ((*out.labels)[i] == TerrainClass::Vegetation) ++veg;
        if ((*out.labels)[i] == TerrainClass::Ground) ++ground_hits;
    }
    CHECK(double(veg) >= 0.9 * 3000.0);
    CHECK(ground_hits == 0);
}

TEST_CASE("segment_cloud pass-through recovers voxel majority labels") {
    std::mt19937_64 rng(11);
    PointCloud cloud = testutil::random_cloud(5000, 30.0, 17);
    std::vector<TerrainClass> truth(cloud.size());
    for (auto& c : truth) c = TerrainClass(testutil::upto(rng, 3));

    const PointCloud out = segment_cloud(cloud, ImportedLabeler(truth));
    REQUIRE(out.labels.has_value());

    // Independent majority per occupied cell from the voxel memberships.
    const std::vector<VoxelBlock> blocks = voxelize(cloud);
    std::vector<TerrainClass> expect(cloud.size(), TerrainClass::Ground);
    for (const VoxelBlock& block : blocks) {
        std::map<std::size_t, std::array<int, 3>> votes;
        for (const auto& m : block.members) {
            auto& v = votes.try_emplace(m.cell).first->second;
            ++v[std::size_t(int(truth[m.point]))];
        }
        for (const auto& m : block.members) {
            const auto& v = votes.at(m.cell);
            int best = 0;
            for (int c = 1; c < 3; ++c)
                if (v[std::size_t(c)] > v[std::size_t(best)]) best = c;
            expect[m.point] = TerrainClass(best);
        }
    }
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK((*out.labels)[i] == expect[i]);
}

TEST_CASE("segment_cloud labels every point and repeats identically") {
    PointCloud cloud = testutil::random_cloud(4000, 25.0, 5);
    const GroundElevationModel ground = flat_ground(25.0, -10.0);
    const PointCloud a = segment_cloud(cloud, BaselineLabeler(&ground));
    const PointCloud b = segment_cloud(cloud, BaselineLabeler(&ground));
    REQUIRE(a.labels->size() == cloud.size());
    CHECK(*a.labels == *b.labels);
}

TEST_CASE("unlabeled ground estimate opens away a building-sized bump") {
    PointCloud cloud = ground_plane(30.0, 0.5);
    append_box(cloud, 12.0, 12.0, 5.0);
    cloud.labels.reset();
    const GroundElevationModel est = estimate_ground_unlabeled(cloud);
    // Box center: the 5 m bump is narrower than twice the opening radius.
    CHECK(std::abs(est.elevation_at(14.5, 14.5)) <= 0.1);
    CHECK(std::abs(est.elevation_at(5.0, 5.0)) <= 0.1);
}

TEST_CASE("unlabeled ground estimate follows a linear slope") {
    PointCloud cloud;
    for (double x = 0.0; x <= 30.0 + 1e-9; x += 0.5)
        for (double y = 0.0; y <= 30.0 + 1e-9; y += 0.5)
            cloud.points.push_back({x, y, 0.05 * x});
    const GroundElevationModel est = estimate_ground_unlabeled(cloud);
    for (double x = 12.0; x <= 18.0; x += 1.5)
        CHECK(std::abs(est.elevation_at(x, 15.0) - 0.05 * x) <= 0.1);
}

// ---------------------------------------------------------------------------
// Tree clustering and placement

TEST_CASE("connected components split blobs and join chains") {
    std::vector<Point3> two_blobs;
    for (int i = 0; i < 5; ++i) {
        two_blobs.push_back({0.1 * i, 0.0, 3.0});
        two_blobs.push_back({10.0 + 0.1 * i, 0.0, 3.0});
    }
    const auto clusters = connected_components(two_blobs, 1.0);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].members.size() == 5);
    CHECK(clusters[1].members.size() == 5);

    std::vector<Point3> chain;
    for (int i = 0; i < 12; ++i) chain.push_back({0.9 * i, 0.0, 3.0});
    CHECK(connected_components(chain, 1.0).size() == 1);

    const auto single = connected_components({{1.0, 2.0, 3.0}}, 1.0);
    REQUIRE(single.size() == 1);
    CHECK(single[0].members.size() == 1);
}

TEST_CASE("connected components match a union-find oracle") {
    std::mt19937_64 rng(23);
    std::vector<Point3> pts;
    for (int i = 0; i < 200; ++i)
        pts.push_back({testutil::range(rng, 0.0, 15.0), testutil::range(rng, 0.0, 15.0),
                       testutil::range(rng, 2.0, 6.0)});
    const double d = 1.0;

    std::vector<std::size_t> parent(pts.size());
    std::iota(parent.begin(), parent.end(), std::size_t(0));
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        return parent[a] == a ? a : parent[a] = find(parent[a]);
    };
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y,
                         dz = pts[i].z - pts[j].z;
            if (dx * dx + dy * dy + dz * dz <= d * d) parent[find(i)] = find(j);
        }
    std::map<std::size_t, std::set<std::size_t>> oracle;
    for (std::size_t i = 0; i < pts.size(); ++i) oracle[find(i)].insert(i);

    const auto clusters = connected_components(pts, d);
    REQUIRE(clusters.size() == oracle.size());
    std::set<std::set<std::size_t>> got, want;
    for (const auto& c : clusters) got.emplace(c.members.begin(), c.members.end());
    for (const auto& [root, members] : oracle) want.insert(members);
    CHECK(got == want);
    for (std::size_t i = 1; i < clusters.size(); ++i)
        CHECK(clusters[i - 1].members.size() >= clusters[i].members.size());
    for (const auto& c : clusters)
        for (std::size_t m : c.members) CHECK(c.footprint.contains(pts[m].x, pts[m].y));
}

TEST_CASE("coverage area of analytic shapes") {
    const std::vector<Point3> tri = {{0, 0, 3}, {3, 0, 3}, {0, 4, 3}};
    const auto ct = connected_components(tri, 6.0);
    REQUIRE(ct.size() == 1);
    CHECK(std::abs(coverage_area(tri, ct[0], 6.0) - 6.0) <= 1e-9);

    std::vector<Point3> grid;
    for (double x = 0.0; x <= 10.0 + 1e-9; x += 0.25)
        for (double y = 0.0; y <= 10.0 + 1e-9; y += 0.25) grid.push_back({x, y, 4.0});
    const auto cg = connected_components(grid, 1.0);
    REQUIRE(cg.size() == 1);
    const double area = coverage_area(grid, cg[0]);
    CHECK(std::abs(area - 100.0) <= 5.0);

    const std::vector<Point3> pair = {{0, 0, 3}, {1, 0, 3}};
    const auto cp = connected_components(pair, 2.0);
    CHECK(coverage_area(pair, cp[0]) == 0.0);
}

TEST_CASE("coverage area is rigid-motion invariant") {
    std::mt19937_64 rng(31);
    std::vector<Point3> blob;
    for (int i = 0; i < 300; ++i)
        blob.push_back({testutil::range(rng, 0.0, 6.0), testutil::range(rng, 0.0, 6.0), 4.0});
    const auto c0 = connected_components(blob, 1.5);
    REQUIRE(c0.size() == 1);
    const double base = coverage_area(blob, c0[0]);
    REQUIRE(base > 1.0);

    const double ca = std::cos(0.7), sa = std::sin(0.7);
    std::vector<Point3> moved;
    for (const Point3& p : blob)
        moved.push_back({ca * p.x - sa * p.y + 13.2, sa * p.x + ca * p.y - 4.7, p.z});
    const auto c1 = connected_components(moved, 1.5);
    REQUIRE(c1.size() == 1);
    CHECK(std::abs(coverage_area(moved, c1[0]) - base) <= 1e-6 * base);
}

TEST_CASE("tree count estimate follows the crown formula") {
    CHECK(estimate_tree_count(100.0, 8.0) == 8);  // crown 4 m, footprint ~12.566
    CHECK(estimate_tree_count(0.0, 5.0) == 1);
    CHECK(estimate_tree_count(50.0, 2.0) == int(std::lround(50.0 / 3.14159265358979)));

    for (double h = 4.0; h <= 30.0; h += 2.0)
        for (double area = 10.0; area <= 400.0; area += 30.0) {
            CHECK(estimate_tree_count(area + 30.0, h) >= estimate_tree_count(area, h));
            if (h + 2.0 <= 30.0)
                CHECK(estimate_tree_count(area, h + 2.0) <= estimate_tree_count(area, h));
        }
}

TEST_CASE("poisson placement respects count, spacing, and the mask") {
    const FootprintMask mask = full_mask(20, 20);  // 10 x 10 m = 100 m^2
    const PoissonPlacement one = poisson_disc_place(mask, 1, 42);
    REQUIRE(one.locations.size() == 1);
    CHECK(mask.contains(one.locations[0].x, one.locations[0].y));

    const PoissonPlacement eight = poisson_disc_place(mask, 8, 42);
    CHECK(eight.locations.size() >= 7);
    CHECK(eight.locations.size() <= 10);
    CHECK(eight.radius > 0.0);
    for (std::size_t i = 0; i < eight.locations.size(); ++i) {
        CHECK(mask.contains(eight.locations[i].x, eight.locations[i].y));
        for (std::size_t j = i + 1; j < eight.locations.size(); ++j) {
            const double dx = eight.locations[i].x - eight.locations[j].x;
            const double dy = eight.locations[i].y - eight.locations[j].y;
            CHECK(std::sqrt(dx * dx + dy * dy) >= eight.radius);
        }
    }

    const PoissonPlacement again = poisson_disc_place(mask, 8, 42);
    REQUIRE(again.locations.size() == eight.locations.size());
    for (std::size_t i = 0; i < eight.locations.size(); ++i) {
        CHECK(again.locations[i].x == eight.locations[i].x);
        CHECK(again.locations[i].y == eight.locations[i].y);
    }

    FootprintMask tiny = full_mask(1, 1, 3.0, 4.0);
    const PoissonPlacement center = poisson_disc_place(tiny, 3, 1);
    REQUIRE(center.locations.size() == 1);
    CHECK(center.locations[0].x == doctest::Approx(3.25));
    CHECK(center.locations[0].y == doctest::Approx(4.25));
}

TEST_CASE("kmeans placement finds blob centers and beats random init") {
    std::vector<Vec2> pts;
    std::mt19937_64 rng(13);
    Vec2 mean_a{0.0, 0.0}, mean_b{0.0, 0.0};
    for (int i = 0; i < 40; ++i) {
        const Vec2 a{testutil::range(rng, 0.0, 2.0), testutil::range(rng, 0.0, 2.0)};
        const Vec2 b{testutil::range(rng, 12.0, 14.0), testutil::range(rng, 12.0, 14.0)};
        pts.push_back(a);
        pts.push_back(b);
        mean_a.x += a.x / 40.0;
        mean_a.y += a.y / 40.0;
        mean_b.x += b.x / 40.0;
        mean_b.y += b.y / 40.0;
    }

    const std::vector<Vec2> k1 = kmeans_place(pts, 1, 42);
    REQUIRE(k1.size() == 1);
    Vec2 centroid{0.0, 0.0};
    for (const Vec2& p : pts) {
        centroid.x += p.x / double(pts.size());
        centroid.y += p.y / double(pts.size());
    }
    CHECK(std::abs(k1[0].x - centroid.x) <= 1e-9);
    CHECK(std::abs(k1[0].y - centroid.y) <= 1e-9);

    const std::vector<Vec2> k2 = kmeans_place(pts, 2, 42);
    REQUIRE(k2.size() == 2);
    for (const Vec2& mean : {mean_a, mean_b}) {
        double best = 1e18;
        for (const Vec2& c : k2) best = std::min(best, std::hypot(c.x - mean.x, c.y - mean.y));
        CHECK(best <= 0.5);
    }

    const auto inertia = [&](const std::vector<Vec2>& centers) {
        double total = 0.0;
        for (const Vec2& p : pts) {
            double best = 1e18;
            for (const Vec2& c : centers)
                best = std::min(best, (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y));
            total += best;
        }
        return total;
    };
    // Reference Lloyd with plain random init, best of 5 restarts.
    double oracle_best = 1e18;
    std::mt19937_64 orng(77);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec2> centers(3);
        for (Vec2& c : centers) c = pts[std::size_t(testutil::upto(orng, int(pts.size())))];
        for (int it = 0; it < 100; ++it) {
            std::vector<Vec2> sums(3, {0.0, 0.0});
            std::vector<int> counts(3, 0);
            for (const Vec2& p : pts) {
                std::size_t best = 0;
                double bd = 1e18;
                for (std::size_t c = 0; c < centers.size(); ++c) {
                    const double d = (p.x - centers[c].x) * (p.x - centers[c].x) +
                                     (p.y - centers[c].y) * (p.y - centers[c].y);
                    if (d < bd) {
                        bd = d;
                        best = c;
                    }
                }
                sums[best].x += p.x;
                sums[best].y += p.y;
                ++counts[best];
            }
            double shift = 0.0;
            for (std::size_t c = 0; c < centers.size(); ++c) {
                if (counts[c] == 0) continue;
                const Vec2 next{sums[c].x / counts[c], sums[c].y / counts[c]};
                shift = std::max(shift, std::hypot(next.x - centers[c].x, next.y - centers[c].y));
                centers[c] = next;
            }
            if (shift < 1e-4) break;
        }
        oracle_best = std::min(oracle_best, inertia(centers));
    }
    CHECK(inertia(kmeans_place(pts, 3, 42)) <= oracle_best + 1e-9);

    CHECK_THROWS_AS(kmeans_place({{0.0, 0.0}}, 2, 1), Error);
}

TEST_CASE("tree features measure height, width, and mean color") {
    std::vector<Point3> pts;
    for (double z = 0.0; z <= 7.0 + 1e-9; z += 0.5) pts.push_back({1.0, 1.0, z});
    VegCluster column;
    for (std::size_t i = 0; i < pts.size(); ++i) column.members.push_back(i);
    const GroundElevationModel ground = flat_ground(10.0);
    const auto tall = extract_tree_features(pts, column, {{1.0, 1.0}}, ground);
    REQUIRE(tall.size() == 1);
    CHECK(tall[0].height == doctest::Approx(7.0));

    std::vector<Point3> spread = {{0.0, 0.0, 3.0, 0, 0, 0}, {3.0, 2.0, 3.0, 100, 200, 50}};
    VegCluster wide;
    wide.members = {0, 1};
    const auto flat = extract_tree_features(spread, wide, {{1.5, 1.0}}, ground);
    REQUIRE(flat.size() == 1);
    CHECK(flat[0].width == doctest::Approx(3.0));
    CHECK(flat[0].color[0] == doctest::Approx(50.0));
    CHECK(flat[0].color[1] == doctest::Approx(100.0));
    CHECK(flat[0].color[2] == doctest::Approx(25.0));
}

TEST_CASE("tree features partition members across locations") {
    std::vector<Point3> pts;
    for (double z = 0.0; z <= 6.0 + 1e-9; z += 0.5) pts.push_back({2.0, 2.0, z});
    for (double z = 0.0; z <= 9.0 + 1e-9; z += 0.5) pts.push_back({8.0, 8.0, z});
    VegCluster both;
    for (std::size_t i = 0; i < pts.size(); ++i) both.members.push_back(i);
    const GroundElevationModel ground = flat_ground(10.0);

    const auto trees = extract_tree_features(pts, both, {{2.0, 2.0}, {8.0, 8.0}}, ground);
    REQUIRE(trees.size() == 2);
    CHECK(trees[0].height == doctest::Approx(6.0));
    CHECK(trees[1].height == doctest::Approx(9.0));

    // A location with no nearest member is dropped.
    const auto pruned = extract_tree_features(pts, both, {{5.0, 5.0}, {100.0, 100.0}}, ground);
    REQUIRE(pruned.size() == 1);
    CHECK(pruned[0].height == doctest::Approx(9.0));
}

TEST_CASE("species match scores height and color inside the zone") {
    TreeInstance tree;
    tree.height = 10.0;
    tree.color[0] = 60.0;
    tree.color[1] = 90.0;
    tree.color[2] = 40.0;
    const std::vector<TreeModelAttribute> table = {
        {1, "a", 9.0, 12.0, {62.0, 88.0, 45.0}, 4, 7, "a.glb"},
        {2, "b", 2.0, 4.0, {10.0, 120.0, 10.0}, 4, 7, "b.glb"},
    };
    CHECK(match_species(tree, table, 5) == 1);

    // Perfect-fit palm excluded by its hardiness zones.
    const std::vector<TreeModelAttribute> with_palm = {
        {1, "palm", 9.0, 12.0, {60.0, 90.0, 40.0}, 9, 11, "palm.glb"},
        {2, "oak", 2.0, 4.0, {10.0, 120.0, 10.0}, 4, 7, "oak.glb"},
    };
    CHECK(match_species(tree, with_palm, 5) == 2);
    // Same table in a compatible zone prefers the palm again.
    CHECK(match_species(tree, with_palm, 10) == 1);

    // No zone-compatible entry: all entries become candidates.
    const std::vector<TreeModelAttribute> far = {
        {3, "c", 9.0, 12.0, {62.0, 88.0, 45.0}, 1, 2, "c.glb"},
        {4, "d", 2.0, 4.0, {10.0, 120.0, 10.0}, 1, 2, "d.glb"},
    };
    CHECK(match_species(tree, far, 8) == 3);

    // Ties break to the lowest species id.
    const std::vector<TreeModelAttribute> twins = {
        {9, "t", 9.0, 12.0, {60.0, 90.0, 40.0}, 4, 7, "t.glb"},
        {5, "t", 9.0, 12.0, {60.0, 90.0, 40.0}, 4, 7, "t.glb"},
    };
    CHECK(match_species(tree, twins, 5) == 5);

    CHECK_THROWS_AS(match_species(tree, {}, 5), Error);
}

TEST_CASE("latitude zone stub is monotone toward the poles") {
    CHECK(zone_from_latitude(0.0) == 11);
    CHECK(zone_from_latitude(-45.0) == 7);
    for (double lat = 0.0; lat < 80.0; lat += 10.0)
        CHECK(zone_from_latitude(lat + 10.0) <= zone_from_latitude(lat));
}

TEST_CASE("tree table csv and instance json round trip") {
    const std::string csv = temp_path("table.csv");
    {
        std::ofstream out(csv);
        out << "species_id,name,h_min,h_max,leaf_r,leaf_g,leaf_b,zone_min,zone_max,asset\n";
        out << "1,red oak,8,25,60,90,40,4,8,oak.glb\n";
        out << "7,sabal palm,6,15,70,140,60,9,11,palm.glb\n";
    }
    const auto table = read_tree_table(csv);
    REQUIRE(table.size() == 2);
    CHECK(table[0].name == "red oak");
    CHECK(table[1].species_id == 7);
    CHECK(table[1].zone_min == 9);
    CHECK(table[0].leaf_color[2] == doctest::Approx(40.0));

    std::vector<TreeInstance> trees(2);
    trees[0].x = 3.25;
    trees[0].y = 4.5;
    trees[0].height = 7.75;
    trees[0].width = 2.5;
    trees[0].color[1] = 120.0;
    trees[0].species_id = 1;
    trees[0].species_name = "red oak";
    trees[1].x = -2.0;
    trees[1].height = 3.0;
    trees[1].width = 1.0;
    const std::string js = temp_path("trees.json");
    write_tree_instances(js, trees);
    const auto back = read_tree_instances(js);
    REQUIRE(back.size() == 2);
    CHECK(back[0].x == doctest::Approx(3.25));
    CHECK(back[0].species_id.value() == 1);
    CHECK(back[0].species_name == "red oak");
    CHECK_FALSE(back[1].species_id.has_value());
}

TEST_CASE("extract_trees instances two separated canopies") {
    PointCloud cloud = ground_plane(30.0, 0.5);
    std::mt19937_64 rng(3);
    const auto add_canopy = [&](double cx, double cy) {
        for (int i = 0; i < 400; ++i) {
            const double dx = testutil::range(rng, -2.0, 2.0);
            const double dy = testutil::range(rng, -2.0, 2.0);
            if (dx * dx + dy * dy > 4.0) continue;
            append(cloud, {cx + dx, cy + dy, testutil::range(rng, 4.0, 7.0), 50, 140, 60},
                   TerrainClass::Vegetation);
        }
    };
    add_canopy(8.0, 8.0);
    add_canopy(22.0, 22.0);
    const GroundElevationModel ground = build_ground_model(cloud);
    const std::vector<TreeModelAttribute> table = {
        {1, "oak", 4.0, 12.0, {55.0, 135.0, 65.0}, 4, 8, "oak.glb"}};

    TreeParams params;
    params.zone = 6;
    const auto trees = extract_trees(cloud, ground, table, params);
    REQUIRE(trees.size() >= 2);
    bool near_a = false, near_b = false;
    for (const auto& t : trees) {
        CHECK(t.height > 0.0);
        CHECK(t.width > 0.0);
        CHECK(t.height <= 7.5);
        REQUIRE(t.species_id.has_value());
        CHECK(*t.species_id == 1);
        CHECK(t.species_name == "oak");
        near_a = near_a || std::hypot(t.x - 8.0, t.y - 8.0) < 4.0;
        near_b = near_b || std::hypot(t.x - 22.0, t.y - 22.0) < 4.0;
    }
    CHECK(near_a);
    CHECK(near_b);

    TreeParams km = params;
    km.method = PlacementMethod::KMeans;
    const auto ktrees = extract_trees(cloud, ground, table, km);
    CHECK(ktrees.size() >= 2);
}

// ---------------------------------------------------------------------------
// Ground materials

TEST_CASE("patch grid covers a 30 m ortho with 81 windows") {
    Raster ortho = textured_ortho(120, 0.25);  // 30 x 30 m
    const auto patches = crop_patches(ortho);
    REQUIRE(patches.size() == 81);
    for (int row = 0; row < 9; ++row)
        for (int col = 0; col < 9; ++col) {
            const Patch& p = patches[std::size_t(row) * 9 + col];
            CHECK(p.cx == doctest::Approx(2.5 + 3.0 * col).epsilon(1e-12));
            CHECK(p.cy == doctest::Approx(2.5 + 3.0 * row).epsilon(1e-12));
            CHECK(p.size_px == 20);
            CHECK(p.row >= 0);
            CHECK(p.col >= 0);
            CHECK(p.row + p.size_px <= ortho.height);
            CHECK(p.col + p.size_px <= ortho.width);
        }
    for (std::size_t i = 1; i < 9; ++i)
        CHECK(std::abs(patches[i].cx - patches[i - 1].cx - 3.0) <= 1e-9);

    Raster small = textured_ortho(16, 0.25);  // 4 x 4 m, below one patch
    CHECK(crop_patches(small).empty());
}

TEST_CASE("majority label counts pixels with ties to the lowest code") {
    MaskRaster mask;
    mask.width = 10;
    mask.height = 10;
    mask.resolution = 0.5;
    mask.codes.assign(100, 1);
    for (int i = 0; i < 40; ++i) mask.codes[std::size_t(i)] = 0;  // 60 road, 40 soil
    CHECK(majority_label(mask) == MaterialClass::Road);

    mask.codes.assign(100, 2);
    CHECK(majority_label(mask) == MaterialClass::Vegetation);

    for (int i = 0; i < 50; ++i) mask.codes[std::size_t(i)] = 0;
    for (int i = 50; i < 100; ++i) mask.codes[std::size_t(i)] = 1;
    CHECK(majority_label(mask) == MaterialClass::BareSoil);

    mask.codes[0] = 9;
    CHECK_THROWS_AS(majority_label(mask), Error);
}

TEST_CASE("majority label matches a pixel-count oracle on random masks") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        MaskRaster mask;
        mask.width = 2 + testutil::upto(rng, 12);
        mask.height = 2 + testutil::upto(rng, 12);
        mask.resolution = 0.25;
        mask.codes.resize(std::size_t(mask.width) * mask.height);
        for (auto& c : mask.codes) c = std::uint8_t(testutil::upto(rng, 3));

        const int h = 1 + testutil::upto(rng, mask.height);
        const int w = 1 + testutil::upto(rng, mask.width);
        const int row = testutil::upto(rng, mask.height - h + 1);
        const int col = testutil::upto(rng, mask.width - w + 1);

        std::array<int, 3> counts{};
        for (int r = row; r < row + h; ++r)
            for (int c = col; c < col + w; ++c) ++counts[mask.at(r, c)];
        int best = 0;
        for (int c = 1; c < 3; ++c)
            if (counts[std::size_t(c)] > counts[std::size_t(best)]) best = c;
        CHECK(majority_label(mask, row, col, h, w) == MaterialClass(best));
    }
}

TEST_CASE("patch dataset labels follow the window majority") {
    Raster ortho = textured_ortho(120, 0.25);
    MaskRaster mask = thirds_mask(ortho);
    const PatchDataset dataset = build_patch_dataset(ortho, mask);
    REQUIRE(dataset.patches.size() == 81);
    REQUIRE(dataset.labels.size() == 81);
    std::size_t counted = 0;
    for (std::size_t i = 0; i < dataset.patches.size(); ++i) {
        const Patch& p = dataset.patches[i];
        CHECK(dataset.labels[i] ==
              majority_label(mask, p.row, p.col, p.size_px, p.size_px));
        ++counted;
    }
    CHECK(counted == 81);
    CHECK(dataset.class_counts[0] + dataset.class_counts[1] + dataset.class_counts[2] == 81);
    for (int c = 0; c < 3; ++c) CHECK(dataset.class_counts[std::size_t(c)] > 0);

    MaskRaster wrong = mask;
    wrong.width = 60;
    wrong.codes.resize(std::size_t(60) * mask.height);
    CHECK_THROWS_AS(build_patch_dataset(ortho, wrong), Error);
}

TEST_CASE("all-road mask yields all-road patch labels") {
    Raster ortho = textured_ortho(80, 0.25);
    MaskRaster mask = thirds_mask(ortho);
    std::fill(mask.codes.begin(), mask.codes.end(), std::uint8_t(1));
    const PatchDataset dataset = build_patch_dataset(ortho, mask);
    REQUIRE_FALSE(dataset.patches.empty());
    for (MaterialClass c : dataset.labels) CHECK(c == MaterialClass::Road);
    CHECK(dataset.class_counts[1] == dataset.patches.size());
}

TEST_CASE("baseline material model separates the three textures") {
    Raster ortho = textured_ortho(120, 0.25);
    MaskRaster mask = thirds_mask(ortho);
    const PatchDataset full = build_patch_dataset(ortho, mask);

    PatchDataset train, held;
    for (std::size_t i = 0; i < full.patches.size(); ++i) {
        PatchDataset& side = (i % 2 == 0) ? train : held;
        side.patches.push_back(full.patches[i]);
        side.labels.push_back(full.labels[i]);
        ++side.class_counts[std::size_t(int(full.labels[i]))];
    }
    REQUIRE(train.class_counts[0] > 0);
    REQUIRE(train.class_counts[1] > 0);
    REQUIRE(train.class_counts[2] > 0);

    const BaselineMaterialModel model = fit_baseline(ortho, train);
    CHECK(classify_patch(model, ortho, train.patches[0]) == train.labels[0]);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < held.patches.size(); ++i)
        if (classify_patch(model, ortho, held.patches[i]) == held.labels[i]) ++correct;
    CHECK(double(correct) >= 0.9 * double(held.patches.size()));

    CHECK(classify_patch(model, ortho, held.patches[0]) ==
          classify_patch(model, ortho, held.patches[0]));

    PatchDataset single;
    for (std::size_t i = 0; i < full.patches.size(); ++i) {
        if (full.labels[i] != MaterialClass::Road) continue;
        single.patches.push_back(full.patches[i]);
        single.labels.push_back(full.labels[i]);
        ++single.class_counts[1];
    }
    CHECK_THROWS_AS(fit_baseline(ortho, single), Error);
}

TEST_CASE("baseline material fit ignores training order") {
    Raster ortho = textured_ortho(96, 0.25);
    MaskRaster mask = thirds_mask(ortho);
    const PatchDataset dataset = build_patch_dataset(ortho, mask);

    PatchDataset shuffled = dataset;
    std::mt19937_64 rng(55);
    std::vector<std::size_t> order(dataset.patches.size());
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
        shuffled.patches[i] = dataset.patches[order[i]];
        shuffled.labels[i] = dataset.labels[order[i]];
    }

    const BaselineMaterialModel a = fit_baseline(ortho, dataset);
    const BaselineMaterialModel b = fit_baseline(ortho, shuffled);
    for (const Patch& p : dataset.patches)
        CHECK(classify_patch(a, ortho, p) == classify_patch(b, ortho, p));
}

TEST_CASE("vector map carries one entry per patch at the exact centers") {
    Raster ortho = textured_ortho(120, 0.25);
    MaskRaster mask = thirds_mask(ortho);
    const auto patches = crop_patches(ortho);

    // Imported per-pixel predictions: map labels must equal dataset labels.
    const ImportedMaterialClassifier imported(&mask);
    const MaterialVectorMap map = build_vector_map(ortho, imported);
    REQUIRE(map.entries.size() == patches.size());
    const PatchDataset dataset = build_patch_dataset(ortho, mask);
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        CHECK(map.entries[i].x == patches[i].cx);
        CHECK(map.entries[i].y == patches[i].cy);
        CHECK(map.entries[i].material == dataset.labels[i]);
    }
    CHECK(map.stride_m == doctest::Approx(3.0));
    CHECK(map.patch_m == doctest::Approx(5.0));

    struct RoadOnly : PatchClassifier {
        MaterialClass classify(const Raster&, const Patch&) const override {
            return MaterialClass::Road;
        }
        std::string name() const override { return "road-only"; }
    };
    const MaterialVectorMap roads = build_vector_map(ortho, RoadOnly{});
    for (const auto& e : roads.entries) CHECK(e.material == MaterialClass::Road);
}

TEST_CASE("vector map csv round trips with its sidecar") {
    MaterialVectorMap map;
    map.stride_m = 2.0;
    map.patch_m = 4.0;
    map.entries = {{1.5, 2.5, MaterialClass::Road},
                   {3.5, 2.5, MaterialClass::BareSoil},
                   {5.5, 2.5, MaterialClass::Vegetation}};
    const std::string path = temp_path("map.csv");
    write_vector_map(map, path);
    const MaterialVectorMap back = read_vector_map(path);
    REQUIRE(back.entries.size() == 3);
    CHECK(back.stride_m == doctest::Approx(2.0));
    CHECK(back.patch_m == doctest::Approx(4.0));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.entries[i].x == doctest::Approx(map.entries[i].x));
        CHECK(back.entries[i].y == doctest::Approx(map.entries[i].y));
        CHECK(back.entries[i].material == map.entries[i].material);
    }
}

// ---------------------------------------------------------------------------
// Mesh segmentation

TEST_CASE("mixed and unmatched faces are dropped") {
    TriMesh tri;
    tri.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
    tri.faces = {{0, 1, 2}};

    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
    cloud.labels = std::vector<TerrainClass>{TerrainClass::Ground, TerrainClass::Ground,
                                             TerrainClass::Vegetation};
    const SegmentedMesh mixed = segment_mesh(tri, cloud);
    CHECK(mixed.vertex_class[0] == std::uint8_t(TerrainClass::Ground));
    CHECK(mixed.vertex_class[2] == std::uint8_t(TerrainClass::Vegetation));
    for (const TriMesh& sub : mixed.submeshes) CHECK(sub.faces.empty());

    // One vertex beyond the match radius of every point: face survives nowhere.
    PointCloud two;
    two.points = {{0, 0, 0}, {2, 0, 0}};
    two.labels = std::vector<TerrainClass>{TerrainClass::Ground, TerrainClass::Ground};
    const SegmentedMesh unmatched = segment_mesh(tri, two);
    CHECK(unmatched.vertex_class[2] == kUnassignedVertex);
    for (const TriMesh& sub : unmatched.submeshes) CHECK(sub.faces.empty());

    CHECK_THROWS_AS(segment_mesh(tri, PointCloud{}), Error);
}

TEST_CASE("class-pure mesh passes through unchanged") {
    const TriMesh mesh = plane_mesh(6, 1.0);
    PointCloud cloud;
    cloud.points = mesh.vertices;
    cloud.labels = std::vector<TerrainClass>(cloud.points.size(), TerrainClass::Ground);

    const SegmentedMesh seg = segment_mesh(mesh, cloud);
    const TriMesh& ground = seg.submeshes[0];
    REQUIRE(ground.vertices.size() == mesh.vertices.size());
    REQUIRE(ground.faces.size() == mesh.faces.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        CHECK(ground.vertices[i].x == mesh.vertices[i].x);
        CHECK(ground.vertices[i].y == mesh.vertices[i].y);
        CHECK(ground.vertices[i].z == mesh.vertices[i].z);
    }
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) CHECK(ground.faces[i] == mesh.faces[i]);
    CHECK(seg.submeshes[1].faces.empty());
    CHECK(seg.submeshes[2].faces.empty());
}

TEST_CASE("plane plus box scene separates into disjoint submeshes") {
    TriMesh scene = plane_mesh(10, 1.0);
    const std::size_t plane_faces = scene.faces.size();
    const TriMesh box = box_mesh(3.0, 3.0, 0.5, 2.0);
    const int base = int(scene.vertices.size());
    for (const Point3& v : box.vertices) scene.vertices.push_back(v);
    for (const auto& f : box.faces)
        scene.faces.push_back({f[0] + base, f[1] + base, f[2] + base});

    PointCloud cloud;
    cloud.labels.emplace();
    for (std::size_t i = 0; i < scene.vertices.size(); ++i)
        append(cloud, scene.vertices[i],
               i < std::size_t(base) ? TerrainClass::Ground : TerrainClass::ManMade);

    const SegmentedMesh seg = segment_mesh(scene, cloud);
    CHECK(seg.submeshes[0].faces.size() == plane_faces);
    CHECK(seg.submeshes[1].faces.size() == box.faces.size());
    CHECK(seg.submeshes[2].faces.empty());

    const auto ground_keys = face_keys(seg.submeshes[0]);
    const auto manmade_keys = face_keys(seg.submeshes[1]);
    const auto scene_keys = face_keys(scene);
    for (const auto& k : ground_keys) {
        CHECK(scene_keys.count(k) == 1);
        CHECK(manmade_keys.count(k) == 0);
    }
    for (const auto& k : manmade_keys) CHECK(scene_keys.count(k) == 1);

    // No unreferenced vertices survive re-indexing.
    for (const TriMesh& sub : seg.submeshes) {
        std::vector<char> used(sub.vertices.size(), 0);
        for (const auto& f : sub.faces)
            for (int k : f) used[std::size_t(k)] = 1;
        for (char u : used) CHECK(u == 1);
    }
}

TEST_CASE("flatten_trees drops vegetation to ground elevation only") {
    const GroundElevationModel ground = flat_ground(12.0, 2.0);
    TriMesh mesh = plane_mesh(4, 1.0, 2.0);
    const std::size_t n = mesh.vertices.size();
    mesh.vertices.push_back({2.2, 2.2, 7.5});
    mesh.vertices.push_back({2.8, 2.2, 6.0});
    mesh.vertices.push_back({2.5, 2.8, 8.25});
    mesh.faces.push_back({int(n), int(n + 1), int(n + 2)});

    const TriMesh flat = flatten_trees(mesh, {n, n + 1, n + 2}, ground);
    REQUIRE(flat.vertices.size() == mesh.vertices.size());
    REQUIRE(flat.faces.size() == mesh.faces.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        CHECK(flat.vertices[i].x == mesh.vertices[i].x);
        CHECK(flat.vertices[i].y == mesh.vertices[i].y);
        if (i < n)
            CHECK(flat.vertices[i].z == mesh.vertices[i].z);
        else
            CHECK(flat.vertices[i].z == doctest::Approx(2.0));
    }
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) CHECK(flat.faces[i] == mesh.faces[i]);

    // A vertex already at ground level stays; the empty set is the identity.
    const TriMesh same = flatten_trees(mesh, {0}, ground);
    CHECK(same.vertices[0].z == doctest::Approx(2.0));
    const TriMesh identity = flatten_trees(mesh, {}, ground);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK(identity.vertices[i].z == mesh.vertices[i].z);
}

// ---------------------------------------------------------------------------
// Navigation

TEST_CASE("default weights and empty-map grids") {
    const NavWeights weights;
    CHECK(weights.for_class(MaterialClass::Road) == doctest::Approx(0.2));
    CHECK(weights.for_class(MaterialClass::BareSoil) == doctest::Approx(1.0));
    CHECK(weights.for_class(MaterialClass::Vegetation) == doctest::Approx(1.0));

    const MaterialVectorMap empty;
    const NavGrid grid = build_navgrid(0.0, 0.0, 10.0, 6.0, empty);
    CHECK(grid.nx == 10);
    CHECK(grid.ny == 6);
    for (double w : grid.weight) CHECK(w == doctest::Approx(1.0));
    for (std::uint8_t p : grid.passable) CHECK(p == 1);

    NavWeights bad;
    bad.road = 0.0;
    CHECK_THROWS_AS(build_navgrid(0.0, 0.0, 10.0, 6.0, empty, bad), Error);
}

TEST_CASE("a single road sample colors cells within the lookup radius") {
    MaterialVectorMap map;
    map.entries = {{5.5, 5.5, MaterialClass::Road}};
    const NavGrid grid = build_navgrid(0.0, 0.0, 12.0, 12.0, map);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Vec2 c = grid.cell_center(ix, iy);
            const double dist = std::hypot(c.x - 5.5, c.y - 5.5);
            const double expect = dist <= 3.0 ? 0.2 : 1.0;
            CHECK(grid.weight[grid.idx(ix, iy)] == doctest::Approx(expect));
        }
    const auto cell = grid.cell_of(5.5, 5.5);
    CHECK(grid.weight[grid.idx(cell[0], cell[1])] == doctest::Approx(0.2));
}

TEST_CASE("uniform grid path cost is the octile distance") {
    const NavGrid grid = testutil::make_navgrid(20, 20);
    const PathResult path = astar(grid, {2, 3}, {17, 12});
    REQUIRE(path.found);
    const double octile = 6.0 + 9.0 * std::sqrt(2.0);  // dx 15, dy 9
    CHECK(std::abs(path.cost - octile) <= 1e-9);
    CHECK(std::abs(path.length - octile) <= 1e-9);
    CHECK(std::abs(testutil::dijkstra_cost(grid, grid.idx(2, 3), grid.idx(17, 12)) - octile) <=
          1e-9);

    for (std::size_t i = 1; i < path.cells.size(); ++i) {
        const int dx = std::abs(path.cells[i][0] - path.cells[i - 1][0]);
        const int dy = std::abs(path.cells[i][1] - path.cells[i - 1][1]);
        CHECK(std::max(dx, dy) == 1);
    }

    const PathResult self = astar(grid, {4, 4}, {4, 4});
    REQUIRE(self.found);
    CHECK(self.cells.size() == 1);
    CHECK(self.cost == 0.0);
    CHECK(self.length == 0.0);
}

TEST_CASE("path prefers a cheap road corridor over the direct line") {
    NavGrid grid = testutil::make_navgrid(20, 20);
    // Road: down column 2, along row 2, back up column 12.
    std::vector<std::array<int, 2>> road;
    for (int y = 2; y <= 10; ++y) {
        road.push_back({2, y});
        road.push_back({12, y});
    }
    for (int x = 2; x <= 12; ++x) road.push_back({x, 2});
    for (const auto& c : road) grid.weight[grid.idx(c[0], c[1])] = 0.2;

    const std::array<int, 2> start{2, 10}, goal{12, 10};
    const PathResult path = astar(grid, start, goal);
    REQUIRE(path.found);
    CHECK(path.cost < 10.0);  // direct soil line costs 10
    CHECK(std::abs(path.cost - testutil::dijkstra_cost(grid, grid.idx(start[0], start[1]),
                                                       grid.idx(goal[0], goal[1]))) <= 1e-12);
    std::size_t on_road = 0;
    for (const auto& c : path.cells)
        if (grid.weight[grid.idx(c[0], c[1])] == 0.2) ++on_road;
    CHECK(on_road * 2 > path.cells.size());
    CHECK(path.length > 20.0);  // the detour is much longer than 10 m
}

TEST_CASE("astar matches dijkstra on random weighted grids") {
    std::mt19937_64 rng(67);
    int unreachable_seen = 0;
    for (int trial = 0; trial < 30; ++trial) {
        NavGrid grid = testutil::make_navgrid(20, 20);
        for (std::size_t i = 0; i < grid.weight.size(); ++i) {
            grid.weight[i] = testutil::range(rng, 0.1, 3.0);
            grid.passable[i] = testutil::unit(rng) < 0.15 ? 0 : 1;
        }
        const std::array<int, 2> start{testutil::upto(rng, 20), testutil::upto(rng, 20)};
        const std::array<int, 2> goal{testutil::upto(rng, 20), testutil::upto(rng, 20)};
        grid.passable[grid.idx(start[0], start[1])] = 1;
        grid.passable[grid.idx(goal[0], goal[1])] = 1;

        const double oracle = testutil::dijkstra_cost(grid, grid.idx(start[0], start[1]),
                                                      grid.idx(goal[0], goal[1]));
        const PathResult path = astar(grid, start, goal);
        if (std::isinf(oracle)) {
            CHECK_FALSE(path.found);
            ++unreachable_seen;
        } else {
            REQUIRE(path.found);
            CHECK(path.cost == oracle);
            CHECK(path.cost >= 0.1 * std::hypot(goal[0] - start[0], goal[1] - start[1]) - 1e-9);
        }
    }
    CHECK(unreachable_seen < 30);
}

TEST_CASE("heuristic stays below the true remaining cost") {
    std::mt19937_64 rng(71);
    NavGrid grid = testutil::make_navgrid(12, 12);
    double w_min = 1e18;
    for (double& w : grid.weight) {
        w = testutil::range(rng, 0.2, 2.0);
        w_min = std::min(w_min, w);
    }
    const std::array<int, 2> goal{9, 4};
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double true_cost =
                testutil::dijkstra_cost(grid, grid.idx(ix, iy), grid.idx(goal[0], goal[1]));
            const double h = w_min * std::hypot(double(goal[0] - ix), double(goal[1] - iy));
            CHECK(h <= true_cost + 1e-9);
        }
}

TEST_CASE("lowering a weight never raises the path cost") {
    std::mt19937_64 rng(73);
    NavGrid grid = testutil::make_navgrid(16, 16);
    for (double& w : grid.weight) w = testutil::range(rng, 0.3, 2.5);
    const std::array<int, 2> start{1, 1}, goal{14, 13};
    const double base = astar(grid, start, goal).cost;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t i = grid.idx(testutil::upto(rng, 16), testutil::upto(rng, 16));
        const double saved = grid.weight[i];
        grid.weight[i] = saved * 0.5;
        CHECK(astar(grid, start, goal).cost <= base + 1e-12);
        grid.weight[i] = saved;
    }
}

TEST_CASE("scaling all weights scales cost and keeps the path") {
    std::mt19937_64 rng(79);
    NavGrid grid = testutil::make_navgrid(15, 15);
    for (double& w : grid.weight) w = testutil::range(rng, 0.2, 2.0);
    const PathResult a = astar(grid, {0, 0}, {14, 11});
    NavGrid scaled = grid;
    for (double& w : scaled.weight) w *= 3.0;
    const PathResult b = astar(scaled, {0, 0}, {14, 11});
    REQUIRE(a.found);
    REQUIRE(b.found);
    CHECK(std::abs(b.cost - 3.0 * a.cost) <= 1e-9 * b.cost);
    CHECK(a.cells == b.cells);
    CHECK(std::abs(a.length - b.length) <= 1e-12);
}

TEST_CASE("walls, bad endpoints, and path artifacts") {
    NavGrid grid = testutil::make_navgrid(10, 10);
    for (int iy = 0; iy < 10; ++iy) grid.passable[grid.idx(5, iy)] = 0;
    const PathResult blocked = astar(grid, {1, 5}, {8, 5});
    CHECK_FALSE(blocked.found);
    CHECK_THROWS_AS(write_path(temp_path("nopath.json"), blocked), Error);

    CHECK_THROWS_AS(astar(grid, {-1, 0}, {8, 5}), Error);
    CHECK_THROWS_AS(astar(grid, {5, 5}, {8, 5}), Error);

    grid.passable[grid.idx(5, 4)] = 1;
    const PathResult open = astar(grid, {1, 5}, {8, 5});
    REQUIRE(open.found);
    const std::string path_json = temp_path("path.json");
    write_path(path_json, open);
    const PathResult back = read_path(path_json);
    CHECK(back.found);
    CHECK(back.cells == open.cells);
    CHECK(std::abs(back.cost - open.cost) <= 1e-9);
    CHECK(std::abs(back.length - open.length) <= 1e-9);

    const std::string pgm = temp_path("nav.pgm");
    render_navgrid(grid, open, pgm);
    std::ifstream in(pgm, std::ios::binary);
    std::string magic;
    in >> magic;
    CHECK(magic == "P5");
}
