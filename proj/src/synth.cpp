#include "terraseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "terraseg/spatial_index.hpp"

namespace terraseg {

namespace {

constexpr double kOrthoRes = 0.25;
constexpr double kDsmCell = 1.0;
constexpr double kRoadWidth = 4.0;

double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1p-53; }

std::uint8_t channel(double v) { return std::uint8_t(std::clamp(v, 0.0, 255.0)); }

struct Rect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    bool intersects(const Rect& o, double pad = 0.0) const {
        return x0 - pad < o.x1 && o.x0 < x1 + pad && y0 - pad < o.y1 && o.y0 < y1 + pad;
    }
};

struct Box {
    Rect rect;
    double roof_z = 0.0;  // absolute, snapped to a small-voxel center
};

struct Tree {
    double cx = 0, cy = 0, cz = 0;  // canopy center
    double radius = 2.0;
};

// Flat roofs sit mid-cell so surface jitter never splits them across two
// voxel layers, which would break their planarity for no physical reason.
double snap_mid_cell(double z) { return (std::floor(z / 0.5) + 0.5) * 0.5; }

}  // namespace

SynthScene synth_scene(const SceneSpec& spec) {
    if (!(spec.extent_x > 0.0) || !(spec.extent_y > 0.0))
        throw Error("synth_scene: extents must be positive");
    if (!(spec.ground_spacing > 0.0)) throw Error("synth_scene: spacing must be positive");
    if (spec.boxes < 0 || spec.trees < 0 || spec.roads < 0 || spec.underground < 0)
        throw Error("synth_scene: object counts must be non-negative");

    std::mt19937_64 rng(spec.seed);
    SynthScene scene;
    scene.base_z_ = spec.base_z;
    scene.slope_x_ = spec.slope_x;
    scene.slope_y_ = spec.slope_y;
    auto ground_z = [&](double x, double y) { return scene.ground_z(x, y); };

    // Road strips alternate vertical/horizontal across the extent.
    std::vector<Rect> roads;
    for (int k = 0; k < spec.roads; ++k) {
        const double frac = double(k + 1) / double(spec.roads + 1);
        if (k % 2 == 0) {
            const double cx = spec.extent_x * frac;
            roads.push_back({cx - kRoadWidth / 2, 0.0, cx + kRoadWidth / 2, spec.extent_y});
        } else {
            const double cy = spec.extent_y * frac;
            roads.push_back({0.0, cy - kRoadWidth / 2, spec.extent_x, cy + kRoadWidth / 2});
        }
    }

    std::vector<Box> boxes;
    for (int k = 0; k < spec.boxes; ++k) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double sx = 18.0 + 6.0 * unit(rng);
            const double sy = 14.0 + 6.0 * unit(rng);
            const double height = 2.3 + std::floor(unit(rng) * 3.0) * 0.5;
            if (sx >= spec.extent_x - 2.0 || sy >= spec.extent_y - 2.0) continue;
            Rect r;
            r.x0 = 1.0 + unit(rng) * (spec.extent_x - sx - 2.0);
            r.y0 = 1.0 + unit(rng) * (spec.extent_y - sy - 2.0);
            r.x1 = r.x0 + sx;
            r.y1 = r.y0 + sy;
            bool clash = false;
            for (const Rect& road : roads) clash = clash || r.intersects(road, 1.0);
            for (const Box& b : boxes) clash = clash || r.intersects(b.rect, 2.0);
            if (clash) continue;
            const double zc = ground_z((r.x0 + r.x1) / 2, (r.y0 + r.y1) / 2);
            boxes.push_back({r, snap_mid_cell(zc + height)});
            break;
        }
    }

    std::vector<Tree> trees;
    for (int k = 0; k < spec.trees; ++k) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            Tree t;
            t.radius = 1.6 + 0.8 * unit(rng);
            const double margin = t.radius + 1.0;
            if (spec.extent_x <= 2 * margin || spec.extent_y <= 2 * margin) break;
            t.cx = margin + unit(rng) * (spec.extent_x - 2 * margin);
            t.cy = margin + unit(rng) * (spec.extent_y - 2 * margin);
            t.cz = ground_z(t.cx, t.cy) + 1.5 + t.radius + 0.5 * unit(rng);
            const Rect canopy{t.cx - t.radius, t.cy - t.radius, t.cx + t.radius, t.cy + t.radius};
            bool clash = false;
            for (const Box& b : boxes) clash = clash || canopy.intersects(b.rect, 1.0);
            for (const Rect& road : roads) clash = clash || canopy.intersects(road, 0.5);
            for (const Tree& o : trees) {
                const double dx = t.cx - o.cx, dy = t.cy - o.cy;
                clash = clash || std::sqrt(dx * dx + dy * dy) < t.radius + o.radius + 0.5;
            }
            if (clash) continue;
            trees.push_back(t);
            break;
        }
    }

    PointCloud& cloud = scene.cloud;
    cloud.labels.emplace();
    auto emit = [&](double x, double y, double z, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                    TerrainClass c) {
        cloud.points.push_back({x, y, z, r, g, b});
        cloud.labels->push_back(c);
        scene.class_counts[std::size_t(c)]++;
    };
    // Noise-free top-surface samples feeding the DSM. Walls contribute none
    // (a DSM has no vertical-surface points), and surface jitter is excluded
    // so no legitimate surface point ever sits below the local DSM minimum.
    std::vector<Point3> dsm_src;
    auto emit_dsm = [&](double x, double y, double z) { dsm_src.push_back({x, y, z}); };
    auto in_any_box = [&](double x, double y) {
        for (const Box& b : boxes)
            if (b.rect.contains(x, y)) return true;
        return false;
    };
    auto in_any_road = [&](double x, double y) {
        for (const Rect& r : roads)
            if (r.contains(x, y)) return true;
        return false;
    };

    // Ground sheet (roads are recolored ground, also class Ground). Box
    // footprints are occluded: no ground points there.
    const int gnx = int(std::floor(spec.extent_x / spec.ground_spacing)) + 1;
    const int gny = int(std::floor(spec.extent_y / spec.ground_spacing)) + 1;
    for (int iy = 0; iy < gny; ++iy)
        for (int ix = 0; ix < gnx; ++ix) {
            const double x = ix * spec.ground_spacing;
            const double y = iy * spec.ground_spacing;
            if (in_any_box(x, y)) continue;
            const double z = ground_z(x, y) + spec.jitter * unit(rng);
            emit_dsm(x, y, ground_z(x, y));
            if (in_any_road(x, y)) {
                const double v = 58.0 + 6.0 * unit(rng);
                emit(x, y, z, channel(v), channel(v), channel(v + 2.0), TerrainClass::Ground);
            } else {
                emit(x, y, z, channel(150.0 + 36.0 * (unit(rng) - 0.5)),
                     channel(128.0 + 32.0 * (unit(rng) - 0.5)),
                     channel(96.0 + 24.0 * (unit(rng) - 0.5)), TerrainClass::Ground);
            }
        }

    // Boxes: dense flat roof, sparse dotted walls (top-down capture barely
    // sees walls, and sparse wall cells keep roof-edge neighborhoods planar).
    for (const Box& b : boxes) {
        const double roof_jitter = std::min(spec.jitter, 0.02);
        for (double x = b.rect.x0; x <= b.rect.x1 + 1e-9; x += 0.25)
            for (double y = b.rect.y0; y <= b.rect.y1 + 1e-9; y += 0.25) {
                emit_dsm(x, y, b.roof_z);
                emit(x, y, b.roof_z + roof_jitter * unit(rng),
                     channel(142.0 + 16.0 * (unit(rng) - 0.5)),
                     channel(124.0 + 16.0 * (unit(rng) - 0.5)),
                     channel(102.0 + 12.0 * (unit(rng) - 0.5)), TerrainClass::ManMade);
            }
        auto wall_column = [&](double x, double y) {
            const double z0 = ground_z(x, y) + 0.05;
            for (double z = z0; z < b.roof_z - 0.3; z += 0.8) {
                const double v = 120.0 + 20.0 * (unit(rng) - 0.5);
                emit(x, y, z, channel(v), channel(v - 4.0), channel(v - 8.0), TerrainClass::ManMade);
            }
        };
        for (double x = b.rect.x0; x <= b.rect.x1 + 1e-9; x += 0.8) {
            wall_column(x, b.rect.y0);
            wall_column(x, b.rect.y1);
        }
        for (double y = b.rect.y0 + 0.8; y <= b.rect.y1 - 0.8 + 1e-9; y += 0.8) {
            wall_column(b.rect.x0, y);
            wall_column(b.rect.x1, y);
        }
    }

    // Trees: solid noisy canopy blobs well above the ground (>= 1.5 m), so
    // every canopy cell is both high and non-planar.
    for (const Tree& t : trees) {
        const double volume = 4.0 / 3.0 * M_PI * t.radius * t.radius * t.radius;
        const int n = std::max(6, int(std::llround(volume * 40.0)));
        for (int i = 0; i < n; ++i) {
            double px, py, pz;
            do {
                px = 2.0 * unit(rng) - 1.0;
                py = 2.0 * unit(rng) - 1.0;
                pz = 2.0 * unit(rng) - 1.0;
            } while (px * px + py * py + pz * pz > 1.0);
            const double tx = t.cx + px * t.radius;
            const double ty = t.cy + py * t.radius;
            const double tz = t.cz + pz * t.radius;
            emit_dsm(tx, ty, tz);
            emit(tx, ty, tz, channel(40.0 + 50.0 * unit(rng)),
                 channel(110.0 + 70.0 * unit(rng)), channel(30.0 + 40.0 * unit(rng)),
                 TerrainClass::Vegetation);
        }
    }

    // DSM: per 1 m cell max z of the noise-free surface, extended one cell
    // beyond the scene at ground level so edge points on sloped terrain keep
    // a downhill neighbor at or below them.
    {
        for (double x = -kDsmCell; x <= spec.extent_x + kDsmCell + 1e-9; x += 0.5)
            for (double y = -kDsmCell; y <= spec.extent_y + kDsmCell + 1e-9; y += 0.5) {
                const bool inside = x >= 0.0 && x <= spec.extent_x && y >= 0.0 && y <= spec.extent_y;
                if (!inside) emit_dsm(x, y, ground_z(x, y));
            }
        const int dnx = std::max(1, int(std::ceil(spec.extent_x / kDsmCell))) + 2;
        const int dny = std::max(1, int(std::ceil(spec.extent_y / kDsmCell))) + 2;
        const double origin = -kDsmCell;
        std::vector<double> maxz(std::size_t(dnx) * dny, -std::numeric_limits<double>::infinity());
        for (const Point3& p : dsm_src) {
            const int ix = std::clamp(int(std::floor((p.x - origin) / kDsmCell)), 0, dnx - 1);
            const int iy = std::clamp(int(std::floor((p.y - origin) / kDsmCell)), 0, dny - 1);
            auto& v = maxz[std::size_t(iy) * dnx + ix];
            v = std::max(v, p.z);
        }
        for (int iy = 0; iy < dny; ++iy)
            for (int ix = 0; ix < dnx; ++ix) {
                const double v = maxz[std::size_t(iy) * dnx + ix];
                if (v == -std::numeric_limits<double>::infinity()) continue;
                scene.dsm.points.push_back(
                    {origin + (ix + 0.5) * kDsmCell, origin + (iy + 0.5) * kDsmCell, v});
            }
    }

    // Underground noise, guaranteed below the local DSM minimum within 5 m.
    scene.underground.assign(cloud.size(), 0);
    if (spec.underground > 0) {
        const SpatialIndex dsm_index(scene.dsm.points);
        for (int k = 0; k < spec.underground; ++k) {
            const double x = unit(rng) * spec.extent_x;
            const double y = unit(rng) * spec.extent_y;
            const double local_min = dsm_index.min_z_in_cylinder(x, y, 5.0);
            const double z = local_min - 0.5 - 3.0 * unit(rng);
            const double v = 90.0 + 30.0 * unit(rng);
            emit(x, y, z, channel(v), channel(v), channel(v), TerrainClass::Ground);
            scene.class_counts[std::size_t(TerrainClass::Ground)]--;  // not a surface point
            scene.underground.push_back(1);
        }
    }

    // Ortho: painter's render of the highest surface point per pixel.
    {
        Raster& ortho = scene.ortho;
        ortho.width = std::max(1, int(std::llround(spec.extent_x / kOrthoRes)));
        ortho.height = std::max(1, int(std::llround(spec.extent_y / kOrthoRes)));
        ortho.resolution = kOrthoRes;
        ortho.origin_x = 0.0;
        ortho.origin_y = 0.0;
        ortho.pixels.assign(std::size_t(ortho.width) * ortho.height * 3, 0);
        std::vector<double> zbuf(std::size_t(ortho.width) * ortho.height,
                                 -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (scene.underground[i]) continue;
            const Point3& p = cloud.points[i];
            const int col = std::clamp(int(std::floor(p.x / kOrthoRes)), 0, ortho.width - 1);
            const int row = std::clamp(int(std::floor(p.y / kOrthoRes)), 0, ortho.height - 1);
            double& zb = zbuf[std::size_t(row) * ortho.width + col];
            if (p.z <= zb) continue;
            zb = p.z;
            std::uint8_t* px = ortho.at(row, col);
            px[0] = p.r;
            px[1] = p.g;
            px[2] = p.b;
        }
        for (std::size_t i = 0; i < zbuf.size(); ++i)
            if (zbuf[i] == -std::numeric_limits<double>::infinity()) {
                ortho.pixels[i * 3 + 0] = 150;
                ortho.pixels[i * 3 + 1] = 128;
                ortho.pixels[i * 3 + 2] = 96;
            }

        MaskRaster& mask = scene.material_mask;
        mask.width = ortho.width;
        mask.height = ortho.height;
        mask.resolution = ortho.resolution;
        mask.origin_x = ortho.origin_x;
        mask.origin_y = ortho.origin_y;
        mask.codes.assign(zbuf.size(), std::uint8_t(MaterialClass::BareSoil));
        for (int row = 0; row < mask.height; ++row)
            for (int col = 0; col < mask.width; ++col) {
                const double x = (col + 0.5) * kOrthoRes;
                const double y = (row + 0.5) * kOrthoRes;
                std::uint8_t code = std::uint8_t(MaterialClass::BareSoil);
                if (in_any_road(x, y)) code = std::uint8_t(MaterialClass::Road);
                for (const Tree& t : trees) {
                    const double dx = x - t.cx, dy = y - t.cy;
                    if (dx * dx + dy * dy <= t.radius * t.radius)
                        code = std::uint8_t(MaterialClass::Vegetation);
                }
                mask.codes[std::size_t(row) * mask.width + col] = code;
            }
    }

    // Mesh: coarse ground grid (skipping quads under boxes), subdivided box
    // shells, and low-poly canopy spheres.
    {
        TriMesh& mesh = scene.mesh;
        auto add_vertex = [&](double x, double y, double z) {
            mesh.vertices.push_back({x, y, z});
            return int(mesh.vertices.size()) - 1;
        };
        auto add_quad = [&](int a, int b, int c, int d) {
            mesh.faces.push_back({a, b, c});
            mesh.faces.push_back({a, c, d});
        };
        const double g = 2.0;
        const int mnx = int(std::floor(spec.extent_x / g)) + 1;
        const int mny = int(std::floor(spec.extent_y / g)) + 1;
        std::vector<int> gv(std::size_t(mnx) * mny);
        for (int iy = 0; iy < mny; ++iy)
            for (int ix = 0; ix < mnx; ++ix)
                gv[std::size_t(iy) * mnx + ix] = add_vertex(ix * g, iy * g, ground_z(ix * g, iy * g));
        for (int iy = 0; iy + 1 < mny; ++iy)
            for (int ix = 0; ix + 1 < mnx; ++ix) {
                if (in_any_box((ix + 0.5) * g, (iy + 0.5) * g)) continue;
                add_quad(gv[std::size_t(iy) * mnx + ix], gv[std::size_t(iy) * mnx + ix + 1],
                         gv[std::size_t(iy + 1) * mnx + ix + 1], gv[std::size_t(iy + 1) * mnx + ix]);
            }
        for (const Box& b : boxes) {
            const double step = 1.0;
            const int rx = std::max(1, int(std::llround((b.rect.x1 - b.rect.x0) / step)));
            const int ry = std::max(1, int(std::llround((b.rect.y1 - b.rect.y0) / step)));
            std::vector<int> rv(std::size_t(rx + 1) * (ry + 1));
            for (int iy = 0; iy <= ry; ++iy)
                for (int ix = 0; ix <= rx; ++ix)
                    rv[std::size_t(iy) * (rx + 1) + ix] =
                        add_vertex(b.rect.x0 + (b.rect.x1 - b.rect.x0) * ix / rx,
                                   b.rect.y0 + (b.rect.y1 - b.rect.y0) * iy / ry, b.roof_z);
            for (int iy = 0; iy < ry; ++iy)
                for (int ix = 0; ix < rx; ++ix)
                    add_quad(rv[std::size_t(iy) * (rx + 1) + ix],
                             rv[std::size_t(iy) * (rx + 1) + ix + 1],
                             rv[std::size_t(iy + 1) * (rx + 1) + ix + 1],
                             rv[std::size_t(iy + 1) * (rx + 1) + ix]);
            auto wall = [&](double ax, double ay, double bx, double by) {
                const double len = std::hypot(bx - ax, by - ay);
                const int nseg = std::max(1, int(std::llround(len / step)));
                const double zlo = std::min(ground_z(ax, ay), ground_z(bx, by));
                const int nz = std::max(1, int(std::llround((b.roof_z - zlo) / step)));
                std::vector<int> wv(std::size_t(nseg + 1) * (nz + 1));
                for (int iz = 0; iz <= nz; ++iz)
                    for (int is = 0; is <= nseg; ++is) {
                        const double x = ax + (bx - ax) * is / nseg;
                        const double y = ay + (by - ay) * is / nseg;
                        const double z = zlo + (b.roof_z - zlo) * iz / nz;
                        wv[std::size_t(iz) * (nseg + 1) + is] = add_vertex(x, y, z);
                    }
                for (int iz = 0; iz < nz; ++iz)
                    for (int is = 0; is < nseg; ++is)
                        add_quad(wv[std::size_t(iz) * (nseg + 1) + is],
                                 wv[std::size_t(iz) * (nseg + 1) + is + 1],
                                 wv[std::size_t(iz + 1) * (nseg + 1) + is + 1],
                                 wv[std::size_t(iz + 1) * (nseg + 1) + is]);
            };
            wall(b.rect.x0, b.rect.y0, b.rect.x1, b.rect.y0);
            wall(b.rect.x1, b.rect.y0, b.rect.x1, b.rect.y1);
            wall(b.rect.x1, b.rect.y1, b.rect.x0, b.rect.y1);
            wall(b.rect.x0, b.rect.y1, b.rect.x0, b.rect.y0);
        }
        for (const Tree& t : trees) {
            const double r = 0.85 * t.radius;
            const int stacks = 5, slices = 8;
            const int top = add_vertex(t.cx, t.cy, t.cz + r);
            const int bottom = add_vertex(t.cx, t.cy, t.cz - r);
            std::vector<int> ring_prev;
            for (int st = 1; st < stacks; ++st) {
                const double phi = M_PI * st / stacks;
                std::vector<int> ring;
                for (int sl = 0; sl < slices; ++sl) {
                    const double theta = 2.0 * M_PI * sl / slices;
                    ring.push_back(add_vertex(t.cx + r * std::sin(phi) * std::cos(theta),
                                              t.cy + r * std::sin(phi) * std::sin(theta),
                                              t.cz + r * std::cos(phi)));
                }
                if (st == 1) {
                    for (int sl = 0; sl < slices; ++sl)
                        mesh.faces.push_back({top, ring[std::size_t(sl)],
                                              ring[std::size_t((sl + 1) % slices)]});
                } else {
                    for (int sl = 0; sl < slices; ++sl) {
                        const int a = ring_prev[std::size_t(sl)];
                        const int b = ring_prev[std::size_t((sl + 1) % slices)];
                        const int c = ring[std::size_t((sl + 1) % slices)];
                        const int d = ring[std::size_t(sl)];
                        add_quad(a, b, c, d);
                    }
                }
                ring_prev = ring;
            }
            for (int sl = 0; sl < slices; ++sl)
                mesh.faces.push_back({bottom, ring_prev[std::size_t((sl + 1) % slices)],
                                      ring_prev[std::size_t(sl)]});
        }
    }

    // Cameras on a grid overhanging the extent, so the AOI encloses the scene.
    for (double y = -5.0; y <= spec.extent_y + 5.0 + 1e-9; y += 10.0)
        for (double x = -5.0; x <= spec.extent_x + 5.0 + 1e-9; x += 10.0)
            scene.cameras.positions.push_back({x, y, 55.0});

    return scene;
}

void write_default_tree_table(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write tree table: " + path);
    out << "species_id,name,h_min,h_max,leaf_r,leaf_g,leaf_b,zone_min,zone_max,asset\n"
           "1,scrub_oak,2,6,70,130,45,4,8,assets/scrub_oak.glb\n"
           "2,live_oak,5,15,65,145,50,7,10,assets/live_oak.glb\n"
           "3,ponderosa_pine,8,30,55,120,60,3,7,assets/ponderosa_pine.glb\n"
           "4,fan_palm,4,12,80,160,60,9,11,assets/fan_palm.glb\n"
           "5,juniper,1,5,75,125,65,3,9,assets/juniper.glb\n";
}

}  // namespace terraseg
