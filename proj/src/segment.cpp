#include "terraseg/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace terraseg {

namespace {

// Smallest eigenvalue of a symmetric 3x3 matrix (trigonometric method).
double smallest_eigenvalue(const double m[3][3]) {
    const double p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    const double q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if (p1 == 0.0) return std::min({m[0][0], m[1][1], m[2][2]});
    const double d0 = m[0][0] - q, d1 = m[1][1] - q, d2 = m[2][2] - q;
    const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    double b[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = (m[i][j] - (i == j ? q : 0.0)) / p;
    const double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                        b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                        b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    const double r = std::clamp(detb / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    // Eigenvalues are q + 2p cos(phi + 2k*pi/3); k = 1 gives the smallest.
    return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

// RMS distance of the points to their best-fit plane (centroid + PCA normal).
double plane_fit_rms(const std::vector<std::array<double, 3>>& pts) {
    const std::size_t n = pts.size();
    if (n < 3) return 0.0;  // any <= 3 points are exactly coplanar
    double cx = 0, cy = 0, cz = 0;
    for (const auto& p : pts) {
        cx += p[0];
        cy += p[1];
        cz += p[2];
    }
    cx /= double(n);
    cy /= double(n);
    cz /= double(n);
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (const auto& p : pts) {
        const double d[3] = {p[0] - cx, p[1] - cy, p[2] - cz};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] += d[i] * d[j];
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] /= double(n);
    const double lambda_min = std::max(0.0, smallest_eigenvalue(m));
    return std::sqrt(lambda_min);
}

}  // namespace

void baseline_geometric_label(VoxelBlock& block, const GroundElevationModel& ground,
                              const BaselineParams& params) {
    block.label_grid.assign(block.cell_count(), kNoLabel);
    std::vector<std::array<double, 3>> neighborhood;
    for (std::size_t cell = 0; cell < block.occupancy.size(); ++cell) {
        if (!block.occupancy[cell]) continue;
        const auto center = block.cell_center(cell);
        const double height = center[2] - ground.elevation_at(center[0], center[1]);
        if (height <= params.ground_height) {
            block.label_grid[cell] = std::uint8_t(TerrainClass::Ground);
            continue;
        }
        const auto c = block.cell_coords(cell);
        neighborhood.clear();
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    const int xi = c[0] + dx, yi = c[1] + dy, zi = c[2] + dz;
                    if (xi < 0 || yi < 0 || zi < 0 || xi >= block.dims[0] || yi >= block.dims[1] ||
                        zi >= block.dims[2])
                        continue;
                    const std::size_t nb = block.cell_linear(xi, yi, zi);
                    if (block.occupancy[nb]) neighborhood.push_back(block.cell_center(nb));
                }
        block.label_grid[cell] = std::uint8_t(plane_fit_rms(neighborhood) <= params.planar_rms
                                                  ? TerrainClass::ManMade
                                                  : TerrainClass::Vegetation);
    }
}

void UNetLabeler::label_block(VoxelBlock& block) const {
    Tensor4 occupancy(block.dims[0], block.dims[1], block.dims[2], 1);
    for (std::size_t cell = 0; cell < block.occupancy.size(); ++cell)
        occupancy.values[cell] = block.occupancy[cell] ? 1.0f : 0.0f;
    const Tensor4 probs = unet_forward(occupancy, weights_, config_);
    block.label_grid.assign(block.cell_count(), kNoLabel);
    for (std::size_t cell = 0; cell < block.occupancy.size(); ++cell) {
        if (!block.occupancy[cell]) continue;
        const float* p = &probs.values[cell * std::size_t(probs.c)];
        int best = 0;
        for (int k = 1; k < probs.c; ++k)
            if (p[k] > p[best]) best = k;
        block.label_grid[cell] = std::uint8_t(best);
    }
}

PointCloud segment_cloud(const PointCloud& cloud, const VoxelLabeler& labeler,
                         const VoxelParams& params) {
    std::vector<VoxelBlock> blocks = voxelize(cloud, params);
    std::vector<TerrainClass> labels(cloud.size(), TerrainClass::Ground);
    for (VoxelBlock& block : blocks) {
        labeler.label_block(block);
        point_labels_from_voxels(block, labels);
    }
    PointCloud out = cloud;
    out.labels = std::move(labels);
    return out;
}

GroundElevationModel estimate_ground_unlabeled(const PointCloud& cloud, double cell,
                                               double opening_radius) {
    if (cloud.empty()) throw Error("estimate_ground_unlabeled: empty cloud");
    if (!(cell > 0.0) || !(opening_radius >= 0.0))
        throw Error("estimate_ground_unlabeled: bad parameters");

    double min_x = cloud.points[0].x, min_y = cloud.points[0].y;
    double max_x = min_x, max_y = min_y;
    for (const Point3& p : cloud.points) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    const int nx = int(std::floor((max_x - min_x) / cell)) + 1;
    const int ny = int(std::floor((max_y - min_y) / cell)) + 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> minz(std::size_t(nx) * ny, inf);
    for (const Point3& p : cloud.points) {
        const int ix = std::clamp(int(std::floor((p.x - min_x) / cell)), 0, nx - 1);
        const int iy = std::clamp(int(std::floor((p.y - min_y) / cell)), 0, ny - 1);
        auto& v = minz[std::size_t(iy) * nx + ix];
        v = std::min(v, p.z);
    }

    const int r = int(std::ceil(opening_radius / cell));
    std::vector<std::pair<int, int>> disk;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (double(dx) * dx + double(dy) * dy <= (opening_radius / cell) * (opening_radius / cell))
                disk.emplace_back(dx, dy);

    auto filtered = [&](const std::vector<double>& src, bool take_min) {
        std::vector<double> dst(src.size(), inf);
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                double acc = take_min ? inf : -inf;
                bool any = false;
                for (const auto& [dx, dy] : disk) {
                    const int jx = ix + dx, jy = iy + dy;
                    if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
                    const double v = src[std::size_t(jy) * nx + jx];
                    if (v == inf) continue;
                    acc = take_min ? std::min(acc, v) : std::max(acc, v);
                    any = true;
                }
                dst[std::size_t(iy) * nx + ix] = any ? acc : inf;
            }
        return dst;
    };
    std::vector<double> opened = filtered(filtered(minz, true), false);

    std::vector<double> elevation(opened.size(), 0.0);
    std::vector<std::uint8_t> valid(opened.size(), 0);
    for (std::size_t i = 0; i < opened.size(); ++i) {
        if (opened[i] == inf) continue;
        elevation[i] = opened[i];
        valid[i] = 1;
    }
    return GroundElevationModel(min_x, min_y, nx, ny, cell, std::move(elevation), std::move(valid));
}

}  // namespace terraseg
