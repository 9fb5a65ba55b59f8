#pragma once

#include <array>
#include <string>
#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

struct VoxelParams {
    double large_w = 40.0, large_d = 40.0, large_h = 40.0;  // meters
    double small_w = 0.5, small_d = 0.5, small_h = 0.5;

    // Small-cell grid dimensions; throws unless each large dimension is an
    // exact multiple of the matching small dimension.
    std::array<int, 3> grid_dims() const;
};

inline constexpr std::uint8_t kNoLabel = 255;

// One large voxel: a dense small-voxel occupancy grid plus the point
// memberships that produced it. Cell linear index is (xi * dn + yi) * hn + zi.
struct VoxelBlock {
    std::array<int, 3> index{};         // large-voxel grid index (i,j,k)
    std::array<double, 3> origin{};     // world min corner of the block
    std::array<int, 3> dims{};          // (W_N, D_N, H_N)
    std::array<double, 3> small_size{};
    std::vector<std::uint8_t> occupancy;   // 1 where >= 1 point falls
    std::vector<std::uint8_t> label_grid;  // class codes; kNoLabel where unset

    struct Member {
        std::size_t point;  // index into the source cloud
        std::size_t cell;   // linear cell index
    };
    std::vector<Member> members;

    std::size_t cell_count() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }
    std::size_t cell_linear(int xi, int yi, int zi) const {
        return (std::size_t(xi) * dims[1] + yi) * dims[2] + zi;
    }
    std::array<int, 3> cell_coords(std::size_t linear) const;
    std::array<double, 3> cell_center(std::size_t linear) const;
};

// Partitions the cloud into large voxels anchored at the floor of the cloud's
// min corner to multiples of the large size. Boundary points go to the
// higher-index cell, except at the global max corner where they clamp into
// the last cell. Only blocks containing points are returned, sorted by index.
std::vector<VoxelBlock> voxelize(const PointCloud& cloud, const VoxelParams& params = {});

// Majority label per occupied cell (ties to the lowest class code) from
// per-point labels covering the source cloud.
void voxel_labels_from_points(VoxelBlock& block, const std::vector<TerrainClass>& point_labels);

// Writes each member point's cell label into labels_out (preallocated to the
// source cloud size). Throws when an occupied cell is unlabeled.
void point_labels_from_voxels(const VoxelBlock& block, std::vector<TerrainClass>& labels_out);

// Debug block dump: little-endian header (index, origin, small size, dims)
// followed by bit-packed occupancy, LSB-first in cell-linear order.
void write_block_dump(const VoxelBlock& block, const std::string& path);
VoxelBlock read_block_dump(const std::string& path);  // memberships are not stored

}  // namespace terraseg
