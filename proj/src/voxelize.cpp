#include "terraseg/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace terraseg {

namespace {

int exact_ratio(double large, double small, const char* axis) {
    if (!(large > 0.0) || !(small > 0.0))
        throw Error(std::string("voxel sizes must be > 0 (axis ") + axis + ")");
    const double ratio = large / small;
    const int n = int(std::llround(ratio));
    if (n < 1 || std::abs(n * small - large) > 1e-9 * std::max(1.0, large))
        throw Error(std::string("large voxel size is not divisible by small size on axis ") + axis);
    return n;
}

}  // namespace

std::array<int, 3> VoxelParams::grid_dims() const {
    return {exact_ratio(large_w, small_w, "x"), exact_ratio(large_d, small_d, "y"),
            exact_ratio(large_h, small_h, "z")};
}

std::array<int, 3> VoxelBlock::cell_coords(std::size_t linear) const {
    const int zi = int(linear % dims[2]);
    const int yi = int((linear / dims[2]) % dims[1]);
    const int xi = int(linear / (std::size_t(dims[1]) * dims[2]));
    return {xi, yi, zi};
}

std::array<double, 3> VoxelBlock::cell_center(std::size_t linear) const {
    const auto c = cell_coords(linear);
    return {origin[0] + (c[0] + 0.5) * small_size[0], origin[1] + (c[1] + 0.5) * small_size[1],
            origin[2] + (c[2] + 0.5) * small_size[2]};
}

std::vector<VoxelBlock> voxelize(const PointCloud& cloud, const VoxelParams& params) {
    if (cloud.empty()) throw Error("voxelize: empty cloud");
    cloud.check_consistent();
    const std::array<int, 3> dims = params.grid_dims();
    const double large[3] = {params.large_w, params.large_d, params.large_h};
    const double small[3] = {params.small_w, params.small_d, params.small_h};

    double lo[3], hi[3];
    for (int a = 0; a < 3; ++a) lo[a] = hi[a] = (a == 0 ? cloud.points[0].x
                                                 : a == 1 ? cloud.points[0].y
                                                          : cloud.points[0].z);
    for (const Point3& p : cloud.points) {
        const double c[3] = {p.x, p.y, p.z};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
        }
    }
    double anchor[3];
    long long n_large[3];
    for (int a = 0; a < 3; ++a) {
        anchor[a] = std::floor(lo[a] / large[a]) * large[a];
        n_large[a] = std::max<long long>(1, (long long)std::ceil((hi[a] - anchor[a]) / large[a]));
    }

    std::map<std::array<int, 3>, VoxelBlock> blocks;
    for (std::size_t pi = 0; pi < cloud.points.size(); ++pi) {
        const Point3& p = cloud.points[pi];
        const double c[3] = {p.x, p.y, p.z};
        std::array<int, 3> bi{};
        for (int a = 0; a < 3; ++a) {
            long long li = (long long)std::floor((c[a] - anchor[a]) / large[a]);
            li = std::clamp(li, 0LL, n_large[a] - 1);  // global max corner clamps down
            bi[a] = int(li);
        }
        auto [it, inserted] = blocks.try_emplace(bi);
        VoxelBlock& block = it->second;
        if (inserted) {
            block.index = bi;
            for (int a = 0; a < 3; ++a) block.origin[a] = anchor[a] + bi[a] * large[a];
            block.dims = dims;
            block.small_size = {small[0], small[1], small[2]};
            block.occupancy.assign(block.cell_count(), 0);
        }
        int ci[3];
        for (int a = 0; a < 3; ++a) {
            const int si = int(std::floor((c[a] - block.origin[a]) / small[a]));
            ci[a] = std::clamp(si, 0, dims[a] - 1);
        }
        const std::size_t cell = block.cell_linear(ci[0], ci[1], ci[2]);
        block.occupancy[cell] = 1;
        block.members.push_back({pi, cell});
    }

    std::vector<VoxelBlock> out;
    out.reserve(blocks.size());
    for (auto& [key, block] : blocks) out.push_back(std::move(block));
    return out;  // std::map iteration is already (i,j,k)-sorted
}

void voxel_labels_from_points(VoxelBlock& block, const std::vector<TerrainClass>& point_labels) {
    std::map<std::size_t, std::array<std::uint32_t, kTerrainClassCount>> counts;
    for (const auto& m : block.members) {
        if (m.point >= point_labels.size())
            throw Error("voxel_labels_from_points: member point has no label");
        counts[m.cell][std::size_t(point_labels[m.point])]++;
    }
    block.label_grid.assign(block.cell_count(), kNoLabel);
    for (const auto& [cell, tally] : counts) {
        int best = 0;
        for (int c = 1; c < kTerrainClassCount; ++c)
            if (tally[c] > tally[best]) best = c;  // ties keep the lowest code
        block.label_grid[cell] = std::uint8_t(best);
    }
}

void point_labels_from_voxels(const VoxelBlock& block, std::vector<TerrainClass>& labels_out) {
    if (block.label_grid.size() != block.cell_count())
        throw Error("point_labels_from_voxels: block has no label grid");
    for (const auto& m : block.members) {
        const std::uint8_t code = block.label_grid[m.cell];
        if (code == kNoLabel)
            throw Error("point_labels_from_voxels: occupied cell " + std::to_string(m.cell) +
                        " is unlabeled");
        labels_out[m.point] = TerrainClass(code);
    }
}

namespace {
constexpr char kDumpMagic[4] = {'T', 'S', 'V', 'B'};
constexpr std::uint32_t kDumpVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error("truncated block dump '" + path + "'");
    return v;
}
}  // namespace

void write_block_dump(const VoxelBlock& block, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out.write(kDumpMagic, 4);
    put(out, kDumpVersion);
    for (int v : block.index) put(out, std::int32_t(v));
    for (double v : block.origin) put(out, v);
    for (double v : block.small_size) put(out, v);
    for (int v : block.dims) put(out, std::uint32_t(v));
    std::vector<std::uint8_t> packed((block.cell_count() + 7) / 8, 0);
    for (std::size_t i = 0; i < block.occupancy.size(); ++i)
        if (block.occupancy[i]) packed[i >> 3] |= std::uint8_t(1u << (i & 7));
    out.write(reinterpret_cast<const char*>(packed.data()), std::streamsize(packed.size()));
    if (!out) throw Error("write failed for '" + path + "'");
}

VoxelBlock read_block_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kDumpMagic, 4) != 0)
        throw Error("'" + path + "' is not a voxel block dump");
    if (get<std::uint32_t>(in, path) != kDumpVersion)
        throw Error("unsupported block dump version in '" + path + "'");
    VoxelBlock block;
    for (int a = 0; a < 3; ++a) block.index[a] = get<std::int32_t>(in, path);
    for (int a = 0; a < 3; ++a) block.origin[a] = get<double>(in, path);
    for (int a = 0; a < 3; ++a) block.small_size[a] = get<double>(in, path);
    for (int a = 0; a < 3; ++a) block.dims[a] = int(get<std::uint32_t>(in, path));
    const std::size_t cells = block.cell_count();
    std::vector<std::uint8_t> packed((cells + 7) / 8);
    in.read(reinterpret_cast<char*>(packed.data()), std::streamsize(packed.size()));
    if (std::size_t(in.gcount()) != packed.size()) throw Error("truncated block dump '" + path + "'");
    block.occupancy.assign(cells, 0);
    for (std::size_t i = 0; i < cells; ++i)
        block.occupancy[i] = (packed[i >> 3] >> (i & 7)) & 1u;
    return block;
}

}  // namespace terraseg
