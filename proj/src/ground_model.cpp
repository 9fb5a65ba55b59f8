#include "terraseg/ground_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace terraseg {

GroundElevationModel::GroundElevationModel(double origin_x, double origin_y, int nx, int ny,
                                           double cell, std::vector<double> elevation,
                                           std::vector<std::uint8_t> valid)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      cell_(cell),
      nx_(nx),
      ny_(ny),
      elevation_(std::move(elevation)),
      observed_(std::move(valid)) {
    if (nx_ < 1 || ny_ < 1) throw Error("ground model grid must be at least 1x1");
    if (!(cell_ > 0.0)) throw Error("ground model cell size must be > 0");
    if (elevation_.size() != std::size_t(nx_) * ny_ || observed_.size() != elevation_.size())
        throw Error("ground model grid buffer size mismatch");
    fill_holes();
}

double GroundElevationModel::elevation_at(double x, double y) const {
    const int ix = std::clamp(int(std::floor((x - origin_x_) / cell_)), 0, nx_ - 1);
    const int iy = std::clamp(int(std::floor((y - origin_y_) / cell_)), 0, ny_ - 1);
    return elevation_[std::size_t(iy) * nx_ + ix];
}

void GroundElevationModel::fill_holes() {
    bool any_valid = false;
    for (std::uint8_t v : observed_) any_valid |= v != 0;
    if (!any_valid) throw Error("ground model has no observed cell");

    std::vector<double> filled = elevation_;
    for (int iy = 0; iy < ny_; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
            const std::size_t idx = std::size_t(iy) * nx_ + ix;
            if (observed_[idx]) continue;
            // Expanding ring search for the nearest observed cell; distances
            // are between cell centers, ties resolved by lower cell index.
            double best_d2 = std::numeric_limits<double>::infinity();
            std::size_t best_idx = 0;
            bool found = false;
            const int max_ring = std::max(nx_, ny_);
            for (int ring = 0; ring <= max_ring; ++ring) {
                if (found && double(ring - 1) * double(ring - 1) > best_d2) break;
                const int cx0 = std::max(ix - ring, 0), cx1 = std::min(ix + ring, nx_ - 1);
                const int cy0 = std::max(iy - ring, 0), cy1 = std::min(iy + ring, ny_ - 1);
                for (int cy = cy0; cy <= cy1; ++cy)
                    for (int cx = cx0; cx <= cx1; ++cx) {
                        if (ring > 0 && cx != cx0 && cx != cx1 && cy != cy0 && cy != cy1) continue;
                        const std::size_t cand = std::size_t(cy) * nx_ + cx;
                        if (!observed_[cand]) continue;
                        const double dx = cx - ix, dy = cy - iy;
                        const double d2 = dx * dx + dy * dy;
                        if (d2 < best_d2 || (d2 == best_d2 && cand < best_idx)) {
                            best_d2 = d2;
                            best_idx = cand;
                            found = true;
                        }
                    }
            }
            filled[idx] = elevation_[best_idx];
        }
    }
    elevation_ = std::move(filled);
}

GroundElevationModel build_ground_model(const PointCloud& cloud, double cell) {
    cloud.check_consistent();
    if (!cloud.has_labels()) throw Error("build_ground_model needs a labeled cloud");
    if (!(cell > 0.0)) throw Error("ground model cell size must be > 0");
    if (cloud.empty()) throw Error("build_ground_model needs a non-empty cloud");

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

    std::vector<std::vector<double>> zs(std::size_t(nx) * ny);
    bool any_ground = false;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        if ((*cloud.labels)[i] != TerrainClass::Ground) continue;
        any_ground = true;
        const Point3& p = cloud.points[i];
        const int ix = std::clamp(int(std::floor((p.x - min_x) / cell)), 0, nx - 1);
        const int iy = std::clamp(int(std::floor((p.y - min_y) / cell)), 0, ny - 1);
        zs[std::size_t(iy) * nx + ix].push_back(p.z);
    }
    if (!any_ground) throw Error("build_ground_model: cloud has no Ground point");

    std::vector<double> elevation(zs.size(), 0.0);
    std::vector<std::uint8_t> valid(zs.size(), 0);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        auto& v = zs[i];
        if (v.empty()) continue;
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + mid, v.end());
        double med = v[mid];
        if (v.size() % 2 == 0) {
            const double lower = *std::max_element(v.begin(), v.begin() + mid);
            med = 0.5 * (med + lower);
        }
        elevation[i] = med;
        valid[i] = 1;
    }
    return GroundElevationModel(min_x, min_y, nx, ny, cell, std::move(elevation), std::move(valid));
}

}  // namespace terraseg
