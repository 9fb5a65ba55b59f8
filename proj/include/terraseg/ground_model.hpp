#pragma once

#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

// Per-cell ground elevation surface derived from Ground-labeled points.
// After construction every cell is valid: cells without ground points are
// filled from the nearest valid cell (2D Euclidean between cell centers,
// ties by lower row-major cell index).
class GroundElevationModel {
public:
    GroundElevationModel() = default;
    GroundElevationModel(double origin_x, double origin_y, int nx, int ny, double cell,
                         std::vector<double> elevation, std::vector<std::uint8_t> valid);

    double cell_size() const { return cell_; }
    double origin_x() const { return origin_x_; }
    double origin_y() const { return origin_y_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }

    // Elevation of the cell containing (x,y); out-of-extent queries clamp to
    // the border cell.
    double elevation_at(double x, double y) const;

    double cell_value(int ix, int iy) const { return elevation_[std::size_t(iy) * nx_ + ix]; }
    bool cell_was_observed(int ix, int iy) const { return observed_[std::size_t(iy) * nx_ + ix] != 0; }

private:
    void fill_holes();

    double origin_x_ = 0.0, origin_y_ = 0.0;
    double cell_ = 1.0;
    int nx_ = 0, ny_ = 0;
    std::vector<double> elevation_;
    std::vector<std::uint8_t> observed_;  // 1 where a ground point contributed
};

// Median-z-per-cell model over the cloud's Ground points. The grid covers the
// XY bounding box of the whole cloud. Throws when the cloud is unlabeled or
// has no Ground point.
GroundElevationModel build_ground_model(const PointCloud& cloud, double cell = 1.0);

}  // namespace terraseg
