#include "terraseg/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace terraseg {

SpatialIndex::SpatialIndex(const std::vector<Point3>& points) : points_(points) {
    for (const Point3& p : points_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw Error("spatial index input contains a non-finite coordinate");
    if (points_.empty()) {
        nx_ = ny_ = 1;
        cells_.resize(1);
        return;
    }
    double max_x = points_[0].x, max_y = points_[0].y;
    min_x_ = points_[0].x;
    min_y_ = points_[0].y;
    for (const Point3& p : points_) {
        min_x_ = std::min(min_x_, p.x);
        min_y_ = std::min(min_y_, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    // Aim for a handful of points per cell.
    const double extent = std::max({max_x - min_x_, max_y - min_y_, 1e-9});
    cell_ = std::max(extent / std::max(1.0, std::sqrt(double(points_.size()))), 1e-6);
    nx_ = int((max_x - min_x_) / cell_) + 1;
    ny_ = int((max_y - min_y_) / cell_) + 1;
    cells_.resize(std::size_t(nx_) * ny_);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const int cx = cell_of_x(points_[i].x);
        const int cy = cell_of_y(points_[i].y);
        cells_[std::size_t(cy) * nx_ + cx].push_back(i);
    }
}

int SpatialIndex::cell_of_x(double x) const {
    return std::clamp(int((x - min_x_) / cell_), 0, nx_ - 1);
}

int SpatialIndex::cell_of_y(double y) const {
    return std::clamp(int((y - min_y_) / cell_), 0, ny_ - 1);
}

const std::vector<std::size_t>& SpatialIndex::cell_points(int cx, int cy) const {
    return cells_[std::size_t(cy) * nx_ + cx];
}

std::vector<std::size_t> SpatialIndex::query_radius(const Point3& center, double radius) const {
    if (!(radius > 0.0)) throw Error("query radius must be > 0");
    std::vector<std::size_t> out;
    if (points_.empty()) return out;
    const double r2 = radius * radius;
    const int cx0 = cell_of_x(center.x - radius), cx1 = cell_of_x(center.x + radius);
    const int cy0 = cell_of_y(center.y - radius), cy1 = cell_of_y(center.y + radius);
    for (int cy = cy0; cy <= cy1; ++cy)
        for (int cx = cx0; cx <= cx1; ++cx)
            for (std::size_t i : cell_points(cx, cy)) {
                const Point3& p = points_[i];
                const double dx = p.x - center.x, dy = p.y - center.y, dz = p.z - center.z;
                if (dx * dx + dy * dy + dz * dz <= r2) out.push_back(i);
            }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> SpatialIndex::query_cylinder(const Point3& center, double radius) const {
    if (!(radius > 0.0)) throw Error("query radius must be > 0");
    std::vector<std::size_t> out;
    if (points_.empty()) return out;
    const double r2 = radius * radius;
    const int cx0 = cell_of_x(center.x - radius), cx1 = cell_of_x(center.x + radius);
    const int cy0 = cell_of_y(center.y - radius), cy1 = cell_of_y(center.y + radius);
    for (int cy = cy0; cy <= cy1; ++cy)
        for (int cx = cx0; cx <= cx1; ++cx)
            for (std::size_t i : cell_points(cx, cy)) {
                const double dx = points_[i].x - center.x, dy = points_[i].y - center.y;
                if (dx * dx + dy * dy <= r2) out.push_back(i);
            }
    std::sort(out.begin(), out.end());
    return out;
}

double SpatialIndex::min_z_in_cylinder(double x, double y, double radius) const {
    if (!(radius > 0.0)) throw Error("query radius must be > 0");
    double best = std::numeric_limits<double>::infinity();
    if (points_.empty()) return best;
    const double r2 = radius * radius;
    const int cx0 = cell_of_x(x - radius), cx1 = cell_of_x(x + radius);
    const int cy0 = cell_of_y(y - radius), cy1 = cell_of_y(y + radius);
    for (int cy = cy0; cy <= cy1; ++cy)
        for (int cx = cx0; cx <= cx1; ++cx)
            for (std::size_t i : cell_points(cx, cy)) {
                const double dx = points_[i].x - x, dy = points_[i].y - y;
                if (dx * dx + dy * dy <= r2) best = std::min(best, points_[i].z);
            }
    return best;
}

std::size_t SpatialIndex::nearest(const Point3& query) const {
    if (points_.empty()) throw Error("nearest query on an empty index");
    double best_d2 = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    bool found = false;
    const int qx = cell_of_x(query.x), qy = cell_of_y(query.y);
    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
        if (found) {
            // Cells at this ring are at least (ring-1)*cell away in XY.
            const double lower = double(ring - 1) * cell_;
            if (lower > 0.0 && lower * lower > best_d2) break;
        }
        const int cx0 = std::max(qx - ring, 0), cx1 = std::min(qx + ring, nx_ - 1);
        const int cy0 = std::max(qy - ring, 0), cy1 = std::min(qy + ring, ny_ - 1);
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx) {
                if (ring > 0 && cx != cx0 && cx != cx1 && cy != cy0 && cy != cy1)
                    continue;  // interior cells were handled by earlier rings
                for (std::size_t i : cell_points(cx, cy)) {
                    const Point3& p = points_[i];
                    const double dx = p.x - query.x, dy = p.y - query.y, dz = p.z - query.z;
                    const double d2 = dx * dx + dy * dy + dz * dz;
                    if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
                        best_d2 = d2;
                        best = i;
                        found = true;
                    }
                }
            }
    }
    return best;
}

}  // namespace terraseg
