#pragma once

#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

struct Triangle {
    int a = 0, b = 0, c = 0;  // indices into the input point list, CCW
};

// Bowyer-Watson Delaunay triangulation. Input must be free of duplicate
// points; fewer than 3 points or an all-collinear set yields an empty list.
std::vector<Triangle> delaunay_triangulate(const std::vector<Vec2>& points);

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c);

// Circumradius; infinity for a degenerate (collinear) triangle.
double circumradius(const Vec2& a, const Vec2& b, const Vec2& c);

// Indices of the convex hull in CCW order (collinear boundary points dropped).
// Throws when fewer than 3 points or all points are collinear.
std::vector<int> convex_hull(const std::vector<Vec2>& points);

struct AlphaShapeResult {
    std::vector<Triangle> kept;        // triangles with circumradius <= alpha
    std::vector<std::vector<int>> loops;  // boundary loops; CCW = outer, CW = hole
    bool simple = false;  // exactly one outer loop, no pinched vertex
};

// Alpha complex of a Delaunay triangulation plus its boundary loops.
AlphaShapeResult alpha_shape(const std::vector<Vec2>& points,
                             const std::vector<Triangle>& triangulation, double alpha);

// Collapses near-identical 2D points (1e-9 snap). Returns unique points and
// fills, when non-null, a map original index -> unique index.
std::vector<Vec2> dedupe_points(const std::vector<Vec2>& points,
                                std::vector<int>* original_to_unique = nullptr);

}  // namespace terraseg
