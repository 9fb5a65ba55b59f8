#include "terraseg/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace terraseg {

namespace {

long double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (long double)(b.x - a.x) * (c.y - a.y) - (long double)(b.y - a.y) * (c.x - a.x);
}

// > 0 when p lies strictly inside the circumcircle of CCW triangle abc.
long double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    const long double ax = a.x - p.x, ay = a.y - p.y;
    const long double bx = b.x - p.x, by = b.y - p.y;
    const long double cx = c.x - p.x, cy = c.y - p.y;
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
}

struct Edge {
    int u, v;
    bool operator<(const Edge& o) const { return u != o.u ? u < o.u : v < o.v; }
};

Edge undirected(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

}  // namespace

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::abs(double(orient2d(a, b, c))) * 0.5;
}

double circumradius(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double area2 = double(orient2d(a, b, c));
    if (area2 == 0.0) return std::numeric_limits<double>::infinity();
    const double la = std::hypot(b.x - c.x, b.y - c.y);
    const double lb = std::hypot(a.x - c.x, a.y - c.y);
    const double lc = std::hypot(a.x - b.x, a.y - b.y);
    return la * lb * lc / (2.0 * std::abs(area2));
}

std::vector<Vec2> dedupe_points(const std::vector<Vec2>& points, std::vector<int>* original_to_unique) {
    std::vector<Vec2> unique;
    std::map<std::pair<long long, long long>, int> seen;
    if (original_to_unique) original_to_unique->assign(points.size(), -1);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto key = std::make_pair(llround(points[i].x * 1e9), llround(points[i].y * 1e9));
        auto [it, inserted] = seen.emplace(key, int(unique.size()));
        if (inserted) unique.push_back(points[i]);
        if (original_to_unique) (*original_to_unique)[i] = it->second;
    }
    return unique;
}

std::vector<Triangle> delaunay_triangulate(const std::vector<Vec2>& points) {
    std::vector<Triangle> result;
    const int n = int(points.size());
    if (n < 3) return result;

    // Normalize into the unit square for predicate conditioning.
    double min_x = points[0].x, max_x = points[0].x;
    double min_y = points[0].y, max_y = points[0].y;
    for (const Vec2& p : points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
    std::vector<Vec2> pts(n + 3);
    for (int i = 0; i < n; ++i)
        pts[i] = {(points[i].x - min_x) / span, (points[i].y - min_y) / span};
    // Super-triangle well outside the unit square.
    pts[n] = {-30.0, -20.0};
    pts[n + 1] = {31.0, -20.0};
    pts[n + 2] = {0.5, 50.0};

    struct Tri {
        int a, b, c;
        bool alive;
    };
    std::vector<Tri> tris;
    tris.push_back({n, n + 1, n + 2, true});

    std::vector<int> bad;
    std::map<Edge, int> edge_use;
    for (int i = 0; i < n; ++i) {
        const Vec2& p = pts[i];
        bad.clear();
        for (int t = 0; t < int(tris.size()); ++t) {
            if (!tris[t].alive) continue;
            if (incircle(pts[tris[t].a], pts[tris[t].b], pts[tris[t].c], p) > 0) bad.push_back(t);
        }
        // Cavity boundary = edges used by exactly one bad triangle.
        edge_use.clear();
        for (int t : bad) {
            const Tri& tr = tris[t];
            for (const Edge e : {undirected(tr.a, tr.b), undirected(tr.b, tr.c), undirected(tr.c, tr.a)})
                ++edge_use[e];
            tris[t].alive = false;
        }
        for (const auto& [e, uses] : edge_use) {
            if (uses != 1) continue;
            // Orient the new triangle CCW.
            if (orient2d(pts[e.u], pts[e.v], p) > 0)
                tris.push_back({e.u, e.v, i, true});
            else
                tris.push_back({e.v, e.u, i, true});
        }
    }

    for (const Tri& t : tris) {
        if (!t.alive) continue;
        if (t.a >= n || t.b >= n || t.c >= n) continue;  // touches the super-triangle
        if (orient2d(pts[t.a], pts[t.b], pts[t.c]) <= 0) continue;
        result.push_back({t.a, t.b, t.c});
    }
    return result;
}

std::vector<int> convex_hull(const std::vector<Vec2>& points) {
    const int n = int(points.size());
    if (n < 3) throw Error("convex hull needs at least 3 points");
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return points[i].x != points[j].x ? points[i].x < points[j].x : points[i].y < points[j].y;
    });
    auto build = [&](std::vector<int>& chain, auto begin, auto end) {
        for (auto it = begin; it != end; ++it) {
            while (chain.size() >= 2 &&
                   orient2d(points[chain[chain.size() - 2]], points[chain.back()], points[*it]) <= 0)
                chain.pop_back();
            chain.push_back(*it);
        }
    };
    std::vector<int> lower, upper;
    build(lower, order.begin(), order.end());
    build(upper, order.rbegin(), order.rend());
    lower.pop_back();
    upper.pop_back();
    lower.insert(lower.end(), upper.begin(), upper.end());
    if (lower.size() < 3) throw Error("convex hull degenerate: points are collinear");
    return lower;
}

AlphaShapeResult alpha_shape(const std::vector<Vec2>& points,
                             const std::vector<Triangle>& triangulation, double alpha) {
    AlphaShapeResult res;
    for (const Triangle& t : triangulation)
        if (circumradius(points[t.a], points[t.b], points[t.c]) <= alpha) res.kept.push_back(t);
    if (res.kept.empty()) return res;

    // Directed boundary edges inherit the CCW orientation of their triangle,
    // so outer loops come out CCW and holes CW.
    std::map<Edge, int> uses;
    for (const Triangle& t : res.kept)
        for (const Edge e : {undirected(t.a, t.b), undirected(t.b, t.c), undirected(t.c, t.a)})
            ++uses[e];
    std::unordered_map<int, int> next;  // from-vertex -> to-vertex
    bool pinched = false;
    for (const Triangle& t : res.kept) {
        const int vs[4] = {t.a, t.b, t.c, t.a};
        for (int k = 0; k < 3; ++k) {
            if (uses[undirected(vs[k], vs[k + 1])] != 1) continue;
            if (!next.emplace(vs[k], vs[k + 1]).second) pinched = true;
        }
    }

    std::unordered_map<int, bool> visited;
    for (const auto& [start, unused] : next) {
        if (visited[start]) continue;
        std::vector<int> loop;
        int v = start;
        while (true) {
            loop.push_back(v);
            visited[v] = true;
            auto it = next.find(v);
            if (it == next.end()) {
                pinched = true;  // open chain, should not happen on a valid complex
                break;
            }
            v = it->second;
            if (v == start) break;
            if (visited[v]) {
                pinched = true;
                break;
            }
        }
        if (loop.size() >= 3) res.loops.push_back(std::move(loop));
    }

    int outer_count = 0;
    for (const auto& loop : res.loops) {
        double twice = 0.0;
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Vec2& a = points[loop[i]];
            const Vec2& b = points[loop[(i + 1) % loop.size()]];
            twice += a.x * b.y - b.x * a.y;
        }
        if (twice > 0.0) ++outer_count;
    }
    res.simple = !pinched && outer_count == 1;
    // Outer loop first.
    std::stable_sort(res.loops.begin(), res.loops.end(), [&](const auto& l1, const auto& l2) {
        auto signed_area = [&](const std::vector<int>& loop) {
            double twice = 0.0;
            for (std::size_t i = 0; i < loop.size(); ++i) {
                const Vec2& a = points[loop[i]];
                const Vec2& b = points[loop[(i + 1) % loop.size()]];
                twice += a.x * b.y - b.x * a.y;
            }
            return twice;
        };
        return signed_area(l1) > signed_area(l2);
    });
    return res;
}

}  // namespace terraseg
