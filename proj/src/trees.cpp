#include "terraseg/trees.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "terraseg/delaunay.hpp"

namespace terraseg {

namespace {

constexpr double kFootprintCell = 0.5;
constexpr double kColorNormalizer = 441.673;  // full-range RGB distance

double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1p-53; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct UnionFind {
    std::vector<int> parent, size;
    explicit UnionFind(int n) : parent(n), size(n, 1) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

std::uint64_t cell_key(long long ix, long long iy, long long iz) {
    std::uint64_t h = 1469598103934665603ULL;
    for (long long v : {ix, iy, iz}) {
        h ^= std::uint64_t(v) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        h *= 1099511628211ULL;
    }
    return h;
}

FootprintMask build_footprint(const std::vector<Point3>& pts, const std::vector<std::size_t>& members) {
    double min_x = pts[members[0]].x, min_y = pts[members[0]].y;
    double max_x = min_x, max_y = min_y;
    for (std::size_t i : members) {
        min_x = std::min(min_x, pts[i].x);
        min_y = std::min(min_y, pts[i].y);
        max_x = std::max(max_x, pts[i].x);
        max_y = std::max(max_y, pts[i].y);
    }
    FootprintMask mask;
    mask.cell = kFootprintCell;
    mask.origin_x = std::floor(min_x / mask.cell) * mask.cell;
    mask.origin_y = std::floor(min_y / mask.cell) * mask.cell;
    mask.nx = int(std::floor((max_x - mask.origin_x) / mask.cell)) + 1;
    mask.ny = int(std::floor((max_y - mask.origin_y) / mask.cell)) + 1;
    mask.cells.assign(std::size_t(mask.nx) * mask.ny, 0);
    for (std::size_t i : members) {
        const int ix = std::clamp(int(std::floor((pts[i].x - mask.origin_x) / mask.cell)), 0, mask.nx - 1);
        const int iy = std::clamp(int(std::floor((pts[i].y - mask.origin_y) / mask.cell)), 0, mask.ny - 1);
        mask.cells[std::size_t(iy) * mask.nx + ix] = 1;
    }
    return mask;
}

}  // namespace

bool FootprintMask::contains(double x, double y) const {
    const int ix = int(std::floor((x - origin_x) / cell));
    const int iy = int(std::floor((y - origin_y) / cell));
    return cell_at(ix, iy);
}

std::size_t FootprintMask::occupied_count() const {
    std::size_t n = 0;
    for (std::uint8_t c : cells) n += (c != 0);
    return n;
}

std::vector<VegCluster> connected_components(const std::vector<Point3>& veg_points,
                                             double link_radius) {
    if (veg_points.empty()) throw Error("connected_components: empty vegetation set");
    if (!(link_radius > 0.0)) throw Error("connected_components: link radius must be positive");
    const int n = int(veg_points.size());
    const double d2_max = link_radius * link_radius;
    UnionFind uf(n);
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
    grid.reserve(std::size_t(n) * 2);
    for (int i = 0; i < n; ++i) {
        const Point3& p = veg_points[std::size_t(i)];
        const long long ix = (long long)std::floor(p.x / link_radius);
        const long long iy = (long long)std::floor(p.y / link_radius);
        const long long iz = (long long)std::floor(p.z / link_radius);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy)
                for (long long dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find(cell_key(ix + dx, iy + dy, iz + dz));
                    if (it == grid.end()) continue;
                    for (int j : it->second) {
                        const Point3& q = veg_points[std::size_t(j)];
                        const double ddx = p.x - q.x, ddy = p.y - q.y, ddz = p.z - q.z;
                        if (ddx * ddx + ddy * ddy + ddz * ddz <= d2_max) uf.unite(i, j);
                    }
                }
        grid[cell_key(ix, iy, iz)].push_back(i);
    }
    std::unordered_map<int, std::vector<std::size_t>> groups;
    for (int i = 0; i < n; ++i) groups[uf.find(i)].push_back(std::size_t(i));
    std::vector<VegCluster> clusters;
    clusters.reserve(groups.size());
    for (auto& [root, members] : groups) {
        (void)root;
        VegCluster c;
        c.members = std::move(members);  // ascending by construction
        c.footprint = build_footprint(veg_points, c.members);
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(), [](const VegCluster& a, const VegCluster& b) {
        if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        return a.members.front() < b.members.front();
    });
    return clusters;
}

double coverage_area(const std::vector<Point3>& veg_points, const VegCluster& cluster,
                     double max_edge) {
    std::vector<Vec2> xy;
    xy.reserve(cluster.members.size());
    for (std::size_t i : cluster.members) xy.push_back({veg_points[i].x, veg_points[i].y});
    const std::vector<Vec2> unique = dedupe_points(xy);
    if (unique.size() < 3) return 0.0;
    const std::vector<Triangle> tris = delaunay_triangulate(unique);
    const double e2_max = max_edge * max_edge;
    auto edge2 = [](const Vec2& a, const Vec2& b) {
        const double dx = a.x - b.x, dy = a.y - b.y;
        return dx * dx + dy * dy;
    };
    double area = 0.0;
    for (const Triangle& t : tris) {
        const Vec2 &a = unique[std::size_t(t.a)], &b = unique[std::size_t(t.b)],
                   &c = unique[std::size_t(t.c)];
        if (edge2(a, b) > e2_max || edge2(b, c) > e2_max || edge2(c, a) > e2_max) continue;
        area += triangle_area(a, b, c);
    }
    return area;
}

int estimate_tree_count(double area, double avg_height) {
    if (!(area >= 0.0)) throw Error("estimate_tree_count: negative area");
    if (!(avg_height > 0.0)) throw Error("estimate_tree_count: height must be positive");
    const double crown = std::clamp(0.5 * avg_height, 2.0, 15.0);
    const double footprint = M_PI * (crown / 2.0) * (crown / 2.0);
    return int(std::max<long long>(1, std::llround(area / footprint)));
}

namespace {

// One Bridson run at a fixed radius. Background grid cell r/sqrt(2) holds at
// most one sample, so the 5x5 neighborhood scan covers every conflict.
std::vector<Vec2> bridson_run(const FootprintMask& mask, double r, std::mt19937_64& rng) {
    const double g = r / std::sqrt(2.0);
    const double w = mask.nx * mask.cell, h = mask.ny * mask.cell;
    const int gx = std::max(1, int(std::ceil(w / g)));
    const int gy = std::max(1, int(std::ceil(h / g)));
    std::vector<int> occupant(std::size_t(gx) * gy, -1);
    std::vector<Vec2> samples;
    std::vector<int> active;
    auto slot = [&](const Vec2& p) {
        const int cx = std::clamp(int(std::floor((p.x - mask.origin_x) / g)), 0, gx - 1);
        const int cy = std::clamp(int(std::floor((p.y - mask.origin_y) / g)), 0, gy - 1);
        return std::pair<int, int>(cx, cy);
    };
    auto acceptable = [&](const Vec2& p) {
        const auto [cx, cy] = slot(p);
        if (occupant[std::size_t(cy) * gx + cx] >= 0) return false;
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) {
                const int jx = cx + dx, jy = cy + dy;
                if (jx < 0 || jy < 0 || jx >= gx || jy >= gy) continue;
                const int s = occupant[std::size_t(jy) * gx + jx];
                if (s < 0) continue;
                const double ddx = p.x - samples[std::size_t(s)].x;
                const double ddy = p.y - samples[std::size_t(s)].y;
                if (ddx * ddx + ddy * ddy < r * r) return false;
            }
        return true;
    };
    auto push = [&](const Vec2& p) {
        const auto [cx, cy] = slot(p);
        occupant[std::size_t(cy) * gx + cx] = int(samples.size());
        active.push_back(int(samples.size()));
        samples.push_back(p);
    };

    Vec2 first{};
    bool found = false;
    for (int t = 0; t < 10000 && !found; ++t) {
        const Vec2 p{mask.origin_x + unit(rng) * w, mask.origin_y + unit(rng) * h};
        if (mask.contains(p.x, p.y)) {
            first = p;
            found = true;
        }
    }
    if (!found) {
        for (int iy = 0; iy < mask.ny && !found; ++iy)
            for (int ix = 0; ix < mask.nx && !found; ++ix)
                if (mask.cell_at(ix, iy)) {
                    first = mask.cell_center(ix, iy);
                    found = true;
                }
    }
    if (!found) return {};
    push(first);

    constexpr int kAttempts = 30;
    while (!active.empty()) {
        std::size_t pick = std::size_t(unit(rng) * double(active.size()));
        if (pick >= active.size()) pick = active.size() - 1;
        const Vec2 base = samples[std::size_t(active[pick])];
        bool placed = false;
        for (int t = 0; t < kAttempts; ++t) {
            const double ang = 2.0 * M_PI * unit(rng);
            const double rad = r * (1.0 + unit(rng));
            const Vec2 cand{base.x + rad * std::cos(ang), base.y + rad * std::sin(ang)};
            if (!mask.contains(cand.x, cand.y)) continue;
            if (!acceptable(cand)) continue;
            push(cand);
            placed = true;
            break;
        }
        if (!placed) {
            active[pick] = active.back();
            active.pop_back();
        }
    }
    return samples;
}

}  // namespace

PoissonPlacement poisson_disc_place(const FootprintMask& mask, int n_target, std::uint64_t seed) {
    if (n_target < 1) throw Error("poisson_disc_place: target count must be >= 1");
    const std::size_t occupied = mask.occupied_count();
    if (occupied == 0) throw Error("poisson_disc_place: empty footprint mask");
    if (n_target == 1 || occupied == 1) {
        // Occupied cell closest to the mask centroid, scanned in row-major order.
        double sx = 0.0, sy = 0.0;
        for (int iy = 0; iy < mask.ny; ++iy)
            for (int ix = 0; ix < mask.nx; ++ix)
                if (mask.cell_at(ix, iy)) {
                    const Vec2 c = mask.cell_center(ix, iy);
                    sx += c.x;
                    sy += c.y;
                }
        sx /= double(occupied);
        sy /= double(occupied);
        Vec2 best{};
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int iy = 0; iy < mask.ny; ++iy)
            for (int ix = 0; ix < mask.nx; ++ix) {
                if (!mask.cell_at(ix, iy)) continue;
                const Vec2 c = mask.cell_center(ix, iy);
                const double d2 = (c.x - sx) * (c.x - sx) + (c.y - sy) * (c.y - sy);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
        return {{best}, 0.0};
    }

    const double w = mask.nx * mask.cell, h = mask.ny * mask.cell;
    double lo = mask.cell / 8.0;
    double hi = std::max(std::sqrt(w * w + h * h), lo * 2.0);
    PoissonPlacement result;
    for (int step = 0; step < 12; ++step) {
        const double mid = 0.5 * (lo + hi);
        std::mt19937_64 rng(mix_seed(seed, std::uint64_t(step)));
        result.locations = bridson_run(mask, mid, rng);
        result.radius = mid;
        const double count = double(result.locations.size());
        if (count >= 0.8 * n_target && count <= 1.2 * n_target) return result;
        if (count > 1.2 * n_target)
            lo = mid;  // too many samples, widen the spacing
        else
            hi = mid;
    }
    return result;
}

namespace {

// One k-means++ seeding followed by Lloyd iterations.
std::vector<Vec2> kmeans_once(const std::vector<Vec2>& points, int k, std::uint64_t seed) {
    const std::size_t n = points.size();
    std::mt19937_64 rng(seed);
    auto dist2 = [&](const Vec2& a, const Vec2& b) {
        const double dx = a.x - b.x, dy = a.y - b.y;
        return dx * dx + dy * dy;
    };

    std::vector<Vec2> centers;
    centers.reserve(std::size_t(k));
    std::vector<char> chosen(n, 0);
    std::size_t first = std::min(n - 1, std::size_t(unit(rng) * double(n)));
    centers.push_back(points[first]);
    chosen[first] = 1;
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    while (int(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], dist2(points[i], centers.back()));
            total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double u = unit(rng) * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum >= u && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n)  // all remaining mass at duplicates: lowest unchosen index
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        if (pick == n) pick = 0;
        centers.push_back(points[pick]);
        chosen[pick] = 1;
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d2 = dist2(points[i], centers[0]);
            for (int c = 1; c < k; ++c) {
                const double d = dist2(points[i], centers[std::size_t(c)]);
                if (d < best_d2) {
                    best_d2 = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        std::vector<double> sx(std::size_t(k), 0.0), sy(std::size_t(k), 0.0);
        std::vector<std::size_t> count(std::size_t(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sx[std::size_t(assign[i])] += points[i].x;
            sy[std::size_t(assign[i])] += points[i].y;
            count[std::size_t(assign[i])]++;
        }
        std::vector<char> stolen(n, 0);
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            Vec2 next;
            if (count[std::size_t(c)] == 0) {
                // Revive on the point farthest from its center (ties: lowest index).
                std::size_t far = 0;
                double far_d2 = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (stolen[i]) continue;
                    const double d = dist2(points[i], centers[std::size_t(assign[i])]);
                    if (d > far_d2) {
                        far_d2 = d;
                        far = i;
                    }
                }
                stolen[far] = 1;
                next = points[far];
            } else {
                next = {sx[std::size_t(c)] / double(count[std::size_t(c)]),
                        sy[std::size_t(c)] / double(count[std::size_t(c)])};
            }
            shift = std::max(shift, std::sqrt(dist2(next, centers[std::size_t(c)])));
            centers[std::size_t(c)] = next;
        }
        if (shift < 1e-4) break;
    }
    return centers;
}

}  // namespace

std::vector<Vec2> kmeans_place(const std::vector<Vec2>& points, int k, std::uint64_t seed) {
    if (k < 1) throw Error("kmeans_place: k must be >= 1");
    if (std::size_t(k) > points.size()) throw Error("kmeans_place: k exceeds point count");
    const auto inertia = [&](const std::vector<Vec2>& centers) {
        double total = 0.0;
        for (const Vec2& p : points) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec2& c : centers) {
                const double dx = p.x - c.x, dy = p.y - c.y;
                best = std::min(best, dx * dx + dy * dy);
            }
            total += best;
        }
        return total;
    };
    // Restarts guard against a poor seeding; the lowest inertia wins, ties to
    // the earliest restart so the seed still fixes the result.
    constexpr int kRestarts = 8;
    std::vector<Vec2> best_centers;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < kRestarts; ++r) {
        std::vector<Vec2> centers =
            kmeans_once(points, k, seed + 0x9e3779b97f4a7c15ull * std::uint64_t(r));
        const double score = inertia(centers);
        if (score < best_inertia) {
            best_inertia = score;
            best_centers = std::move(centers);
        }
    }
    return best_centers;
}

std::vector<TreeInstance> extract_tree_features(const std::vector<Point3>& veg_points,
                                                const VegCluster& cluster,
                                                const std::vector<Vec2>& locations,
                                                const GroundElevationModel& ground) {
    if (locations.empty()) throw Error("extract_tree_features: no locations");
    struct Acc {
        double max_z = -std::numeric_limits<double>::infinity();
        double min_x = std::numeric_limits<double>::infinity(), max_x = -std::numeric_limits<double>::infinity();
        double min_y = std::numeric_limits<double>::infinity(), max_y = -std::numeric_limits<double>::infinity();
        double r = 0.0, g = 0.0, b = 0.0;
        std::size_t count = 0;
    };
    std::vector<Acc> acc(locations.size());
    for (std::size_t idx : cluster.members) {
        const Point3& p = veg_points[idx];
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < locations.size(); ++j) {
            const double dx = p.x - locations[j].x, dy = p.y - locations[j].y;
            const double d = dx * dx + dy * dy;
            if (d < best_d2) {
                best_d2 = d;
                best = j;
            }
        }
        Acc& a = acc[best];
        a.max_z = std::max(a.max_z, p.z);
        a.min_x = std::min(a.min_x, p.x);
        a.max_x = std::max(a.max_x, p.x);
        a.min_y = std::min(a.min_y, p.y);
        a.max_y = std::max(a.max_y, p.y);
        a.r += p.r;
        a.g += p.g;
        a.b += p.b;
        a.count++;
    }
    std::vector<TreeInstance> trees;
    for (std::size_t j = 0; j < locations.size(); ++j) {
        const Acc& a = acc[j];
        if (a.count == 0) continue;
        TreeInstance t;
        t.x = locations[j].x;
        t.y = locations[j].y;
        t.height = a.max_z - ground.elevation_at(t.x, t.y);
        t.width = std::max(a.max_x - a.min_x, a.max_y - a.min_y);
        t.color[0] = a.r / double(a.count);
        t.color[1] = a.g / double(a.count);
        t.color[2] = a.b / double(a.count);
        trees.push_back(std::move(t));
    }
    return trees;
}

int match_species(const TreeInstance& tree, const std::vector<TreeModelAttribute>& table,
                  int zone) {
    if (table.empty()) throw Error("match_species: empty species table");
    std::vector<const TreeModelAttribute*> candidates;
    for (const TreeModelAttribute& e : table)
        if (e.zone_min <= zone && zone <= e.zone_max) candidates.push_back(&e);
    if (candidates.empty())
        for (const TreeModelAttribute& e : table) candidates.push_back(&e);

    int best_id = candidates.front()->species_id;
    double best_score = std::numeric_limits<double>::infinity();
    for (const TreeModelAttribute* e : candidates) {
        double height_term = 0.0;
        if (tree.height < e->h_min)
            height_term = std::min(1.0, (e->h_min - tree.height) / 10.0);
        else if (tree.height > e->h_max)
            height_term = std::min(1.0, (tree.height - e->h_max) / 10.0);
        const double dr = tree.color[0] - e->leaf_color[0];
        const double dg = tree.color[1] - e->leaf_color[1];
        const double db = tree.color[2] - e->leaf_color[2];
        const double color_term = std::sqrt(dr * dr + dg * dg + db * db) / kColorNormalizer;
        const double score = 0.5 * height_term + 0.5 * color_term;
        if (score < best_score || (score == best_score && e->species_id < best_id)) {
            best_score = score;
            best_id = e->species_id;
        }
    }
    return best_id;
}

int zone_from_latitude(double latitude_deg) {
    static constexpr int kBandZone[9] = {11, 10, 9, 8, 7, 5, 4, 2, 1};  // 10-degree bands
    const int band = std::min(8, int(std::floor(std::abs(latitude_deg) / 10.0)));
    return kBandZone[band];
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parses_as_int(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace

std::vector<TreeModelAttribute> read_tree_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open tree table: " + path);
    std::vector<TreeModelAttribute> table;
    std::string line;
    int lineno = 0;
    bool first_data = true;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string row = trim(line);
        if (row.empty() || row[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(row);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        if (first_data && !fields.empty() && !parses_as_int(fields[0])) {
            first_data = false;  // header row
            continue;
        }
        first_data = false;
        const std::string where = path + ":" + std::to_string(lineno);
        if (fields.size() != 10) throw Error(where + ": expected 10 fields, got " + std::to_string(fields.size()));
        TreeModelAttribute a;
        try {
            a.species_id = std::stoi(fields[0]);
            a.name = fields[1];
            a.h_min = std::stod(fields[2]);
            a.h_max = std::stod(fields[3]);
            a.leaf_color = {std::stod(fields[4]), std::stod(fields[5]), std::stod(fields[6])};
            a.zone_min = std::stoi(fields[7]);
            a.zone_max = std::stoi(fields[8]);
            a.asset = fields[9];
        } catch (const std::exception&) {
            throw Error(where + ": malformed numeric field");
        }
        if (a.h_min > a.h_max) throw Error(where + ": height range min exceeds max");
        if (a.zone_min > a.zone_max) throw Error(where + ": zone range min exceeds max");
        table.push_back(std::move(a));
    }
    if (table.empty()) throw Error("tree table has no rows: " + path);
    return table;
}

std::vector<TreeInstance> extract_trees(const PointCloud& labeled_cloud,
                                        const GroundElevationModel& ground,
                                        const std::vector<TreeModelAttribute>& table,
                                        const TreeParams& params) {
    if (!labeled_cloud.labels) throw Error("extract_trees: cloud has no labels");
    std::vector<Point3> veg;
    for (std::size_t i = 0; i < labeled_cloud.size(); ++i)
        if ((*labeled_cloud.labels)[i] == TerrainClass::Vegetation)
            veg.push_back(labeled_cloud.points[i]);
    if (veg.empty()) return {};

    std::vector<VegCluster> clusters = connected_components(veg, params.link_radius);
    std::vector<TreeInstance> all;
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        VegCluster& cluster = clusters[ci];
        double height_sum = 0.0;
        for (std::size_t i : cluster.members) {
            const Point3& p = veg[i];
            height_sum += p.z - ground.elevation_at(p.x, p.y);
        }
        cluster.avg_height = std::max(0.1, height_sum / double(cluster.members.size()));
        const double area = coverage_area(veg, cluster, params.max_edge);
        const int n_est = estimate_tree_count(area, cluster.avg_height);
        const std::uint64_t cluster_seed = mix_seed(params.seed, ci);

        std::vector<Vec2> locations;
        if (params.method == PlacementMethod::Poisson) {
            locations = poisson_disc_place(cluster.footprint, n_est, cluster_seed).locations;
        } else {
            std::vector<Vec2> xy;
            xy.reserve(cluster.members.size());
            for (std::size_t i : cluster.members) xy.push_back({veg[i].x, veg[i].y});
            locations = kmeans_place(xy, std::min<int>(n_est, int(xy.size())), cluster_seed);
        }
        std::vector<TreeInstance> trees = extract_tree_features(veg, cluster, locations, ground);
        for (TreeInstance& t : trees) {
            if (!table.empty()) {
                t.species_id = match_species(t, table, params.zone);
                for (const TreeModelAttribute& e : table)
                    if (e.species_id == *t.species_id) {
                        t.species_name = e.name;
                        break;
                    }
            }
            all.push_back(std::move(t));
        }
    }
    return all;
}

void write_tree_instances(const std::string& path, const std::vector<TreeInstance>& trees) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TreeInstance& t : trees) {
        nlohmann::json j;
        j["x"] = t.x;
        j["y"] = t.y;
        j["height_m"] = t.height;
        j["width_m"] = t.width;
        j["color_rgb"] = {t.color[0], t.color[1], t.color[2]};
        if (t.species_id) {
            j["species_id"] = *t.species_id;
            j["species_name"] = t.species_name;
        } else {
            j["species_id"] = nullptr;
        }
        arr.push_back(std::move(j));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write tree instances: " + path);
    out << arr.dump(2) << "\n";
}

std::vector<TreeInstance> read_tree_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read tree instances: " + path);
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const std::exception& e) {
        throw Error("bad tree instance file " + path + ": " + e.what());
    }
    if (!arr.is_array()) throw Error("bad tree instance file " + path + ": expected an array");
    std::vector<TreeInstance> trees;
    for (const auto& j : arr) {
        TreeInstance t;
        t.x = j.at("x").get<double>();
        t.y = j.at("y").get<double>();
        t.height = j.at("height_m").get<double>();
        t.width = j.at("width_m").get<double>();
        const auto& c = j.at("color_rgb");
        t.color[0] = c.at(0).get<double>();
        t.color[1] = c.at(1).get<double>();
        t.color[2] = c.at(2).get<double>();
        if (j.contains("species_id") && !j.at("species_id").is_null()) {
            t.species_id = j.at("species_id").get<int>();
            if (j.contains("species_name")) t.species_name = j.at("species_name").get<std::string>();
        }
        trees.push_back(std::move(t));
    }
    return trees;
}

}  // namespace terraseg
