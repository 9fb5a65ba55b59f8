#include "terraseg/obj_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace terraseg {

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
    throw Error(path + ":" + std::to_string(line) + ": " + msg);
}

// "7", "7/2", "7//3", "7/2/3" -> vertex index 7. Negative indices are
// relative to the current vertex count.
int parse_face_index(const std::string& field, int vertex_count, const std::string& path, int line) {
    std::size_t slash = field.find('/');
    const std::string head = slash == std::string::npos ? field : field.substr(0, slash);
    int idx = 0;
    try {
        idx = std::stoi(head);
    } catch (const std::exception&) {
        fail(path, line, "bad face index '" + field + "'");
    }
    if (idx < 0) idx = vertex_count + idx;  // -1 is the last vertex
    else idx -= 1;
    if (idx < 0 || idx >= vertex_count)
        fail(path, line, "face index " + head + " out of range (have " +
                             std::to_string(vertex_count) + " vertices)");
    return idx;
}

}  // namespace

TriMesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    TriMesh mesh;
    std::string line;
    int lineno = 0;
    std::vector<int> poly;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Point3 p;
            if (!(ls >> p.x >> p.y >> p.z)) fail(path, lineno, "malformed vertex record");
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
                fail(path, lineno, "non-finite vertex coordinate");
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            poly.clear();
            std::string field;
            while (ls >> field)
                poly.push_back(parse_face_index(field, int(mesh.vertices.size()), path, lineno));
            if (poly.size() < 3) fail(path, lineno, "face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
        }
        // vn/vt/o/g/s/usemtl/mtllib records carry no geometry we keep
    }
    return mesh;
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    char buf[128];
    for (const Point3& v : mesh.vertices) {
        int n = std::snprintf(buf, sizeof(buf), "v %.6f %.6f %.6f\n", v.x, v.y, v.z);
        out.write(buf, n);
    }
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace terraseg
