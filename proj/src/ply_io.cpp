#include "terraseg/ply_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace terraseg {

namespace {

enum class PlyType { Char, UChar, Short, UShort, Int, UInt, Float, Double };

std::size_t type_size(PlyType t) {
    switch (t) {
        case PlyType::Char:
        case PlyType::UChar: return 1;
        case PlyType::Short:
        case PlyType::UShort: return 2;
        case PlyType::Int:
        case PlyType::UInt:
        case PlyType::Float: return 4;
        case PlyType::Double: return 8;
    }
    return 0;
}

bool parse_type(const std::string& s, PlyType& out) {
    if (s == "char" || s == "int8") out = PlyType::Char;
    else if (s == "uchar" || s == "uint8") out = PlyType::UChar;
    else if (s == "short" || s == "int16") out = PlyType::Short;
    else if (s == "ushort" || s == "uint16") out = PlyType::UShort;
    else if (s == "int" || s == "int32") out = PlyType::Int;
    else if (s == "uint" || s == "uint32") out = PlyType::UInt;
    else if (s == "float" || s == "float32") out = PlyType::Float;
    else if (s == "double" || s == "float64") out = PlyType::Double;
    else return false;
    return true;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::Float;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

struct PlyHeader {
    PlyFormat format = PlyFormat::Ascii;
    std::vector<PlyElement> elements;
    std::size_t header_bytes = 0;
    int header_lines = 0;
};

[[noreturn]] void fail_line(const std::string& path, int line, const std::string& msg) {
    throw Error(path + ":" + std::to_string(line) + ": " + msg);
}

PlyHeader read_header(std::istream& in, const std::string& path) {
    PlyHeader hdr;
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++lineno;
        hdr.header_bytes = std::size_t(in.tellg());
        return true;
    };

    if (!next_line() || line != "ply") fail_line(path, 1, "not a PLY file (missing 'ply' magic)");
    bool have_format = false;
    bool ended = false;
    while (next_line()) {
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii") hdr.format = PlyFormat::Ascii;
            else if (fmt == "binary_little_endian") hdr.format = PlyFormat::BinaryLittleEndian;
            else fail_line(path, lineno, "unsupported PLY format '" + fmt + "'");
            have_format = true;
        } else if (keyword == "element") {
            PlyElement el;
            if (!(ls >> el.name >> el.count)) fail_line(path, lineno, "malformed element line");
            hdr.elements.push_back(el);
        } else if (keyword == "property") {
            if (hdr.elements.empty()) fail_line(path, lineno, "property before any element");
            PlyProperty prop;
            std::string type_word;
            ls >> type_word;
            if (type_word == "list") {
                std::string count_type, value_type;
                ls >> count_type >> value_type >> prop.name;
                prop.is_list = true;
            } else {
                if (!parse_type(type_word, prop.type))
                    fail_line(path, lineno, "unknown property type '" + type_word + "'");
                ls >> prop.name;
            }
            if (prop.name.empty()) fail_line(path, lineno, "property without a name");
            hdr.elements.back().properties.push_back(prop);
        } else if (keyword == "end_header") {
            ended = true;
            break;
        } else {
            fail_line(path, lineno, "unexpected header keyword '" + keyword + "'");
        }
    }
    if (!ended) fail_line(path, lineno, "missing end_header");
    if (!have_format) fail_line(path, lineno, "missing format line");
    hdr.header_lines = lineno;
    return hdr;
}

double read_binary_value(const unsigned char* p, PlyType t) {
    switch (t) {
        case PlyType::Char: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
        case PlyType::UChar: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
        case PlyType::Short: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
        case PlyType::UShort: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
        case PlyType::Int: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
        case PlyType::UInt: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
        case PlyType::Float: { float v; std::memcpy(&v, p, 4); return v; }
        case PlyType::Double: { double v; std::memcpy(&v, p, 8); return v; }
    }
    return 0.0;
}

void require_little_endian() {
    const std::uint16_t probe = 0x0102;
    unsigned char bytes[2];
    std::memcpy(bytes, &probe, 2);
    if (bytes[0] != 0x02) throw Error("binary PLY requires a little-endian host");
}

}  // namespace

PointCloud read_point_cloud(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    PlyHeader hdr = read_header(in, path);

    const PlyElement* vertex = nullptr;
    for (const auto& el : hdr.elements)
        if (el.name == "vertex") { vertex = &el; break; }
    if (!vertex) fail_line(path, hdr.header_lines, "no vertex element");
    if (&hdr.elements.front() != vertex && hdr.format == PlyFormat::BinaryLittleEndian) {
        // Skipping elements of unknown byte size before the vertices is not supported.
        for (const auto& el : hdr.elements) {
            if (&el == vertex) break;
            for (const auto& p : el.properties)
                if (p.is_list)
                    fail_line(path, hdr.header_lines,
                              "list-typed element '" + el.name + "' precedes vertices");
        }
    }

    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, ilabel = -1;
    for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
        const auto& p = vertex->properties[i];
        if (p.is_list) fail_line(path, hdr.header_lines, "list property on vertex element");
        if (p.name == "x") ix = int(i);
        else if (p.name == "y") iy = int(i);
        else if (p.name == "z") iz = int(i);
        else if (p.name == "red" || p.name == "r" || p.name == "diffuse_red") ir = int(i);
        else if (p.name == "green" || p.name == "g" || p.name == "diffuse_green") ig = int(i);
        else if (p.name == "blue" || p.name == "b" || p.name == "diffuse_blue") ib = int(i);
        else if (p.name == "label" || p.name == "class" || p.name == "scalar_label") ilabel = int(i);
    }
    for (auto [idx, name] : {std::pair{ix, "x"}, {iy, "y"}, {iz, "z"}})
        if (idx < 0)
            fail_line(path, hdr.header_lines, std::string("vertex element missing property '") + name + "'");
    const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;
    const bool has_label = ilabel >= 0;

    PointCloud cloud;
    cloud.points.reserve(vertex->count);
    if (has_label) cloud.labels.emplace();

    auto finish_point = [&](const std::vector<double>& vals, const std::string& where) {
        Point3 pt;
        pt.x = vals[ix];
        pt.y = vals[iy];
        pt.z = vals[iz];
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y) || !std::isfinite(pt.z))
            throw Error(path + where + ": non-finite coordinate");
        if (has_color) {
            pt.r = std::uint8_t(vals[ir]);
            pt.g = std::uint8_t(vals[ig]);
            pt.b = std::uint8_t(vals[ib]);
        }
        cloud.points.push_back(pt);
        if (has_label) {
            const int code = int(vals[ilabel]);
            if (code < 0 || code >= kTerrainClassCount)
                throw Error(path + where + ": label code " + std::to_string(code) + " out of range");
            cloud.labels->push_back(TerrainClass(code));
        }
    };

    if (hdr.format == PlyFormat::Ascii) {
        std::string line;
        int lineno = hdr.header_lines;
        std::vector<double> vals(vertex->properties.size());
        // Elements before the vertices would appear first in the body; skip their lines.
        for (const auto& el : hdr.elements) {
            if (&el == vertex) break;
            for (std::size_t i = 0; i < el.count; ++i, ++lineno)
                if (!std::getline(in, line)) fail_line(path, lineno + 1, "unexpected end of file");
        }
        for (std::size_t n = 0; n < vertex->count; ++n) {
            if (!std::getline(in, line))
                fail_line(path, lineno + 1,
                          "element count mismatch: expected " + std::to_string(vertex->count) +
                              " vertices, got " + std::to_string(n));
            ++lineno;
            std::istringstream ls(line);
            for (std::size_t i = 0; i < vals.size(); ++i)
                if (!(ls >> vals[i])) fail_line(path, lineno, "too few values on vertex line");
            finish_point(vals, ":" + std::to_string(lineno));
        }
    } else {
        require_little_endian();
        std::size_t stride = 0;
        std::vector<std::size_t> offsets(vertex->properties.size());
        for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
            offsets[i] = stride;
            stride += type_size(vertex->properties[i].type);
        }
        // Skip fixed-size elements that precede the vertices.
        std::size_t skip = 0;
        for (const auto& el : hdr.elements) {
            if (&el == vertex) break;
            std::size_t row = 0;
            for (const auto& p : el.properties) row += type_size(p.type);
            skip += row * el.count;
        }
        in.seekg(std::streamoff(hdr.header_bytes + skip), std::ios::beg);
        std::vector<unsigned char> row(stride);
        std::vector<double> vals(vertex->properties.size());
        for (std::size_t n = 0; n < vertex->count; ++n) {
            const std::size_t offset = hdr.header_bytes + skip + n * stride;
            in.read(reinterpret_cast<char*>(row.data()), std::streamsize(stride));
            if (std::size_t(in.gcount()) != stride)
                throw Error(path + ": element count mismatch at byte offset " +
                            std::to_string(offset) + " (expected " + std::to_string(vertex->count) +
                            " vertices, got " + std::to_string(n) + ")");
            for (std::size_t i = 0; i < vals.size(); ++i)
                vals[i] = read_binary_value(row.data() + offsets[i], vertex->properties[i].type);
            finish_point(vals, " @" + std::to_string(offset));
        }
    }
    return cloud;
}

void write_point_cloud(const PointCloud& cloud, const std::string& path, PlyFormat format) {
    cloud.check_consistent();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");

    out << "ply\n";
    out << (format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n");
    out << "element vertex " << cloud.points.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (cloud.has_labels()) out << "property uchar label\n";
    out << "end_header\n";

    if (format == PlyFormat::Ascii) {
        char buf[160];
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const Point3& p = cloud.points[i];
            int n = std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f %d %d %d", p.x, p.y, p.z,
                                  int(p.r), int(p.g), int(p.b));
            if (cloud.has_labels())
                n += std::snprintf(buf + n, sizeof(buf) - n, " %d", int((*cloud.labels)[i]));
            buf[n++] = '\n';
            out.write(buf, n);
        }
    } else {
        require_little_endian();
        const std::size_t stride = 3 * 8 + 3 + (cloud.has_labels() ? 1 : 0);
        std::vector<char> row(stride);
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const Point3& p = cloud.points[i];
            std::memcpy(row.data(), &p.x, 8);
            std::memcpy(row.data() + 8, &p.y, 8);
            std::memcpy(row.data() + 16, &p.z, 8);
            row[24] = char(p.r);
            row[25] = char(p.g);
            row[26] = char(p.b);
            if (cloud.has_labels()) row[27] = char(std::uint8_t((*cloud.labels)[i]));
            out.write(row.data(), std::streamsize(stride));
        }
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace terraseg
