#pragma once

#include <string>

#include "terraseg/types.hpp"

namespace terraseg {

enum class PlyFormat {
    Ascii,
    BinaryLittleEndian,
};

// Reads a PLY point cloud (ascii or binary_little_endian). Requires x,y,z
// vertex properties; red/green/blue and label are picked up when present,
// other scalar vertex properties are skipped. Missing color defaults to
// (128,128,128). Parse failures raise Error with a line number (header,
// ascii body) or byte offset (binary body).
PointCloud read_point_cloud(const std::string& path);

// Coordinates are written as float64 so a binary round trip is bit-identical;
// ascii uses 6 decimals. The label property (uchar "label") is written only
// when the cloud is labeled.
void write_point_cloud(const PointCloud& cloud, const std::string& path, PlyFormat format);

}  // namespace terraseg
