#pragma once

#include <string>

#include "terraseg/types.hpp"

namespace terraseg {

// Wavefront OBJ reader limited to v/f records; polygons are fan-triangulated.
// Vertex colors are not part of the format and default to gray.
TriMesh read_mesh(const std::string& path);

// Writes v records with 6 decimals and 1-based triangle f records.
void write_mesh(const TriMesh& mesh, const std::string& path);

}  // namespace terraseg
