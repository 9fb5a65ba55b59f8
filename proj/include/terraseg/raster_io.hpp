#pragma once

#include <string>

#include "terraseg/types.hpp"

namespace terraseg {

// Georeferencing sidecar: JSON {origin_x, origin_y, resolution_m_per_px}.
// Default sidecar path is the image path with a ".json" suffix appended to
// the stem (ortho.png -> ortho.json).
std::string default_sidecar_path(const std::string& image_path);

// RGB rasters as PNG (8-bit RGB/RGBA/gray, converted to RGB) or binary PPM
// (P6), chosen by file extension. Geometry comes from the sidecar.
Raster read_raster(const std::string& image_path, const std::string& sidecar_path = "");
void write_raster(const Raster& raster, const std::string& image_path,
                  const std::string& sidecar_path = "");

// Class-code masks as paletted or 8-bit grayscale PNG; pixel values are the
// class codes. Writing emits a paletted PNG with a small fixed palette.
MaskRaster read_mask(const std::string& image_path, const std::string& sidecar_path = "");
void write_mask(const MaskRaster& mask, const std::string& image_path,
                const std::string& sidecar_path = "");

// Grayscale PGM (P5), used for debug renders.
void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& gray);

}  // namespace terraseg
