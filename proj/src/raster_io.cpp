#include "terraseg/raster_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <json.hpp>

namespace terraseg {

namespace {

using nlohmann::json;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Geo {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double resolution = 1.0;
};

Geo read_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open raster sidecar '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("bad raster sidecar '" + path + "': " + e.what());
    }
    Geo g;
    g.origin_x = j.at("origin_x").get<double>();
    g.origin_y = j.at("origin_y").get<double>();
    g.resolution = j.at("resolution_m_per_px").get<double>();
    if (!(g.resolution > 0.0)) throw Error("sidecar '" + path + "': resolution must be > 0");
    return g;
}

void write_sidecar(const std::string& path, const Geo& g) {
    json j{{"origin_x", g.origin_x}, {"origin_y", g.origin_y}, {"resolution_m_per_px", g.resolution}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write raster sidecar '" + path + "'");
    out << j.dump(2) << "\n";
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Reads any 8/16-bit PNG. When expand_to_rgb is set the rows come back as
// 8-bit RGB; otherwise palette/gray images keep their raw 8-bit sample values.
void read_png_rows(const std::string& path, bool expand_to_rgb, int& width, int& height,
                   int& channels, std::vector<std::uint8_t>& data) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw Error("cannot open '" + path + "'");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("failed to decode PNG '" + path + "'");
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (expand_to_rgb) {
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
        png_set_strip_alpha(png);
    } else {
        if (color_type != PNG_COLOR_TYPE_PALETTE && color_type != PNG_COLOR_TYPE_GRAY) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw Error("'" + path + "': mask PNG must be paletted or grayscale");
        }
        if (png_get_bit_depth(png, info) < 8) png_set_packing(png);
    }
    png_read_update_info(png, info);

    width = int(png_get_image_width(png, info));
    height = int(png_get_image_height(png, info));
    channels = int(png_get_channels(png, info));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    data.resize(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r) rows[r] = data.data() + rowbytes * r;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

void write_png_rows(const std::string& path, int width, int height, int color_type,
                    const std::uint8_t* data, std::size_t rowbytes,
                    const std::vector<std::array<std::uint8_t, 3>>* palette) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw Error("cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("failed to encode PNG '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_color> pal;
    if (palette) {
        for (const auto& c : *palette) pal.push_back(png_color{c[0], c[1], c[2]});
        png_set_PLTE(png, info, pal.data(), int(pal.size()));
    }
    png_write_info(png, info);
    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r)
        rows[r] = const_cast<png_bytep>(data + rowbytes * r);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void read_ppm(const std::string& path, int& width, int& height, std::vector<std::uint8_t>& rgb) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string magic;
    in >> magic;
    if (magic != "P6") throw Error("'" + path + "': expected binary PPM (P6)");
    auto next_int = [&]() {
        // PPM headers allow '#' comments between tokens.
        for (;;) {
            in >> std::ws;
            if (in.peek() == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            int v;
            if (!(in >> v)) throw Error("'" + path + "': malformed PPM header");
            return v;
        }
    };
    width = next_int();
    height = next_int();
    const int maxval = next_int();
    if (width < 1 || height < 1 || maxval != 255)
        throw Error("'" + path + "': unsupported PPM geometry");
    in.get();  // single whitespace after maxval
    rgb.resize(std::size_t(width) * height * 3);
    in.read(reinterpret_cast<char*>(rgb.data()), std::streamsize(rgb.size()));
    if (std::size_t(in.gcount()) != rgb.size()) throw Error("'" + path + "': truncated PPM pixel data");
}

void write_ppm(const std::string& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), std::streamsize(rgb.size()));
    if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace

std::string default_sidecar_path(const std::string& image_path) {
    const std::size_t dot = image_path.find_last_of('.');
    const std::size_t slash = image_path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return image_path + ".json";
    return image_path.substr(0, dot) + ".json";
}

Raster read_raster(const std::string& image_path, const std::string& sidecar_path) {
    const Geo geo = read_sidecar(sidecar_path.empty() ? default_sidecar_path(image_path) : sidecar_path);
    Raster r;
    r.origin_x = geo.origin_x;
    r.origin_y = geo.origin_y;
    r.resolution = geo.resolution;
    if (ends_with(image_path, ".ppm")) {
        read_ppm(image_path, r.width, r.height, r.pixels);
    } else {
        int channels = 0;
        read_png_rows(image_path, true, r.width, r.height, channels, r.pixels);
        if (channels != 3) throw Error("'" + image_path + "': expected RGB after conversion");
    }
    r.check_valid();
    return r;
}

void write_raster(const Raster& raster, const std::string& image_path,
                  const std::string& sidecar_path) {
    raster.check_valid();
    if (ends_with(image_path, ".ppm"))
        write_ppm(image_path, raster.width, raster.height, raster.pixels);
    else
        write_png_rows(image_path, raster.width, raster.height, PNG_COLOR_TYPE_RGB,
                       raster.pixels.data(), std::size_t(raster.width) * 3, nullptr);
    write_sidecar(sidecar_path.empty() ? default_sidecar_path(image_path) : sidecar_path,
                  {raster.origin_x, raster.origin_y, raster.resolution});
}

MaskRaster read_mask(const std::string& image_path, const std::string& sidecar_path) {
    const Geo geo = read_sidecar(sidecar_path.empty() ? default_sidecar_path(image_path) : sidecar_path);
    MaskRaster m;
    m.origin_x = geo.origin_x;
    m.origin_y = geo.origin_y;
    m.resolution = geo.resolution;
    int channels = 0;
    read_png_rows(image_path, false, m.width, m.height, channels, m.codes);
    if (channels != 1) throw Error("'" + image_path + "': mask PNG must be single-channel");
    return m;
}

void write_mask(const MaskRaster& mask, const std::string& image_path,
                const std::string& sidecar_path) {
    if (mask.codes.size() != std::size_t(mask.width) * mask.height)
        throw Error("mask buffer size mismatch");
    // Palette index = class code; colors follow the material legend
    // (soil blue, road green, vegetation red) so masks are viewable directly.
    const std::vector<std::array<std::uint8_t, 3>> palette = {
        {70, 90, 200}, {90, 200, 90}, {200, 70, 70},   {128, 128, 128},
        {0, 0, 0},     {255, 255, 255}, {255, 128, 0}, {128, 0, 255},
    };
    write_png_rows(image_path, mask.width, mask.height, PNG_COLOR_TYPE_PALETTE, mask.codes.data(),
                   std::size_t(mask.width), &palette);
    write_sidecar(sidecar_path.empty() ? default_sidecar_path(image_path) : sidecar_path,
                  {mask.origin_x, mask.origin_y, mask.resolution});
}

void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& gray) {
    if (gray.size() != std::size_t(width) * height) throw Error("PGM buffer size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(gray.data()), std::streamsize(gray.size()));
    if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace terraseg
