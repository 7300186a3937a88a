#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ciris/grid.hpp"

namespace ciris {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    std::size_t width = 0, height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(w * h, fill) {}

    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
    std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
};

/// Row-major real-valued grid.
struct RealGrid {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;

    RealGrid() = default;
    RealGrid(std::size_t r, std::size_t c, double fill = 0) : rows(r), cols(c), values(r * c, fill) {}

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Binary (P5) PGM with maxval up to 255. Errors are std::runtime_error.
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img);

/// Values in [0, 1] (clamped) quantized to round(255 v).
GrayImage to_image(const RealGrid& grid);
/// Pixel / 255.
RealGrid to_grid(const GrayImage& img);

/// 255 for valid cells, 0 otherwise.
GrayImage mask_to_image(const BinaryGrid& mask);
/// Pixels >= 128 are valid.
BinaryGrid image_to_mask(const GrayImage& img);

}  // namespace ciris
