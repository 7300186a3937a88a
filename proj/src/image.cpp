#include "ciris/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ciris {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string token(std::istream& in, const std::string& path) {
    std::string t;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!t.empty()) return t;
            continue;
        }
        t.push_back(char(ch));
    }
    if (t.empty()) throw std::runtime_error("pgm '" + path + "': truncated header");
    return t;
}

std::size_t header_number(std::istream& in, const std::string& path, const char* what) {
    const std::string t = token(in, path);
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(t, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != t.size()) throw std::runtime_error("pgm '" + path + "': bad " + what + " '" + t + "'");
    return v;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image '" + path + "'");
    if (token(in, path) != "P5") throw std::runtime_error("pgm '" + path + "': not a binary PGM (P5)");
    const std::size_t w = header_number(in, path, "width");
    const std::size_t h = header_number(in, path, "height");
    const std::size_t maxval = header_number(in, path, "maxval");
    if (w == 0 || h == 0) throw std::runtime_error("pgm '" + path + "': empty image");
    if (maxval == 0 || maxval > 255)
        throw std::runtime_error("pgm '" + path + "': only 8-bit images are supported");
    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (std::size_t(in.gcount()) != img.pixels.size())
        throw std::runtime_error("pgm '" + path + "': truncated pixel data");
    if (maxval != 255)
        for (auto& p : img.pixels)
            p = std::uint8_t(std::min<std::size_t>(255, (std::size_t(p) * 255 + maxval / 2) / maxval));
    return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
    if (img.pixels.size() != img.width * img.height)
        throw std::invalid_argument("write_pgm: pixel count does not match extents");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

GrayImage to_image(const RealGrid& grid) {
    GrayImage img(grid.cols, grid.rows);
    for (std::size_t i = 0; i < grid.values.size(); ++i)
        img.pixels[i] = std::uint8_t(std::lround(std::clamp(grid.values[i], 0.0, 1.0) * 255.0));
    return img;
}

RealGrid to_grid(const GrayImage& img) {
    RealGrid g(img.height, img.width);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) g.values[i] = img.pixels[i] / 255.0;
    return g;
}

GrayImage mask_to_image(const BinaryGrid& mask) {
    GrayImage img(mask.cols(), mask.rows());
    for (std::size_t i = 0; i < mask.size(); ++i) img.pixels[i] = mask[i] ? 255 : 0;
    return img;
}

BinaryGrid image_to_mask(const GrayImage& img) {
    BinaryGrid m(img.height, img.width, 0);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) m.set(y, x, img.at(x, y) >= 128);
    return m;
}

}  // namespace ciris
