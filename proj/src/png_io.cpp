#include "advforge/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace advforge {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

unsigned char to_byte(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

void write_png(const std::string& path, int h, int w, int channels,
               const std::vector<unsigned char>& bytes) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("write_png: cannot open '" + path + "'");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("write_png: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("write_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: libpng error writing '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * w * channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::vector<unsigned char> read_png(const std::string& path, int expect_channels, int& h, int& w) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("read_png: cannot open '" + path + "'");
    unsigned char header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw std::runtime_error("read_png: '" + path + "' is not a PNG file");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("read_png: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("read_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: corrupt PNG '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (expect_channels == 3 && (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA))
        png_set_gray_to_rgb(png);
    if (expect_channels == 1 && (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
                                 color == PNG_COLOR_TYPE_PALETTE))
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);
    if (static_cast<int>(png_get_channels(png, info)) != expect_channels) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: '" + path + "' has unexpected channel count");
    }
    std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w * expect_channels);
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        rows[static_cast<std::size_t>(y)] = bytes.data() + static_cast<std::size_t>(y) * w * expect_channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return bytes;
}

}  // namespace

void write_png_rgb(const std::string& path, const Image& img) {
    const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
    std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                bytes[(static_cast<std::size_t>(y) * w + x) * 3 + c] = to_byte(img.ch[c](y, x));
    write_png(path, h, w, 3, bytes);
}

Image read_png_rgb(const std::string& path) {
    int h = 0, w = 0;
    const auto bytes = read_png(path, 3, h, w);
    Image img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.ch[c](y, x) = bytes[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0;
    return img;
}

void write_png_gray(const std::string& path, const Mask& mask) {
    const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
    std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) bytes[static_cast<std::size_t>(y) * w + x] = to_byte(mask(y, x));
    write_png(path, h, w, 1, bytes);
}

Mask read_png_gray(const std::string& path) {
    int h = 0, w = 0;
    const auto bytes = read_png(path, 1, h, w);
    Mask mask(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask(y, x) = bytes[static_cast<std::size_t>(y) * w + x] / 255.0;
    return mask;
}

void write_landmarks(const std::string& path, const LandmarkSet& lm) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_landmarks: cannot open '" + path + "'");
    char buf[80];
    for (int i = 0; i < kNumLandmarks; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", lm(i, 0), lm(i, 1));
        f << buf;
    }
}

LandmarkSet read_landmarks(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_landmarks: cannot open '" + path + "'");
    LandmarkSet lm;
    std::string line;
    for (int i = 0; i < kNumLandmarks; ++i) {
        if (!std::getline(f, line))
            throw std::runtime_error("read_landmarks: '" + path + "' has fewer than 68 lines");
        std::istringstream ss(line);
        if (!(ss >> lm(i, 0) >> lm(i, 1)))
            throw std::runtime_error("read_landmarks: bad line " + std::to_string(i + 1) + " in '" +
                                     path + "'");
    }
    return lm;
}

}  // namespace advforge
