#pragma once

#include <string>

#include "advforge/geometry.hpp"
#include "advforge/image.hpp"

namespace advforge {

/// 8-bit RGB PNG. Values are mapped linearly: byte = round(255 * v).
void write_png_rgb(const std::string& path, const Image& img);
Image read_png_rgb(const std::string& path);

/// 8-bit grayscale PNG for masks: byte = round(255 * m).
void write_png_gray(const std::string& path, const Mask& mask);
Mask read_png_gray(const std::string& path);

/// Plain text, 68 lines of "x y".
void write_landmarks(const std::string& path, const LandmarkSet& lm);
LandmarkSet read_landmarks(const std::string& path);

}  // namespace advforge
