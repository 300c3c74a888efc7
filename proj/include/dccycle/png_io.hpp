#pragma once

#include "dccycle/image.hpp"

#include <string>

namespace dccycle {

/// Reads a grayscale 8- or 16-bit PNG and scales it by its integer range to
/// [0,1]. Colour files are rejected.
Grid<double> read_png(const std::string& path);

/// Writes a [0,1] grid as an 8-bit grayscale PNG; values are scaled by 255
/// and rounded half-up.
void write_png8(const std::string& path, const Grid<double>& metric);

/// floor(255 * v + 0.5), the quantization used for every 8-bit export.
Grid<double> quantize8(const Grid<double>& metric);

/// Bilinear resampling (pixel-centre aligned).
Grid<double> resize_bilinear(const Grid<double>& input, Index height, Index width);

}  // namespace dccycle
