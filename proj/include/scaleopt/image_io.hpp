#pragma once

#include <string>
#include <vector>

#include "scaleopt/image.hpp"

namespace scaleopt {

/// Loads a grayscale image from PGM (P5/P2) or PNG, dispatching on the
/// magic bytes. 16-bit samples are rescaled to [0, 255]; color PNG is
/// converted by luminance 0.299 R + 0.587 G + 0.114 B.
GrayImage load_image(const std::string& path);

/// Binary PGM writer. max_value 255 writes one byte per sample, 65535 two
/// (big-endian, per the Netpbm convention). Intensities are scaled by
/// max_value/255 and rounded.
void save_pgm(const GrayImage& img, const std::string& path, int max_value = 65535);

/// Row-major little-endian float32 buffer, e.g. the rendered depth map.
void save_raw_float(const std::vector<float>& values, const std::string& path);
std::vector<float> load_raw_float(const std::string& path, std::size_t expected_count);

}  // namespace scaleopt
