#pragma once

#include <filesystem>
#include <vector>

#include "dualvfi/core.hpp"

namespace dualvfi {

double srgb_to_linear(double v);
double linear_to_srgb(double v);

// Portable float map. Writes little-endian (scale -1.0) with rows stored
// bottom-to-top; reads either endianness. 1 channel -> "Pf", 3 -> "PF".
Image read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Image& img);

// 8- or 16-bit PNG. Reading decodes sRGB to linear unless `linear` is set;
// writing clamps to [0, 1] and encodes to sRGB unless `linear` is set.
// Gray+alpha and RGBA inputs drop the alpha channel.
Image read_png(const std::filesystem::path& path, bool linear = false);
void write_png(const std::filesystem::path& path, const Image& img, int bit_depth = 8,
               bool linear = false);

// Dispatch on extension (.pfm or .png).
Image read_image(const std::filesystem::path& path, bool linear_png = false);
void write_image(const std::filesystem::path& path, const Image& img, bool linear_png = false);

// Middlebury .flo: float 202021.25, int32 width, int32 height, then
// interleaved float32 (u, v) row-major, all little-endian.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

// Sorted list of *.png / *.pfm files in a directory.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

}  // namespace dualvfi
