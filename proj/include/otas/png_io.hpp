#pragma once

#include <cstddef>
#include <filesystem>

#include "otas/refinement.hpp"

namespace otas {

/// Writes an 8-bit grayscale PNG: 255 for positive pixels, 0 otherwise.
void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask);

/// Reads any PNG; a pixel is positive when its gray value is nonzero.
BinaryMask read_png_mask(const std::filesystem::path& path);

struct ImageSize {
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Image dimensions from the PNG header.
ImageSize read_png_size(const std::filesystem::path& path);

}  // namespace otas
