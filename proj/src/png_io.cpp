#include "otas/png_io.hpp"

#include <cstring>
#include <vector>

#include <png.h>

#include "otas/error.hpp"

namespace otas {
namespace {

struct PngImage {
  png_image image;

  PngImage() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

void begin_read(PngImage& png, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FormatError("PNG file not found: " + path.string());
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw FormatError("cannot decode PNG " + path.string() + ": " + png.image.message);
  }
}

}  // namespace

void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  if (mask.height == 0 || mask.width == 0) throw ValidationError("cannot write an empty mask");
  std::vector<png_byte> pixels(mask.data.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = mask.data[i] ? 255 : 0;
  PngImage png;
  png.image.width = static_cast<png_uint_32>(mask.width);
  png.image.height = static_cast<png_uint_32>(mask.height);
  png.image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + png.image.message);
  }
}

BinaryMask read_png_mask(const std::filesystem::path& path) {
  PngImage png;
  begin_read(png, path);
  png.image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, pixels.data(), 0, nullptr)) {
    throw FormatError("cannot decode PNG " + path.string() + ": " + png.image.message);
  }
  BinaryMask mask(png.image.height, png.image.width);
  for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = pixels[i] != 0 ? 1 : 0;
  return mask;
}

ImageSize read_png_size(const std::filesystem::path& path) {
  PngImage png;
  begin_read(png, path);
  return {png.image.height, png.image.width};
}

}  // namespace otas
