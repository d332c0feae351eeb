#pragma once

// Tensor file format ("OTF1"), all fields little-endian:
//
//   offset 0   4 bytes  magic "OTF1"
//   offset 4   u8       dtype (0 = float32)
//   offset 5   u8       ndim
//   offset 6   ndim x u32 shape
//   then       product(shape) x float32, row-major
//
// Files are written and read byte-for-byte identically on any host.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "otas/tensor.hpp"

namespace otas {

struct OtfTensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
};

void write_otf(const std::filesystem::path& path, const OtfTensor& tensor);
void write_otf(const std::filesystem::path& path, std::span<const std::uint32_t> shape, std::span<const float> data);

/// Throws FormatError (with the byte offset) for bad magic, dtype, or truncation.
OtfTensor read_otf(const std::filesystem::path& path);
OtfTensor decode_otf(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
std::vector<std::uint8_t> encode_otf(const OtfTensor& tensor);

// Role views; each throws FormatError if the rank does not fit the role.
FeatureMap as_feature_map(OtfTensor tensor);        // (H, W, C)
std::vector<float> as_vector(OtfTensor tensor);     // (C)
TokenMatrix as_matrix(OtfTensor tensor);            // (rows, cols)

}  // namespace otas
