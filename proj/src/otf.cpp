#include "otas/otf.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "otas/error.hpp"

namespace otas {
namespace {

constexpr char kMagic[4] = {'O', 'T', 'F', '1'};
constexpr std::uint8_t kFloat32 = 0;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string rank_name(const OtfTensor& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.shape.size(); ++i) s += (i ? "," : "") + std::to_string(t.shape[i]);
  return s + ")";
}

}  // namespace

std::size_t OtfTensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t s : shape) n *= s;
  return n;
}

std::vector<std::uint8_t> encode_otf(const OtfTensor& tensor) {
  if (tensor.shape.size() > 255) throw ValidationError("OTF supports at most 255 dimensions");
  if (tensor.element_count() != tensor.data.size()) {
    throw ValidationError("OTF payload length does not match shape " + rank_name(tensor));
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kFloat32);
  out.push_back(static_cast<std::uint8_t>(tensor.shape.size()));
  for (std::uint32_t s : tensor.shape) put_u32(out, s);
  out.reserve(out.size() + tensor.data.size() * 4);
  for (float v : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

OtfTensor decode_otf(std::span<const std::uint8_t> bytes, const std::string& origin) {
  auto fail = [&](std::size_t offset, const std::string& what) {
    return FormatError(origin + ": " + what + " at byte offset " + std::to_string(offset));
  };
  if (bytes.size() < 6) throw fail(bytes.size(), "truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw fail(0, "bad magic");
  if (bytes[4] != kFloat32) throw fail(4, "unsupported dtype code " + std::to_string(bytes[4]));
  const std::size_t ndim = bytes[5];
  const std::size_t payload_offset = 6 + 4 * ndim;
  if (bytes.size() < payload_offset) throw fail(bytes.size(), "truncated shape");

  OtfTensor t;
  t.shape.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i) t.shape[i] = get_u32(bytes.data() + 6 + 4 * i);
  const std::size_t count = t.element_count();
  const std::size_t expected = payload_offset + count * 4;
  if (bytes.size() < expected) throw fail(payload_offset, "truncated payload (need " + std::to_string(count * 4) + " bytes)");
  if (bytes.size() > expected) throw fail(expected, "trailing bytes after payload");
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    t.data[i] = std::bit_cast<float>(get_u32(bytes.data() + payload_offset + 4 * i));
  }
  return t;
}

void write_otf(const std::filesystem::path& path, const OtfTensor& tensor) {
  const std::vector<std::uint8_t> bytes = encode_otf(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_otf(const std::filesystem::path& path, std::span<const std::uint32_t> shape, std::span<const float> data) {
  write_otf(path, OtfTensor{{shape.begin(), shape.end()}, {data.begin(), data.end()}});
}

OtfTensor read_otf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_otf(bytes, path.string());
}

FeatureMap as_feature_map(OtfTensor tensor) {
  if (tensor.shape.size() != 3) throw FormatError("expected a (H, W, C) tensor, got shape " + rank_name(tensor));
  try {
    return FeatureMap(tensor.shape[0], tensor.shape[1], tensor.shape[2], std::move(tensor.data));
  } catch (const ValidationError& e) {
    throw FormatError(e.message());
  }
}

std::vector<float> as_vector(OtfTensor tensor) {
  if (tensor.shape.size() != 1) throw FormatError("expected a 1-D tensor, got shape " + rank_name(tensor));
  return std::move(tensor.data);
}

TokenMatrix as_matrix(OtfTensor tensor) {
  if (tensor.shape.size() != 2) throw FormatError("expected a 2-D tensor, got shape " + rank_name(tensor));
  return TokenMatrix(tensor.shape[0], tensor.shape[1], std::move(tensor.data));
}

}  // namespace otas
