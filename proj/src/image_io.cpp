#include "patchpnp/image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace patchpnp {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "F32I requires IEEE-754 floats");

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::uint32_t load_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32le(std::uint32_t v, unsigned char* p) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

}  // namespace

Image read_f32i(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "F32I", 4) != 0) {
    throw IoError("'" + path.string() + "' is not an F32I file");
  }
  const std::uint32_t h = load_u32le(bytes.data() + 4);
  const std::uint32_t w = load_u32le(bytes.data() + 8);
  const std::uint64_t count = static_cast<std::uint64_t>(h) * w;
  if (h == 0 || w == 0 || bytes.size() != 12 + 4 * count) {
    throw IoError("'" + path.string() + "' has inconsistent F32I header/payload");
  }
  std::vector<double> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float f = std::bit_cast<float>(load_u32le(bytes.data() + 12 + 4 * i));
    if (!std::isfinite(f)) throw IoError("'" + path.string() + "' contains non-finite samples");
    data[i] = f;
  }
  return Image(static_cast<int>(h), static_cast<int>(w), std::move(data));
}

void write_f32i(const std::filesystem::path& path, const Image& img) {
  std::vector<unsigned char> buf(12 + 4 * img.size());
  std::memcpy(buf.data(), "F32I", 4);
  store_u32le(static_cast<std::uint32_t>(img.height()), buf.data() + 4);
  store_u32le(static_cast<std::uint32_t>(img.width()), buf.data() + 8);
  const auto d = img.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    store_u32le(std::bit_cast<std::uint32_t>(static_cast<float>(d[i])), buf.data() + 12 + 4 * i);
  }
  auto out = open_out(path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Image read_pgm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space_and_comments();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
      if (v > 1'000'000'000) break;
    }
    if (!any) throw IoError("'" + path.string() + "' has a malformed PGM header");
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw IoError("'" + path.string() + "' is not a binary PGM (P5)");
  }
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw IoError("'" + path.string() + "' has invalid PGM dimensions or maxval");
  }
  ++pos;  // single whitespace before raster
  const std::size_t sample = maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() < pos + sample * count) {
    throw IoError("'" + path.string() + "' has a truncated PGM raster");
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = sample == 1 ? bytes[pos + i]
                                   : (static_cast<unsigned>(bytes[pos + 2 * i]) << 8) |
                                         bytes[pos + 2 * i + 1];
    data[i] = static_cast<double>(std::min<long>(v, maxval)) / static_cast<double>(maxval);
  }
  return Image(static_cast<int>(h), static_cast<int>(w), std::move(data));
}

void write_pgm(const std::filesystem::path& path, const Image& img, int bits) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("PGM depth must be 8 or 16 bits");
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<unsigned char> buf(header.begin(), header.end());
  for (double v : img.data()) {
    const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(c * maxval));
    if (bits == 16) buf.push_back(static_cast<unsigned char>(q >> 8));
    buf.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  auto out = open_out(path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Image read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" ? read_pgm(path) : read_f32i(path);
}

}  // namespace patchpnp
