#pragma once

#include <filesystem>
#include <stdexcept>

#include "patchpnp/image.hpp"

namespace patchpnp {

/// File could not be read, parsed, or written. Message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// F32I: "F32I", u32 LE height, u32 LE width, height*width f32 LE row-major.
Image read_f32i(const std::filesystem::path& path);
void write_f32i(const std::filesystem::path& path, const Image& img);

// Binary PGM (P5). 8-bit when maxval < 256, else 16-bit big-endian.
// Samples map linearly to [0, 1] via v / maxval; writing clamps to [0, 1].
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& img, int bits = 8);

/// Dispatches on extension: .pgm -> PGM, anything else -> F32I.
Image read_image(const std::filesystem::path& path);

}  // namespace patchpnp
