#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace patchpnp {

enum class PaddingMode { Zero, Reflect };

std::string_view to_string(PaddingMode mode);
PaddingMode parse_padding_mode(std::string_view text);

/// Single-channel real raster, row-major. All solver state (x, y, x0_hat)
/// lives in one of these.
class Image {
 public:
  Image() = default;
  Image(int height, int width, double fill = 0.0);
  Image(int height, int width, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  std::size_t bytes() const { return data_.size() * sizeof(double); }
  bool empty() const { return data_.empty(); }

  double& operator()(int y, int x) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double operator()(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool all_finite() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Elementwise helpers used throughout the solvers.
double dot(const Image& a, const Image& b);
double norm2(const Image& a);
double rmse(const Image& a, const Image& b);
Image operator+(const Image& a, const Image& b);
Image operator-(const Image& a, const Image& b);
Image operator*(double s, const Image& a);
/// y += alpha * x
void axpy(double alpha, const Image& x, Image& y);

void require_same_shape(const Image& a, const Image& b, std::string_view what);

struct Rect {
  int y = 0;
  int x = 0;
  int height = 0;
  int width = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct GridOffset {
  int y = 0;
  int x = 0;

  friend bool operator==(const GridOffset&, const GridOffset&) = default;
};

/// Square tiling of an image. Tile (i, j) covers rows [i*patch - offset.y,
/// (i+1)*patch - offset.y) and likewise for columns; only the part inside the
/// image is kept after denoising. context_margin extra pixels are attached on
/// every side and cropped again when stitching.
struct PatchGrid {
  int patch = 0;
  GridOffset offset{};
  int context_margin = 0;
  PaddingMode padding = PaddingMode::Reflect;

  void validate() const;
  int tile_side() const { return patch + 2 * context_margin; }
};

/// Where one tile sits: `placement` is the owned region in image coordinates,
/// `origin` is the image coordinate of the tile's pixel (0, 0).
struct TileGeometry {
  Rect placement;
  GridOffset origin;
};

struct Tile {
  Image image;
  Rect placement;
  GridOffset origin;
};

/// Maps a possibly out-of-range index into [0, n) under `mode`. Returns -1
/// for Zero mode outside the image. Reflect mirrors without repeating the edge.
int border_index(int i, int n, PaddingMode mode);

Image pad(const Image& img, int top, int bottom, int left, int right, PaddingMode mode);

/// Tile layout for an image of the given size. Throws if the grid would need
/// a reflection larger than the image allows.
std::vector<TileGeometry> tile_layout(int height, int width, const PatchGrid& grid);

/// Copies one tile (side x side pixels starting at `origin`) out of `img`,
/// filling out-of-image pixels per `mode`.
Image extract_tile(const Image& img, GridOffset origin, int side, PaddingMode mode);

/// Writes the placement region of `tile` into `target`.
void paste_tile(Image& target, const Image& tile, const TileGeometry& geom);

std::vector<Tile> tile(const Image& img, const PatchGrid& grid);
Image stitch(std::span<const Tile> tiles, int height, int width);

}  // namespace patchpnp
