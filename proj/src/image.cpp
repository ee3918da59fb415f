#include "patchpnp/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace patchpnp {

std::string_view to_string(PaddingMode mode) {
  return mode == PaddingMode::Zero ? "zero" : "reflect";
}

PaddingMode parse_padding_mode(std::string_view text) {
  if (text == "zero") return PaddingMode::Zero;
  if (text == "reflect") return PaddingMode::Reflect;
  throw std::invalid_argument("unknown padding mode '" + std::string(text) + "'");
}

Image::Image(int height, int width, double fill) : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(height) + "x" + std::to_string(width));
  }
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

Image::Image(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument("image data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(height) + "x" +
                                std::to_string(width));
  }
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Image& a, const Image& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch " +
                                std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()));
  }
}

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) acc += da[i] * db[i];
  return acc;
}

double norm2(const Image& a) { return std::sqrt(dot(a, a)); }

double rmse(const Image& a, const Image& b) {
  require_same_shape(a, b, "rmse");
  double acc = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(da.size()));
}

Image operator+(const Image& a, const Image& b) {
  Image out = a;
  axpy(1.0, b, out);
  return out;
}

Image operator-(const Image& a, const Image& b) {
  Image out = a;
  axpy(-1.0, b, out);
  return out;
}

Image operator*(double s, const Image& a) {
  Image out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

void axpy(double alpha, const Image& x, Image& y) {
  require_same_shape(x, y, "axpy");
  auto dx = x.data();
  auto dy = y.data();
  for (std::size_t i = 0; i < dx.size(); ++i) dy[i] += alpha * dx[i];
}

void PatchGrid::validate() const {
  if (patch <= 0) throw std::invalid_argument("patch size must be positive");
  if (offset.y < 0 || offset.y >= patch || offset.x < 0 || offset.x >= patch) {
    throw std::invalid_argument("grid offset (" + std::to_string(offset.y) + "," +
                                std::to_string(offset.x) + ") outside [0," +
                                std::to_string(patch) + ")");
  }
  if (context_margin < 0 || context_margin >= patch) {
    throw std::invalid_argument("context margin must lie in [0, patch)");
  }
}

int border_index(int i, int n, PaddingMode mode) {
  if (i >= 0 && i < n) return i;
  if (mode == PaddingMode::Zero) return -1;
  // Single reflection; callers guarantee the overshoot is at most n - 1.
  return i < 0 ? -i : 2 * (n - 1) - i;
}

namespace {

void check_reflect_amount(int amount, int extent, const char* side) {
  if (amount > extent - 1) {
    throw std::invalid_argument(std::string("reflect padding of ") + std::to_string(amount) +
                                " on " + side + " exceeds image extent " +
                                std::to_string(extent) + " - 1");
  }
}

Image extract_region(const Image& img, int y0, int x0, int height, int width,
                     PaddingMode mode) {
  Image out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = border_index(y0 + y, img.height(), mode);
    for (int x = 0; x < width; ++x) {
      const int sx = border_index(x0 + x, img.width(), mode);
      out(y, x) = (sy < 0 || sx < 0) ? 0.0 : img(sy, sx);
    }
  }
  return out;
}

}  // namespace

Image pad(const Image& img, int top, int bottom, int left, int right, PaddingMode mode) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0) {
    throw std::invalid_argument("pad amounts must be non-negative");
  }
  if (mode == PaddingMode::Reflect) {
    check_reflect_amount(std::max(top, bottom), img.height(), "rows");
    check_reflect_amount(std::max(left, right), img.width(), "columns");
  }
  return extract_region(img, -top, -left, img.height() + top + bottom,
                        img.width() + left + right, mode);
}

std::vector<TileGeometry> tile_layout(int height, int width, const PatchGrid& grid) {
  grid.validate();
  if (height <= 0 || width <= 0) throw std::invalid_argument("tile_layout: empty image");

  const int p = grid.patch;
  const int m = grid.context_margin;
  std::vector<int> row_starts;
  std::vector<int> col_starts;
  for (int s = -grid.offset.y; s < height; s += p) row_starts.push_back(s);
  for (int s = -grid.offset.x; s < width; s += p) col_starts.push_back(s);

  if (grid.padding == PaddingMode::Reflect) {
    const int top = grid.offset.y + m;
    const int bottom = row_starts.back() + p + m - height;
    const int left = grid.offset.x + m;
    const int right = col_starts.back() + p + m - width;
    check_reflect_amount(std::max(top, bottom), height, "rows");
    check_reflect_amount(std::max(left, right), width, "columns");
  }

  std::vector<TileGeometry> layout;
  layout.reserve(row_starts.size() * col_starts.size());
  for (int ty : row_starts) {
    for (int tx : col_starts) {
      const int y0 = std::max(ty, 0);
      const int x0 = std::max(tx, 0);
      const int y1 = std::min(ty + p, height);
      const int x1 = std::min(tx + p, width);
      layout.push_back({Rect{y0, x0, y1 - y0, x1 - x0}, GridOffset{ty - m, tx - m}});
    }
  }
  return layout;
}

Image extract_tile(const Image& img, GridOffset origin, int side, PaddingMode mode) {
  return extract_region(img, origin.y, origin.x, side, side, mode);
}

void paste_tile(Image& target, const Image& tile, const TileGeometry& geom) {
  const Rect& r = geom.placement;
  const int dy = r.y - geom.origin.y;
  const int dx = r.x - geom.origin.x;
  if (dy < 0 || dx < 0 || dy + r.height > tile.height() || dx + r.width > tile.width()) {
    throw std::invalid_argument("tile does not contain its placement");
  }
  if (r.y < 0 || r.x < 0 || r.y + r.height > target.height() ||
      r.x + r.width > target.width()) {
    throw std::invalid_argument("placement outside target image");
  }
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      target(r.y + y, r.x + x) = tile(dy + y, dx + x);
    }
  }
}

std::vector<Tile> tile(const Image& img, const PatchGrid& grid) {
  std::vector<Tile> tiles;
  for (const auto& geom : tile_layout(img.height(), img.width(), grid)) {
    tiles.push_back({extract_tile(img, geom.origin, grid.tile_side(), grid.padding),
                     geom.placement, geom.origin});
  }
  return tiles;
}

Image stitch(std::span<const Tile> tiles, int height, int width) {
  Image out(height, width);
  std::vector<unsigned char> covered(out.size(), 0);
  for (const Tile& t : tiles) {
    const Rect& r = t.placement;
    if (r.height <= 0 || r.width <= 0 || r.y < 0 || r.x < 0 || r.y + r.height > height ||
        r.x + r.width > width) {
      throw std::invalid_argument("stitch: placement outside the target image");
    }
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) {
        auto& c = covered[static_cast<std::size_t>(y) * width + x];
        if (c) {
          throw std::invalid_argument("stitch: placements overlap at (" + std::to_string(y) +
                                      "," + std::to_string(x) + ")");
        }
        c = 1;
      }
    }
    paste_tile(out, t.image, {t.placement, t.origin});
  }
  const auto hole = std::find(covered.begin(), covered.end(), 0);
  if (hole != covered.end()) {
    const auto idx = static_cast<int>(hole - covered.begin());
    throw std::invalid_argument("stitch: pixel (" + std::to_string(idx / width) + "," +
                                std::to_string(idx % width) + ") not covered by any tile");
  }
  return out;
}

}  // namespace patchpnp
