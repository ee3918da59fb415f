#include "patchpnp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "patchpnp/random.hpp"

namespace patchpnp {

double psnr(const Image& a, const Image& b, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  const double e = rmse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / (e * e));
}

namespace {

struct PairSums {
  double sum = 0.0;
  std::size_t count = 0;
};

// Partial Fisher-Yates: sum of |d| over `want` distinct entries of `pool`.
PairSums sample_sum(std::vector<double>& pool, std::size_t want, const CounterRng& rng) {
  PairSums s;
  want = std::min(want, pool.size());
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + rng.below(i, pool.size() - i);
    std::swap(pool[i], pool[j]);
    s.sum += pool[i];
  }
  s.count = want;
  return s;
}

}  // namespace

double seam_artifact_score(const Image& img, int patch, std::span<const GridOffset> offsets,
                           std::uint64_t sample_seed) {
  if (patch <= 0) throw std::invalid_argument("seam score: patch must be positive");
  for (const auto& o : offsets) {
    PatchGrid{patch, o, 0, PaddingMode::Zero}.validate();
  }
  const int h = img.height();
  const int w = img.width();
  auto on_seam = [&](int coord, bool row) {
    for (const auto& o : offsets) {
      if ((coord + (row ? o.y : o.x)) % patch == 0) return true;
    }
    return false;
  };

  PairSums seam;
  std::size_t seam_h = 0;
  std::size_t seam_v = 0;
  std::vector<double> plain_h;
  std::vector<double> plain_v;
  for (int y = 0; y < h; ++y) {
    for (int x = 1; x < w; ++x) {
      const double d = std::abs(img(y, x) - img(y, x - 1));
      if (on_seam(x, false)) {
        seam.sum += d;
        ++seam_h;
      } else {
        plain_h.push_back(d);
      }
    }
  }
  for (int y = 1; y < h; ++y) {
    const bool seam_row = on_seam(y, true);
    for (int x = 0; x < w; ++x) {
      const double d = std::abs(img(y, x) - img(y - 1, x));
      if (seam_row) {
        seam.sum += d;
        ++seam_v;
      } else {
        plain_v.push_back(d);
      }
    }
  }
  seam.count = seam_h + seam_v;
  if (seam.count == 0) return 0.0;

  const PairSums ph = sample_sum(plain_h, seam_h, CounterRng(sample_seed, 1));
  const PairSums pv = sample_sum(plain_v, seam_v, CounterRng(sample_seed, 2));
  const std::size_t plain_count = ph.count + pv.count;
  const double plain_mean = plain_count ? (ph.sum + pv.sum) / plain_count : 0.0;
  return seam.sum / static_cast<double>(seam.count) - plain_mean;
}

double seam_artifact_score(const Image& img, const PatchGrid& grid, std::uint64_t sample_seed) {
  const GridOffset o = grid.offset;
  return seam_artifact_score(img, grid.patch, std::span<const GridOffset>(&o, 1), sample_seed);
}

double edge_band_rmse(const Image& a, const Image& ref, int band) {
  require_same_shape(a, ref, "edge_band_rmse");
  const int h = a.height();
  const int w = a.width();
  if (band <= 0 || band > std::min(h, w) / 2) {
    throw std::invalid_argument("edge band must lie in (0, min(h,w)/2]");
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (std::min({y, x, h - 1 - y, w - 1 - x}) >= band) continue;
      const double d = a(y, x) - ref(y, x);
      acc += d * d;
      ++n;
    }
  }
  return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace patchpnp
