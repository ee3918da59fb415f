#pragma once

#include <cstdint>
#include <span>

#include "patchpnp/image.hpp"

namespace patchpnp {

/// 10 log10(peak^2 / MSE) in dB; +infinity when the images are identical.
double psnr(const Image& a, const Image& b, double peak = 1.0);

/// Mean |difference| across neighbour pairs that straddle a tile boundary of
/// any grid in `offsets` (patch size `patch`), minus the mean over an equally
/// sized random sample of non-seam pairs of the same orientation.
/// Positive means visible seams.
double seam_artifact_score(const Image& img, int patch, std::span<const GridOffset> offsets,
                           std::uint64_t sample_seed = 0);
double seam_artifact_score(const Image& img, const PatchGrid& grid, std::uint64_t sample_seed = 0);

/// RMSE over the outer frame of `band` pixels. 0 < band <= min(h, w) / 2.
double edge_band_rmse(const Image& a, const Image& ref, int band);

}  // namespace patchpnp
