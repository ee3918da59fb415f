#pragma once

#include <cstdint>
#include <string_view>

#include "patchpnp/image.hpp"

namespace patchpnp {

enum class PhantomKind { SheppEllipses, DiscOnBackground, SmoothRandomField };

std::string_view to_string(PhantomKind kind);
PhantomKind parse_phantom_kind(std::string_view text);

struct PhantomSpec {
  PhantomKind kind = PhantomKind::SheppEllipses;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 0;
};

/// Synthetic test images with values in [0, 1], deterministic in the seed.
///  - shepp-like ellipses: head-phantom layout with seeded jitter.
///  - disc-on-background: a 0.8 disc on 0 background, large enough to run
///    off at least one image edge while leaving every corner at 0.
///  - smooth-random-field: low-frequency cosine mixture rescaled to [0, 1].
Image gen_phantom(const PhantomSpec& spec);

}  // namespace patchpnp
