#include "patchpnp/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "patchpnp/random.hpp"

namespace patchpnp {

std::string_view to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::SheppEllipses:
      return "shepp";
    case PhantomKind::DiscOnBackground:
      return "disc";
    case PhantomKind::SmoothRandomField:
      return "smooth";
  }
  return "?";
}

PhantomKind parse_phantom_kind(std::string_view text) {
  if (text == "shepp") return PhantomKind::SheppEllipses;
  if (text == "disc") return PhantomKind::DiscOnBackground;
  if (text == "smooth") return PhantomKind::SmoothRandomField;
  throw std::invalid_argument("unknown phantom kind '" + std::string(text) + "'");
}

namespace {

struct Ellipse {
  double value, a, b, cx, cy, theta_deg;
};

// Modified Shepp-Logan (Toft) in [-1, 1]^2 coordinates.
constexpr std::array<Ellipse, 10> kShepp{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

Image shepp(const PhantomSpec& spec) {
  const CounterRng rng(spec.seed, 1);
  Image img(spec.height, spec.width);
  std::array<Ellipse, kShepp.size()> ellipses = kShepp;
  // Jitter the inner structures; the outer skull stays put.
  for (std::size_t k = 2; k < ellipses.size(); ++k) {
    ellipses[k].cx += 0.04 * (rng.uniform(3 * k) - 0.5);
    ellipses[k].cy += 0.04 * (rng.uniform(3 * k + 1) - 0.5);
    ellipses[k].theta_deg += 10.0 * (rng.uniform(3 * k + 2) - 0.5);
  }
  for (int y = 0; y < spec.height; ++y) {
    const double py = 1.0 - 2.0 * (y + 0.5) / spec.height;
    for (int x = 0; x < spec.width; ++x) {
      const double px = 2.0 * (x + 0.5) / spec.width - 1.0;
      double v = 0.0;
      for (const auto& e : ellipses) {
        const double t = e.theta_deg * std::numbers::pi / 180.0;
        const double dx = px - e.cx;
        const double dy = py - e.cy;
        const double u = (dx * std::cos(t) + dy * std::sin(t)) / e.a;
        const double w = (-dx * std::sin(t) + dy * std::cos(t)) / e.b;
        if (u * u + w * w <= 1.0) v += e.value;
      }
      img(y, x) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

Image disc(const PhantomSpec& spec) {
  const CounterRng rng(spec.seed, 2);
  const double h = spec.height;
  const double w = spec.width;
  const double m = std::min(h, w);
  const double cy = 0.5 * h + 0.2 * h * (rng.uniform(0) - 0.5);
  const double cx = 0.5 * w + 0.2 * w * (rng.uniform(1) - 0.5);
  double r = m * (0.5 + 0.05 * rng.uniform(2));
  // Keep every corner pixel centre outside the disc.
  for (double y : {0.5, h - 0.5}) {
    for (double x : {0.5, w - 0.5}) r = std::min(r, std::hypot(y - cy, x - cx) - 1.0);
  }
  Image img(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (std::hypot(y + 0.5 - cy, x + 0.5 - cx) <= r) img(y, x) = 0.8;
    }
  }
  return img;
}

Image smooth_field(const PhantomSpec& spec) {
  const CounterRng rng(spec.seed, 3);
  constexpr int kTerms = 8;
  Image img(spec.height, spec.width);
  for (int k = 0; k < kTerms; ++k) {
    const double fy = 3.0 * (rng.uniform(4 * k) - 0.5);
    const double fx = 3.0 * (rng.uniform(4 * k + 1) - 0.5);
    const double phase = 2.0 * std::numbers::pi * rng.uniform(4 * k + 2);
    const double amp = rng.uniform(4 * k + 3);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double arg = 2.0 * std::numbers::pi *
                               (fy * (y + 0.5) / spec.height + fx * (x + 0.5) / spec.width) +
                           phase;
        img(y, x) += amp * std::cos(arg);
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
  const double lo_v = *lo;
  const double span = *hi - *lo;
  for (double& v : img.data()) v = span > 0.0 ? std::clamp((v - lo_v) / span, 0.0, 1.0) : 0.5;
  return img;
}

}  // namespace

Image gen_phantom(const PhantomSpec& spec) {
  if (spec.height <= 0 || spec.width <= 0) {
    throw std::invalid_argument("phantom dimensions must be positive");
  }
  switch (spec.kind) {
    case PhantomKind::SheppEllipses:
      return shepp(spec);
    case PhantomKind::DiscOnBackground:
      return disc(spec);
    case PhantomKind::SmoothRandomField:
      return smooth_field(spec);
  }
  throw std::invalid_argument("unknown phantom kind");
}

}  // namespace patchpnp
